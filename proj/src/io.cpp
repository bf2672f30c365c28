#include "clipstate/io.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace clipstate::io {

using nlohmann::json;
using nlohmann::ordered_json;

double round_sig9(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::strtod(buf, nullptr);
}

namespace {

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json parse(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports the 1-based byte index of the offending character
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(fmt::format("parse error at line {}, column {}: {}", line, col, e.what()), line, col);
    }
}

// Field access with readable errors; nlohmann's own type_error messages do
// not name the document path.
const json& field(const json& obj, const char* key, std::string_view where) {
    if (!obj.is_object()) throw ValidationError(fmt::format("{}: expected an object", where));
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(fmt::format("{}: missing field '{}'", where, key));
    return *it;
}

double real(const json& v, std::string_view where) {
    if (!v.is_number()) throw ValidationError(fmt::format("{}: expected a number", where));
    return v.get<double>();
}

long long integer(const json& v, std::string_view where) {
    if (!v.is_number_integer()) throw ValidationError(fmt::format("{}: expected an integer", where));
    return v.get<long long>();
}

std::string string(const json& v, std::string_view where) {
    if (!v.is_string()) throw ValidationError(fmt::format("{}: expected a string", where));
    return v.get<std::string>();
}

void check_version(const json& doc, std::string_view kind) {
    const long long v = integer(field(doc, "format_version", kind), fmt::format("{}.format_version", kind));
    if (v != kFormatVersion) {
        throw ValidationError(fmt::format("{}: unsupported format_version {} (expected {})", kind, v, kFormatVersion));
    }
}

std::size_t positive_dim(const json& doc, std::string_view kind) {
    const long long d = integer(field(doc, "dim", kind), fmt::format("{}.dim", kind));
    if (d < 1) throw ValidationError(fmt::format("{}: dim must be positive, got {}", kind, d));
    return static_cast<std::size_t>(d);
}

ordered_json vector_json(std::span<const double> v) {
    ordered_json arr = ordered_json::array();
    for (double x : v) arr.push_back(round_sig9(x));
    return arr;
}

EmbeddingVector embedding(const json& v, std::size_t dim, std::string_view where) {
    if (!v.is_array()) throw ValidationError(fmt::format("{}: embedding must be an array", where));
    if (v.size() != dim) {
        throw ValidationError(fmt::format("{}: embedding length {} != dim {}", where, v.size(), dim));
    }
    std::vector<double> values;
    values.reserve(dim);
    for (const auto& x : v) values.push_back(real(x, where));
    try {
        return EmbeddingVector(std::move(values));
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", where, e.what()));
    }
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

ordered_json prompts_array(const PromptSet& ps) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : ps.prompts()) {
        ordered_json item;
        item["text"] = p.text;
        item["polarity"] = sign(p.polarity);
        item["embedding"] = vector_json(p.embedding.values());
        arr.push_back(std::move(item));
    }
    return arr;
}

}  // namespace

std::string dataset_to_string(const LabeledDataset& d) {
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["dim"] = d.dim();
    ordered_json items = ordered_json::array();
    for (const auto& it : d.items()) {
        ordered_json item;
        item["id"] = it.id;
        item["label"] = sign(it.label);
        item["embedding"] = vector_json(it.embedding.values());
        items.push_back(std::move(item));
    }
    doc["items"] = std::move(items);
    return dump(doc);
}

LabeledDataset dataset_from_string(std::string_view text) {
    const json doc = parse(text);
    check_version(doc, "dataset");
    const std::size_t dim = positive_dim(doc, "dataset");
    const json& items = field(doc, "items", "dataset");
    if (!items.is_array()) throw ValidationError("dataset: items must be an array");
    std::vector<DatasetItem> out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        const json& it = items[k];
        const std::string where = fmt::format("dataset item {}", k);
        std::string id = string(field(it, "id", where), where + ".id");
        const std::string named = fmt::format("dataset item '{}'", id);
        Label label;
        try {
            label = label_from_int(integer(field(it, "label", named), named + ".label"));
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("{}: {}", named, e.what()));
        }
        out.push_back({std::move(id), label, embedding(field(it, "embedding", named), dim, named)});
    }
    return LabeledDataset(dim, std::move(out));
}

std::string prompts_to_string(const PromptSet& ps) {
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["dim"] = ps.dim();
    doc["prompts"] = prompts_array(ps);
    return dump(doc);
}

namespace {

PromptSet prompt_set_from(const json& arr, std::size_t dim, std::string_view kind) {
    if (!arr.is_array()) throw ValidationError(fmt::format("{}: prompts must be an array", kind));
    std::vector<Prompt> out;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const json& p = arr[k];
        const std::string where = fmt::format("{} prompt {}", kind, k);
        std::string text = string(field(p, "text", where), where + ".text");
        const std::string named = fmt::format("prompt '{}'", text);
        Label polarity;
        try {
            polarity = label_from_int(integer(field(p, "polarity", named), named + ".polarity"));
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("{}: {}", named, e.what()));
        }
        out.push_back({std::move(text), polarity, embedding(field(p, "embedding", named), dim, named)});
    }
    return PromptSet(dim, std::move(out));
}

}  // namespace

PromptSet prompts_from_string(std::string_view text) {
    const json doc = parse(text);
    check_version(doc, "prompts");
    const std::size_t dim = positive_dim(doc, "prompts");
    return prompt_set_from(field(doc, "prompts", "prompts"), dim, "prompts");
}

std::string recognizer_to_string(const Recognizer& r) {
    r.validate();
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["prompts"] = r.prompt_texts;
    doc["weights"] = vector_json(r.weights.values());
    doc["threshold"] = round_sig9(r.threshold);
    doc["objective"] = std::string(file_tag(r.kind));
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : r.metadata) meta[k] = v;
    if (r.prompts) {
        meta["dim"] = r.prompts->dim();
        meta["prompt_polarities"] = ordered_json::array();
        meta["prompt_embeddings"] = ordered_json::array();
        for (const auto& p : r.prompts->prompts()) {
            meta["prompt_polarities"].push_back(sign(p.polarity));
            meta["prompt_embeddings"].push_back(vector_json(p.embedding.values()));
        }
    }
    doc["metadata"] = std::move(meta);
    return dump(doc);
}

Recognizer recognizer_from_string(std::string_view text) {
    const json doc = parse(text);
    check_version(doc, "recognizer");
    Recognizer r;
    const json& prompts = field(doc, "prompts", "recognizer");
    if (!prompts.is_array()) throw ValidationError("recognizer: prompts must be an array of strings");
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        r.prompt_texts.push_back(string(prompts[i], fmt::format("recognizer.prompts[{}]", i)));
    }
    const json& weights = field(doc, "weights", "recognizer");
    if (!weights.is_array()) throw ValidationError("recognizer: weights must be an array");
    std::vector<double> w;
    for (std::size_t i = 0; i < weights.size(); ++i) w.push_back(real(weights[i], fmt::format("recognizer.weights[{}]", i)));
    r.weights = WeightVector(std::move(w));
    r.threshold = real(field(doc, "threshold", "recognizer"), "recognizer.threshold");
    r.kind = recognizer_kind_from_tag(string(field(doc, "objective", "recognizer"), "recognizer.objective"));

    const json& meta = field(doc, "metadata", "recognizer");
    if (!meta.is_object()) throw ValidationError("recognizer: metadata must be an object");
    for (auto it = meta.begin(); it != meta.end(); ++it) {
        const auto& key = it.key();
        if (key == "dim" || key == "prompt_polarities" || key == "prompt_embeddings") continue;
        r.metadata[key] = it->is_string() ? it->get<std::string>() : it->dump();
    }
    if (meta.contains("prompt_embeddings")) {
        const std::size_t dim = positive_dim(meta, "recognizer.metadata");
        const json& embs = meta["prompt_embeddings"];
        const json& pols = field(meta, "prompt_polarities", "recognizer.metadata");
        if (!embs.is_array() || !pols.is_array() || embs.size() != r.prompt_texts.size() ||
            pols.size() != r.prompt_texts.size()) {
            throw ValidationError("recognizer.metadata: prompt embeddings/polarities must match the prompt list");
        }
        json arr = json::array();
        for (std::size_t i = 0; i < embs.size(); ++i) {
            arr.push_back({{"text", r.prompt_texts[i]}, {"polarity", pols[i]}, {"embedding", embs[i]}});
        }
        r.prompts = prompt_set_from(arr, dim, "recognizer");
    }
    r.validate();
    return r;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError(fmt::format("cannot write '{}'", tmp.string()));
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw ValidationError(fmt::format("short write to '{}'", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

namespace {

template <typename F>
auto with_path(const std::filesystem::path& path, F&& f) {
    try {
        return f(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line(), e.column());
    } catch (const TransportError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace

LabeledDataset load_dataset(const std::filesystem::path& path) {
    return with_path(path, [](const std::string& s) { return dataset_from_string(s); });
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& d) {
    write_file(path, dataset_to_string(d));
}

PromptSet load_prompts(const std::filesystem::path& path) {
    return with_path(path, [](const std::string& s) { return prompts_from_string(s); });
}

void save_prompts(const std::filesystem::path& path, const PromptSet& ps) { write_file(path, prompts_to_string(ps)); }

Recognizer load_recognizer(const std::filesystem::path& path) {
    return with_path(path, [](const std::string& s) { return recognizer_from_string(s); });
}

void save_recognizer(const std::filesystem::path& path, const Recognizer& r) {
    write_file(path, recognizer_to_string(r));
}

EmbeddingVector embedding_from_string(std::string_view text) {
    const json doc = parse(text);
    if (!doc.is_array()) throw ValidationError("embedding must be a JSON array of numbers");
    return embedding(doc, doc.size(), "embedding");
}

}  // namespace clipstate::io
