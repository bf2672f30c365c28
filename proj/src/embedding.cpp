#include "clipstate/embedding.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace clipstate {

Label label_from_int(long long value) {
    if (value == 1) return Label::Positive;
    if (value == -1) return Label::Negative;
    throw ValidationError(fmt::format("label must be +1 or -1, got {}", value));
}

double euclidean_norm(std::span<const double> v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

namespace {

void require_finite(std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw ValidationError(fmt::format("embedding component {} is not finite", i));
        }
    }
}

void scale(std::vector<double>& v, double norm) {
    for (auto& x : v) x /= norm;
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("embedding is empty");
    require_finite(values_);
    const double norm = euclidean_norm(values_);
    if (std::abs(norm - 1.0) > kIngestTolerance) {
        throw ValidationError(fmt::format("embedding norm {:.6g} deviates from 1 by more than {}", norm,
                                          kIngestTolerance));
    }
    // Already unit up to on-disk rounding: keep the values so that
    // load -> save is a fixed point.
    if (std::abs(norm - 1.0) > kRoundingSlack) scale(values_, norm);
}

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
    if (values.empty()) throw ValidationError("embedding is empty");
    require_finite(values);
    const double norm = euclidean_norm(values);
    if (!(norm > 0.0)) throw ValidationError("cannot normalize a zero vector");
    scale(values, norm);
    return EmbeddingVector(std::move(values));
}

LabeledDataset::LabeledDataset(std::size_t dim, std::vector<DatasetItem> items)
    : dim_(dim), items_(std::move(items)) {
    if (dim_ == 0) throw ValidationError("dataset dim must be positive");
    if (items_.empty()) throw ValidationError("dataset has no items");
    std::unordered_set<std::string> seen;
    for (const auto& item : items_) {
        if (item.embedding.dim() != dim_) {
            throw ValidationError(fmt::format("item '{}': embedding length {} != dataset dim {}", item.id,
                                              item.embedding.dim(), dim_));
        }
        if (!seen.insert(item.id).second) {
            throw ValidationError(fmt::format("item '{}': duplicate id", item.id));
        }
    }
}

std::vector<Label> LabeledDataset::labels() const {
    std::vector<Label> out;
    out.reserve(items_.size());
    for (const auto& item : items_) out.push_back(item.label);
    return out;
}

std::size_t LabeledDataset::count(Label l) const {
    return static_cast<std::size_t>(
        std::count_if(items_.begin(), items_.end(), [l](const DatasetItem& it) { return it.label == l; }));
}

PromptSet::PromptSet(std::size_t dim, std::vector<Prompt> prompts) : dim_(dim), prompts_(std::move(prompts)) {
    if (dim_ == 0) throw ValidationError("prompt set dim must be positive");
    if (prompts_.empty()) throw ValidationError("prompt set is empty");
    std::unordered_set<std::string> seen;
    for (const auto& p : prompts_) {
        if (p.embedding.dim() != dim_) {
            throw ValidationError(fmt::format("prompt '{}': embedding length {} != prompt set dim {}", p.text,
                                              p.embedding.dim(), dim_));
        }
        if (!seen.insert(p.text).second) {
            throw ValidationError(fmt::format("prompt '{}': duplicate text", p.text));
        }
    }
}

std::vector<std::string> PromptSet::texts() const {
    std::vector<std::string> out;
    out.reserve(prompts_.size());
    for (const auto& p : prompts_) out.push_back(p.text);
    return out;
}

SimilarityMatrix::SimilarityMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw ValidationError(fmt::format("similarity matrix storage {} != {} x {}", values_.size(), rows_, cols_));
    }
}

double cosine_similarity(const EmbeddingVector& v, const EmbeddingVector& p) {
    if (v.dim() != p.dim()) {
        throw ValidationError(fmt::format("dimension mismatch: {} vs {}", v.dim(), p.dim()));
    }
    const auto a = v.values();
    const auto b = p.values();
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<double> similarity_row(const EmbeddingVector& v, const PromptSet& ps) {
    std::vector<double> row;
    row.reserve(ps.size());
    for (const auto& p : ps.prompts()) row.push_back(cosine_similarity(v, p.embedding));
    return row;
}

SimilarityMatrix similarity_matrix(const LabeledDataset& d, const PromptSet& ps) {
    if (d.dim() != ps.dim()) {
        throw ValidationError(fmt::format("dataset dim {} != prompt set dim {}", d.dim(), ps.dim()));
    }
    std::vector<double> values;
    values.reserve(d.size() * ps.size());
    for (const auto& item : d.items()) {
        const auto row = similarity_row(item.embedding, ps);
        values.insert(values.end(), row.begin(), row.end());
    }
    return SimilarityMatrix(d.size(), ps.size(), std::move(values));
}

std::vector<std::string> expand_prompt_variants(std::string_view base) {
    if (base.empty()) throw ValidationError("prompt base phrase is empty");
    const char first = static_cast<char>(std::tolower(static_cast<unsigned char>(base.front())));
    const bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
    const std::string phrase(base);
    return {(vowel ? "an " : "a ") + phrase, "the " + phrase, "this " + phrase, "that " + phrase};
}

}  // namespace clipstate
