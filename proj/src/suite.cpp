#include "clipstate/suite.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace clipstate {

std::string_view file_tag(RecognizerKind kind) {
    switch (kind) {
    case RecognizerKind::All: return "ALL";
    case RecognizerKind::One: return "ONE";
    case RecognizerKind::Opt1: return "E1";
    case RecognizerKind::Opt2: return "E2";
    case RecognizerKind::Opt3: return "E3";
    case RecognizerKind::Pairwise: return "PAIRWISE";
    }
    return "?";
}

RecognizerKind recognizer_kind_from_tag(std::string_view tag) {
    for (auto k : {RecognizerKind::All, RecognizerKind::One, RecognizerKind::Opt1, RecognizerKind::Opt2,
                   RecognizerKind::Opt3, RecognizerKind::Pairwise}) {
        if (file_tag(k) == tag) return k;
    }
    throw ValidationError(fmt::format("unknown recognizer objective '{}'", tag));
}

std::string_view method_name(RecognizerKind kind) {
    switch (kind) {
    case RecognizerKind::All: return "ALL";
    case RecognizerKind::One: return "ONE";
    case RecognizerKind::Opt1: return "OPT-1";
    case RecognizerKind::Opt2: return "OPT-2";
    case RecognizerKind::Opt3: return "OPT-3";
    case RecognizerKind::Pairwise: return "PAIRWISE";
    }
    return "?";
}

RecognizerKind opt_kind(ObjectiveKind objective) {
    switch (objective) {
    case ObjectiveKind::E1: return RecognizerKind::Opt1;
    case ObjectiveKind::E2: return RecognizerKind::Opt2;
    case ObjectiveKind::E3: return RecognizerKind::Opt3;
    }
    throw std::logic_error("unhandled objective kind");
}

void Recognizer::validate() const {
    if (prompt_texts.size() != weights.size()) {
        throw ValidationError(
            fmt::format("recognizer has {} prompts but {} weights", prompt_texts.size(), weights.size()));
    }
    if (weights.degenerate()) throw DegenerateWeightsError("recognizer weights sum to zero in absolute value");
    if (!std::isfinite(threshold)) throw ValidationError("recognizer threshold is not finite");
    if (kind == RecognizerKind::Pairwise && prompt_texts.size() != 2) {
        throw ValidationError("pairwise recognizer needs exactly two prompts");
    }
    if (prompts) check_prompt_consistency(*this, *prompts);
}

const PromptSet& Recognizer::embedded_prompts() const {
    if (!prompts) throw ValidationError("recognizer carries no prompt embeddings; supply a prompt set");
    return *prompts;
}

void check_prompt_consistency(const Recognizer& r, const PromptSet& ps) {
    const std::size_t n = std::min(r.prompt_texts.size(), ps.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (r.prompt_texts[i] != ps[i].text) {
            throw ValidationError(fmt::format("prompt mismatch at index {}: recognizer has '{}', prompt set has '{}'",
                                              i, r.prompt_texts[i], ps[i].text));
        }
    }
    if (r.prompt_texts.size() != ps.size()) {
        throw ValidationError(fmt::format("prompt mismatch at index {}: recognizer has {} prompts, prompt set has {}",
                                          n, r.prompt_texts.size(), ps.size()));
    }
}

namespace {

void require_both_classes(std::span<const Label> labels) {
    const bool pos = std::find(labels.begin(), labels.end(), Label::Positive) != labels.end();
    const bool neg = std::find(labels.begin(), labels.end(), Label::Negative) != labels.end();
    if (!pos || !neg) throw ValidationError("recognizer construction needs both labels present");
}

void require_shape(const PromptSet& ps, const SimilarityMatrix& m, std::span<const Label> labels) {
    if (m.cols() != ps.size()) {
        throw ValidationError(fmt::format("matrix has {} columns, prompt set has {}", m.cols(), ps.size()));
    }
    if (m.rows() != labels.size()) {
        throw ValidationError(fmt::format("matrix has {} rows, got {} labels", m.rows(), labels.size()));
    }
}

std::string num(double x) { return fmt::format("{:.9g}", x); }

Recognizer package(const PromptSet& ps, WeightVector w, double threshold, RecognizerKind kind) {
    Recognizer r;
    r.prompt_texts = ps.texts();
    r.weights = std::move(w);
    r.threshold = threshold;
    r.kind = kind;
    r.prompts = ps;
    r.metadata["threshold_rule"] = "calc_cthre on optimization set";
    return r;
}

}  // namespace

Decision recognize(const Recognizer& r, const EmbeddingVector& image, const PromptSet& ps) {
    check_prompt_consistency(r, ps);
    const auto row = similarity_row(image, ps);
    if (r.kind == RecognizerKind::Pairwise) {
        const auto d = softmax_pair_predict(row[0], row[1]);
        return {d.predicted, row[0] - row[1]};
    }
    const double e = weighted_score(row, r.weights);
    return {predict(e, r.threshold), e - r.threshold};
}

Recognizer build_all_recognizer(const PromptSet& ps, const SimilarityMatrix& m, std::span<const Label> labels) {
    require_shape(ps, m, labels);
    require_both_classes(labels);
    std::vector<double> w;
    for (const auto& p : ps.prompts()) w.push_back(static_cast<double>(sign(p.polarity)));
    WeightVector wv(std::move(w));
    const auto e = weighted_score(m, wv);
    const double c = calc_cthre(e, labels);
    auto r = package(ps, std::move(wv), c, RecognizerKind::All);
    r.metadata["e1"] = std::to_string(accuracy_e1(e, labels, c));
    r.metadata["optimization_items"] = std::to_string(labels.size());
    return r;
}

Recognizer build_one_recognizer(const PromptSet& ps, const SimilarityMatrix& m, std::span<const Label> labels,
                                const ObjectiveConfig& obj_cfg) {
    require_shape(ps, m, labels);
    require_both_classes(labels);
    obj_cfg.validate();
    std::optional<WeightVector> best_w;
    ObjectiveValue best;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> w(ps.size(), 0.0);
            w[i] = s;
            WeightVector wv(std::move(w));
            const auto v = evaluate_objective(wv, m, labels, obj_cfg);
            if (!best_w || v.fitness > best.fitness) {
                best = v;
                best_w = std::move(wv);
            }
        }
    }
    auto r = package(ps, std::move(*best_w), best.threshold, RecognizerKind::One);
    r.metadata["objective"] = std::string(to_string(obj_cfg.kind));
    r.metadata["fitness"] = num(best.fitness);
    r.metadata["e1"] = std::to_string(best.e1);
    r.metadata["optimization_items"] = std::to_string(labels.size());
    return r;
}

Recognizer build_opt_recognizer(const PromptSet& ps, const SimilarityMatrix& m, std::span<const Label> labels,
                                const ObjectiveConfig& obj_cfg, const GaConfig& ga_cfg) {
    require_shape(ps, m, labels);
    require_both_classes(labels);
    std::vector<Label> polarities;
    for (const auto& p : ps.prompts()) polarities.push_back(p.polarity);
    const auto seeds = default_seeds(polarities);
    const auto res = optimize_weights(m, labels, obj_cfg, ga_cfg, seeds);
    auto r = package(ps, WeightVector(res.best.genes), res.best_objective.threshold, opt_kind(obj_cfg.kind));
    r.metadata["objective"] = std::string(to_string(obj_cfg.kind));
    r.metadata["alpha2"] = num(obj_cfg.alpha2);
    r.metadata["alpha3"] = num(obj_cfg.alpha3);
    r.metadata["fitness"] = num(res.best_objective.fitness);
    r.metadata["e1"] = std::to_string(res.best_objective.e1);
    r.metadata["seed"] = std::to_string(ga_cfg.rng_seed);
    r.metadata["population"] = std::to_string(ga_cfg.population_size);
    r.metadata["generations"] = std::to_string(ga_cfg.generations);
    r.metadata["optimization_items"] = std::to_string(labels.size());
    return r;
}

Recognizer build_pairwise_recognizer(const PromptSet& ps, std::size_t positive_index, std::size_t negative_index) {
    if (positive_index >= ps.size() || negative_index >= ps.size() || positive_index == negative_index) {
        throw ValidationError("pairwise recognizer needs two distinct prompt indices");
    }
    PromptSet pair(ps.dim(), {ps[positive_index], ps[negative_index]});
    auto r = package(pair, WeightVector({1.0, -1.0}), 0.0, RecognizerKind::Pairwise);
    r.metadata["threshold_rule"] = "softmax s1 >= s2";
    return r;
}

long long count_correct(const Recognizer& r, const LabeledDataset& d, const PromptSet& ps) {
    check_prompt_consistency(r, ps);
    long long correct = 0;
    for (const auto& item : d.items()) {
        if (recognize(r, item.embedding, ps).label == item.label) ++correct;
    }
    return correct;
}

double evaluate_recognizer(const Recognizer& r, const LabeledDataset& d, const PromptSet& ps) {
    if (d.dim() != ps.dim()) {
        throw ValidationError(fmt::format("dataset dim {} != prompt set dim {}", d.dim(), ps.dim()));
    }
    return 100.0 * static_cast<double>(count_correct(r, d, ps)) / static_cast<double>(d.size());
}

const ReportRow& EvalReport::row(std::string_view method) const {
    for (const auto& r : rows) {
        if (r.method == method) return r;
    }
    throw ValidationError(fmt::format("report has no row '{}'", method));
}

std::vector<ObjectiveConfig> standard_objectives(double alpha2, double alpha3) {
    std::vector<ObjectiveConfig> cfgs;
    for (auto k : {ObjectiveKind::E1, ObjectiveKind::E2, ObjectiveKind::E3}) {
        ObjectiveConfig c;
        c.kind = k;
        c.alpha2 = alpha2;
        c.alpha3 = alpha3;
        cfgs.push_back(c);
    }
    return cfgs;
}

ExperimentResult run_experiment(const LabeledDataset& d_opt, const LabeledDataset& d_eval, const PromptSet& ps,
                                std::span<const ObjectiveConfig> obj_cfgs, const GaConfig& ga_cfg) {
    if (d_eval.dim() != ps.dim()) {
        throw ValidationError(fmt::format("evaluation dim {} != prompt set dim {}", d_eval.dim(), ps.dim()));
    }
    const auto m = similarity_matrix(d_opt, ps);
    const auto labels = d_opt.labels();

    ExperimentResult out;
    for (const auto& cfg : obj_cfgs) out.recognizers.push_back(build_opt_recognizer(ps, m, labels, cfg, ga_cfg));
    out.recognizers.push_back(build_all_recognizer(ps, m, labels));
    ObjectiveConfig one_cfg;
    if (!obj_cfgs.empty()) {
        one_cfg.alpha2 = obj_cfgs.front().alpha2;
        one_cfg.alpha3 = obj_cfgs.front().alpha3;
    }
    out.recognizers.push_back(build_one_recognizer(ps, m, labels, one_cfg));

    out.report.t_opt = d_opt.size();
    out.report.t_eval = d_eval.size();
    out.report.metadata["threshold_rule"] = "calc_cthre on optimization set for every method";
    out.report.metadata["seed"] = std::to_string(ga_cfg.rng_seed);
    for (const auto& r : out.recognizers) {
        out.report.rows.push_back({std::string(method_name(r.kind)), evaluate_recognizer(r, d_opt, ps),
                                   evaluate_recognizer(r, d_eval, ps)});
    }
    return out;
}

std::string format_percent(double pct) {
    const double rounded = std::round(pct * 10.0) / 10.0;
    if (rounded == std::round(rounded)) return fmt::format("{:.0f}", rounded);
    return fmt::format("{:.1f}", rounded);
}

std::string render_table(const EvalReport& report) {
    constexpr int kLabelWidth = 12;
    constexpr int kColWidth = 8;
    std::string out = fmt::format("{:<{}}", "", kLabelWidth);
    for (const auto& r : report.rows) out += fmt::format("{:>{}}", r.method, kColWidth);
    out += '\n';
    auto line = [&](std::string_view name, auto field) {
        out += fmt::format("{:<{}}", name, kLabelWidth);
        for (const auto& r : report.rows) out += fmt::format("{:>{}}", format_percent(r.*field), kColWidth);
        out += '\n';
    };
    line("R_opt [%]", &ReportRow::r_opt);
    line("R_eval [%]", &ReportRow::r_eval);
    out += fmt::format("T_opt = {}, T_eval = {}\n", report.t_opt, report.t_eval);
    return out;
}

std::string render_csv(const EvalReport& report) {
    std::string out = "method,R_opt,R_eval\n";
    for (const auto& r : report.rows) {
        out += fmt::format("{},{},{}\n", r.method, format_percent(r.r_opt), format_percent(r.r_eval));
    }
    return out;
}

std::vector<MarginEntry> margin_report(const Recognizer& r, const LabeledDataset& d, const PromptSet& ps) {
    check_prompt_consistency(r, ps);
    std::vector<MarginEntry> entries;
    entries.reserve(d.size());
    for (const auto& item : d.items()) {
        entries.push_back({item.id, item.label, recognize(r, item.embedding, ps).margin});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const MarginEntry& a, const MarginEntry& b) { return a.margin > b.margin; });
    return entries;
}

std::string render_margin_csv(std::span<const MarginEntry> entries) {
    std::string out = "id,label,margin\n";
    for (const auto& e : entries) out += fmt::format("{},{},{:.9g}\n", e.id, sign(e.label), e.margin);
    return out;
}

}  // namespace clipstate
