#pragma once

#include "clipstate/embedding.hpp"
#include "clipstate/objectives.hpp"
#include "clipstate/optimizer.hpp"
#include "clipstate/recognition.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clipstate {

enum class RecognizerKind { All, One, Opt1, Opt2, Opt3, Pairwise };

/// Tag as written in recognizer files: "ALL", "ONE", "E1", "E2", "E3", "PAIRWISE".
std::string_view file_tag(RecognizerKind kind);
RecognizerKind recognizer_kind_from_tag(std::string_view tag);
/// Row label used in experiment reports: "OPT-1", ..., "ALL", "ONE".
std::string_view method_name(RecognizerKind kind);
RecognizerKind opt_kind(ObjectiveKind objective);

/// Deployable unit: prompt texts, their weights and the decision threshold.
///
/// `prompt_embeddings`, when present, pins the vectors the recognizer was
/// built with so it can be evaluated without the original prompt file.
struct Recognizer {
    std::vector<std::string> prompt_texts;
    WeightVector weights;
    double threshold = 0.0;
    RecognizerKind kind = RecognizerKind::All;
    std::map<std::string, std::string> metadata;
    std::optional<PromptSet> prompts;

    /// Checks weight count and that the weights are usable for scoring.
    void validate() const;
    /// The embedded prompt set, or a ValidationError if absent.
    const PromptSet& embedded_prompts() const;

    friend bool operator==(const Recognizer&, const Recognizer&) = default;
};

struct Decision {
    Label label;
    /// Ensemble score minus threshold; for PAIRWISE, a1 - a2.
    double margin;
};

/// Classifies a single image embedding.
Decision recognize(const Recognizer& r, const EmbeddingVector& image, const PromptSet& ps);

Recognizer build_all_recognizer(const PromptSet& ps, const SimilarityMatrix& m, std::span<const Label> labels);

/// Best single prompt (either sign) under the objective. Ties keep the
/// lowest prompt index, positive sign first.
Recognizer build_one_recognizer(const PromptSet& ps, const SimilarityMatrix& m, std::span<const Label> labels,
                                const ObjectiveConfig& obj_cfg);

Recognizer build_opt_recognizer(const PromptSet& ps, const SimilarityMatrix& m, std::span<const Label> labels,
                                const ObjectiveConfig& obj_cfg, const GaConfig& ga_cfg);

/// Softmax baseline on two prompts: positive when s(positive) >= s(negative).
Recognizer build_pairwise_recognizer(const PromptSet& ps, std::size_t positive_index, std::size_t negative_index);

/// Throws ValidationError naming the first index where r's prompt texts diverge from ps.
void check_prompt_consistency(const Recognizer& r, const PromptSet& ps);

/// Percentage of correctly recognized items, 100 * correct / T.
double evaluate_recognizer(const Recognizer& r, const LabeledDataset& d, const PromptSet& ps);
long long count_correct(const Recognizer& r, const LabeledDataset& d, const PromptSet& ps);

struct ReportRow {
    std::string method;
    double r_opt = 0.0;
    double r_eval = 0.0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
    std::vector<ReportRow> rows;
    std::size_t t_opt = 0;
    std::size_t t_eval = 0;
    std::map<std::string, std::string> metadata;

    const ReportRow& row(std::string_view method) const;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct ExperimentResult {
    EvalReport report;
    /// Built recognizers in report row order.
    std::vector<Recognizer> recognizers;
};

/// Builds OPT-1/2/3 (one per objective config, in order), ALL and ONE on
/// d_opt, and evaluates each on d_opt and d_eval. ONE is selected under the
/// E1 objective.
ExperimentResult run_experiment(const LabeledDataset& d_opt, const LabeledDataset& d_eval, const PromptSet& ps,
                                std::span<const ObjectiveConfig> obj_cfgs, const GaConfig& ga_cfg);

/// Default objective triple: E1, E2, E3 with the given constants.
std::vector<ObjectiveConfig> standard_objectives(double alpha2 = 1.0, double alpha3 = 0.00001);

/// Percentage formatted as an integer when whole, else one decimal.
std::string format_percent(double pct);

/// Methods as columns, R_opt / R_eval as rows.
std::string render_table(const EvalReport& report);
/// Header `method,R_opt,R_eval`.
std::string render_csv(const EvalReport& report);

struct MarginEntry {
    std::string id;
    Label label;
    double margin;
};

/// Items sorted by margin, largest first. Ties keep dataset order.
std::vector<MarginEntry> margin_report(const Recognizer& r, const LabeledDataset& d, const PromptSet& ps);

/// Header `id,label,margin`.
std::string render_margin_csv(std::span<const MarginEntry> entries);

}  // namespace clipstate
