#include "clipstate/objectives.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace clipstate {

std::string_view to_string(ObjectiveKind kind) {
    switch (kind) {
    case ObjectiveKind::E1: return "E1";
    case ObjectiveKind::E2: return "E2";
    case ObjectiveKind::E3: return "E3";
    }
    return "?";
}

ObjectiveKind objective_kind_from_string(std::string_view s) {
    if (s == "E1" || s == "e1") return ObjectiveKind::E1;
    if (s == "E2" || s == "e2") return ObjectiveKind::E2;
    if (s == "E3" || s == "e3") return ObjectiveKind::E3;
    throw ValidationError(fmt::format("unknown objective '{}'", s));
}

void ObjectiveConfig::validate() const {
    if (!(alpha2 >= 0.0) || !std::isfinite(alpha2)) throw ValidationError("alpha2 must be finite and >= 0");
    if (!(alpha3 >= 0.0) || !std::isfinite(alpha3)) throw ValidationError("alpha3 must be finite and >= 0");
    if (!(sigma_floor > 0.0)) throw ValidationError("sigma_floor must be > 0");
}

bool ObjectiveValue::degenerate() const noexcept {
    return fitness == -std::numeric_limits<double>::infinity();
}

namespace {

void require_same_length(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.size() != labels.size()) {
        throw ValidationError(fmt::format("score count {} != label count {}", scores.size(), labels.size()));
    }
}

struct ClassMargins {
    double sum_pos = 0.0;
    double sum_neg = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

ClassMargins class_margins(std::span<const double> scores, std::span<const Label> labels, double threshold) {
    ClassMargins cm;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        const double margin = scores[t] - threshold;
        if (labels[t] == Label::Positive) {
            cm.sum_pos += margin;
            ++cm.n_pos;
        } else {
            cm.sum_neg += margin;
            ++cm.n_neg;
        }
    }
    return cm;
}

double population_std(std::span<const double> scores, std::span<const Label> labels, double threshold, Label cls,
                      std::size_t n) {
    double mean = 0.0;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (labels[t] == cls) mean += scores[t] - threshold;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (labels[t] != cls) continue;
        const double d = scores[t] - threshold - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace

long long accuracy_e1(std::span<const double> scores, std::span<const Label> labels, double threshold) {
    require_same_length(scores, labels);
    long long correct = 0;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (sign(labels[t]) * (scores[t] - threshold) > 0.0) ++correct;
    }
    return correct;
}

ObjectiveValue objective_e2(std::span<const double> scores, std::span<const Label> labels, double threshold,
                            const ObjectiveConfig& cfg) {
    require_same_length(scores, labels);
    const auto cm = class_margins(scores, labels, threshold);
    if (cm.n_pos == 0 || cm.n_neg == 0) throw ValidationError("E2 needs at least one item of each label");
    ObjectiveValue v;
    v.threshold = threshold;
    v.e1 = accuracy_e1(scores, labels, threshold);
    v.mu1 = cm.sum_pos;
    v.mu_neg1 = cm.sum_neg;
    v.mu = v.mu1 - v.mu_neg1;
    v.fitness = static_cast<double>(v.e1) + cfg.alpha2 * v.mu;
    return v;
}

ObjectiveValue objective_e3(std::span<const double> scores, std::span<const Label> labels, double threshold,
                            const ObjectiveConfig& cfg) {
    require_same_length(scores, labels);
    const auto cm = class_margins(scores, labels, threshold);
    if (cm.n_pos < 2 || cm.n_neg < 2) throw ValidationError("E3 needs at least two items of each label");
    ObjectiveValue v;
    v.threshold = threshold;
    v.e1 = accuracy_e1(scores, labels, threshold);
    v.mu1 = cm.sum_pos;
    v.mu_neg1 = cm.sum_neg;
    v.mu = v.mu1 - v.mu_neg1;
    v.sigma1 = population_std(scores, labels, threshold, Label::Positive, cm.n_pos);
    v.sigma_neg1 = population_std(scores, labels, threshold, Label::Negative, cm.n_neg);
    v.sigma = v.sigma1 * v.sigma_neg1;
    v.fitness = static_cast<double>(v.e1) + cfg.alpha3 * v.mu / std::max(v.sigma, cfg.sigma_floor);
    return v;
}

ObjectiveValue evaluate_objective(const WeightVector& w, const SimilarityMatrix& m, std::span<const Label> labels,
                                  const ObjectiveConfig& cfg) {
    if (m.rows() != labels.size()) {
        throw ValidationError(fmt::format("matrix rows {} != label count {}", m.rows(), labels.size()));
    }
    if (w.degenerate()) {
        ObjectiveValue v;
        v.fitness = -std::numeric_limits<double>::infinity();
        return v;
    }
    const ScoreVector e = weighted_score(m, w);
    const double c = calc_cthre(e, labels);
    switch (cfg.kind) {
    case ObjectiveKind::E1: {
        ObjectiveValue v;
        v.threshold = c;
        v.e1 = accuracy_e1(e, labels, c);
        v.fitness = static_cast<double>(v.e1);
        return v;
    }
    case ObjectiveKind::E2: return objective_e2(e, labels, c, cfg);
    case ObjectiveKind::E3: return objective_e3(e, labels, c, cfg);
    }
    throw std::logic_error("unhandled objective kind");
}

}  // namespace clipstate
