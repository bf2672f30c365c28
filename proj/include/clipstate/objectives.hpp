#pragma once

#include "clipstate/embedding.hpp"
#include "clipstate/recognition.hpp"

#include <span>
#include <string_view>

namespace clipstate {

enum class ObjectiveKind { E1, E2, E3 };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(std::string_view s);

struct ObjectiveConfig {
    ObjectiveKind kind = ObjectiveKind::E1;
    double alpha2 = 1.0;
    double alpha3 = 0.00001;
    double sigma_floor = 1e-12;

    void validate() const;
};

/// Fitness plus the quantities it was assembled from. Fields an objective
/// does not use stay zero.
struct ObjectiveValue {
    double fitness = 0.0;
    long long e1 = 0;
    double mu1 = 0.0;
    double mu_neg1 = 0.0;
    double mu = 0.0;
    double sigma1 = 0.0;
    double sigma_neg1 = 0.0;
    double sigma = 0.0;
    double threshold = 0.0;

    bool degenerate() const noexcept;

    friend bool operator==(const ObjectiveValue&, const ObjectiveValue&) = default;
};

/// Number of items with label * (score - threshold) > 0.
long long accuracy_e1(std::span<const double> scores, std::span<const Label> labels, double threshold);

/// E1 + alpha2 * (sum of positive-class margins - sum of negative-class margins).
ObjectiveValue objective_e2(std::span<const double> scores, std::span<const Label> labels, double threshold,
                            const ObjectiveConfig& cfg);

/// E1 + alpha3 * mu / max(sigma1 * sigma_neg1, sigma_floor), with class-wise
/// population standard deviations of the margins.
ObjectiveValue objective_e3(std::span<const double> scores, std::span<const Label> labels, double threshold,
                            const ObjectiveConfig& cfg);

/// Scores the matrix under w, places the optimal threshold, then applies the
/// configured objective. Degenerate weights yield fitness = -infinity.
ObjectiveValue evaluate_objective(const WeightVector& w, const SimilarityMatrix& m, std::span<const Label> labels,
                                  const ObjectiveConfig& cfg);

}  // namespace clipstate
