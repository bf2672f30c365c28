#pragma once

#include "clipstate/embedding.hpp"

#include <array>
#include <span>
#include <vector>

namespace clipstate {

/// Prompt weights, each in [-1, 1].
class WeightVector {
public:
    /// Smallest L1 norm accepted when normalizing ensemble scores.
    static constexpr double kMinL1 = 1e-9;

    WeightVector() = default;
    /// Rejects entries outside [-1, 1] or non-finite.
    explicit WeightVector(std::vector<double> w);

    std::size_t size() const noexcept { return w_.size(); }
    std::span<const double> values() const noexcept { return w_; }
    double operator[](std::size_t i) const { return w_[i]; }
    double l1_norm() const noexcept;
    bool degenerate() const noexcept { return l1_norm() < kMinL1; }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    std::vector<double> w_;
};

using ScoreVector = std::vector<double>;

/// Ensemble value of one similarity row: sum_i w_i a_i / sum_i |w_i|.
double weighted_score(std::span<const double> similarities, const WeightVector& w);

/// Row-wise ensemble scores. Throws DegenerateWeightsError when sum |w_i| < 1e-9.
ScoreVector weighted_score(const SimilarityMatrix& m, const WeightVector& w);

/// Sentinel offset used above the highest and below the lowest score.
double threshold_delta(std::span<const double> scores);

/// Threshold maximizing the number of correctly classified items.
///
/// Walks the items in descending score order keeping a running sum of
/// labels; the threshold moves to the gap below the current item whenever
/// the sum reaches a new (non-strict) maximum. The search starts from a
/// sentinel above the top score so that "everything negative" is always a
/// candidate, and uses a sentinel below the bottom score after the last
/// item. Only gaps between distinct scores are candidates, so tied scores
/// are never split.
double calc_cthre(std::span<const double> scores, std::span<const Label> labels);

/// +1 strictly above the threshold, -1 otherwise (ties go negative).
Label predict(double score, double threshold);

struct PairwiseDecision {
    std::array<double, 2> probabilities;
    Label predicted;
};

/// Two-prompt softmax baseline: positive when s1 >= s2.
PairwiseDecision softmax_pair_predict(double a1, double a2);

}  // namespace clipstate
