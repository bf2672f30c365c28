#include "clipstate/recognition.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace clipstate {

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]) || w_[i] < -1.0 || w_[i] > 1.0) {
            throw ValidationError(fmt::format("weight {} = {} outside [-1, 1]", i, w_[i]));
        }
    }
}

double WeightVector::l1_norm() const noexcept {
    double s = 0.0;
    for (double x : w_) s += std::abs(x);
    return s;
}

double weighted_score(std::span<const double> similarities, const WeightVector& w) {
    if (similarities.size() != w.size()) {
        throw ValidationError(fmt::format("weight count {} != prompt count {}", w.size(), similarities.size()));
    }
    const double l1 = w.l1_norm();
    if (l1 < WeightVector::kMinL1) throw DegenerateWeightsError("sum of |w_i| is below 1e-9");
    const auto wv = w.values();
    return std::inner_product(similarities.begin(), similarities.end(), wv.begin(), 0.0) / l1;
}

ScoreVector weighted_score(const SimilarityMatrix& m, const WeightVector& w) {
    if (m.cols() != w.size()) {
        throw ValidationError(fmt::format("weight count {} != prompt count {}", w.size(), m.cols()));
    }
    if (w.degenerate()) throw DegenerateWeightsError("sum of |w_i| is below 1e-9");
    ScoreVector e(m.rows());
    for (std::size_t t = 0; t < m.rows(); ++t) e[t] = weighted_score(m.row(t), w);
    return e;
}

double threshold_delta(std::span<const double> scores) {
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    return std::max(1e-6, 1e-6 * (*hi - *lo));
}

double calc_cthre(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.empty()) throw ValidationError("threshold search on empty input");
    if (scores.size() != labels.size()) {
        throw ValidationError(fmt::format("score count {} != label count {}", scores.size(), labels.size()));
    }
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double delta = threshold_delta(scores);
    long long b = 0;
    long long b_max = 0;
    double c_thre = scores[order.front()] + delta;
    for (std::size_t k = 0; k < n; ++k) {
        b += sign(labels[order[k]]);
        const bool last = k + 1 == n;
        const double hi = scores[order[k]];
        if (!last && !(scores[order[k + 1]] < hi)) continue;
        if (b >= b_max) {
            b_max = b;
            if (last) {
                c_thre = hi - delta;
            } else {
                const double lo = scores[order[k + 1]];
                const double mid = 0.5 * (hi + lo);
                // adjacent doubles: the midpoint may round up onto hi
                c_thre = mid < hi ? mid : lo;
            }
        }
    }
    return c_thre;
}

Label predict(double score, double threshold) {
    return score > threshold ? Label::Positive : Label::Negative;
}

PairwiseDecision softmax_pair_predict(double a1, double a2) {
    const double m = std::max(a1, a2);
    const double x1 = std::exp(a1 - m);
    const double x2 = std::exp(a2 - m);
    const double z = x1 + x2;
    PairwiseDecision d{{x1 / z, x2 / z}, Label::Negative};
    d.predicted = a1 >= a2 ? Label::Positive : Label::Negative;
    return d;
}

}  // namespace clipstate
