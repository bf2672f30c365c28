#include "clipstate/synth.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace clipstate {

void SynthConfig::validate() const {
    if (dim < 2) throw ValidationError("synthetic dim must be >= 2");
    if (n_per_class_opt < 1 || n_per_class_eval < 1) throw ValidationError("class sizes must be >= 1");
    if (n_prompts_per_polarity < 1) throw ValidationError("need at least one prompt per polarity");
    if (n_distractor_prompts < 0) throw ValidationError("distractor count must be >= 0");
    if (!std::isfinite(image_noise) || image_noise < 0.0) throw ValidationError("image_noise must be finite, >= 0");
    if (!std::isfinite(prompt_noise) || prompt_noise < 0.0) throw ValidationError("prompt_noise must be finite, >= 0");
}

namespace {

class Sampler {
public:
    Sampler(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

    std::vector<double> gaussian() {
        std::vector<double> v(dim_);
        for (auto& x : v) x = normal_(rng_);
        return v;
    }

    EmbeddingVector unit() { return EmbeddingVector::normalized(gaussian()); }

    EmbeddingVector around(const EmbeddingVector& center, double noise) {
        auto v = gaussian();
        for (std::size_t i = 0; i < dim_; ++i) v[i] = center[i] + noise * v[i];
        return EmbeddingVector::normalized(std::move(v));
    }

private:
    std::size_t dim_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Small tilt keeps the negative center off the exact antipode.
constexpr double kCenterTilt = 0.2;

LabeledDataset make_split(Sampler& s, const EmbeddingVector& pos, const EmbeddingVector& neg, int per_class,
                          double noise, const char* prefix, std::size_t dim) {
    std::vector<DatasetItem> items;
    int k = 0;
    for (Label l : {Label::Positive, Label::Negative}) {
        for (int i = 0; i < per_class; ++i) {
            items.push_back({fmt::format("{}-{:03d}", prefix, k++), l, s.around(l == Label::Positive ? pos : neg, noise)});
        }
    }
    return LabeledDataset(dim, std::move(items));
}

}  // namespace

SynthData generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const auto dim = static_cast<std::size_t>(cfg.dim);
    Sampler s(dim, cfg.rng_seed);

    const EmbeddingVector pos = s.unit();
    const EmbeddingVector tilt = s.unit();
    std::vector<double> raw(dim);
    for (std::size_t i = 0; i < dim; ++i) raw[i] = -pos[i] + kCenterTilt * tilt[i];
    const EmbeddingVector neg = EmbeddingVector::normalized(std::move(raw));

    auto d_opt = make_split(s, pos, neg, cfg.n_per_class_opt, cfg.image_noise, "opt", dim);
    auto d_eval = make_split(s, pos, neg, cfg.n_per_class_eval, cfg.image_noise, "eval", dim);

    std::vector<Prompt> prompts;
    for (int i = 0; i < cfg.n_prompts_per_polarity; ++i) {
        prompts.push_back({fmt::format("positive state prompt {}", i), Label::Positive, s.around(pos, cfg.prompt_noise)});
        prompts.push_back({fmt::format("negative state prompt {}", i), Label::Negative, s.around(neg, cfg.prompt_noise)});
    }
    for (int i = 0; i < cfg.n_distractor_prompts; ++i) {
        prompts.push_back({fmt::format("distractor prompt {}", i), i % 2 == 0 ? Label::Positive : Label::Negative,
                           s.unit()});
    }
    return {std::move(d_opt), std::move(d_eval), PromptSet(dim, std::move(prompts))};
}

}  // namespace clipstate
