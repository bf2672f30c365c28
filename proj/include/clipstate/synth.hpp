#pragma once

#include "clipstate/embedding.hpp"

#include <cstdint>

namespace clipstate {

/// Synthetic stand-in for encoder output.
///
/// Noise levels are per-coordinate standard deviations of isotropic
/// Gaussian noise added to a unit class center before re-normalization, so
/// the noise projected onto any fixed unit direction has that standard
/// deviation regardless of `dim`.
struct SynthConfig {
    int dim = 512;
    int n_per_class_opt = 10;
    int n_per_class_eval = 10;
    int n_prompts_per_polarity = 4;
    int n_distractor_prompts = 0;
    double image_noise = 0.0;
    double prompt_noise = 0.0;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct SynthData {
    LabeledDataset d_opt;
    LabeledDataset d_eval;
    PromptSet prompts;
};

/// Two nearly antipodal class centers; images and polarity prompts are
/// noisy copies of their center, distractor prompts are random directions
/// with alternating polarity tags (+1 first).
SynthData generate_synthetic(const SynthConfig& cfg);

}  // namespace clipstate
