#pragma once

#include "clipstate/objectives.hpp"
#include "clipstate/recognition.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace clipstate {

using Rng = std::mt19937_64;

struct GaConfig {
    int population_size = 300;
    int generations = 300;
    double crossover_prob = 0.5;
    double mutation_prob = 0.2;
    double mutation_sigma = 0.5;
    double mutation_gene_prob = 0.2;
    double blend_alpha = 0.5;
    int tournament_size = 3;
    std::uint64_t rng_seed = 0;
    /// Threads used for fitness evaluation. Results do not depend on it.
    int workers = 1;

    void validate() const;
};

struct Individual {
    std::vector<double> genes;
    std::optional<double> fitness;
};

struct OptimizationResult {
    Individual best;
    ObjectiveValue best_objective;
    /// Best-so-far fitness after initialization and after every generation.
    std::vector<double> history;
    /// Best fitness present in each generation's population.
    std::vector<double> generation_best;
    std::size_t evaluations = 0;
};

/// Copies `seeds` into the first slots and samples the rest uniformly from [-1, 1]^n_p.
std::vector<Individual> init_population(int n, std::size_t n_p, std::span<const WeightVector> seeds, Rng& rng);

/// The ALL polarity vector followed by +e_i, -e_i for every prompt.
std::vector<WeightVector> default_seeds(std::span<const Label> polarities);

const Individual& tournament_select(std::span<const Individual> pop, int k, Rng& rng);

/// Blend crossover applied gene-wise, children clamped to [-1, 1]. Both
/// children lose their fitness.
void blend_crossover(Individual& x, Individual& y, double alpha, Rng& rng);

/// Adds N(0, sigma) noise to each gene with probability gene_prob, then clamps.
void gaussian_mutate(Individual& x, double sigma, double gene_prob, Rng& rng);

using GenerationObserver = std::function<void(int generation, std::span<const Individual> population)>;

/// Generational GA maximizing the objective, with a size-one hall of fame.
/// When `seeds` is empty the population is seeded with the 2 * N_P single
/// prompt unit vectors only.
OptimizationResult optimize_weights(const SimilarityMatrix& m, std::span<const Label> labels,
                                    const ObjectiveConfig& obj_cfg, const GaConfig& ga_cfg,
                                    std::span<const WeightVector> seeds = {},
                                    const GenerationObserver& observer = {});

struct GridSearchResult {
    WeightVector weights;
    ObjectiveValue objective;
    std::size_t evaluations = 0;
};

/// Exhaustive search over {-1, -1 + step, ..., 1}^N_P without the origin.
/// Limited to N_P <= 4.
GridSearchResult grid_search_oracle(const SimilarityMatrix& m, std::span<const Label> labels,
                                    const ObjectiveConfig& obj_cfg, double step);

}  // namespace clipstate
