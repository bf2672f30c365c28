#include "clipstate/optimizer.hpp"

#include "clipstate/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace clipstate {

void GaConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(fmt::format("{} must be in [0, 1]", name));
    };
    if (population_size < 2) throw ValidationError("population_size must be >= 2");
    if (generations < 0) throw ValidationError("generations must be >= 0");
    prob(crossover_prob, "crossover_prob");
    prob(mutation_prob, "mutation_prob");
    prob(mutation_gene_prob, "mutation_gene_prob");
    if (!(mutation_sigma >= 0.0)) throw ValidationError("mutation_sigma must be >= 0");
    if (!(blend_alpha >= 0.0)) throw ValidationError("blend_alpha must be >= 0");
    if (tournament_size < 1) throw ValidationError("tournament_size must be >= 1");
    if (workers < 1) throw ValidationError("workers must be >= 1");
}

namespace {

double clamp_gene(double g) { return std::clamp(g, -1.0, 1.0); }

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::vector<WeightVector> unit_seeds(std::size_t n_p) {
    std::vector<WeightVector> seeds;
    for (std::size_t i = 0; i < n_p; ++i) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> w(n_p, 0.0);
            w[i] = s;
            seeds.emplace_back(std::move(w));
        }
    }
    return seeds;
}

double fitness_of(const std::vector<double>& genes, const SimilarityMatrix& m, std::span<const Label> labels,
                  const ObjectiveConfig& cfg) {
    return evaluate_objective(WeightVector(genes), m, labels, cfg).fitness;
}

/// Fills in missing fitness values. Each slot is written by exactly one
/// worker and no randomness is consumed, so the result is independent of
/// the worker count.
std::size_t evaluate_missing(std::vector<Individual>& pop, const SimilarityMatrix& m, std::span<const Label> labels,
                             const ObjectiveConfig& cfg, int workers) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (!pop[i].fitness) todo.push_back(i);
    }
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), todo.size());
    if (n_threads <= 1) {
        for (std::size_t i : todo) pop[i].fitness = fitness_of(pop[i].genes, m, labels, cfg);
        return todo.size();
    }
    std::vector<std::exception_ptr> errors(n_threads);
    {
        std::vector<std::jthread> threads;
        threads.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) {
            threads.emplace_back([&, w] {
                try {
                    for (std::size_t k = w; k < todo.size(); k += n_threads) {
                        auto& ind = pop[todo[k]];
                        ind.fitness = fitness_of(ind.genes, m, labels, cfg);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return todo.size();
}

}  // namespace

std::vector<WeightVector> default_seeds(std::span<const Label> polarities) {
    std::vector<double> all;
    all.reserve(polarities.size());
    for (Label l : polarities) all.push_back(static_cast<double>(sign(l)));
    std::vector<WeightVector> seeds{WeightVector(std::move(all))};
    auto units = unit_seeds(polarities.size());
    seeds.insert(seeds.end(), std::make_move_iterator(units.begin()), std::make_move_iterator(units.end()));
    return seeds;
}

std::vector<Individual> init_population(int n, std::size_t n_p, std::span<const WeightVector> seeds, Rng& rng) {
    if (n < 1) throw ValidationError("population size must be >= 1");
    if (n_p < 1) throw ValidationError("individuals need at least one gene");
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(n));
    for (const auto& s : seeds) {
        if (pop.size() == static_cast<std::size_t>(n)) break;
        if (s.size() != n_p) {
            throw ValidationError(fmt::format("seed has {} genes, expected {}", s.size(), n_p));
        }
        pop.push_back({std::vector<double>(s.values().begin(), s.values().end()), std::nullopt});
    }
    std::uniform_real_distribution<double> gene(-1.0, 1.0);
    while (pop.size() < static_cast<std::size_t>(n)) {
        Individual ind;
        ind.genes.resize(n_p);
        for (auto& g : ind.genes) g = gene(rng);
        pop.push_back(std::move(ind));
    }
    return pop;
}

const Individual& tournament_select(std::span<const Individual> pop, int k, Rng& rng) {
    if (pop.empty()) throw ValidationError("tournament on an empty population");
    if (k < 1) throw ValidationError("tournament size must be >= 1");
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Individual* best = nullptr;
    for (int i = 0; i < k; ++i) {
        const Individual& cand = pop[pick(rng)];
        if (!cand.fitness) throw ValidationError("tournament over an unevaluated individual");
        if (best == nullptr || *cand.fitness > *best->fitness) best = &cand;
    }
    return *best;
}

void blend_crossover(Individual& x, Individual& y, double alpha, Rng& rng) {
    if (x.genes.size() != y.genes.size()) {
        throw ValidationError(fmt::format("crossover of {} and {} genes", x.genes.size(), y.genes.size()));
    }
    for (std::size_t i = 0; i < x.genes.size(); ++i) {
        const double gamma = (1.0 + 2.0 * alpha) * uniform01(rng) - alpha;
        const double a = x.genes[i];
        const double b = y.genes[i];
        x.genes[i] = clamp_gene((1.0 - gamma) * a + gamma * b);
        y.genes[i] = clamp_gene(gamma * a + (1.0 - gamma) * b);
    }
    x.fitness.reset();
    y.fitness.reset();
}

void gaussian_mutate(Individual& x, double sigma, double gene_prob, Rng& rng) {
    if (!(sigma >= 0.0)) throw ValidationError("mutation sigma must be >= 0");
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& g : x.genes) {
        if (uniform01(rng) < gene_prob) g = clamp_gene(g + noise(rng));
    }
    x.fitness.reset();
}

OptimizationResult optimize_weights(const SimilarityMatrix& m, std::span<const Label> labels,
                                    const ObjectiveConfig& obj_cfg, const GaConfig& ga_cfg,
                                    std::span<const WeightVector> seeds, const GenerationObserver& observer) {
    obj_cfg.validate();
    ga_cfg.validate();
    if (m.rows() != labels.size()) {
        throw ValidationError(fmt::format("matrix rows {} != label count {}", m.rows(), labels.size()));
    }
    const bool has_pos = std::find(labels.begin(), labels.end(), Label::Positive) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), Label::Negative) != labels.end();
    if (!has_pos || !has_neg) throw ValidationError("optimization needs both labels present");

    std::vector<WeightVector> fallback;
    if (seeds.empty()) {
        fallback = unit_seeds(m.cols());
        seeds = fallback;
    }

    Rng rng(ga_cfg.rng_seed);
    OptimizationResult result;
    auto pop = init_population(ga_cfg.population_size, m.cols(), seeds, rng);
    result.evaluations += evaluate_missing(pop, m, labels, obj_cfg, ga_cfg.workers);

    bool have_best = false;
    auto record = [&](int generation) {
        double gen_best = -std::numeric_limits<double>::infinity();
        for (const auto& ind : pop) {
            gen_best = std::max(gen_best, *ind.fitness);
            if (!have_best || *ind.fitness > *result.best.fitness) {
                result.best = ind;
                have_best = true;
            }
        }
        result.generation_best.push_back(gen_best);
        result.history.push_back(*result.best.fitness);
        if (observer) observer(generation, pop);
    };
    record(0);

    const std::size_t n = pop.size();
    std::vector<Individual> offspring;
    offspring.reserve(n);
    for (int gen = 1; gen <= ga_cfg.generations; ++gen) {
        offspring.clear();
        for (std::size_t i = 0; i < n; ++i) offspring.push_back(tournament_select(pop, ga_cfg.tournament_size, rng));
        for (std::size_t i = 1; i < n; i += 2) {
            if (uniform01(rng) < ga_cfg.crossover_prob) {
                blend_crossover(offspring[i - 1], offspring[i], ga_cfg.blend_alpha, rng);
            }
        }
        for (auto& ind : offspring) {
            if (uniform01(rng) < ga_cfg.mutation_prob) {
                gaussian_mutate(ind, ga_cfg.mutation_sigma, ga_cfg.mutation_gene_prob, rng);
            }
        }
        result.evaluations += evaluate_missing(offspring, m, labels, obj_cfg, ga_cfg.workers);
        pop.swap(offspring);
        record(gen);
    }

    result.best_objective = evaluate_objective(WeightVector(result.best.genes), m, labels, obj_cfg);
    return result;
}

GridSearchResult grid_search_oracle(const SimilarityMatrix& m, std::span<const Label> labels,
                                    const ObjectiveConfig& obj_cfg, double step) {
    const std::size_t n_p = m.cols();
    if (n_p == 0) throw ValidationError("grid search needs at least one prompt");
    if (n_p > 4) throw ValidationError(fmt::format("grid search limited to 4 prompts, got {}", n_p));
    if (!(step > 0.0) || step > 2.0) throw ValidationError("grid step must be in (0, 2]");
    obj_cfg.validate();

    const auto steps = static_cast<std::size_t>(std::floor(2.0 / step + 1e-9));
    std::vector<double> axis;
    for (std::size_t k = 0; k <= steps; ++k) {
        double v = -1.0 + static_cast<double>(k) * step;
        if (std::abs(v) < 1e-12) v = 0.0;
        axis.push_back(std::min(v, 1.0));
    }

    GridSearchResult best;
    bool have_best = false;
    std::vector<std::size_t> idx(n_p, 0);
    std::vector<double> w(n_p);
    while (true) {
        bool all_zero = true;
        for (std::size_t i = 0; i < n_p; ++i) {
            w[i] = axis[idx[i]];
            all_zero = all_zero && w[i] == 0.0;
        }
        if (!all_zero) {
            WeightVector wv(w);
            auto v = evaluate_objective(wv, m, labels, obj_cfg);
            ++best.evaluations;
            if (!have_best || v.fitness > best.objective.fitness) {
                best.weights = std::move(wv);
                best.objective = v;
                have_best = true;
            }
        }
        // odometer, last coordinate fastest
        std::size_t pos = n_p;
        while (pos > 0) {
            --pos;
            if (++idx[pos] < axis.size()) break;
            idx[pos] = 0;
            if (pos == 0) return best;
        }
    }
}

}  // namespace clipstate
