#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wfcmdp/env.hpp"
#include "wfcmdp/map_grid.hpp"
#include "wfcmdp/objectives.hpp"
#include "wfcmdp/rng.hpp"
#include "wfcmdp/tileset.hpp"

namespace wfcmdp {

enum class Method { baseline, fi2pop, evo1d, evo2d };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

enum class GenomeLayout { direct_map, seq1d, grid2d };

GenomeLayout layout_for(Method m);

enum class CrossoverMethod { uniform = 0, one_point = 1 };

struct EvoParams {
    int generations = 600;
    int population = 48;
    double survival_rate = 0.5;
    int mutated_mean = 1;        // number_of_actions_mutated_mean
    double mutated_stddev = 0.0; // number_of_actions_mutated_standard_deviation
    double noise_stddev = 0.1;   // action_noise_standard_deviation
    CrossoverMethod crossover = CrossoverMethod::one_point;
    double cross_or_mutate = 0.5;  // fraction of offspring made by crossover
    std::uint64_t seed = 0;
    bool early_stop = true;

    /// Throws std::invalid_argument when a field is out of its domain.
    void validate() const;
    /// Number of elites kept by the single-population loops, ceil(rho * N).
    int elite_count() const;
};

/// Tuned hyperparameters per (method, domain). Standalone river/field kinds
/// use the matching hybrid column.
EvoParams tuned_params(Method method, ObjectiveKind objective);

/// ℓ×w action vectors of n_t values in [0, 1], stored row-major by locus.
class Genome {
public:
    Genome() = default;
    Genome(GenomeLayout layout, Dims dims, std::size_t actions_per_locus);

    GenomeLayout layout() const { return layout_; }
    Dims dims() const { return dims_; }
    std::size_t loci() const { return dims_.cells(); }
    std::size_t actions_per_locus() const { return n_t_; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::span<const double> locus(std::size_t i) const { return std::span<const double>(values_).subspan(i * n_t_, n_t_); }
    std::span<double> locus(std::size_t i) { return std::span<double>(values_).subspan(i * n_t_, n_t_); }

    bool same_shape(const Genome& o) const {
        return layout_ == o.layout_ && dims_ == o.dims_ && n_t_ == o.n_t_;
    }
    friend bool operator==(const Genome&, const Genome&) = default;

private:
    GenomeLayout layout_ = GenomeLayout::direct_map;
    Dims dims_;
    std::size_t n_t_ = 0;
    std::vector<double> values_;
};

struct Evaluation {
    double objective = 0.0;
    int violations = 0;
    double fitness = 0.0;

    friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

struct Problem {
    const TileSet& tiles;
    Dims dims;
    ObjectiveSpec objective;
};

// Variation operators. ---------------------------------------------------

std::vector<Genome> init_population(int count, GenomeLayout layout, Dims dims, std::size_t n_t, Rng& rng);

/// Draws k ~ round(Normal(mean, sd)) clamped to [0, loci], picks k distinct
/// loci, and adds Normal(0, noise) to every value of each, clamped to [0, 1].
Genome mutate(const Genome& g, const EvoParams& params, Rng& rng);

/// Number of loci mutate() would touch for this draw; exposed for tests.
std::size_t sample_mutation_count(const EvoParams& params, std::size_t loci, Rng& rng);

Genome crossover(const Genome& a, const Genome& b, CrossoverMethod method, Rng& rng);
/// Child = a[0, cut) ++ b[cut, loci).
Genome crossover_at(const Genome& a, const Genome& b, std::size_t cut);

/// `count` offspring. Offspring k draws from its own stream derived from
/// (stream_seed, k); with probability cross_or_mutate it is a crossover of two
/// uniformly drawn parents, otherwise a mutant of one.
std::vector<Genome> reproduce(std::span<const Genome> parents, int count, const EvoParams& params,
                              std::uint64_t stream_seed);

// Evaluation. -----------------------------------------------------------

/// Per-locus argmax (ties to the smallest id), no propagation.
MapGrid decode_direct(const Genome& g, const TileSet& ts);

/// f = o - v on the directly decoded map.
Evaluation evaluate_direct(const Genome& g, const Problem& problem);

/// Rollout through the WFC environment; v = 0 and f = o = terminal reward.
Evaluation evaluate_action_sequence(const Genome& g, const Problem& problem);

Evaluation evaluate(const Genome& g, const Problem& problem);

/// Map a genome stands for: the decoded grid for direct maps, the rollout
/// grid (possibly partial) for action sequences.
MapGrid phenotype(const Genome& g, const Problem& problem);

/// Parallel population evaluation (OpenMP over genomes).
std::vector<Evaluation> evaluate_population(std::span<const Genome> population, const Problem& problem);
/// Single-threaded reference for evaluate_population.
std::vector<Evaluation> evaluate_population_serial(std::span<const Genome> population, const Problem& problem);

// Optimizers. -----------------------------------------------------------

struct RunRecord {
    Method method = Method::baseline;
    ObjectiveKind objective = ObjectiveKind::binary;
    int target = 0;
    std::uint64_t seed = 0;
    bool converged = false;
    std::optional<int> generation_of_convergence;  // 1-based
    std::vector<double> best_reward_per_generation;
    int generations_run = 0;
    double wall_time_s = 0.0;

    std::optional<double> best_final_reward() const {
        if (best_reward_per_generation.empty()) return std::nullopt;
        return best_reward_per_generation.back();
    }
};

struct RunResult {
    RunRecord record;
    std::optional<Genome> best;  // absent when no generation ran
    Evaluation best_evaluation;
};

/// Snapshot handed to an observer after each generation is evaluated.
struct GenerationView {
    int generation = 0;
    std::span<const Genome> population;
    std::span<const Evaluation> evaluations;
    double best_reward = 0.0;
    // FI-2Pop only: population indices by feasibility, and the size each side
    // is refilled to for the next generation.
    std::span<const std::size_t> feasible;
    std::span<const std::size_t> infeasible;
    int feasible_refill = 0;
    int infeasible_refill = 0;
};

using GenerationObserver = std::function<void(const GenerationView&)>;

/// Penalized-fitness elitist loop over directly encoded maps.
RunResult evolve_baseline(const EvoParams& params, const Problem& problem, const GenerationObserver& observer = {});

/// Feasible/infeasible two-population loop. Throws std::invalid_argument for
/// an odd population size.
RunResult evolve_fi2pop(const EvoParams& params, const Problem& problem, const GenerationObserver& observer = {});

/// Elitist loop over WFC action sequences. `layout` must be seq1d or grid2d.
RunResult evolve_action_sequence(const EvoParams& params, const Problem& problem, GenomeLayout layout,
                                 const GenerationObserver& observer = {});

/// Dispatches on method.
RunResult evolve(Method method, const EvoParams& params, const Problem& problem,
                 const GenerationObserver& observer = {});

}  // namespace wfcmdp
