#include "wfcmdp/evolution.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wfcmdp {

namespace {

constexpr std::array<std::string_view, 4> kMethodNames{"baseline", "fi2pop", "evo1d", "evo2d"};

// Stream purposes, so that no two draws in a run share a seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kReproduceStream = 2;
constexpr std::uint64_t kFeasibleSide = 0;
constexpr std::uint64_t kInfeasibleSide = 1;

ActionLayout action_layout(GenomeLayout layout) {
    switch (layout) {
        case GenomeLayout::seq1d: return ActionLayout::seq1d;
        case GenomeLayout::grid2d: return ActionLayout::grid2d;
        case GenomeLayout::direct_map: break;
    }
    throw std::invalid_argument("genome layout is not an action sequence");
}

// Indices of `members` ordered best-first by `better`, stable on index.
template <typename Better>
std::vector<std::size_t> ranked(std::vector<std::size_t> members, Better better) {
    std::stable_sort(members.begin(), members.end(), better);
    return members;
}

double best_fitness(std::span<const Evaluation> evals) {
    double best = evals.front().fitness;
    for (const auto& e : evals) best = std::max(best, e.fitness);
    return best;
}

std::size_t argmax_fitness(std::span<const Evaluation> evals) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < evals.size(); ++i)
        if (evals[i].fitness > evals[best].fitness) best = i;
    return best;
}

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

RunRecord blank_record(Method method, const EvoParams& params, const Problem& problem) {
    RunRecord rec;
    rec.method = method;
    rec.objective = problem.objective.kind;
    rec.target = problem.objective.target_path_length;
    rec.seed = params.seed;
    return rec;
}

// Shared elitist loop for the baseline and action-sequence methods: keep the
// top ceil(rho N) by fitness, refill with offspring of the elites.
RunResult elitist_loop(Method method, GenomeLayout layout, const EvoParams& params, const Problem& problem,
                       const GenerationObserver& observer) {
    params.validate();
    Clock clock;
    RunResult out{blank_record(method, params, problem), std::nullopt, {}};
    auto& rec = out.record;

    Rng init_rng = stream(params.seed, 0, 0, kInitStream);
    std::vector<Genome> population =
        init_population(params.population, layout, problem.dims, problem.tiles.size(), init_rng);
    std::vector<Evaluation> evals;
    if (params.generations > 0) evals = evaluate_population(population, problem);

    const int n_elites = params.elite_count();
    for (int gen = 1; gen <= params.generations; ++gen) {
        const double best = best_fitness(evals);
        rec.best_reward_per_generation.push_back(best);
        rec.generations_run = gen;
        if (observer) observer(GenerationView{gen, population, evals, best, {}, {}, 0, 0});

        const auto top = argmax_fitness(evals);
        out.best = population[top];
        out.best_evaluation = evals[top];

        if (best == 0.0 && !rec.converged) {
            rec.converged = true;
            rec.generation_of_convergence = gen;
            if (params.early_stop) break;
        }
        if (gen == params.generations) break;

        std::vector<std::size_t> all(population.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        const auto order =
            ranked(std::move(all), [&](std::size_t a, std::size_t b) { return evals[a].fitness > evals[b].fitness; });

        std::vector<Genome> elites;
        std::vector<Evaluation> elite_evals;
        for (int k = 0; k < n_elites; ++k) {
            elites.push_back(population[order[static_cast<std::size_t>(k)]]);
            elite_evals.push_back(evals[order[static_cast<std::size_t>(k)]]);
        }
        auto offspring = reproduce(elites, params.population - n_elites, params,
                                   derive_seed(params.seed, {static_cast<std::uint64_t>(gen), kReproduceStream}));
        auto offspring_evals = evaluate_population(offspring, problem);

        population = std::move(elites);
        evals = std::move(elite_evals);
        population.insert(population.end(), std::make_move_iterator(offspring.begin()),
                          std::make_move_iterator(offspring.end()));
        evals.insert(evals.end(), offspring_evals.begin(), offspring_evals.end());
    }
    rec.wall_time_s = clock.seconds();
    return out;
}

}  // namespace

std::string_view to_string(Method m) { return kMethodNames[static_cast<std::size_t>(m)]; }

std::optional<Method> parse_method(std::string_view name) {
    for (std::size_t i = 0; i < kMethodNames.size(); ++i)
        if (kMethodNames[i] == name) return static_cast<Method>(i);
    return std::nullopt;
}

GenomeLayout layout_for(Method m) {
    switch (m) {
        case Method::baseline:
        case Method::fi2pop: return GenomeLayout::direct_map;
        case Method::evo1d: return GenomeLayout::seq1d;
        case Method::evo2d: return GenomeLayout::grid2d;
    }
    throw std::invalid_argument("unknown method");
}

void EvoParams::validate() const {
    if (generations < 0) throw std::invalid_argument("generations must be >= 0");
    if (population < 2) throw std::invalid_argument("population must be >= 2");
    if (!(survival_rate > 0.0 && survival_rate <= 1.0)) throw std::invalid_argument("survival_rate must lie in (0, 1]");
    if (mutated_mean < 0) throw std::invalid_argument("number_of_actions_mutated_mean must be >= 0");
    if (!(mutated_stddev >= 0.0)) throw std::invalid_argument("number_of_actions_mutated_standard_deviation must be >= 0");
    if (!(noise_stddev >= 0.0)) throw std::invalid_argument("action_noise_standard_deviation must be >= 0");
    if (!(cross_or_mutate >= 0.0 && cross_or_mutate <= 1.0)) throw std::invalid_argument("cross_or_mutate must lie in [0, 1]");
}

int EvoParams::elite_count() const {
    return std::clamp(static_cast<int>(std::ceil(survival_rate * population)), 1, population);
}

EvoParams tuned_params(Method method, ObjectiveKind objective) {
    struct Row {
        int mean;
        double sd;
        double noise;
        double survival;
        CrossoverMethod crossover;
        double cross_or_mutate;
    };
    using enum CrossoverMethod;
    // Columns: baseline, fi2pop, evo1d, evo2d.
    static constexpr std::array<Row, 4> binary{{
        {89, 157.2498, 0.0810, 0.5211, one_point, 0.8324},
        {162, 196.1993, 0.0418, 0.3552, one_point, 0.9871},
        {97, 120.0876, 0.1296, 0.4151, one_point, 0.7453},
        {44, 28.2708, 0.1409, 0.2328, uniform, 0.9557},
    }};
    static constexpr std::array<Row, 4> river{{
        {1, 56.7544, 0.1452, 0.7988, one_point, 0.9633},
        {142, 69.3442, 0.0413, 0.4726, one_point, 0.9130},
        {79, 111.7231, 0.1087, 0.4133, one_point, 0.9930},
        {48, 14.0969, 0.0647, 0.3077, uniform, 0.8902},
    }};
    static constexpr std::array<Row, 4> field{{
        {86, 146.9724, 0.3916, 0.7513, uniform, 0.6876},
        {178, 68.7875, 0.0125, 0.7720, uniform, 0.7570},
        {23, 0.5458, 0.4937, 0.1861, one_point, 0.8241},
        {132, 56.0667, 0.0407, 0.3245, one_point, 0.8415},
    }};
    const std::array<Row, 4>* table = &binary;
    if (objective == ObjectiveKind::river || objective == ObjectiveKind::hybrid_river_binary) table = &river;
    if (objective == ObjectiveKind::field || objective == ObjectiveKind::hybrid_field_binary) table = &field;
    const Row& row = (*table)[static_cast<std::size_t>(method)];

    EvoParams p;
    p.mutated_mean = row.mean;
    p.mutated_stddev = row.sd;
    p.noise_stddev = row.noise;
    p.survival_rate = row.survival;
    p.crossover = row.crossover;
    p.cross_or_mutate = row.cross_or_mutate;
    return p;
}

Genome::Genome(GenomeLayout layout, Dims dims, std::size_t actions_per_locus)
    : layout_(layout), dims_(dims), n_t_(actions_per_locus), values_(dims.cells() * actions_per_locus, 0.0) {}

std::vector<Genome> init_population(int count, GenomeLayout layout, Dims dims, std::size_t n_t, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Genome> pop;
    pop.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        Genome g(layout, dims, n_t);
        for (auto& v : g.values()) v = unit(rng);
        pop.push_back(std::move(g));
    }
    return pop;
}

std::size_t sample_mutation_count(const EvoParams& params, std::size_t loci, Rng& rng) {
    double draw = params.mutated_mean;
    if (params.mutated_stddev > 0.0) draw = std::normal_distribution<double>(params.mutated_mean, params.mutated_stddev)(rng);
    const double k = std::clamp(std::round(draw), 0.0, static_cast<double>(loci));
    return static_cast<std::size_t>(k);
}

Genome mutate(const Genome& g, const EvoParams& params, Rng& rng) {
    Genome child = g;
    const std::size_t loci = g.loci();
    const std::size_t k = sample_mutation_count(params, loci, rng);
    if (k == 0) return child;

    // Partial Fisher-Yates: the first k slots become k distinct loci.
    std::vector<std::size_t> idx(loci);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, loci - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    if (params.noise_stddev <= 0.0) return child;
    std::normal_distribution<double> noise(0.0, params.noise_stddev);
    for (std::size_t i = 0; i < k; ++i)
        for (auto& v : child.locus(idx[i])) v = std::clamp(v + noise(rng), 0.0, 1.0);
    return child;
}

Genome crossover_at(const Genome& a, const Genome& b, std::size_t cut) {
    if (!a.same_shape(b)) throw std::invalid_argument("crossover: parents differ in shape");
    if (cut > a.loci()) throw std::out_of_range("crossover: cut beyond genome length");
    Genome child = a;
    for (std::size_t i = cut; i < a.loci(); ++i) std::ranges::copy(b.locus(i), child.locus(i).begin());
    return child;
}

Genome crossover(const Genome& a, const Genome& b, CrossoverMethod method, Rng& rng) {
    if (!a.same_shape(b)) throw std::invalid_argument("crossover: parents differ in shape");
    if (method == CrossoverMethod::one_point) {
        if (a.loci() < 2) return a;
        std::uniform_int_distribution<std::size_t> cut(1, a.loci() - 1);
        return crossover_at(a, b, cut(rng));
    }
    Genome child = a;
    std::bernoulli_distribution from_b(0.5);
    for (std::size_t i = 0; i < a.loci(); ++i)
        if (from_b(rng)) std::ranges::copy(b.locus(i), child.locus(i).begin());
    return child;
}

std::vector<Genome> reproduce(std::span<const Genome> parents, int count, const EvoParams& params,
                              std::uint64_t stream_seed) {
    if (parents.empty()) throw std::invalid_argument("reproduce: no parents");
    std::vector<Genome> offspring(static_cast<std::size_t>(std::max(count, 0)));
    std::uniform_int_distribution<std::size_t> pick(0, parents.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < offspring.size(); ++k) {
        Rng rng(derive_seed(stream_seed, {k}));
        if (unit(rng) < params.cross_or_mutate) {
            const auto& a = parents[pick(rng)];
            const auto& b = parents[pick(rng)];
            offspring[k] = crossover(a, b, params.crossover, rng);
        } else {
            offspring[k] = mutate(parents[pick(rng)], params, rng);
        }
    }
    return offspring;
}

MapGrid decode_direct(const Genome& g, const TileSet& ts) {
    if (g.actions_per_locus() != ts.size()) throw std::invalid_argument("genome width does not match the tileset");
    const auto all = TileMask::full(ts.size());
    std::vector<int> cells(g.loci());
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = decode_action(g.locus(i), all);
    return MapGrid(g.dims(), std::move(cells));
}

Evaluation evaluate_direct(const Genome& g, const Problem& problem) {
    if (g.layout() != GenomeLayout::direct_map) throw std::invalid_argument("evaluate_direct: not a direct-map genome");
    const MapGrid map = decode_direct(g, problem.tiles);
    Evaluation e;
    e.objective = score(map, problem.tiles, problem.objective);
    e.violations = static_cast<int>(count_violations(map, problem.tiles));
    e.fitness = e.objective - e.violations;
    return e;
}

Evaluation evaluate_action_sequence(const Genome& g, const Problem& problem) {
    const auto result = rollout(problem.dims, problem.tiles, problem.objective, g.values(), action_layout(g.layout()));
    return Evaluation{result.reward, 0, result.reward};
}

Evaluation evaluate(const Genome& g, const Problem& problem) {
    return g.layout() == GenomeLayout::direct_map ? evaluate_direct(g, problem) : evaluate_action_sequence(g, problem);
}

MapGrid phenotype(const Genome& g, const Problem& problem) {
    if (g.layout() == GenomeLayout::direct_map) return decode_direct(g, problem.tiles);
    return rollout(problem.dims, problem.tiles, problem.objective, g.values(), action_layout(g.layout())).map;
}

std::vector<Evaluation> evaluate_population_serial(std::span<const Genome> population, const Problem& problem) {
    std::vector<Evaluation> out(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) out[i] = evaluate(population[i], problem);
    return out;
}

std::vector<Evaluation> evaluate_population(std::span<const Genome> population, const Problem& problem) {
    std::vector<Evaluation> out(population.size());
    const auto n = static_cast<std::ptrdiff_t>(population.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = evaluate(population[static_cast<std::size_t>(i)], problem);
    return out;
}

RunResult evolve_baseline(const EvoParams& params, const Problem& problem, const GenerationObserver& observer) {
    return elitist_loop(Method::baseline, GenomeLayout::direct_map, params, problem, observer);
}

RunResult evolve_action_sequence(const EvoParams& params, const Problem& problem, GenomeLayout layout,
                                 const GenerationObserver& observer) {
    if (layout == GenomeLayout::direct_map)
        throw std::invalid_argument("evolve_action_sequence needs the seq1d or grid2d layout");
    return elitist_loop(layout == GenomeLayout::seq1d ? Method::evo1d : Method::evo2d, layout, params, problem,
                        observer);
}

RunResult evolve_fi2pop(const EvoParams& params, const Problem& problem, const GenerationObserver& observer) {
    params.validate();
    if (params.population % 2 != 0) throw std::invalid_argument("FI-2Pop needs an even population size");
    Clock clock;
    RunResult out{blank_record(Method::fi2pop, params, problem), std::nullopt, {}};
    auto& rec = out.record;
    const int half = params.population / 2;

    Rng init_rng = stream(params.seed, 0, 0, kInitStream);
    std::vector<Genome> population =
        init_population(params.population, GenomeLayout::direct_map, problem.dims, problem.tiles.size(), init_rng);
    std::vector<Evaluation> evals;
    if (params.generations > 0) evals = evaluate_population(population, problem);

    for (int gen = 1; gen <= params.generations; ++gen) {
        std::vector<std::size_t> feasible, infeasible;
        for (std::size_t i = 0; i < population.size(); ++i) (evals[i].violations == 0 ? feasible : infeasible).push_back(i);

        // A side with no members hands its share of the population to the other.
        const int feasible_size = feasible.empty() ? 0 : infeasible.empty() ? params.population : half;
        const int infeasible_size = params.population - feasible_size;

        const double best = best_fitness(evals);
        rec.best_reward_per_generation.push_back(best);
        rec.generations_run = gen;
        if (observer)
            observer(GenerationView{gen, population, evals, best, feasible, infeasible, feasible_size, infeasible_size});

        // Report the best feasible map when there is one, otherwise the least
        // violating; a feasible best is never replaced by an infeasible one.
        std::size_t top = argmax_fitness(evals);
        for (auto i : feasible)
            if (evals[top].violations > 0 || evals[i].objective > evals[top].objective) top = i;
        const bool improves = !out.best ||
                              (evals[top].violations == 0 && out.best_evaluation.violations > 0) ||
                              ((evals[top].violations == 0) == (out.best_evaluation.violations == 0) &&
                               evals[top].fitness > out.best_evaluation.fitness);
        if (improves) {
            out.best = population[top];
            out.best_evaluation = evals[top];
        }

        if (best == 0.0 && !rec.converged) {
            rec.converged = true;
            rec.generation_of_convergence = gen;
            if (params.early_stop) break;
        }
        if (gen == params.generations) break;

        const auto by_objective = ranked(feasible, [&](std::size_t a, std::size_t b) {
            return evals[a].objective > evals[b].objective;
        });
        const auto by_violations = ranked(infeasible, [&](std::size_t a, std::size_t b) {
            return evals[a].violations < evals[b].violations;
        });

        std::vector<Genome> next;
        std::vector<Evaluation> next_evals;
        auto refill = [&](const std::vector<std::size_t>& order, int side_size, std::uint64_t side) {
            if (side_size == 0) return;
            const auto keep = std::min<std::size_t>(
                static_cast<std::size_t>(std::ceil(params.survival_rate * static_cast<double>(order.size()))),
                static_cast<std::size_t>(side_size));
            std::vector<Genome> elites;
            for (std::size_t k = 0; k < keep; ++k) {
                elites.push_back(population[order[k]]);
                next_evals.push_back(evals[order[k]]);
            }
            auto offspring = reproduce(elites, side_size - static_cast<int>(keep), params,
                                       derive_seed(params.seed, {static_cast<std::uint64_t>(gen), kReproduceStream, side}));
            auto offspring_evals = evaluate_population(offspring, problem);
            next.insert(next.end(), std::make_move_iterator(elites.begin()), std::make_move_iterator(elites.end()));
            next.insert(next.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
            next_evals.insert(next_evals.end(), offspring_evals.begin(), offspring_evals.end());
        };
        refill(by_objective, feasible_size, kFeasibleSide);
        refill(by_violations, infeasible_size, kInfeasibleSide);

        population = std::move(next);
        evals = std::move(next_evals);
    }
    rec.wall_time_s = clock.seconds();
    return out;
}

RunResult evolve(Method method, const EvoParams& params, const Problem& problem, const GenerationObserver& observer) {
    switch (method) {
        case Method::baseline: return evolve_baseline(params, problem, observer);
        case Method::fi2pop: return evolve_fi2pop(params, problem, observer);
        case Method::evo1d: return evolve_action_sequence(params, problem, GenomeLayout::seq1d, observer);
        case Method::evo2d: return evolve_action_sequence(params, problem, GenomeLayout::grid2d, observer);
    }
    throw std::invalid_argument("unknown method");
}

}  // namespace wfcmdp
