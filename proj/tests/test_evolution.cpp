#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"
#include "wfcmdp/evolution.hpp"
#include "wfcmdp/parallel.hpp"

using namespace wfcmdp;
using testing_support::desk;
using testing_support::make_tile;

namespace {

TileSet single_path() {
    return TileSet::from_tiles({make_tile("path", Category::path, "p", "p", "p", "p")});
}

Genome filled(GenomeLayout layout, Dims dims, std::size_t n_t, double v) {
    Genome g(layout, dims, n_t);
    for (auto& x : g.values()) x = v;
    return g;
}

std::size_t differing_loci(const Genome& a, const Genome& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.loci(); ++i)
        n += !std::ranges::equal(a.locus(i), b.locus(i));
    return n;
}

bool locus_from(const Genome& child, std::size_t i, const Genome& parent) {
    return std::ranges::equal(child.locus(i), parent.locus(i));
}

EvoParams small_params(std::uint64_t seed) {
    EvoParams p = tuned_params(Method::evo1d, ObjectiveKind::binary);
    p.population = 12;
    p.generations = 15;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("init_population") {
    Rng rng(1);
    const auto pop = init_population(48, GenomeLayout::seq1d, Dims{3, 4}, 24, rng);
    CHECK(pop.size() == 48);
    Rng again(1);
    CHECK(init_population(48, GenomeLayout::seq1d, Dims{3, 4}, 24, again) == pop);

    Rng big(2);
    const auto many = init_population(10, GenomeLayout::direct_map, Dims{50, 20}, 10, big);
    std::size_t entries = 0;
    for (const auto& g : many) {
        CHECK(g.values().size() == 10000);
        for (double v : g.values()) {
            CHECK((v >= 0.0 && v <= 1.0));
            ++entries;
        }
    }
    CHECK(entries == 100000);
}

TEST_CASE("mutate") {
    Rng init(3);
    const Genome g = init_population(1, GenomeLayout::seq1d, Dims{6, 6}, 5, init).front();

    EvoParams quiet;
    quiet.mutated_mean = 10;
    quiet.noise_stddev = 0.0;
    Rng r1(4);
    CHECK(mutate(g, quiet, r1) == g);

    EvoParams none;
    none.mutated_mean = 0;
    none.mutated_stddev = 0.0;
    none.noise_stddev = 0.5;
    Rng r2(5);
    CHECK(mutate(g, none, r2) == g);

    // The locus count drawn by the same seeded stream is the number of loci
    // that change. Noise of 0.3 makes an unchanged locus vanishingly unlikely.
    EvoParams p;
    p.mutated_mean = 8;
    p.mutated_stddev = 6.0;
    p.noise_stddev = 0.3;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng count_rng(seed), mutate_rng(seed);
        const auto k = sample_mutation_count(p, g.loci(), count_rng);
        const auto child = mutate(g, p, mutate_rng);
        CHECK(differing_loci(g, child) == k);
        for (double v : child.values()) CHECK((v >= 0.0 && v <= 1.0));
    }

    // Clamping to the genome length.
    EvoParams huge;
    huge.mutated_mean = 1000;
    Rng r3(6);
    CHECK(sample_mutation_count(huge, 36, r3) == 36);
}

TEST_CASE("crossover") {
    Rng init(7);
    auto pop = init_population(2, GenomeLayout::grid2d, Dims{1, 2}, 4, init);
    const auto& a = pop[0];
    const auto& b = pop[1];
    Rng rng(8);
    CHECK(crossover(a, a, CrossoverMethod::uniform, rng) == a);
    CHECK(crossover(a, a, CrossoverMethod::one_point, rng) == a);

    const auto child = crossover_at(a, b, 1);
    CHECK(locus_from(child, 0, a));
    CHECK(locus_from(child, 1, b));
    // On two loci the only legal cut is 1.
    CHECK(crossover(a, b, CrossoverMethod::one_point, rng) == child);

    const auto zeros = filled(GenomeLayout::seq1d, Dims{100, 100}, 2, 0.0);
    const auto ones = filled(GenomeLayout::seq1d, Dims{100, 100}, 2, 1.0);
    const auto mixed = crossover(zeros, ones, CrossoverMethod::uniform, rng);
    std::size_t from_a = 0;
    for (std::size_t i = 0; i < mixed.loci(); ++i) {
        CHECK((locus_from(mixed, i, zeros) || locus_from(mixed, i, ones)));
        from_a += locus_from(mixed, i, zeros);
    }
    CHECK(std::abs(static_cast<double>(from_a) / 10000.0 - 0.5) <= 0.02);

    const auto cut = crossover(zeros, ones, CrossoverMethod::one_point, rng);
    std::size_t switches = 0;
    for (std::size_t i = 1; i < cut.loci(); ++i) switches += cut.locus(i)[0] != cut.locus(i - 1)[0];
    CHECK(switches == 1);
    CHECK(cut.locus(0)[0] == 0.0);
    CHECK(cut.locus(cut.loci() - 1)[0] == 1.0);

    const Genome other(GenomeLayout::grid2d, Dims{2, 1}, 4);
    CHECK_THROWS_AS(crossover(a, other, CrossoverMethod::uniform, rng), std::invalid_argument);
}

TEST_CASE("reproduce") {
    // Distinct constant parents make the origin of every locus visible.
    std::vector<Genome> parents;
    for (int i = 0; i < 4; ++i) parents.push_back(filled(GenomeLayout::seq1d, Dims{4, 4}, 3, 0.2 * (i + 1)));
    auto from_parent = [&](const Genome& child, std::size_t i) {
        for (const auto& p : parents)
            if (locus_from(child, i, p)) return true;
        return false;
    };

    EvoParams mutants;
    mutants.cross_or_mutate = 0.0;
    mutants.mutated_mean = 3;
    mutants.noise_stddev = 0.05;
    for (const auto& child : reproduce(parents, 20, mutants, 11)) {
        // A mutant keeps all but its mutated loci from a single parent.
        std::size_t best = 0;
        for (const auto& p : parents) best = std::max(best, child.loci() - differing_loci(child, p));
        CHECK(best == child.loci() - 3);
    }

    EvoParams crosses;
    crosses.cross_or_mutate = 1.0;
    crosses.crossover = CrossoverMethod::uniform;
    const auto kids = reproduce(parents, 20, crosses, 12);
    for (const auto& child : kids)
        for (std::size_t i = 0; i < child.loci(); ++i) CHECK(from_parent(child, i));
    CHECK(reproduce(parents, 20, crosses, 12) == kids);

    EvoParams tuned = tuned_params(Method::evo2d, ObjectiveKind::binary);
    tuned.population = 48;
    const int elites = tuned.elite_count();
    CHECK(elites == static_cast<int>(std::ceil(0.2328 * 48)));
    CHECK(elites + static_cast<int>(reproduce(parents, 48 - elites, tuned, 1).size()) == 48);
    CHECK_THROWS_AS(reproduce({}, 3, tuned, 1), std::invalid_argument);
}

TEST_CASE("evaluate_direct") {
    const auto& ts = desk();
    const Problem field{ts, Dims{4, 4}, {ObjectiveKind::field, 0}};
    Genome grass(GenomeLayout::direct_map, Dims{4, 4}, ts.size());
    for (std::size_t i = 0; i < grass.loci(); ++i) grass.locus(i)[0] = 1.0;
    const auto e = evaluate_direct(grass, field);
    CHECK(e.violations == 0);
    CHECK(e.fitness == e.objective);
    CHECK(e.objective == -20.0);

    const auto islands = testing_support::two_islands();
    const Problem checker{islands, Dims{4, 4}, {ObjectiveKind::binary, 0}};
    Genome g(GenomeLayout::direct_map, Dims{4, 4}, 2);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g.locus(static_cast<std::size_t>(r * 4 + c))[(r + c) % 2] = 1.0;
    const auto map = decode_direct(g, islands);
    CHECK(oracle::violations(map, islands.tiles()) == 24);
    const auto ev = evaluate_direct(g, checker);
    CHECK(ev.violations == 24);
    CHECK(ev.fitness == ev.objective - 24);
    CHECK(evaluate_direct(g, checker) == ev);
}

TEST_CASE("evaluate_action_sequence") {
    const auto& ts = desk();
    const Problem problem{ts, Dims{6, 6}, {ObjectiveKind::binary, 8}};
    Rng rng(21);
    const auto pop = init_population(40, GenomeLayout::seq1d, Dims{6, 6}, ts.size(), rng);
    for (const auto& g : pop) {
        const auto e = evaluate_action_sequence(g, problem);
        CHECK(e.violations == 0);
        CHECK(e.fitness == e.objective);
        if (e.fitness != kContradictionReward) {
            const auto map = phenotype(g, problem);
            CHECK(map.fully_collapsed());
            CHECK(oracle::violations(map, ts.tiles()) == 0);
            CHECK(e.fitness == score(map, ts, problem.objective));
        }
        for (int k = 0; k < 10; ++k) CHECK(evaluate_action_sequence(g, problem) == e);
    }

    const auto trap = testing_support::cycle_trap();
    const Problem trapped{trap, Dims{2, 3}, {ObjectiveKind::binary, 0}};
    Genome a_first(GenomeLayout::seq1d, Dims{2, 3}, 3);
    a_first.locus(0)[0] = 1.0;
    CHECK(evaluate_action_sequence(a_first, trapped).fitness == kContradictionReward);
}

TEST_CASE("parallel evaluation equals the serial reference") {
    const auto& ts = desk();
    for (auto layout : {GenomeLayout::direct_map, GenomeLayout::seq1d, GenomeLayout::grid2d}) {
        const Problem problem{ts, Dims{8, 8}, {ObjectiveKind::hybrid_river_binary, 6}};
        Rng rng(33);
        const auto pop = init_population(64, layout, Dims{8, 8}, ts.size(), rng);
        const auto serial = evaluate_population_serial(pop, problem);
        for (int threads : {1, 3, 8}) {
            set_thread_count(threads);
            CHECK(evaluate_population(pop, problem) == serial);
        }
    }
    set_thread_count(0);
}

TEST_CASE("baseline") {
    const auto ts = testing_support::single_grass();
    const Problem problem{ts, Dims{5, 5}, {ObjectiveKind::binary, 0}};
    EvoParams p = tuned_params(Method::baseline, ObjectiveKind::binary);
    p.population = 10;
    p.generations = 20;
    auto r = evolve_baseline(p, problem);
    CHECK(r.record.converged);
    CHECK(r.record.generation_of_convergence == 1);
    CHECK(r.record.generations_run == 1);

    p.generations = 0;
    r = evolve_baseline(p, problem);
    CHECK_FALSE(r.record.converged);
    CHECK(r.record.generations_run == 0);
    CHECK(r.record.best_reward_per_generation.empty());
    CHECK_FALSE(r.best);

    const Problem hard{desk(), Dims{6, 6}, {ObjectiveKind::binary, 12}};
    p.generations = 25;
    p.early_stop = false;
    p.seed = 4;
    int gens = 0;
    r = evolve_baseline(p, hard, [&](const GenerationView& v) {
        ++gens;
        CHECK(v.population.size() == 10);
        CHECK(v.evaluations.size() == 10);
        for (std::size_t i = 0; i < v.population.size(); ++i) {
            const auto& e = v.evaluations[i];
            CHECK(e.fitness == e.objective - e.violations);
            CHECK(e == evaluate(v.population[i], hard));
        }
    });
    CHECK(gens == 25);
    const auto& trace = r.record.best_reward_per_generation;
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);
    CHECK(r.best_evaluation.fitness == trace.back());
}

TEST_CASE("fi2pop") {
    EvoParams p = tuned_params(Method::fi2pop, ObjectiveKind::binary);
    p.population = 10;
    p.generations = 12;
    p.early_stop = false;

    SUBCASE("one tile: everything is feasible") {
        const auto ts = single_path();
        const Problem problem{ts, Dims{3, 3}, {ObjectiveKind::binary, 1}};
        evolve_fi2pop(p, problem, [&](const GenerationView& v) {
            CHECK(v.infeasible.empty());
            CHECK(v.feasible.size() == 10);
            CHECK(v.feasible_refill == 10);
            CHECK(v.infeasible_refill == 0);
        });
    }
    SUBCASE("partition and refill sizes on the desk tileset") {
        const Problem problem{desk(), Dims{5, 5}, {ObjectiveKind::binary, 6}};
        p.population = 24;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            p.seed = seed;
            double best_feasible = -1e18;
            const auto r = evolve_fi2pop(p, problem, [&](const GenerationView& v) {
                for (auto i : v.feasible) best_feasible = std::max(best_feasible, v.evaluations[i].objective);
                CHECK(v.feasible.size() + v.infeasible.size() == 24);
                for (auto i : v.feasible) CHECK(v.evaluations[i].violations == 0);
                for (auto i : v.infeasible) CHECK(v.evaluations[i].violations > 0);
                if (v.feasible.empty()) {
                    CHECK(v.best_reward < 0.0);
                    CHECK(v.infeasible_refill == 24);
                } else if (!v.infeasible.empty()) {
                    CHECK(v.feasible_refill == 12);
                    CHECK(v.infeasible_refill == 12);
                }
                CHECK(v.feasible_refill + v.infeasible_refill == 24);
            });
            // The reported best is the best feasible map once one has been seen.
            if (best_feasible > -1e18) {
                CHECK(r.best_evaluation.violations == 0);
                CHECK(r.best_evaluation.objective == best_feasible);
            }
        }
    }
    SUBCASE("best reported map is the best feasible one") {
        // Three interchangeable land tiles and one tile that only fits itself.
        const auto ts = TileSet::from_tiles({make_tile("g", Category::grass, "g", "g", "g", "g"),
                                             make_tile("f", Category::flower, "g", "g", "g", "g"),
                                             make_tile("p", Category::path, "g", "g", "g", "g"),
                                             make_tile("x", Category::water, "x", "x", "x", "x")});
        const Problem problem{ts, Dims{3, 3}, {ObjectiveKind::binary, 4}};
        p.population = 20;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            p.seed = seed;
            double best_feasible = -1e18;
            std::size_t feasible_seen = 0, infeasible_seen = 0;
            const auto r = evolve_fi2pop(p, problem, [&](const GenerationView& v) {
                feasible_seen += v.feasible.size();
                infeasible_seen += v.infeasible.size();
                for (auto i : v.feasible) best_feasible = std::max(best_feasible, v.evaluations[i].objective);
            });
            REQUIRE(feasible_seen > 0);
            CHECK(infeasible_seen > 0);
            CHECK(r.best_evaluation.violations == 0);
            CHECK(r.best_evaluation.objective == best_feasible);
        }
    }
    SUBCASE("odd population is rejected") {
        p.population = 11;
        const Problem problem{desk(), Dims{3, 3}, {ObjectiveKind::binary, 2}};
        CHECK_THROWS_AS(evolve_fi2pop(p, problem), std::invalid_argument);
    }
}

TEST_CASE("action sequence: convergence at generation 1 on a derived target") {
    // With a single tile every rollout yields the same map, whatever the logits.
    const auto ts = single_path();
    const Dims dims{4, 4};
    const std::vector<double> zeros(dims.cells() * ts.size(), 0.0);
    const auto base = rollout(dims, ts, {ObjectiveKind::binary, 0}, zeros, ActionLayout::seq1d);
    const int p = oracle::floyd_warshall_diameter(base.map, ts.tiles(), [](Category c) { return c == Category::path; });
    CHECK(p == 6);
    for (auto layout : {GenomeLayout::seq1d, GenomeLayout::grid2d}) {
        const Problem problem{ts, dims, {ObjectiveKind::binary, p}};
        const auto r = evolve_action_sequence(small_params(1), problem, layout);
        CHECK(r.record.converged);
        CHECK(r.record.generation_of_convergence == 1);
    }
    CHECK_THROWS_AS(evolve_action_sequence(small_params(1), Problem{ts, dims, {}}, GenomeLayout::direct_map),
                    std::invalid_argument);
}

TEST_CASE("action sequence: sparse rewards on a contradiction-prone tileset") {
    const auto trap = testing_support::cycle_trap();
    const Problem problem{trap, Dims{4, 5}, {ObjectiveKind::hybrid_river_binary, 3}};
    auto p = small_params(2);
    p.early_stop = false;
    int contradictions = 0;
    const auto r = evolve_action_sequence(p, problem, GenomeLayout::grid2d, [&](const GenerationView& v) {
        for (const auto& e : v.evaluations) {
            CHECK((e.fitness == kContradictionReward || (e.fitness <= 0.0 && e.fitness > kContradictionReward)));
            contradictions += e.fitness == kContradictionReward;
        }
    });
    CHECK(contradictions > 0);
    for (double b : r.record.best_reward_per_generation) CHECK(b <= 0.0);
}

TEST_CASE("runs are identical across worker counts") {
    const Problem problem{desk(), Dims{6, 6}, {ObjectiveKind::binary, 7}};
    for (Method m : {Method::baseline, Method::fi2pop, Method::evo1d, Method::evo2d}) {
        EvoParams p = tuned_params(m, ObjectiveKind::binary);
        p.population = 16;
        p.generations = 10;
        p.seed = 5;
        set_thread_count(1);
        const auto ref = evolve(m, p, problem);
        for (int threads : {4, 8}) {
            set_thread_count(threads);
            const auto r = evolve(m, p, problem);
            CHECK(r.record.best_reward_per_generation == ref.record.best_reward_per_generation);
            CHECK(r.record.converged == ref.record.converged);
            CHECK(r.best == ref.best);
        }
        for (std::size_t i = 1; m != Method::fi2pop && i < ref.record.best_reward_per_generation.size(); ++i)
            CHECK(ref.record.best_reward_per_generation[i] >= ref.record.best_reward_per_generation[i - 1]);
    }
    set_thread_count(0);
}

TEST_CASE("tuned hyperparameters") {
    auto p = tuned_params(Method::baseline, ObjectiveKind::binary);
    CHECK(p.mutated_mean == 89);
    CHECK(p.mutated_stddev == 157.2498);
    CHECK(p.noise_stddev == 0.0810);
    CHECK(p.survival_rate == 0.5211);
    CHECK(p.crossover == CrossoverMethod::one_point);
    CHECK(p.cross_or_mutate == 0.8324);

    p = tuned_params(Method::evo2d, ObjectiveKind::binary);
    CHECK(p.mutated_mean == 44);
    CHECK(p.crossover == CrossoverMethod::uniform);

    p = tuned_params(Method::fi2pop, ObjectiveKind::hybrid_river_binary);
    CHECK(p.mutated_mean == 142);
    CHECK(p.noise_stddev == 0.0413);
    CHECK(p.survival_rate == 0.4726);

    p = tuned_params(Method::evo1d, ObjectiveKind::hybrid_field_binary);
    CHECK(p.mutated_mean == 23);
    CHECK(p.mutated_stddev == 0.5458);
    CHECK(p.noise_stddev == 0.4937);
    CHECK(p.survival_rate == 0.1861);
    CHECK(p.crossover == CrossoverMethod::one_point);
    CHECK(p.cross_or_mutate == 0.8241);

    p = tuned_params(Method::baseline, ObjectiveKind::hybrid_field_binary);
    CHECK(p.crossover == CrossoverMethod::uniform);
    CHECK(tuned_params(Method::evo2d, ObjectiveKind::river).mutated_mean == 48);
    CHECK(tuned_params(Method::evo2d, ObjectiveKind::field).mutated_mean == 132);
}

TEST_CASE("params validation and names") {
    EvoParams p;
    CHECK_NOTHROW(p.validate());
    p.survival_rate = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = EvoParams{};
    p.cross_or_mutate = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = EvoParams{};
    p.population = 1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    for (Method m : {Method::baseline, Method::fi2pop, Method::evo1d, Method::evo2d})
        CHECK(parse_method(to_string(m)) == m);
    CHECK_FALSE(parse_method("ppo"));
    CHECK(layout_for(Method::evo2d) == GenomeLayout::grid2d);
}
