#include <cmath>
#include <random>

#include "biome_fixtures.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"
#include "wfcmdp/objectives.hpp"

using namespace wfcmdp;
using testing_support::desk;

namespace {

const CategorySet kPath{Category::path};
const CategorySet kWater{Category::water};

bool is_path(Category c) { return c == Category::path; }
bool is_water(Category c) { return c == Category::water; }
bool is_land(Category c) { return c != Category::water; }

struct OracleRiver {
    int regions, length, centers, land;
};

OracleRiver oracle_river(const MapGrid& m) {
    const auto& tiles = desk().tiles();
    int centers = 0;
    for (int id : m.cells()) centers += tiles[static_cast<std::size_t>(id)].is_water_center;
    return {oracle::components(m, tiles, is_water), oracle::floyd_warshall_diameter(m, tiles, is_water), centers,
            oracle::components(m, tiles, is_land)};
}

double oracle_river_score(const MapGrid& m) {
    const auto o = oracle_river(m);
    const double region_term = o.regions == 0 ? -35.0 : 1.0 - o.regions;
    return region_term + std::min(0, o.length - 35) - o.centers + std::min(0, 3 - o.land);
}

double oracle_field_score(const MapGrid& m) {
    int wet = 0, hill = 0, grass = 0, flower = 0, nonpath = 0;
    for (int id : m.cells()) {
        const auto c = desk().tile(id).category;
        wet += c == Category::water || c == Category::shore;
        hill += c == Category::hill;
        grass += c == Category::grass;
        flower += c == Category::flower;
        nonpath += c != Category::path;
    }
    const double g = nonpath ? 100.0 * grass / nonpath : 0.0;
    const double f = nonpath ? 100.0 * flower / nonpath : 0.0;
    return -wet - hill + std::min(0.0, g - 20.0) + std::min(0.0, f - 20.0);
}

MapGrid rotate180(const MapGrid& m) {
    std::vector<int> cells(m.cells().rbegin(), m.cells().rend());
    return MapGrid(m.dims(), std::move(cells));
}

}  // namespace

TEST_CASE("longest_shortest_path basics") {
    const auto& ts = desk();
    CHECK(longest_shortest_path(fixtures::art({"p"}), ts, kPath) == 0);
    CHECK(longest_shortest_path(fixtures::art({"..."}), ts, kPath) == 0);
    for (int n = 1; n <= 12; ++n) {
        const auto m = fixtures::art({std::string(static_cast<std::size_t>(n), 'p')});
        CHECK(longest_shortest_path(m, ts, kPath) == n - 1);
    }
    // Separate components: the longer one wins.
    CHECK(longest_shortest_path(fixtures::art({"pp.pppp"}), ts, kPath) == 3);
    // A U-bend is measured along the path, not straight across.
    CHECK(path_length(fixtures::art({"ppp", ".p.", "ppp"}), ts) == 4);
}

TEST_CASE("longest_shortest_path matches Floyd-Warshall on random maps") {
    const auto& ts = desk();
    std::mt19937_64 rng(31);
    for (int i = 0; i < 30; ++i) {
        const auto m = oracle::random_map(Dims{8, 8}, static_cast<int>(ts.size()), rng);
        CHECK(longest_shortest_path(m, ts, kPath) == oracle::floyd_warshall_diameter(m, ts.tiles(), is_path));
        CHECK(longest_shortest_path(m, ts, kWater) == oracle::floyd_warshall_diameter(m, ts.tiles(), is_water));
    }
}

TEST_CASE("binary objective") {
    const auto& ts = desk();
    const auto corridor = fixtures::art({std::string(51, 'p')});
    CHECK(path_length(corridor, ts) == 50);
    CHECK(binary_objective(corridor, ts, 50) == 0.0);
    CHECK(binary_objective(corridor, ts, 40) == -10.0);
    CHECK(binary_objective(corridor, ts, 60) == -10.0);

    // A single winding path: measure p with the oracle, then hit it exactly.
    const auto winding = fixtures::art({"pppppp..", ".....p..", "ppppppp.", "p.......", "pppppppp"});
    const int p = oracle::floyd_warshall_diameter(winding, ts.tiles(), is_path);
    CHECK(p == 21);
    CHECK(binary_objective(winding, ts, p) == 0.0);
}

TEST_CASE("river metrics") {
    const auto& ts = desk();
    const auto grass = fixtures::art(fixtures::blank(5, 5));
    auto m = biome_metrics(grass, ts);
    CHECK(m.river_regions == 0);
    CHECK(m.river_length == 0);
    CHECK(m.water_centers == 0);
    CHECK(m.land_regions == 1);

    m = biome_metrics(fixtures::art({"~...~", "....."}), ts);
    CHECK(m.river_regions == 2);
    CHECK(m.river_length == 0);

    std::mt19937_64 rng(8);
    for (int i = 0; i < 25; ++i) {
        const auto map = oracle::random_map(Dims{7, 9}, static_cast<int>(ts.size()), rng);
        const auto got = biome_metrics(map, ts);
        const auto want = oracle_river(map);
        CHECK(got.river_regions == want.regions);
        CHECK(got.river_length == want.length);
        CHECK(got.water_centers == want.centers);
        CHECK(got.land_regions == want.land);
    }
}

TEST_CASE("river objective examples") {
    const auto& ts = desk();
    CHECK(river_objective(fixtures::art(fixtures::serpentine()), ts) == 0.0);

    BiomeMetrics short_river;
    short_river.river_regions = 1;
    short_river.river_length = 30;
    short_river.land_regions = 2;
    CHECK(river_objective(short_river) == -5.0);

    BiomeMetrics split = short_river;
    split.river_regions = 2;
    split.river_length = 40;
    CHECK(river_objective(split) == -1.0);

    BiomeMetrics none;
    none.land_regions = 1;
    CHECK(river_objective(none) == kNoRiverPenalty - 35.0);
    CHECK(river_objective(fixtures::art(fixtures::blank(4, 4)), ts) == -35.0 - 35.0);
}

TEST_CASE("field objective examples") {
    const auto& ts = desk();
    CHECK(field_objective(fixtures::art({".f.f", "f.f.", ".f.f", "f.f."}), ts) == 0.0);

    const auto wet = fixtures::art({"~f~f", "f.f.", ".f~f", "f.f."});
    CHECK(field_objective(wet, ts) == doctest::Approx(oracle_field_score(wet)));
    CHECK(field_objective(wet, ts) == -3.0);

    BiomeMetrics m;
    m.grass_percent = 10;
    m.flower_percent = 30;
    CHECK(field_objective(m) == -10.0);

    // Every cell is path: no non-path cells, both shares count as 0.
    CHECK(field_objective(fixtures::art({"pp", "pp"}), ts) == -40.0);
}

TEST_CASE("hybrid objective") {
    const auto& ts = desk();
    auto rows = fixtures::serpentine();
    for (int c = 0; c < 6; ++c) rows[7][static_cast<std::size_t>(c)] = 'p';
    const auto m = fixtures::art(rows);
    CHECK(hybrid_objective(m, ts, 5, Biome::river) == 0.0);
    CHECK(hybrid_objective(m, ts, 9, Biome::river) == -4.0);

    rows[0][4] = 'o';
    rows[0][6] = 'o';
    const auto bumpy = fixtures::art(rows);
    CHECK(river_objective(bumpy, ts) == -2.0);
    CHECK(hybrid_objective(bumpy, ts, 9, Biome::river) == -6.0);

    std::mt19937_64 rng(12);
    for (int i = 0; i < 20; ++i) {
        const auto r = oracle::random_map(Dims{8, 8}, static_cast<int>(ts.size()), rng);
        const double bin = -std::abs(oracle::floyd_warshall_diameter(r, ts.tiles(), is_path) - 6);
        CHECK(hybrid_objective(r, ts, 6, Biome::river) == doctest::Approx(bin + oracle_river_score(r)));
        CHECK(hybrid_objective(r, ts, 6, Biome::field) == doctest::Approx(bin + oracle_field_score(r)));
        CHECK(score(r, ts, {ObjectiveKind::hybrid_field_binary, 6}) == hybrid_objective(r, ts, 6, Biome::field));
        CHECK(score(r, ts, {ObjectiveKind::river, 0}) == river_objective(r, ts));
    }
}

TEST_CASE("zero conditions on fixture maps") {
    const auto& ts = desk();
    for (const auto& fx : fixtures::river_fixtures()) {
        CAPTURE(fx.name);
        CHECK((river_objective(fx.map, ts) == 0.0) == fx.satisfies);
        CHECK(river_objective(fx.map, ts) == oracle_river_score(fx.map));
    }
    for (const auto& fx : fixtures::field_fixtures()) {
        CAPTURE(fx.name);
        CHECK((field_objective(fx.map, ts) == 0.0) == fx.satisfies);
        CHECK(field_objective(fx.map, ts) == doctest::Approx(oracle_field_score(fx.map)));
    }
}

TEST_CASE("objective invariants") {
    const auto& ts = desk();
    std::mt19937_64 rng(99);
    for (int i = 0; i < 40; ++i) {
        const auto m = oracle::random_map(Dims{6, 9}, static_cast<int>(ts.size()), rng);
        const int p = path_length(m, ts);
        CHECK(path_length(m.transposed(), ts) == p);
        CHECK(path_length(rotate180(m), ts) == p);
        CHECK(binary_objective(m, ts, p) == 0.0);
        for (auto kind : {ObjectiveKind::binary, ObjectiveKind::river, ObjectiveKind::field,
                          ObjectiveKind::hybrid_river_binary, ObjectiveKind::hybrid_field_binary})
            CHECK(score(m, ts, {kind, 7}) <= 0.0);
    }
    auto perfect = fixtures::serpentine();
    const double before = river_objective(fixtures::art(perfect), ts);
    perfect[7][11] = '~';
    CHECK(river_objective(fixtures::art(perfect), ts) < before);
}

TEST_CASE("objective names") {
    for (auto kind : {ObjectiveKind::binary, ObjectiveKind::river, ObjectiveKind::field,
                      ObjectiveKind::hybrid_river_binary, ObjectiveKind::hybrid_field_binary})
        CHECK(parse_objective_kind(to_string(kind)) == kind);
    CHECK_FALSE(parse_objective_kind("pond"));
    CHECK(uses_target(ObjectiveKind::binary));
    CHECK_FALSE(uses_target(ObjectiveKind::field));
}
