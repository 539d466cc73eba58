#include "wfcmdp/objectives.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace wfcmdp {

namespace {

constexpr std::array<std::string_view, 5> kKindNames{"binary", "river", "field", "hybrid_river_binary",
                                                     "hybrid_field_binary"};

std::vector<char> member_mask(const MapGrid& map, const TileSet& ts, CategorySet members) {
    std::vector<char> in(map.size(), 0);
    const auto& cells = map.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] < 0 || cells[i] >= static_cast<int>(ts.size()))
            throw std::invalid_argument("objective evaluated on a map with an invalid or uncollapsed cell");
        in[i] = members.contains(ts.category(cells[i])) ? 1 : 0;
    }
    return in;
}

template <typename Visit>
void for_each_neighbor(Dims dims, std::size_t i, Visit&& visit) {
    const int r = static_cast<int>(i / static_cast<std::size_t>(dims.cols));
    const int c = static_cast<int>(i % static_cast<std::size_t>(dims.cols));
    if (r > 0) visit(i - static_cast<std::size_t>(dims.cols));
    if (r + 1 < dims.rows) visit(i + static_cast<std::size_t>(dims.cols));
    if (c > 0) visit(i - 1);
    if (c + 1 < dims.cols) visit(i + 1);
}

// Eccentricity of `source` inside its component, reusing the caller's buffers.
int bfs_eccentricity(Dims dims, const std::vector<char>& in, std::size_t source, std::vector<int>& dist,
                     std::vector<std::size_t>& queue) {
    std::fill(dist.begin(), dist.end(), -1);
    queue.clear();
    queue.push_back(source);
    dist[source] = 0;
    int far = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto u = queue[head];
        far = std::max(far, dist[u]);
        for_each_neighbor(dims, u, [&](std::size_t v) {
            if (in[v] && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        });
    }
    return far;
}

}  // namespace

std::string_view to_string(ObjectiveKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<ObjectiveKind> parse_objective_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<ObjectiveKind>(i);
    return std::nullopt;
}

bool uses_target(ObjectiveKind k) {
    return k == ObjectiveKind::binary || k == ObjectiveKind::hybrid_river_binary ||
           k == ObjectiveKind::hybrid_field_binary;
}

int longest_shortest_path(const MapGrid& map, const TileSet& ts, CategorySet traversable) {
    const auto in = member_mask(map, ts, traversable);
    std::vector<int> dist(map.size());
    std::vector<std::size_t> queue;
    queue.reserve(map.size());
    int best = 0;
    for (std::size_t s = 0; s < in.size(); ++s)
        if (in[s]) best = std::max(best, bfs_eccentricity(map.dims(), in, s, dist, queue));
    return best;
}

int path_length(const MapGrid& map, const TileSet& ts) {
    return longest_shortest_path(map, ts, CategorySet{Category::path});
}

int count_regions(const MapGrid& map, const TileSet& ts, CategorySet members) {
    auto in = member_mask(map, ts, members);
    std::vector<std::size_t> stack;
    int regions = 0;
    for (std::size_t s = 0; s < in.size(); ++s) {
        if (!in[s]) continue;
        ++regions;
        in[s] = 0;
        stack.push_back(s);
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for_each_neighbor(map.dims(), u, [&](std::size_t v) {
                if (in[v]) {
                    in[v] = 0;
                    stack.push_back(v);
                }
            });
        }
    }
    return regions;
}

BiomeMetrics biome_metrics(const MapGrid& map, const TileSet& ts) {
    const CategorySet water{Category::water};
    BiomeMetrics m;
    m.river_regions = count_regions(map, ts, water);
    m.river_length = longest_shortest_path(map, ts, water);
    m.land_regions = count_regions(map, ts, water.complement());

    int non_path = 0, grass = 0, flowers = 0;
    for (int t : map.cells()) {
        const auto& tile = ts.tile(t);
        if (tile.is_water_center) ++m.water_centers;
        switch (tile.category) {
            case Category::water:
            case Category::shore: ++m.wet_tiles; break;
            case Category::hill: ++m.hill_tiles; break;
            case Category::grass: ++grass; break;
            case Category::flower: ++flowers; break;
            case Category::path: break;
        }
        if (tile.category != Category::path) ++non_path;
    }
    if (non_path > 0) {
        m.grass_percent = 100.0 * grass / non_path;
        m.flower_percent = 100.0 * flowers / non_path;
    }
    return m;
}

double binary_objective(const MapGrid& map, const TileSet& ts, int target) {
    return -std::abs(path_length(map, ts) - target);
}

double river_objective(const BiomeMetrics& m) {
    const double single_region = m.river_regions == 0 ? kNoRiverPenalty : 1.0 - m.river_regions;
    return single_region + std::min(0, m.river_length - kRiverTargetLength) - m.water_centers +
           std::min(0, kMaxLandRegions - m.land_regions);
}

double river_objective(const MapGrid& map, const TileSet& ts) { return river_objective(biome_metrics(map, ts)); }

double field_objective(const BiomeMetrics& m) {
    return -m.wet_tiles - m.hill_tiles + std::min(0.0, m.grass_percent - kMinCoveragePercent) +
           std::min(0.0, m.flower_percent - kMinCoveragePercent);
}

double field_objective(const MapGrid& map, const TileSet& ts) { return field_objective(biome_metrics(map, ts)); }

double hybrid_objective(const MapGrid& map, const TileSet& ts, int target, Biome biome) {
    const double biome_score = biome == Biome::river ? river_objective(map, ts) : field_objective(map, ts);
    return binary_objective(map, ts, target) + biome_score;
}

double score(const MapGrid& map, const TileSet& ts, const ObjectiveSpec& spec) {
    switch (spec.kind) {
        case ObjectiveKind::binary: return binary_objective(map, ts, spec.target_path_length);
        case ObjectiveKind::river: return river_objective(map, ts);
        case ObjectiveKind::field: return field_objective(map, ts);
        case ObjectiveKind::hybrid_river_binary:
            return hybrid_objective(map, ts, spec.target_path_length, Biome::river);
        case ObjectiveKind::hybrid_field_binary:
            return hybrid_objective(map, ts, spec.target_path_length, Biome::field);
    }
    throw std::invalid_argument("unknown objective kind");
}

}  // namespace wfcmdp
