#pragma once

#include <optional>
#include <string_view>

#include "wfcmdp/map_grid.hpp"
#include "wfcmdp/tileset.hpp"

namespace wfcmdp {

enum class ObjectiveKind { binary, river, field, hybrid_river_binary, hybrid_field_binary };

std::string_view to_string(ObjectiveKind k);
std::optional<ObjectiveKind> parse_objective_kind(std::string_view name);
bool uses_target(ObjectiveKind k);

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::binary;
    int target_path_length = 0;  // P; binary and hybrid kinds only
};

enum class Biome { river, field };

/// Map statistics feeding the river and field scores.
struct BiomeMetrics {
    int river_regions = 0;    // r_r: 4-connected components of water cells
    int river_length = 0;     // diameter of the water subgraph, in edges
    int water_centers = 0;    // n_c
    int land_regions = 0;     // r_l: 4-connected components of non-water cells
    int wet_tiles = 0;        // n_w: water plus shore cells
    int hill_tiles = 0;       // n_h
    double grass_percent = 0;   // g, over non-path cells
    double flower_percent = 0;  // f, over non-path cells
};

/// Largest shortest-path edge count between two traversable cells in the same
/// 4-connected component; 0 with fewer than two traversable cells.
int longest_shortest_path(const MapGrid& map, const TileSet& ts, CategorySet traversable);

/// p: longest shortest path over path-category cells.
int path_length(const MapGrid& map, const TileSet& ts);

/// Number of 4-connected components of cells whose category is in `members`.
int count_regions(const MapGrid& map, const TileSet& ts, CategorySet members);

BiomeMetrics biome_metrics(const MapGrid& map, const TileSet& ts);

// All scores are <= 0, with 0 exactly at the objective's goal.

/// -|p - P|.
double binary_objective(const MapGrid& map, const TileSet& ts, int target);

/// (1 - r_r) + min(0, len - 35) - n_c + min(0, 3 - r_l); a map with no water
/// at all takes -35 in place of the (1 - r_r) term.
double river_objective(const BiomeMetrics& m);
double river_objective(const MapGrid& map, const TileSet& ts);

/// -n_w - n_h + min(0, g - 20) + min(0, f - 20).
double field_objective(const BiomeMetrics& m);
double field_objective(const MapGrid& map, const TileSet& ts);

double hybrid_objective(const MapGrid& map, const TileSet& ts, int target, Biome biome);

/// Dispatches on spec.kind. The map must be fully collapsed.
double score(const MapGrid& map, const TileSet& ts, const ObjectiveSpec& spec);

inline constexpr int kRiverTargetLength = 35;
inline constexpr int kMaxLandRegions = 3;
inline constexpr double kMinCoveragePercent = 20.0;
inline constexpr double kNoRiverPenalty = -35.0;

}  // namespace wfcmdp
