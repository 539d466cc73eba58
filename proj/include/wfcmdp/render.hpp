#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfcmdp/map_grid.hpp"
#include "wfcmdp/tileset.hpp"

namespace wfcmdp {

class RenderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One line per row of space-separated tile ids.
std::string render_text(const MapGrid& map, const TileSet& ts);

/// Binary PPM (P6): cols*cell_px by rows*cell_px, every cell filled with its
/// tile colour. Uncollapsed cells are black.
std::vector<std::uint8_t> render_ppm(const MapGrid& map, const TileSet& ts, int cell_px);

}  // namespace wfcmdp
