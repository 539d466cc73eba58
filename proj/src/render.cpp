#include "wfcmdp/render.hpp"

#include <sstream>

namespace wfcmdp {

namespace {

void check_ids(const MapGrid& map, const TileSet& ts) {
    for (int t : map.cells())
        if (t != kUncollapsed && (t < 0 || t >= static_cast<int>(ts.size())))
            throw RenderError("unknown tile id " + std::to_string(t) + " (tileset has " + std::to_string(ts.size()) +
                              " tiles)");
}

}  // namespace

std::string render_text(const MapGrid& map, const TileSet& ts) {
    check_ids(map, ts);
    std::ostringstream os;
    for (int r = 0; r < map.rows(); ++r) {
        for (int c = 0; c < map.cols(); ++c) {
            if (c) os << ' ';
            os << map.at(r, c);
        }
        os << '\n';
    }
    return os.str();
}

std::vector<std::uint8_t> render_ppm(const MapGrid& map, const TileSet& ts, int cell_px) {
    if (cell_px < 1) throw RenderError("cell pixel size must be >= 1");
    check_ids(map, ts);
    const std::size_t width = static_cast<std::size_t>(map.cols()) * static_cast<std::size_t>(cell_px);
    const std::size_t height = static_cast<std::size_t>(map.rows()) * static_cast<std::size_t>(cell_px);
    const std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";

    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + width * height * 3);
    for (std::size_t y = 0; y < height; ++y) {
        const int r = static_cast<int>(y / static_cast<std::size_t>(cell_px));
        for (std::size_t x = 0; x < width; ++x) {
            const int t = map.at(r, static_cast<int>(x / static_cast<std::size_t>(cell_px)));
            const Rgb rgb = t == kUncollapsed ? Rgb{} : ts.tile(t).color;
            out.push_back(rgb.r);
            out.push_back(rgb.g);
            out.push_back(rgb.b);
        }
    }
    return out;
}

}  // namespace wfcmdp
