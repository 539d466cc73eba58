#include "wfcmdp/map_grid.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace wfcmdp {

MapGrid::MapGrid(Dims dims, int fill) : dims_(dims), cells_(dims.cells(), fill) {
    if (dims.rows < 0 || dims.cols < 0) throw std::invalid_argument("negative map dimension");
}

MapGrid::MapGrid(Dims dims, std::vector<int> cells) : dims_(dims), cells_(std::move(cells)) {
    if (dims.rows < 0 || dims.cols < 0) throw std::invalid_argument("negative map dimension");
    if (cells_.size() != dims.cells()) throw std::invalid_argument("cell count does not match dimensions");
}

bool MapGrid::fully_collapsed() const {
    return std::none_of(cells_.begin(), cells_.end(), [](int t) { return t == kUncollapsed; });
}

MapGrid MapGrid::transposed() const {
    MapGrid out(Dims{dims_.cols, dims_.rows});
    for (int r = 0; r < dims_.rows; ++r)
        for (int c = 0; c < dims_.cols; ++c) out.at(c, r) = at(r, c);
    return out;
}

void write_map(std::ostream& out, const MapGrid& map) {
    out << map.rows() << ' ' << map.cols() << '\n';
    for (int r = 0; r < map.rows(); ++r) {
        for (int c = 0; c < map.cols(); ++c) {
            if (c) out << ' ';
            out << map.at(r, c);
        }
        out << '\n';
    }
}

MapGrid read_map(std::istream& in) {
    Dims dims;
    if (!(in >> dims.rows >> dims.cols)) throw MapFormatError("map header must be \"rows cols\"");
    if (dims.rows < 1 || dims.cols < 1) throw MapFormatError("map dimensions must be positive");
    std::vector<int> cells(dims.cells());
    for (auto& v : cells) {
        if (!(in >> v)) throw MapFormatError("map body has fewer entries than rows*cols");
        if (v < kUncollapsed) throw MapFormatError("tile id below -1 in map body");
    }
    std::string extra;
    if (in >> extra) throw MapFormatError("trailing data after map body");
    return MapGrid(dims, std::move(cells));
}

std::string format_map(const MapGrid& map) {
    std::ostringstream os;
    write_map(os, map);
    return os.str();
}

MapGrid parse_map(const std::string& text) {
    std::istringstream is(text);
    return read_map(is);
}

void save_map(const std::filesystem::path& path, const MapGrid& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    write_map(out, map);
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

MapGrid load_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return read_map(in);
}

}  // namespace wfcmdp
