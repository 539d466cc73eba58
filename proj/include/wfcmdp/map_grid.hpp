#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace wfcmdp {

/// Grid extent: rows (map length) by cols (map width).
struct Dims {
    int rows = 0;
    int cols = 0;

    std::size_t cells() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    friend bool operator==(const Dims&, const Dims&) = default;
};

struct Cell {
    int row = 0;
    int col = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

inline constexpr int kUncollapsed = -1;

/// Row-major grid of tile ids; kUncollapsed marks cells without a tile.
class MapGrid {
public:
    MapGrid() = default;
    MapGrid(Dims dims, int fill = kUncollapsed);
    MapGrid(Dims dims, std::vector<int> cells);

    Dims dims() const { return dims_; }
    int rows() const { return dims_.rows; }
    int cols() const { return dims_.cols; }
    std::size_t size() const { return cells_.size(); }

    int at(int row, int col) const { return cells_[index(row, col)]; }
    int& at(int row, int col) { return cells_[index(row, col)]; }
    int at(Cell c) const { return at(c.row, c.col); }

    const std::vector<int>& cells() const { return cells_; }

    bool fully_collapsed() const;
    MapGrid transposed() const;

    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.cols) + static_cast<std::size_t>(col);
    }

    friend bool operator==(const MapGrid&, const MapGrid&) = default;

private:
    Dims dims_;
    std::vector<int> cells_;
};

class MapFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Map file: "rows cols" on the first line, then one line per row of
// space-separated tile ids.
void write_map(std::ostream& out, const MapGrid& map);
MapGrid read_map(std::istream& in);
std::string format_map(const MapGrid& map);
MapGrid parse_map(const std::string& text);

void save_map(const std::filesystem::path& path, const MapGrid& map);
MapGrid load_map(const std::filesystem::path& path);

}  // namespace wfcmdp
