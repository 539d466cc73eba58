#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wfcmdp/map_grid.hpp"

namespace wfcmdp {

enum class Category : std::uint8_t { path, grass, flower, water, hill, shore };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

/// Small set of categories, used as a traversability predicate.
class CategorySet {
public:
    constexpr CategorySet() = default;
    constexpr CategorySet(std::initializer_list<Category> cs) {
        for (auto c : cs) bits_ |= bit(c);
    }
    constexpr bool contains(Category c) const { return (bits_ & bit(c)) != 0; }
    constexpr CategorySet complement() const {
        CategorySet s;
        s.bits_ = static_cast<std::uint8_t>(~bits_ & 0x3f);
        return s;
    }

private:
    static constexpr std::uint8_t bit(Category c) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c)); }
    std::uint8_t bits_ = 0;
};

enum class Direction : std::uint8_t { north = 0, east = 1, south = 2, west = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::north, Direction::east, Direction::south,
                                                      Direction::west};

constexpr Direction opposite(Direction d) {
    return static_cast<Direction>((static_cast<unsigned>(d) + 2u) % 4u);
}
constexpr int row_step(Direction d) { return d == Direction::north ? -1 : d == Direction::south ? 1 : 0; }
constexpr int col_step(Direction d) { return d == Direction::west ? -1 : d == Direction::east ? 1 : 0; }

/// Bitmask over tile ids in [0, size).
class TileMask {
public:
    constexpr TileMask() = default;
    constexpr TileMask(std::uint64_t bits, std::size_t size) : bits_(bits), size_(size) {}

    static constexpr TileMask full(std::size_t size) {
        return TileMask(size >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << size) - 1), size);
    }

    constexpr bool operator[](std::size_t t) const { return t < size_ && ((bits_ >> t) & 1u) != 0; }
    constexpr bool test(std::size_t t) const { return (*this)[t]; }
    constexpr std::size_t size() const { return size_; }
    constexpr std::uint64_t bits() const { return bits_; }
    int count() const { return std::popcount(bits_); }
    bool any() const { return bits_ != 0; }
    bool empty() const { return bits_ == 0; }

    friend constexpr bool operator==(const TileMask&, const TileMask&) = default;

private:
    std::uint64_t bits_ = 0;
    std::size_t size_ = 0;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Tile {
    int id = 0;
    std::string name;
    Category category = Category::grass;
    bool is_water_center = false;
    std::array<std::string, 4> edges;  // indexed by Direction
    Rgb color;

    const std::string& edge(Direction d) const { return edges[static_cast<std::size_t>(d)]; }
};

class TilesetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable tile catalogue with adjacency derived from edge labels:
/// b may sit in direction d of a iff edge(a, d) == edge(b, opposite(d)).
class TileSet {
public:
    static constexpr std::size_t kMaxTiles = 64;

    // Validates names, water-center flags, and that no tile is dead in any
    // direction. Tile ids are reassigned densely in list order.
    static TileSet from_tiles(std::vector<Tile> tiles);

    std::size_t size() const { return tiles_.size(); }
    const Tile& tile(int id) const { return tiles_.at(static_cast<std::size_t>(id)); }
    const std::vector<Tile>& tiles() const { return tiles_; }

    /// Tiles permitted as the neighbor of `tile` in direction `d`.
    TileMask allowed(int tile, Direction d) const {
        return TileMask(allowed_[static_cast<std::size_t>(tile) * 4 + static_cast<std::size_t>(d)], tiles_.size());
    }
    bool allows(int a, Direction d, int b) const { return allowed(a, d)[static_cast<std::size_t>(b)]; }

    Category category(int id) const { return tiles_[static_cast<std::size_t>(id)].category; }
    std::optional<int> find(std::string_view name) const;

    /// Swaps north/south with west/east edge labels; pairs with MapGrid::transposed.
    TileSet transposed() const;

private:
    std::vector<Tile> tiles_;
    std::vector<std::uint64_t> allowed_;  // [tile * 4 + direction]
};

/// Parses a ".tileset.json" document.
TileSet load_tileset(std::string_view json_text);
TileSet load_tileset_file(const std::filesystem::path& path);

/// Adjacent cell pairs (4-connectivity, each unordered pair once) whose tiles
/// are not allowed next to each other. Throws std::invalid_argument on an
/// uncollapsed cell or an out-of-range tile id.
std::size_t count_violations(const MapGrid& map, const TileSet& ts);

}  // namespace wfcmdp
