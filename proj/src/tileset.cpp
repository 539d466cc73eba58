#include "wfcmdp/tileset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace wfcmdp {

namespace {

constexpr std::array<std::string_view, 6> kCategoryNames{"path", "grass", "flower", "water", "hill", "shore"};

constexpr std::array<std::string_view, 4> kDirectionNames{"north", "east", "south", "west"};

bool all_edges_equal(const Tile& t, const std::string& label) {
    for (const auto& e : t.edges)
        if (e != label) return false;
    return true;
}

}  // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
        if (kCategoryNames[i] == name) return static_cast<Category>(i);
    return std::nullopt;
}

TileSet TileSet::from_tiles(std::vector<Tile> tiles) {
    if (tiles.empty()) throw TilesetError("tileset has no tiles");
    if (tiles.size() > kMaxTiles)
        throw TilesetError("tileset has " + std::to_string(tiles.size()) + " tiles; at most " +
                           std::to_string(kMaxTiles) + " are supported");

    std::unordered_set<std::string> names;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        auto& t = tiles[i];
        t.id = static_cast<int>(i);
        if (t.name.empty()) throw TilesetError("tile " + std::to_string(i) + " has an empty name");
        if (!names.insert(t.name).second) throw TilesetError("duplicate tile name \"" + t.name + "\"");
        for (const auto& e : t.edges)
            if (e.empty()) throw TilesetError("tile \"" + t.name + "\" has an empty edge label");
    }

    // The water-interior label is whatever label the flagged centers carry on
    // all four sides. Exactly the water tiles uniform in that label are centers.
    std::optional<std::string> interior;
    for (const auto& t : tiles) {
        if (!t.is_water_center) continue;
        if (t.category != Category::water)
            throw TilesetError("water-center tile \"" + t.name + "\" must have category water");
        if (!all_edges_equal(t, t.edges[0]))
            throw TilesetError("water-center tile \"" + t.name + "\" must carry one label on all four edges");
        if (interior && *interior != t.edges[0])
            throw TilesetError("water-center tiles disagree on the water-interior edge label");
        interior = t.edges[0];
    }
    if (interior) {
        for (const auto& t : tiles)
            if (t.category == Category::water && !t.is_water_center && all_edges_equal(t, *interior))
                throw TilesetError("tile \"" + t.name + "\" is water-interior on every edge but not marked water_center");
    }

    TileSet ts;
    ts.allowed_.assign(tiles.size() * 4, 0);
    for (std::size_t a = 0; a < tiles.size(); ++a) {
        for (auto d : kDirections) {
            std::uint64_t mask = 0;
            for (std::size_t b = 0; b < tiles.size(); ++b)
                if (tiles[a].edge(d) == tiles[b].edge(opposite(d))) mask |= std::uint64_t{1} << b;
            if (mask == 0)
                throw TilesetError("dead tile \"" + tiles[a].name + "\": no tile matches its " +
                                   std::string(kDirectionNames[static_cast<std::size_t>(d)]) + " edge \"" +
                                   tiles[a].edge(d) + "\"");
            ts.allowed_[a * 4 + static_cast<std::size_t>(d)] = mask;
        }
    }
    ts.tiles_ = std::move(tiles);
    return ts;
}

std::optional<int> TileSet::find(std::string_view name) const {
    for (const auto& t : tiles_)
        if (t.name == name) return t.id;
    return std::nullopt;
}

TileSet TileSet::transposed() const {
    std::vector<Tile> tiles = tiles_;
    for (auto& t : tiles) {
        // Transposing maps (r, c) to (c, r): north <-> west, south <-> east.
        std::swap(t.edges[static_cast<std::size_t>(Direction::north)], t.edges[static_cast<std::size_t>(Direction::west)]);
        std::swap(t.edges[static_cast<std::size_t>(Direction::south)], t.edges[static_cast<std::size_t>(Direction::east)]);
    }
    return from_tiles(std::move(tiles));
}

TileSet load_tileset(std::string_view json_text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw TilesetError(std::string("tileset parse error: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("tiles") || !doc["tiles"].is_array())
        throw TilesetError("tileset document needs a top-level \"tiles\" array");

    std::vector<Tile> tiles;
    for (const auto& entry : doc["tiles"]) {
        if (!entry.is_object()) throw TilesetError("tile entries must be objects");
        Tile t;
        try {
            t.name = entry.at("name").get<std::string>();
            const auto cat_name = entry.at("category").get<std::string>();
            auto cat = parse_category(cat_name);
            if (!cat) throw TilesetError("tile \"" + t.name + "\" has unknown category \"" + cat_name + "\"");
            t.category = *cat;
            const auto& edges = entry.at("edges");
            if (!edges.is_array() || edges.size() != 4)
                throw TilesetError("tile \"" + t.name + "\" needs exactly 4 edge labels [n, e, s, w]");
            for (std::size_t i = 0; i < 4; ++i) t.edges[i] = edges[i].get<std::string>();
            t.is_water_center = entry.value("water_center", false);
            if (entry.contains("color")) {
                const auto& col = entry["color"];
                if (!col.is_array() || col.size() != 3)
                    throw TilesetError("tile \"" + t.name + "\" color must be [r, g, b]");
                std::array<int, 3> rgb{};
                for (std::size_t i = 0; i < 3; ++i) {
                    rgb[i] = col[i].get<int>();
                    if (rgb[i] < 0 || rgb[i] > 255)
                        throw TilesetError("tile \"" + t.name + "\" color component out of 0-255");
                }
                t.color = Rgb{static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                              static_cast<std::uint8_t>(rgb[2])};
            }
        } catch (const json::exception& e) {
            throw TilesetError(std::string("malformed tile entry: ") + e.what());
        }
        tiles.push_back(std::move(t));
    }
    return TileSet::from_tiles(std::move(tiles));
}

TileSet load_tileset_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open tileset " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_tileset(ss.str());
}

std::size_t count_violations(const MapGrid& map, const TileSet& ts) {
    const int n = static_cast<int>(ts.size());
    for (int t : map.cells()) {
        if (t == kUncollapsed) throw std::invalid_argument("count_violations: map has an uncollapsed cell");
        if (t < 0 || t >= n) throw std::invalid_argument("count_violations: tile id out of range");
    }
    std::size_t violations = 0;
    for (int r = 0; r < map.rows(); ++r) {
        for (int c = 0; c < map.cols(); ++c) {
            const int t = map.at(r, c);
            if (c + 1 < map.cols() && !ts.allows(t, Direction::east, map.at(r, c + 1))) ++violations;
            if (r + 1 < map.rows() && !ts.allows(t, Direction::south, map.at(r + 1, c))) ++violations;
        }
    }
    return violations;
}

}  // namespace wfcmdp
