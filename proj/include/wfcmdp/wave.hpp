#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wfcmdp/map_grid.hpp"
#include "wfcmdp/tileset.hpp"

namespace wfcmdp {

/// Cell whose candidate set emptied during propagation, and the timestep of
/// the collapse that caused it.
struct Contradiction {
    Cell cell;
    int step = 0;

    friend bool operator==(const Contradiction&, const Contradiction&) = default;
};

/// Worklist discipline for propagation. The arc-consistent fixpoint is the
/// same under every order; only which emptied cell gets reported first may
/// differ. `fifo` is what the environment uses.
struct PropagationOrder {
    enum class Kind { fifo, lifo, shuffled };
    Kind kind = Kind::fifo;
    std::uint64_t seed = 0;  // shuffled only
};

/// Superposition grid for the simple tiled model.
///
/// Candidates are bitmasks over tile ids; a cell counts as collapsed only once
/// a tile was chosen for it with collapse(), even if propagation already
/// narrowed it to a singleton.
class Wave {
public:
    /// Every cell starts with the full tile set. Throws std::invalid_argument
    /// for a zero dimension.
    Wave(Dims dims, const TileSet& tiles);

    Dims dims() const { return dims_; }
    const TileSet& tileset() const { return *tiles_; }

    TileMask candidates(Cell c) const { return TileMask(cand_[index(c)], tiles_->size()); }
    bool is_collapsed(Cell c) const { return chosen_[index(c)] != kUncollapsed; }
    std::optional<int> collapsed_tile(Cell c) const;

    /// Number of collapse() calls that succeeded or contradicted (timestep t).
    int step() const { return step_; }
    bool fully_collapsed() const { return step_ == static_cast<int>(dims_.cells()) && !contradiction_; }
    const std::optional<Contradiction>& contradiction() const { return contradiction_; }

    /// Uncollapsed cell with the fewest candidates, ties to the smallest row
    /// then smallest column. Throws std::logic_error when nothing is left.
    Cell select_next_cell() const;
    std::optional<Cell> next_cell() const;

    /// Candidate mask at an uncollapsed cell. Throws std::logic_error if `c`
    /// is already collapsed.
    TileMask legal_tiles(Cell c) const;

    /// Fixes `c` to `tile` and propagates to an arc-consistent fixpoint.
    /// Returns the contradiction if a candidate set empties; the wave is then
    /// truncated and rejects further collapses. Throws std::logic_error when
    /// `tile` is not a candidate, `c` is already collapsed, or the wave is
    /// truncated.
    std::optional<Contradiction> collapse(Cell c, int tile, PropagationOrder order = {});

    /// Removes tiles outside `keep` from an uncollapsed cell's candidates and
    /// propagates, without collapsing it or advancing the timestep.
    std::optional<Contradiction> restrict(Cell c, TileMask keep, PropagationOrder order = {});

    /// Current grid: the chosen tile per cell, kUncollapsed elsewhere.
    MapGrid to_map() const;

    /// Every candidate of every cell has a supporting candidate in each
    /// in-bounds neighbor.
    bool arc_consistent() const;

private:
    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(dims_.cols) + static_cast<std::size_t>(c.col);
    }
    std::uint64_t support(std::uint64_t from, Direction d) const;
    std::optional<Cell> propagate(std::vector<std::size_t> worklist, PropagationOrder order);

    const TileSet* tiles_;
    Dims dims_;
    std::vector<std::uint64_t> cand_;
    std::vector<int> chosen_;
    int step_ = 0;
    std::optional<Contradiction> contradiction_;
};

}  // namespace wfcmdp
