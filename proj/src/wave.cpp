#include "wfcmdp/wave.hpp"

#include <bit>
#include <random>
#include <stdexcept>


namespace wfcmdp {

Wave::Wave(Dims dims, const TileSet& tiles) : tiles_(&tiles), dims_(dims) {
    if (dims.rows < 1 || dims.cols < 1) throw std::invalid_argument("wave dimensions must be at least 1x1");
    cand_.assign(dims.cells(), TileMask::full(tiles.size()).bits());
    chosen_.assign(dims.cells(), kUncollapsed);
}

std::optional<int> Wave::collapsed_tile(Cell c) const {
    const int t = chosen_[index(c)];
    if (t == kUncollapsed) return std::nullopt;
    return t;
}

std::optional<Cell> Wave::next_cell() const {
    if (contradiction_) return std::nullopt;
    std::optional<Cell> best;
    int best_count = 0;
    for (int r = 0; r < dims_.rows; ++r) {
        for (int c = 0; c < dims_.cols; ++c) {
            const auto i = index({r, c});
            if (chosen_[i] != kUncollapsed) continue;
            const int n = std::popcount(cand_[i]);
            if (!best || n < best_count) {
                best = Cell{r, c};
                best_count = n;
            }
        }
    }
    return best;
}

Cell Wave::select_next_cell() const {
    auto c = next_cell();
    if (!c) throw std::logic_error("select_next_cell: no uncollapsed cell remains");
    return *c;
}

TileMask Wave::legal_tiles(Cell c) const {
    if (is_collapsed(c)) throw std::logic_error("legal_tiles: cell is already collapsed");
    return candidates(c);
}

std::uint64_t Wave::support(std::uint64_t from, Direction d) const {
    std::uint64_t s = 0;
    while (from) {
        const int t = std::countr_zero(from);
        from &= from - 1;
        s |= tiles_->allowed(t, d).bits();
    }
    return s;
}

std::optional<Contradiction> Wave::collapse(Cell c, int tile, PropagationOrder order) {
    if (contradiction_) throw std::logic_error("collapse: wave is truncated after a contradiction");
    if (c.row < 0 || c.row >= dims_.rows || c.col < 0 || c.col >= dims_.cols)
        throw std::out_of_range("collapse: cell outside the wave");
    if (is_collapsed(c)) throw std::logic_error("collapse: cell is already collapsed");
    if (tile < 0 || !candidates(c)[static_cast<std::size_t>(tile)])
        throw std::logic_error("collapse: tile is not a candidate of the cell");

    const auto i = index(c);
    cand_[i] = std::uint64_t{1} << tile;
    chosen_[i] = tile;
    const int at_step = step_++;

    if (auto emptied = propagate({i}, order)) {
        contradiction_ = Contradiction{*emptied, at_step};
        return contradiction_;
    }
    return std::nullopt;
}

std::optional<Contradiction> Wave::restrict(Cell c, TileMask keep, PropagationOrder order) {
    if (contradiction_) throw std::logic_error("restrict: wave is truncated after a contradiction");
    if (c.row < 0 || c.row >= dims_.rows || c.col < 0 || c.col >= dims_.cols)
        throw std::out_of_range("restrict: cell outside the wave");
    if (is_collapsed(c)) throw std::logic_error("restrict: cell is already collapsed");
    const auto i = index(c);
    const std::uint64_t narrowed = cand_[i] & keep.bits();
    if (narrowed == cand_[i]) return std::nullopt;
    cand_[i] = narrowed;
    if (narrowed == 0) {
        contradiction_ = Contradiction{c, step_};
        return contradiction_;
    }
    if (auto emptied = propagate({i}, order)) {
        contradiction_ = Contradiction{*emptied, step_};
        return contradiction_;
    }
    return std::nullopt;
}

std::optional<Cell> Wave::propagate(std::vector<std::size_t> worklist, PropagationOrder order) {
    std::vector<char> queued(cand_.size(), 0);
    for (auto i : worklist) queued[i] = 1;
    std::size_t head = 0;
    std::mt19937_64 shuffle_rng(order.seed);

    while (head < worklist.size()) {
        std::size_t i = 0;
        switch (order.kind) {
            case PropagationOrder::Kind::fifo:
                i = worklist[head++];
                break;
            case PropagationOrder::Kind::lifo:
                i = worklist.back();
                worklist.pop_back();
                break;
            case PropagationOrder::Kind::shuffled: {
                std::uniform_int_distribution<std::size_t> pick(head, worklist.size() - 1);
                std::swap(worklist[head], worklist[pick(shuffle_rng)]);
                i = worklist[head++];
                break;
            }
        }
        queued[i] = 0;
        const int r = static_cast<int>(i / static_cast<std::size_t>(dims_.cols));
        const int c = static_cast<int>(i % static_cast<std::size_t>(dims_.cols));

        for (auto d : kDirections) {
            const int nr = r + row_step(d);
            const int nc = c + col_step(d);
            if (nr < 0 || nr >= dims_.rows || nc < 0 || nc >= dims_.cols) continue;
            const auto j = index({nr, nc});
            const std::uint64_t narrowed = cand_[j] & support(cand_[i], d);
            if (narrowed == cand_[j]) continue;
            cand_[j] = narrowed;
            if (narrowed == 0) return Cell{nr, nc};
            if (!queued[j]) {
                queued[j] = 1;
                worklist.push_back(j);
            }
        }
    }
    return std::nullopt;
}

MapGrid Wave::to_map() const { return MapGrid(dims_, chosen_); }

bool Wave::arc_consistent() const {
    for (int r = 0; r < dims_.rows; ++r) {
        for (int c = 0; c < dims_.cols; ++c) {
            const std::uint64_t here = cand_[index({r, c})];
            for (auto d : kDirections) {
                const int nr = r + row_step(d);
                const int nc = c + col_step(d);
                if (nr < 0 || nr >= dims_.rows || nc < 0 || nc >= dims_.cols) continue;
                const std::uint64_t there = cand_[index({nr, nc})];
                std::uint64_t rest = here;
                while (rest) {
                    const int t = std::countr_zero(rest);
                    rest &= rest - 1;
                    if ((tiles_->allowed(t, d).bits() & there) == 0) return false;
                }
            }
        }
    }
    return true;
}

}  // namespace wfcmdp
