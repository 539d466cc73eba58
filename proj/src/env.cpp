#include "wfcmdp/env.hpp"

#include <stdexcept>

namespace wfcmdp {

int decode_action(std::span<const double> logits, const TileMask& legal) {
    if (logits.size() != legal.size()) throw std::invalid_argument("decode_action: logits and mask lengths differ");
    if (legal.empty()) throw std::invalid_argument("decode_action: no legal tile");
    int best = -1;
    double best_value = 0.0;
    for (std::size_t t = 0; t < logits.size(); ++t) {
        if (!legal[t]) continue;
        if (best < 0 || logits[t] > best_value) {
            best = static_cast<int>(t);
            best_value = logits[t];
        }
    }
    return best;
}

WfcEnv::WfcEnv(Dims dims, const TileSet& tiles, ObjectiveSpec objective)
    : tiles_(&tiles), dims_(dims), objective_(objective), wave_(dims, tiles) {
    next_ = wave_.next_cell();
}

EnvState WfcEnv::reset() {
    wave_ = Wave(dims_, *tiles_);
    next_ = wave_.next_cell();
    terminated_ = false;
    truncated_ = false;
    return state();
}

EnvState WfcEnv::state() const { return EnvState{wave_.to_map(), next_cell(), wave_.step()}; }

TileMask WfcEnv::legal_mask() const {
    if (done()) throw std::logic_error("legal_mask: episode is over");
    return wave_.legal_tiles(*next_);
}

WfcEnv::Transition WfcEnv::advance(std::span<const double> logits) {
    if (done()) throw std::logic_error("step called after the episode ended");
    Transition tr;
    tr.tile = decode_action(logits, wave_.legal_tiles(*next_));
    if (wave_.collapse(*next_, tr.tile)) {
        truncated_ = true;
        tr.truncated = true;
        tr.reward = kContradictionReward;
        return tr;
    }
    next_ = wave_.next_cell();
    if (!next_) {
        terminated_ = true;
        tr.terminated = true;
        tr.reward = score(wave_.to_map(), *tiles_, objective_);
    }
    return tr;
}

StepOutcome WfcEnv::step(std::span<const double> logits) {
    const auto tr = advance(logits);
    return StepOutcome{state(), tr.reward, tr.terminated, tr.truncated};
}

RolloutResult rollout(Dims dims, const TileSet& ts, const ObjectiveSpec& objective, std::span<const double> actions,
                      ActionLayout layout) {
    const std::size_t n_t = ts.size();
    if (actions.size() != dims.cells() * n_t)
        throw std::invalid_argument("rollout: expected " + std::to_string(dims.cells()) + " actions of " +
                                    std::to_string(n_t) + " logits");
    WfcEnv env(dims, ts, objective);
    RolloutResult out;
    for (std::size_t t = 0; !env.done(); ++t) {
        const Cell c = *env.next_cell();
        const std::size_t locus =
            layout == ActionLayout::seq1d ? t : static_cast<std::size_t>(c.row) * static_cast<std::size_t>(dims.cols) +
                                                    static_cast<std::size_t>(c.col);
        const auto tr = env.advance(actions.subspan(locus * n_t, n_t));
        out.reward += tr.reward;
        ++out.steps;
    }
    out.map = env.wave().to_map();
    out.contradiction = env.wave().contradiction();
    return out;
}

}  // namespace wfcmdp
