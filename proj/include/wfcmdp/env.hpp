#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wfcmdp/map_grid.hpp"
#include "wfcmdp/objectives.hpp"
#include "wfcmdp/tileset.hpp"
#include "wfcmdp/wave.hpp"

namespace wfcmdp {

inline constexpr double kContradictionReward = -1000.0;

/// Observation: the partially collapsed grid plus the cell the next action
/// will collapse (absent once the episode is over).
struct EnvState {
    MapGrid grid;
    std::optional<Cell> next_cell;
    int t = 0;

    friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepOutcome {
    EnvState state;
    double reward = 0.0;
    bool terminated = false;  // all cells collapsed
    bool truncated = false;   // contradiction
};

/// Zeroes masked-out logits and takes the argmax among legal tiles, ties to
/// the smallest id. Throws std::invalid_argument on an empty mask or a logit
/// vector whose length differs from the mask's.
int decode_action(std::span<const double> logits, const TileMask& legal);

/// WaveFunctionCollapse as an episodic decision process: each step collapses
/// the wave's next cell to the decoded action; only the terminal step is
/// rewarded.
class WfcEnv {
public:
    WfcEnv(Dims dims, const TileSet& tiles, ObjectiveSpec objective);

    EnvState reset();
    StepOutcome step(std::span<const double> logits);

    /// step() without materialising the observation.
    struct Transition {
        double reward = 0.0;
        bool terminated = false;
        bool truncated = false;
        int tile = kUncollapsed;
    };
    Transition advance(std::span<const double> logits);

    EnvState state() const;
    bool done() const { return terminated_ || truncated_; }
    std::optional<Cell> next_cell() const { return done() ? std::nullopt : next_; }
    TileMask legal_mask() const;
    const Wave& wave() const { return wave_; }
    Dims dims() const { return dims_; }
    const TileSet& tileset() const { return *tiles_; }

private:
    const TileSet* tiles_;
    Dims dims_;
    ObjectiveSpec objective_;
    Wave wave_;
    std::optional<Cell> next_;
    bool terminated_ = false;
    bool truncated_ = false;
};

/// Genome-to-timestep mapping for action sequences: seq1d uses action t at
/// step t, grid2d uses the action stored at whichever cell is collapsed.
enum class ActionLayout { seq1d, grid2d };

struct RolloutResult {
    MapGrid map;  // final grid; partially collapsed after a contradiction
    std::optional<Contradiction> contradiction;
    double reward = 0.0;
    int steps = 0;

    bool completed() const { return !contradiction; }
};

/// Runs a whole episode. `actions` holds dims.cells() logit vectors of
/// ts.size() entries each, row-major. Throws std::invalid_argument on a
/// wrong action count.
RolloutResult rollout(Dims dims, const TileSet& ts, const ObjectiveSpec& objective, std::span<const double> actions,
                      ActionLayout layout);

}  // namespace wfcmdp
