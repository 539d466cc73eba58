#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfcmdp/evolution.hpp"
#include "wfcmdp/map_grid.hpp"
#include "wfcmdp/objectives.hpp"

namespace wfcmdp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A sweep: every (method, target, run) cell, run i seeded base_seed + i.
struct ExperimentConfig {
    std::filesystem::path tileset;
    Dims dims{20, 20};
    std::vector<Method> methods;
    ObjectiveKind objective = ObjectiveKind::binary;
    std::vector<int> targets;
    int runs_per_cell = 20;
    std::uint64_t base_seed = 0;
    int generations = 600;
    int population = 48;
    bool early_stop = true;
    // Per-method hyperparameters; methods without an entry use tuned_params().
    std::map<Method, EvoParams> params;
    std::filesystem::path output = "results.csv";
    std::filesystem::path stats_output;
    // wall_time_s stays empty unless set, so reruns are byte-identical.
    bool record_wall_time = false;

    void validate() const;
    EvoParams params_for(Method m, std::uint64_t seed) const;
    /// Targets actually swept: `targets`, or {0} for kinds without a target.
    std::vector<int> effective_targets() const;
    /// Hash of everything that affects results (paths and timing excluded).
    std::string fingerprint() const;
};

/// Parses a JSON config. Relative paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct SweepOptions {
    // Stop after this many newly finished runs without finalizing the file,
    // as if the process were killed. Tests use it to exercise resumption.
    std::optional<std::size_t> stop_after;
    std::function<void(const RunRecord&)> on_record;
};

/// Runs every missing cell of the sweep, appending each record to
/// cfg.output as it finishes, then rewrites the file sorted by
/// (method, target, seed). Records already present in a results file with
/// the same fingerprint are reused, never rerun. Throws ConfigError on a
/// fingerprint mismatch and std::ios_base::failure on I/O errors.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const SweepOptions& options = {});

struct CellStats {
    Method method = Method::baseline;
    ObjectiveKind objective = ObjectiveKind::binary;
    int target = 0;
    int n_runs = 0;
    int n_converged = 0;
    double converged_fraction = 0.0;
    std::optional<double> mean_generations;  // over converged runs
    std::optional<double> se_generations;    // sample sd / sqrt(n); needs n >= 2
};

/// Groups by (method, objective, target) in that sort order.
std::vector<CellStats> convergence_stats(std::span<const RunRecord> records);

// CSV persistence.

inline constexpr const char* kResultsHeader =
    "method,objective,target_P,seed,converged,generation_of_convergence,best_final_reward,generations_run,wall_time_s";
inline constexpr const char* kStatsHeader =
    "method,objective,target_P,n_runs,n_converged,converged_fraction,mean_generations,se_generations";

std::string format_result_row(const RunRecord& rec, bool with_wall_time);
void write_results_csv(std::ostream& out, std::span<const RunRecord> records, const std::string& fingerprint,
                       bool with_wall_time);
/// Reads a results file; a torn final line (no newline) is ignored. Returns
/// the fingerprint line's value, or empty if the file has none.
std::vector<RunRecord> read_results_csv(std::istream& in, std::string* fingerprint = nullptr);
std::vector<RunRecord> load_results_csv(const std::filesystem::path& path, std::string* fingerprint = nullptr);

void write_stats_csv(std::ostream& out, std::span<const CellStats> stats);
void save_stats_csv(const std::filesystem::path& path, std::span<const CellStats> stats);

/// Human-readable table in the style "5.9±0.6" / "35" / "—", one block per
/// method with Generations and Converged% rows.
std::string format_stats_table(std::span<const CellStats> stats);

}  // namespace wfcmdp
