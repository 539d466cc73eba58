// wfcmdp: WaveFunctionCollapse map generation and evolutionary optimization.
//
// Exit codes: 0 ok, 1 configuration/usage error, 2 WFC contradiction,
// 3 I/O failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wfcmdp/env.hpp"
#include "wfcmdp/evolution.hpp"
#include "wfcmdp/harness.hpp"
#include "wfcmdp/map_grid.hpp"
#include "wfcmdp/parallel.hpp"
#include "wfcmdp/render.hpp"
#include "wfcmdp/rng.hpp"
#include "wfcmdp/tileset.hpp"

namespace fs = std::filesystem;
using namespace wfcmdp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitContradiction = 2;
constexpr int kExitIo = 3;

struct ConfigFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string tileset = WFCMDP_DEFAULT_TILESET;
    std::uint64_t seed = 0;
    std::string out;
    CLI::Option* tileset_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

TileSet load_tiles(const fs::path& path) {
    if (!fs::exists(path)) throw std::ios_base::failure("tileset not found: " + path.string());
    return load_tileset_file(path);
}

// generate ----------------------------------------------------------------

struct GenerateArgs {
    int rows = 20;
    int cols = 20;
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
    if (g.out.empty()) throw ConfigFailure("generate needs --out PATH");
    if (a.rows < 1 || a.cols < 1) throw ConfigFailure("--rows and --cols must be >= 1");
    const TileSet tiles = load_tiles(g.tileset);
    WfcEnv env(Dims{a.rows, a.cols}, tiles, ObjectiveSpec{});
    Rng rng(derive_seed(g.seed, {0x67656e}));
    std::vector<double> logits(tiles.size());
    while (!env.done()) {
        // Uniform choice among the legal tiles, fed through the env as a one-hot action.
        const TileMask legal = env.legal_mask();
        std::uniform_int_distribution<int> pick(0, legal.count() - 1);
        int nth = pick(rng);
        std::fill(logits.begin(), logits.end(), 0.0);
        for (std::size_t t = 0; t < tiles.size(); ++t)
            if (legal[t] && nth-- == 0) {
                logits[t] = 1.0;
                break;
            }
        env.advance(logits);
    }
    if (const auto& c = env.wave().contradiction()) {
        std::cerr << "contradiction at cell (" << c->cell.row << ", " << c->cell.col << ") on step " << c->step
                  << "; no map written\n";
        return kExitContradiction;
    }
    save_map(g.out, env.wave().to_map());
    return kExitOk;
}

// evolve ------------------------------------------------------------------

struct EvolveArgs {
    std::string config;
    std::string method;
    std::string objective;
    std::optional<int> target;
    std::optional<int> rows, cols, generations, population;
    std::string map_out;
    bool no_early_stop = false;
    bool record_wall_time = false;
};

int cmd_evolve(const Globals& g, const EvolveArgs& a) {
    ExperimentConfig cfg;
    if (!a.config.empty()) {
        try {
            cfg = load_experiment_config(a.config);
        } catch (const ConfigError& e) {
            throw ConfigFailure(e.what());
        }
    } else {
        cfg.tileset = g.tileset;
    }
    if (g.tileset_opt->count() > 0 || a.config.empty()) cfg.tileset = g.tileset;
    if (!a.objective.empty()) {
        auto kind = parse_objective_kind(a.objective);
        if (!kind) throw ConfigFailure("unknown objective \"" + a.objective + "\"");
        if (cfg.objective != *kind) cfg.params.clear();  // retune for the new domain
        cfg.objective = *kind;
    }
    if (!a.method.empty()) {
        auto m = parse_method(a.method);
        if (!m) throw ConfigFailure("unknown method \"" + a.method + "\"");
        cfg.methods = {*m};
    }
    if (cfg.methods.size() != 1) throw ConfigFailure("evolve runs a single method; pass --method");
    if (a.target) cfg.targets = {*a.target};
    if (uses_target(cfg.objective) && cfg.targets.size() != 1)
        throw ConfigFailure("evolve runs a single target; pass --target");
    if (a.rows) cfg.dims.rows = *a.rows;
    if (a.cols) cfg.dims.cols = *a.cols;
    if (a.generations) cfg.generations = *a.generations;
    if (a.population) cfg.population = *a.population;
    if (a.no_early_stop) cfg.early_stop = false;
    if (a.record_wall_time) cfg.record_wall_time = true;
    if (g.seed_opt->count() > 0 || a.config.empty()) cfg.base_seed = g.seed;
    cfg.runs_per_cell = 1;
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigFailure(e.what());
    }
    if (g.out.empty()) throw ConfigFailure("evolve needs --out PATH for the results CSV");

    const TileSet tiles = load_tiles(cfg.tileset);
    const Method method = cfg.methods.front();
    const int target = cfg.effective_targets().front();
    const Problem problem{tiles, cfg.dims, ObjectiveSpec{cfg.objective, target}};
    const auto result = evolve(method, cfg.params_for(method, cfg.base_seed), problem);

    std::ostringstream csv;
    const std::vector<RunRecord> rows{result.record};
    write_results_csv(csv, rows, cfg.fingerprint(), cfg.record_wall_time);
    write_bytes(g.out, csv.str());

    if (!a.map_out.empty() && result.best) {
        if (result.best->layout() != GenomeLayout::direct_map && result.best_evaluation.fitness == kContradictionReward) {
            std::cerr << "best genome ends in a contradiction; no map written\n";
        } else {
            save_map(a.map_out, phenotype(*result.best, problem));
        }
    }
    std::cerr << to_string(method) << ' ' << to_string(cfg.objective) << " P=" << target << " seed=" << cfg.base_seed
              << (result.record.converged
                      ? " converged at generation " + std::to_string(*result.record.generation_of_convergence)
                      : " did not converge")
              << '\n';
    return kExitOk;
}

// sweep / stats -----------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::string stats_out;
    bool table = false;
};

fs::path default_stats_path(const fs::path& results) {
    auto p = results;
    p.replace_extension(".stats.csv");
    return p;
}

int cmd_sweep(const Globals& g, const SweepArgs& a) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(a.config);
    } catch (const ConfigError& e) {
        throw ConfigFailure(e.what());
    }
    if (g.tileset_opt->count() > 0) cfg.tileset = g.tileset;
    if (g.seed_opt->count() > 0) cfg.base_seed = g.seed;
    if (!g.out.empty()) cfg.output = g.out;
    if (!a.stats_out.empty()) cfg.stats_output = a.stats_out;
    if (cfg.stats_output.empty()) cfg.stats_output = default_stats_path(cfg.output);
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigFailure(e.what());
    }
    if (!fs::exists(cfg.tileset)) throw std::ios_base::failure("tileset not found: " + cfg.tileset.string());

    std::vector<RunRecord> records;
    try {
        records = run_experiment(cfg);
    } catch (const ConfigError& e) {
        throw ConfigFailure(e.what());
    }
    if (a.table) {
        const auto stats = convergence_stats(records);
        std::cout << format_stats_table(stats);
    }
    return kExitOk;
}

struct StatsArgs {
    std::string in;
    bool table = false;
};

int cmd_stats(const Globals& g, const StatsArgs& a) {
    if (g.out.empty() && !a.table) throw ConfigFailure("stats needs --out PATH and/or --table");
    std::vector<RunRecord> records;
    try {
        records = load_results_csv(a.in);
    } catch (const ConfigError& e) {
        throw ConfigFailure(e.what());
    }
    const auto stats = convergence_stats(records);
    if (!g.out.empty()) save_stats_csv(g.out, stats);
    if (a.table) std::cout << format_stats_table(stats);
    return kExitOk;
}

// render ------------------------------------------------------------------

struct RenderArgs {
    std::string in;
    std::string format = "ppm";
    int cell_px = 8;
};

int cmd_render(const Globals& g, const RenderArgs& a) {
    if (g.out.empty()) throw ConfigFailure("render needs --out PATH");
    if (a.cell_px < 1) throw ConfigFailure("--cell-size must be >= 1");
    const TileSet tiles = load_tiles(g.tileset);
    MapGrid map;
    try {
        map = load_map(a.in);
    } catch (const MapFormatError& e) {
        throw ConfigFailure(std::string("map file: ") + e.what());
    }
    try {
        if (a.format == "text") {
            write_bytes(g.out, render_text(map, tiles));
        } else {
            const auto img = render_ppm(map, tiles, a.cell_px);
            write_bytes(g.out, std::string(img.begin(), img.end()));
        }
    } catch (const RenderError& e) {
        throw ConfigFailure(e.what());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WaveFunctionCollapse decision-process map generator and optimizer"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    g.tileset_opt = app.add_option("--tileset", g.tileset, "Tileset file (.tileset.json)");
    g.seed_opt = app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--out", g.out, "Output path");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "One unconditioned WFC rollout with uniform random legal actions");
    generate->add_option("--rows", gen.rows, "Map rows")->capture_default_str();
    generate->add_option("--cols", gen.cols, "Map columns")->capture_default_str();

    EvolveArgs ev;
    auto* evolve_cmd = app.add_subcommand("evolve", "Run one evolutionary optimization");
    evolve_cmd->add_option("--config", ev.config, "Experiment config (JSON)");
    evolve_cmd->add_option("--method", ev.method, "baseline | fi2pop | evo1d | evo2d");
    evolve_cmd->add_option("--objective", ev.objective,
                           "binary | river | field | hybrid_river_binary | hybrid_field_binary");
    evolve_cmd->add_option("--target", ev.target, "Target path length P");
    evolve_cmd->add_option("--rows", ev.rows, "Map rows");
    evolve_cmd->add_option("--cols", ev.cols, "Map columns");
    evolve_cmd->add_option("--generations", ev.generations, "Generation budget G");
    evolve_cmd->add_option("--population", ev.population, "Population size N");
    evolve_cmd->add_option("--map-out", ev.map_out, "Write the best genome's map here");
    evolve_cmd->add_flag("--no-early-stop", ev.no_early_stop, "Keep running after convergence");
    evolve_cmd->add_flag("--record-wall-time", ev.record_wall_time, "Fill the wall_time_s column");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Run a seeded experiment sweep (resumable)");
    sweep->add_option("--config", sw.config, "Experiment config (JSON)")->required();
    sweep->add_option("--stats-out", sw.stats_out, "Stats CSV path");
    sweep->add_flag("--table", sw.table, "Print a convergence table to stdout");

    StatsArgs st;
    auto* stats = app.add_subcommand("stats", "Aggregate a results CSV into convergence statistics");
    stats->add_option("--in", st.in, "Results CSV")->required();
    stats->add_flag("--table", st.table, "Print a convergence table to stdout");

    RenderArgs rd;
    auto* render = app.add_subcommand("render", "Render a map file as text or PPM");
    render->add_option("--in", rd.in, "Map file")->required();
    render->add_option("--format", rd.format, "text | ppm")->check(CLI::IsMember({"text", "ppm"}))->capture_default_str();
    render->add_option("--cell-size", rd.cell_px, "Pixels per cell (ppm)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    configure_threads();
    try {
        if (generate->parsed()) return cmd_generate(g, gen);
        if (evolve_cmd->parsed()) return cmd_evolve(g, ev);
        if (sweep->parsed()) return cmd_sweep(g, sw);
        if (stats->parsed()) return cmd_stats(g, st);
        if (render->parsed()) return cmd_render(g, rd);
    } catch (const ConfigFailure& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    } catch (const TilesetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
