#include "wfcmdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "wfcmdp/tileset.hpp"

namespace wfcmdp {

namespace {

using nlohmann::json;

std::string format_double(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using CellKey = std::tuple<int, int, int, std::uint64_t>;  // method, objective, target, seed

CellKey key_of(const RunRecord& r) {
    return {static_cast<int>(r.method), static_cast<int>(r.objective), r.target, r.seed};
}

void sort_records(std::vector<RunRecord>& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const RunRecord& a, const RunRecord& b) { return key_of(a) < key_of(b); });
}

json params_json(const EvoParams& p) {
    return json{{"number_of_actions_mutated_mean", p.mutated_mean},
                {"number_of_actions_mutated_standard_deviation", p.mutated_stddev},
                {"action_noise_standard_deviation", p.noise_stddev},
                {"survival_rate", p.survival_rate},
                {"cross_over_method", static_cast<int>(p.crossover)},
                {"cross_or_mutate", p.cross_or_mutate}};
}

void apply_params_json(EvoParams& p, const json& j) {
    for (const auto& [key, value] : j.items()) {
        if (key == "number_of_actions_mutated_mean") p.mutated_mean = value.get<int>();
        else if (key == "number_of_actions_mutated_standard_deviation") p.mutated_stddev = value.get<double>();
        else if (key == "action_noise_standard_deviation") p.noise_stddev = value.get<double>();
        else if (key == "survival_rate") p.survival_rate = value.get<double>();
        else if (key == "cross_or_mutate" || key == "cross_or_mutate_proportion") p.cross_or_mutate = value.get<double>();
        else if (key == "cross_over_method") {
            if (value.is_string()) {
                const auto s = value.get<std::string>();
                if (s == "UNIFORM" || s == "uniform") p.crossover = CrossoverMethod::uniform;
                else if (s == "ONE_POINT" || s == "one_point") p.crossover = CrossoverMethod::one_point;
                else throw ConfigError("unknown cross_over_method \"" + s + "\"");
            } else {
                const int v = value.get<int>();
                if (v != 0 && v != 1) throw ConfigError("cross_over_method must be 0 (UNIFORM) or 1 (ONE_POINT)");
                p.crossover = static_cast<CrossoverMethod>(v);
            }
        } else {
            throw ConfigError("unknown hyperparameter \"" + key + "\"");
        }
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

RunRecord parse_result_row(const std::string& line) {
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw ConfigError("results row has " + std::to_string(f.size()) + " fields: " + line);
    RunRecord r;
    auto method = parse_method(f[0]);
    auto kind = parse_objective_kind(f[1]);
    if (!method || !kind) throw ConfigError("results row has unknown method or objective: " + line);
    r.method = *method;
    r.objective = *kind;
    try {
        r.target = std::stoi(f[2]);
        r.seed = std::stoull(f[3]);
        r.converged = f[4] == "1";
        if (!f[5].empty()) r.generation_of_convergence = std::stoi(f[5]);
        if (!f[6].empty()) r.best_reward_per_generation.push_back(std::stod(f[6]));
        r.generations_run = std::stoi(f[7]);
        if (!f[8].empty()) r.wall_time_s = std::stod(f[8]);
    } catch (const std::exception&) {
        throw ConfigError("malformed results row: " + line);
    }
    return r;
}

}  // namespace

// Config ------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (dims.rows < 1 || dims.cols < 1) throw ConfigError("rows and cols must be >= 1");
    if (methods.empty()) throw ConfigError("no methods selected");
    if (runs_per_cell < 1) throw ConfigError("runs_per_cell must be >= 1");
    if (uses_target(objective) && targets.empty())
        throw ConfigError(std::string("objective ") + std::string(to_string(objective)) + " needs at least one target");
    for (int t : targets)
        if (t < 0) throw ConfigError("targets must be >= 0");
    if (generations < 0) throw ConfigError("generations must be >= 0");
    if (population < 2) throw ConfigError("population must be >= 2");
    for (auto m : methods) {
        if (m == Method::fi2pop && population % 2 != 0) throw ConfigError("fi2pop needs an even population");
        try {
            params_for(m, base_seed).validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(to_string(m)) + ": " + e.what());
        }
    }
}

EvoParams ExperimentConfig::params_for(Method m, std::uint64_t seed) const {
    auto it = params.find(m);
    EvoParams p = it != params.end() ? it->second : tuned_params(m, objective);
    p.generations = generations;
    p.population = population;
    p.early_stop = early_stop;
    p.seed = seed;
    return p;
}

std::vector<int> ExperimentConfig::effective_targets() const {
    if (!uses_target(objective)) return {0};
    return targets;
}

std::string ExperimentConfig::fingerprint() const {
    json j;
    std::string tileset_bytes;
    try {
        tileset_bytes = read_file(tileset);
    } catch (const std::exception&) {
        tileset_bytes = tileset.string();
    }
    j["tileset_hash"] = fnv1a(tileset_bytes);
    j["rows"] = dims.rows;
    j["cols"] = dims.cols;
    j["objective"] = std::string(to_string(objective));
    j["targets"] = effective_targets();
    j["runs_per_cell"] = runs_per_cell;
    j["base_seed"] = base_seed;
    j["generations"] = generations;
    j["population"] = population;
    j["early_stop"] = early_stop;
    json methods_json = json::object();
    for (auto m : methods) methods_json[std::string(to_string(m))] = params_json(params_for(m, 0));
    j["methods"] = methods_json;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(j.dump()));
    return buf;
}

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };

    ExperimentConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "tileset") cfg.tileset = resolve(value.get<std::string>());
            else if (key == "rows") cfg.dims.rows = value.get<int>();
            else if (key == "cols") cfg.dims.cols = value.get<int>();
            else if (key == "methods") {
                for (const auto& m : value) {
                    auto method = parse_method(m.get<std::string>());
                    if (!method) throw ConfigError("unknown method \"" + m.get<std::string>() + "\"");
                    cfg.methods.push_back(*method);
                }
            } else if (key == "objective") {
                auto kind = parse_objective_kind(value.get<std::string>());
                if (!kind) throw ConfigError("unknown objective \"" + value.get<std::string>() + "\"");
                cfg.objective = *kind;
            } else if (key == "targets") cfg.targets = value.get<std::vector<int>>();
            else if (key == "runs_per_cell") cfg.runs_per_cell = value.get<int>();
            else if (key == "base_seed") cfg.base_seed = value.get<std::uint64_t>();
            else if (key == "generations") cfg.generations = value.get<int>();
            else if (key == "population") cfg.population = value.get<int>();
            else if (key == "early_stop") cfg.early_stop = value.get<bool>();
            else if (key == "record_wall_time") cfg.record_wall_time = value.get<bool>();
            else if (key == "output") cfg.output = resolve(value.get<std::string>());
            else if (key == "stats_output") cfg.stats_output = resolve(value.get<std::string>());
            else if (key != "params") throw ConfigError("unknown config key \"" + key + "\"");
        }
        // Overrides apply on top of the tuned defaults for the chosen objective.
        if (j.contains("params")) {
            for (const auto& [name, overrides] : j["params"].items()) {
                auto method = parse_method(name);
                if (!method) throw ConfigError("params for unknown method \"" + name + "\"");
                EvoParams p = tuned_params(*method, cfg.objective);
                apply_params_json(p, overrides);
                cfg.params[*method] = p;
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
    if (cfg.tileset.empty()) throw ConfigError("config needs a \"tileset\" path");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::ios_base::failure&) {
        throw ConfigError("cannot read config " + path.string());
    }
    return parse_experiment_config(text, path.parent_path());
}

// CSV ---------------------------------------------------------------------

std::string format_result_row(const RunRecord& rec, bool with_wall_time) {
    std::string row;
    row += to_string(rec.method);
    row += ',';
    row += to_string(rec.objective);
    row += ',' + std::to_string(rec.target);
    row += ',' + std::to_string(rec.seed);
    row += rec.converged ? ",1" : ",0";
    row += ',';
    if (rec.generation_of_convergence) row += std::to_string(*rec.generation_of_convergence);
    row += ',';
    if (auto best = rec.best_final_reward()) row += format_double(*best);
    row += ',' + std::to_string(rec.generations_run);
    row += ',';
    if (with_wall_time) row += format_double(rec.wall_time_s, "%.6f");
    return row;
}

void write_results_csv(std::ostream& out, std::span<const RunRecord> records, const std::string& fingerprint,
                       bool with_wall_time) {
    out << "# fingerprint: " << fingerprint << '\n' << kResultsHeader << '\n';
    for (const auto& r : records) out << format_result_row(r, with_wall_time) << '\n';
}

std::vector<RunRecord> read_results_csv(std::istream& in, std::string* fingerprint) {
    std::vector<RunRecord> records;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string::npos) break;  // torn final line from an interrupted writer
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (line.rfind("# fingerprint: ", 0) == 0) {
            if (fingerprint) *fingerprint = line.substr(15);
            continue;
        }
        if (line[0] == '#') continue;
        if (!header_seen) {
            if (line != kResultsHeader) throw ConfigError("unexpected results header: " + line);
            header_seen = true;
            continue;
        }
        records.push_back(parse_result_row(line));
    }
    return records;
}

std::vector<RunRecord> load_results_csv(const std::filesystem::path& path, std::string* fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return read_results_csv(in, fingerprint);
}

void write_stats_csv(std::ostream& out, std::span<const CellStats> stats) {
    out << kStatsHeader << '\n';
    for (const auto& s : stats) {
        out << to_string(s.method) << ',' << to_string(s.objective) << ',' << s.target << ',' << s.n_runs << ','
            << s.n_converged << ',' << format_double(s.converged_fraction, "%.2f") << ',';
        if (s.mean_generations) out << format_double(*s.mean_generations, "%.1f");
        out << ',';
        if (s.se_generations) out << format_double(*s.se_generations, "%.1f");
        out << '\n';
    }
}

void save_stats_csv(const std::filesystem::path& path, std::span<const CellStats> stats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    write_stats_csv(out, stats);
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

std::string format_stats_table(std::span<const CellStats> stats) {
    std::vector<int> targets;
    std::vector<Method> methods;
    for (const auto& s : stats) {
        if (std::find(targets.begin(), targets.end(), s.target) == targets.end()) targets.push_back(s.target);
        if (std::find(methods.begin(), methods.end(), s.method) == methods.end()) methods.push_back(s.method);
    }
    std::sort(targets.begin(), targets.end());
    std::sort(methods.begin(), methods.end());

    auto find = [&](Method m, int t) -> const CellStats* {
        for (const auto& s : stats)
            if (s.method == m && s.target == t) return &s;
        return nullptr;
    };
    std::ostringstream os;
    os << "Method\tMetric";
    for (int t : targets) os << '\t' << t;
    os << '\n';
    for (auto m : methods) {
        os << to_string(m) << "\tGenerations";
        for (int t : targets) {
            const auto* s = find(m, t);
            os << '\t';
            if (!s || !s->mean_generations) os << "—";
            else if (!s->se_generations) os << format_double(*s->mean_generations, "%.0f");
            else os << format_double(*s->mean_generations, "%.1f") << "±" << format_double(*s->se_generations, "%.1f");
        }
        os << "\n\tConverged%";
        for (int t : targets) {
            const auto* s = find(m, t);
            os << '\t';
            if (!s || s->n_converged == 0) os << "—";
            else os << format_double(s->converged_fraction, "%.2f");
        }
        os << '\n';
    }
    return os.str();
}

// Statistics ---------------------------------------------------------------

std::vector<CellStats> convergence_stats(std::span<const RunRecord> records) {
    std::map<std::tuple<int, int, int>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records)
        groups[{static_cast<int>(r.method), static_cast<int>(r.objective), r.target}].push_back(&r);

    std::vector<CellStats> out;
    for (const auto& [key, runs] : groups) {
        CellStats s;
        s.method = static_cast<Method>(std::get<0>(key));
        s.objective = static_cast<ObjectiveKind>(std::get<1>(key));
        s.target = std::get<2>(key);
        s.n_runs = static_cast<int>(runs.size());
        std::vector<double> gens;
        for (const auto* r : runs)
            if (r->converged && r->generation_of_convergence) gens.push_back(*r->generation_of_convergence);
        s.n_converged = static_cast<int>(gens.size());
        s.converged_fraction = static_cast<double>(s.n_converged) / s.n_runs;
        if (!gens.empty()) {
            // Sorted summation keeps the result independent of record order.
            std::sort(gens.begin(), gens.end());
            double sum = 0.0;
            for (double g : gens) sum += g;
            const double mean = sum / static_cast<double>(gens.size());
            s.mean_generations = mean;
            if (gens.size() >= 2) {
                double ss = 0.0;
                for (double g : gens) ss += (g - mean) * (g - mean);
                const double sd = std::sqrt(ss / static_cast<double>(gens.size() - 1));
                s.se_generations = sd / std::sqrt(static_cast<double>(gens.size()));
            }
        }
        out.push_back(s);
    }
    return out;
}

// Sweep ---------------------------------------------------------------------

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const SweepOptions& options) {
    cfg.validate();
    const TileSet tiles = load_tileset_file(cfg.tileset);
    const std::string fingerprint = cfg.fingerprint();

    std::vector<RunRecord> done;
    if (std::filesystem::exists(cfg.output)) {
        std::string found;
        auto existing = load_results_csv(cfg.output, &found);
        if (found != fingerprint)
            throw ConfigError("results file " + cfg.output.string() +
                              " was written by a different configuration; move it away or pick another output");
        std::set<CellKey> seen;
        for (auto& r : existing)
            if (seen.insert(key_of(r)).second) done.push_back(std::move(r));
    }

    struct Job {
        Method method;
        int target;
        std::uint64_t seed;
    };
    std::set<CellKey> have;
    for (const auto& r : done) have.insert(key_of(r));
    std::vector<Job> jobs;
    for (auto m : cfg.methods)
        for (int t : cfg.effective_targets())
            for (int i = 0; i < cfg.runs_per_cell; ++i) {
                const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
                if (!have.contains({static_cast<int>(m), static_cast<int>(cfg.objective), t, seed}))
                    jobs.push_back({m, t, seed});
            }

    // Rewrite whatever survived (dropping any torn line) so appends start clean.
    {
        std::ofstream out(cfg.output, std::ios::binary | std::ios::trunc);
        if (!out) throw std::ios_base::failure("cannot open " + cfg.output.string() + " for writing");
        write_results_csv(out, done, fingerprint, cfg.record_wall_time);
    }
    std::ofstream sink(cfg.output, std::ios::binary | std::ios::app);
    if (!sink) throw std::ios_base::failure("cannot append to " + cfg.output.string());

    std::vector<std::optional<RunRecord>> fresh(jobs.size());
    std::atomic<std::size_t> started{0};
    bool io_failed = false;
    const auto n_jobs = static_cast<std::ptrdiff_t>(jobs.size());

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t j = 0; j < n_jobs; ++j) {
        if (options.stop_after && started.fetch_add(1) >= *options.stop_after) continue;
        const auto& job = jobs[static_cast<std::size_t>(j)];
        const Problem problem{tiles, cfg.dims, ObjectiveSpec{cfg.objective, job.target}};
        auto result = evolve(job.method, cfg.params_for(job.method, job.seed), problem);
#pragma omp critical(wfcmdp_results_writer)
        {
            sink << format_result_row(result.record, cfg.record_wall_time) << '\n';
            sink.flush();
            if (!sink) io_failed = true;
            if (options.on_record) options.on_record(result.record);
        }
        fresh[static_cast<std::size_t>(j)] = std::move(result.record);
    }
    sink.close();
    if (io_failed) throw std::ios_base::failure("write failed: " + cfg.output.string());

    for (auto& r : fresh)
        if (r) done.push_back(std::move(*r));
    if (options.stop_after) return done;

    sort_records(done);
    const auto tmp = std::filesystem::path(cfg.output.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::ios_base::failure("cannot open " + tmp.string() + " for writing");
        write_results_csv(out, done, fingerprint, cfg.record_wall_time);
        if (!out) throw std::ios_base::failure("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, cfg.output);

    if (!cfg.stats_output.empty()) {
        const auto stats = convergence_stats(done);
        save_stats_csv(cfg.stats_output, stats);
    }
    return done;
}

}  // namespace wfcmdp
