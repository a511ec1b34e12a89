#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cyborg/agents.hpp"
#include "cyborg/checkpoint.hpp"
#include "cyborg/scenario_yaml.hpp"

namespace cyborg {

enum class AgentKind { random, tabular_q, ddqn };

inline std::string_view to_string(AgentKind k) {
    switch (k) {
        case AgentKind::random: return "random";
        case AgentKind::tabular_q: return "tabular_q";
        case AgentKind::ddqn: return "ddqn";
    }
    return "?";
}

inline AgentKind parse_agent_kind(std::string_view s) {
    if (s == "random") return AgentKind::random;
    if (s == "tabular_q") return AgentKind::tabular_q;
    if (s == "ddqn") return AgentKind::ddqn;
    throw ValidationError("agent", "unknown agent '" + std::string(s) + "'");
}

struct ScenarioPaths {
    std::string scenario;
    std::string images;
    std::string actions;
};

struct ExperimentConfig {
    ScenarioPaths paths;
    AgentKind agent = AgentKind::ddqn;
    int runs = 1;
    int episodes_per_run = 1000;
    int max_steps = 1000;
    std::uint64_t seed = 0;  // run r uses seed + r
    RewardMode reward_mode = RewardMode::sparse_flag;
    BluePolicy blue_policy = BluePolicy::passive;
    DdqnConfig ddqn;
    TabularConfig tabular;
    int parallel = 0;          // worker threads; 0 = hardware concurrency
    bool record_wall_time = false;
    std::string out_dir;       // empty: nothing written by run_experiment

    void validate() const {
        std::vector<Diagnostic> d;
        if (runs < 1) d.push_back({"runs", "must be >= 1"});
        if (episodes_per_run < 1) d.push_back({"episodes", "must be >= 1"});
        if (max_steps < 1) d.push_back({"max_steps", "must be >= 1"});
        if (parallel < 0) d.push_back({"parallel", "must be >= 0"});
        if (!(tabular.alpha > 0.0 && tabular.alpha <= 1.0)) d.push_back({"tabular.alpha", "must lie in (0, 1]"});
        if (!(tabular.gamma >= 0.0 && tabular.gamma < 1.0)) d.push_back({"tabular.gamma", "must lie in [0, 1)"});
        if (!d.empty()) throw ValidationError(std::move(d));
        if (agent == AgentKind::ddqn) ddqn.validate();
    }
};

struct RunLogRow {
    int run = 0;
    int episode = 0;
    double reward = 0.0;
    int steps = 0;
    bool captured = false;
    std::int64_t wall_ms = 0;
    double epsilon = 0.0;

    bool operator==(const RunLogRow&) const = default;
};

using RunLog = std::vector<RunLogRow>;

inline constexpr std::string_view kRunLogHeader = "run,episode,reward,steps,captured,wall_ms,epsilon";
inline constexpr std::string_view kCurvesHeader = "episode,reward_mean,reward_std,steps_mean,steps_std";

// Shortest decimal form that reads back to the same double.
inline std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string runlog_csv(const RunLog& log) {
    std::string out(kRunLogHeader);
    out += '\n';
    for (const auto& r : log) {
        out += std::to_string(r.run) + ',' + std::to_string(r.episode) + ',' + format_number(r.reward) +
               ',' + std::to_string(r.steps) + ',' + (r.captured ? "1" : "0") + ',' +
               std::to_string(r.wall_ms) + ',' + format_number(r.epsilon) + '\n';
    }
    return out;
}

namespace harness_detail {

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_field(const std::string& s, int line, const char* column) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw MalformedLog("line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
    return v;
}

}  // namespace harness_detail

inline RunLog parse_runlog(std::string_view text) {
    using harness_detail::parse_field;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw MalformedLog("empty log");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRunLogHeader) throw MalformedLog("unexpected header '" + line + "'");
    RunLog log;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = harness_detail::split(line, ',');
        if (f.size() != 7) throw MalformedLog("line " + std::to_string(lineno) + ": expected 7 fields");
        RunLogRow r;
        r.run = parse_field<int>(f[0], lineno, "run");
        r.episode = parse_field<int>(f[1], lineno, "episode");
        r.reward = parse_field<double>(f[2], lineno, "reward");
        r.steps = parse_field<int>(f[3], lineno, "steps");
        const int cap = parse_field<int>(f[4], lineno, "captured");
        if (cap != 0 && cap != 1) throw MalformedLog("line " + std::to_string(lineno) + ": captured must be 0 or 1");
        r.captured = cap == 1;
        r.wall_ms = parse_field<std::int64_t>(f[5], lineno, "wall_ms");
        r.epsilon = parse_field<double>(f[6], lineno, "epsilon");
        if (r.run < 0 || r.episode < 0 || r.steps < 0)
            throw MalformedLog("line " + std::to_string(lineno) + ": negative field");
        log.push_back(r);
    }
    return log;
}

struct CurvePoint {
    int episode = 0;
    double reward_mean = 0.0;
    double reward_std = 0.0;
    double steps_mean = 0.0;
    double steps_std = 0.0;
};

// Per-episode mean and population standard deviation across runs. Every run must
// cover the same episode indices exactly once.
inline std::vector<CurvePoint> aggregate_curves(const RunLog& log) {
    if (log.empty()) throw MalformedLog("log has no rows");
    std::map<int, std::map<int, const RunLogRow*>> by_episode;  // episode -> run -> row
    std::map<int, int> per_run;
    for (const auto& r : log) {
        if (!by_episode[r.episode].emplace(r.run, &r).second)
            throw MalformedLog("duplicate row for run " + std::to_string(r.run) + " episode " +
                               std::to_string(r.episode));
        ++per_run[r.run];
    }
    for (const auto& [ep, runs] : by_episode)
        if (runs.size() != per_run.size())
            throw MalformedLog("episode " + std::to_string(ep) + " is missing from some runs");

    std::vector<CurvePoint> out;
    for (const auto& [ep, runs] : by_episode) {
        const double n = static_cast<double>(runs.size());
        CurvePoint p;
        p.episode = ep;
        for (const auto& [run, row] : runs) {
            p.reward_mean += row->reward;
            p.steps_mean += row->steps;
        }
        p.reward_mean /= n;
        p.steps_mean /= n;
        for (const auto& [run, row] : runs) {
            p.reward_std += (row->reward - p.reward_mean) * (row->reward - p.reward_mean);
            p.steps_std += (row->steps - p.steps_mean) * (row->steps - p.steps_mean);
        }
        p.reward_std = std::sqrt(p.reward_std / n);
        p.steps_std = std::sqrt(p.steps_std / n);
        out.push_back(p);
    }
    return out;
}

inline std::string curves_csv(const std::vector<CurvePoint>& pts) {
    std::string out(kCurvesHeader);
    out += '\n';
    for (const auto& p : pts)
        out += std::to_string(p.episode) + ',' + format_number(p.reward_mean) + ',' +
               format_number(p.reward_std) + ',' + format_number(p.steps_mean) + ',' +
               format_number(p.steps_std) + '\n';
    return out;
}

struct RunSummary {
    int run = 0;
    double capture_rate = 0.0;  // over the final window
    double mean_steps = 0.0;    // over the final window, uncaptured episodes count fully
};

struct ExperimentSummary {
    int window = 0;
    std::vector<RunSummary> runs;
    double capture_rate = 0.0;
    double mean_steps = 0.0;
};

inline ExperimentSummary summarize(const RunLog& log, int window = 100) {
    std::map<int, std::vector<const RunLogRow*>> by_run;
    for (const auto& r : log) by_run[r.run].push_back(&r);
    ExperimentSummary s;
    s.window = window;
    for (auto& [run, rows] : by_run) {
        std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->episode < b->episode; });
        const std::size_t n = std::min<std::size_t>(rows.size(), static_cast<std::size_t>(window));
        RunSummary rs;
        rs.run = run;
        for (std::size_t i = rows.size() - n; i < rows.size(); ++i) {
            rs.capture_rate += rows[i]->captured;
            rs.mean_steps += rows[i]->steps;
        }
        rs.capture_rate /= static_cast<double>(n);
        rs.mean_steps /= static_cast<double>(n);
        s.capture_rate += rs.capture_rate;
        s.mean_steps += rs.mean_steps;
        s.runs.push_back(rs);
    }
    if (!s.runs.empty()) {
        s.capture_rate /= static_cast<double>(s.runs.size());
        s.mean_steps /= static_cast<double>(s.runs.size());
    }
    return s;
}

struct RunResult {
    int run = 0;
    std::vector<RunLogRow> rows;
    std::optional<Mlp> network;  // DDQN only
    bool complete = false;
};

struct ExperimentResult {
    RunLog log;
    std::vector<RunResult> runs;
    bool interrupted = false;
};

inline EnvConfig make_env_config(const Scenario& s, const ExperimentConfig& cfg, std::uint64_t seed) {
    EnvConfig e;
    e.scenario = s;
    e.max_steps = cfg.max_steps;
    e.seed = seed;
    e.reward_mode = cfg.reward_mode;
    e.blue_policy = cfg.blue_policy;
    return e;
}

// One independent run: its own environment, agent and RNG streams.
inline RunResult run_one(const Scenario& s, const ExperimentConfig& cfg, int run,
                         const std::atomic<bool>* stop = nullptr) {
    const std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(run);
    Env env(make_env_config(s, cfg, run_seed));
    const int state_dim = env.encoder().size();
    const int n_actions = env.indexer().size();

    std::unique_ptr<Agent> agent;
    DdqnAgent* ddqn = nullptr;
    switch (cfg.agent) {
        case AgentKind::random: agent = std::make_unique<RandomAgent>(mix_seed(run_seed, 0x72)); break;
        case AgentKind::tabular_q: {
            auto tc = cfg.tabular;
            tc.seed = run_seed;
            agent = std::make_unique<TabularQAgent>(tc, n_actions);
            break;
        }
        case AgentKind::ddqn: {
            auto dc = cfg.ddqn;
            dc.seed = run_seed;
            auto a = std::make_unique<DdqnAgent>(dc, state_dim, n_actions);
            ddqn = a.get();
            agent = std::move(a);
            break;
        }
    }

    RunResult res;
    res.run = run;
    for (int ep = 0; ep < cfg.episodes_per_run; ++ep) {
        if (stop && stop->load()) break;
        const auto t0 = std::chrono::steady_clock::now();
        const auto rec = run_episode(*agent, env, true);
        RunLogRow row{run, ep, rec.total_reward, rec.steps, rec.captured, 0, rec.epsilon};
        if (cfg.record_wall_time)
            row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        res.rows.push_back(row);
    }
    res.complete = static_cast<int>(res.rows.size()) == cfg.episodes_per_run;
    if (ddqn) res.network = ddqn->online();
    return res;
}

// Runs are distributed over worker threads; results are merged by run id so the
// log does not depend on scheduling.
inline ExperimentResult run_experiment(const Scenario& s, const ExperimentConfig& cfg,
                                       const std::atomic<bool>* stop = nullptr) {
    cfg.validate();
    validate_or_throw(s);
    const Scenario canon = canonicalize(s);
    int workers = cfg.parallel > 0 ? cfg.parallel : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.runs);

    std::vector<RunResult> results(static_cast<std::size_t>(cfg.runs));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.runs));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r; (r = next.fetch_add(1)) < cfg.runs;) {
            try {
                results[r] = run_one(canon, cfg, r, stop);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExperimentResult out;
    for (auto& r : results) {
        out.log.insert(out.log.end(), r.rows.begin(), r.rows.end());
        if (!r.complete) out.interrupted = true;
    }
    out.runs = std::move(results);
    return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw Error("cannot write " + path.string());
}

// Writes runlog.csv and, for DDQN, run_<id>.ckpt per run into dir.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                             const ExperimentResult& res) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "runlog.csv", runlog_csv(res.log));
    for (const auto& r : res.runs) {
        if (!r.network) continue;
        auto dc = cfg.ddqn;
        dc.seed = cfg.seed + static_cast<std::uint64_t>(r.run);
        save_checkpoint((dir / ("run_" + std::to_string(r.run) + ".ckpt")).string(), dc, *r.network);
    }
}

struct EvalSummary {
    int episodes = 0;
    double capture_rate = 0.0;
    double mean_steps = 0.0;
};

// Greedy rollouts of a trained network.
inline EvalSummary evaluate(const Checkpoint& ckpt, const EnvConfig& env_cfg, int episodes) {
    if (episodes < 1) throw ValidationError("episodes", "must be >= 1");
    Env env(env_cfg);
    if (ckpt.net.input_size() != env.encoder().size() || ckpt.net.output_size() != env.indexer().size())
        throw ShapeMismatch("checkpoint expects " + std::to_string(ckpt.net.input_size()) + " inputs and " +
                            std::to_string(ckpt.net.output_size()) + " actions; scenario has " +
                            std::to_string(env.encoder().size()) + " and " +
                            std::to_string(env.indexer().size()));
    DdqnAgent agent(ckpt.config, ckpt.net);
    EvalSummary s;
    s.episodes = episodes;
    for (int e = 0; e < episodes; ++e) {
        const auto rec = run_episode(agent, env, false);
        s.capture_rate += rec.captured;
        s.mean_steps += rec.steps;
    }
    s.capture_rate /= episodes;
    s.mean_steps /= episodes;
    return s;
}

struct BenchReport {
    std::uint64_t steps = 0;
    std::uint64_t episodes = 0;
    double seconds = 0.0;
    double steps_per_second = 0.0;
    double p50_us = 0.0;
    double p99_us = 0.0;
    std::uint64_t checksum = 0;  // FNV-1a over (action, reward, done) per step
};

// Uniform-random play on a single thread for a fixed number of steps.
inline BenchReport bench(const EnvConfig& env_cfg, std::uint64_t steps, std::uint64_t agent_seed = 0) {
    Env env(env_cfg);
    Rng rng(agent_seed);
    std::vector<float> latency_us(steps);
    BenchReport rep;
    rep.steps = steps;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    env.reset();
    ++rep.episodes;
    for (std::uint64_t i = 0; i < steps; ++i) {
        const auto t0 = clock::now();
        const int a = uniform_valid(env.valid_mask(), rng);
        const auto r = env.step_global(a);
        latency_us[i] = std::chrono::duration<float, std::micro>(clock::now() - t0).count();
        mix(static_cast<std::uint64_t>(a));
        mix(std::bit_cast<std::uint64_t>(r.reward));
        mix(r.done ? 1 : 0);
        if (r.done && i + 1 < steps) {
            env.reset();
            ++rep.episodes;
        }
    }
    rep.seconds = std::chrono::duration<double>(clock::now() - start).count();
    rep.steps_per_second = rep.seconds > 0 ? static_cast<double>(steps) / rep.seconds : 0.0;
    rep.checksum = h;
    if (steps > 0) {
        auto pct = [&](double q) {
            const auto k = static_cast<std::size_t>(q * static_cast<double>(steps - 1));
            std::nth_element(latency_us.begin(), latency_us.begin() + static_cast<std::ptrdiff_t>(k),
                             latency_us.end());
            return static_cast<double>(latency_us[k]);
        };
        rep.p50_us = pct(0.50);
        rep.p99_us = pct(0.99);
    }
    return rep;
}

// Applies a YAML mapping of overrides onto cfg. Unknown keys are rejected.
inline void apply_overrides(ExperimentConfig& cfg, const std::string& yaml_text,
                            const std::string& file = "config") {
    const auto root = yaml_detail::load(yaml_text, file);
    if (!root || root.IsNull()) return;
    if (!root.IsMap()) throw ValidationError(file, "expected a mapping");
    std::vector<Diagnostic> diags;
    auto get = [&]<class T>(const YAML::Node& n, const std::string& path, T& dst) {
        try {
            dst = n.as<T>();
        } catch (const YAML::Exception&) {
            diags.push_back({path, "wrong type"});
        }
    };
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        const auto& v = kv.second;
        if (key == "agent") {
            std::string s;
            get(v, key, s);
            try {
                cfg.agent = parse_agent_kind(s);
            } catch (const ValidationError& e) {
                diags.insert(diags.end(), e.diagnostics().begin(), e.diagnostics().end());
            }
        } else if (key == "runs") get(v, key, cfg.runs);
        else if (key == "episodes") get(v, key, cfg.episodes_per_run);
        else if (key == "max_steps") get(v, key, cfg.max_steps);
        else if (key == "seed") get(v, key, cfg.seed);
        else if (key == "parallel") get(v, key, cfg.parallel);
        else if (key == "record_wall_time") get(v, key, cfg.record_wall_time);
        else if (key == "reward_mode") {
            std::string s;
            get(v, key, s);
            if (s == "sparse_flag") cfg.reward_mode = RewardMode::sparse_flag;
            else if (s == "flag_minus_cost") cfg.reward_mode = RewardMode::flag_minus_cost;
            else diags.push_back({key, "unknown reward mode '" + s + "'"});
        } else if (key == "blue_policy") {
            std::string s;
            get(v, key, s);
            if (s == "passive") cfg.blue_policy = BluePolicy::passive;
            else if (s == "scripted") cfg.blue_policy = BluePolicy::scripted;
            else diags.push_back({key, "unknown blue policy '" + s + "'"});
        } else if (key == "ddqn" && v.IsMap()) {
            auto& d = cfg.ddqn;
            for (const auto& p : v) {
                const auto k = p.first.as<std::string>();
                const auto path = "ddqn." + k;
                if (k == "gamma") get(p.second, path, d.gamma);
                else if (k == "epsilon_start") get(p.second, path, d.epsilon_start);
                else if (k == "epsilon_end") get(p.second, path, d.epsilon_end);
                else if (k == "epsilon_decay_episodes") get(p.second, path, d.epsilon_decay_episodes);
                else if (k == "learning_rate") get(p.second, path, d.learning_rate);
                else if (k == "batch_size") get(p.second, path, d.batch_size);
                else if (k == "buffer_capacity") get(p.second, path, d.buffer_capacity);
                else if (k == "target_sync_interval") get(p.second, path, d.target_sync_interval);
                else if (k == "hidden_sizes") get(p.second, path, d.hidden_sizes);
                else if (k == "grad_clip") get(p.second, path, d.grad_clip);
                else diags.push_back({path, "unknown key"});
            }
        } else if (key == "tabular" && v.IsMap()) {
            auto& t = cfg.tabular;
            for (const auto& p : v) {
                const auto k = p.first.as<std::string>();
                const auto path = "tabular." + k;
                if (k == "alpha") get(p.second, path, t.alpha);
                else if (k == "gamma") get(p.second, path, t.gamma);
                else if (k == "epsilon_start") get(p.second, path, t.epsilon_start);
                else if (k == "epsilon_end") get(p.second, path, t.epsilon_end);
                else if (k == "epsilon_decay_episodes") get(p.second, path, t.epsilon_decay_episodes);
                else if (k == "initial_q") get(p.second, path, t.initial_q);
                else diags.push_back({path, "unknown key"});
            }
        } else {
            diags.push_back({key, "unknown key"});
        }
    }
    if (!diags.empty()) throw ValidationError(std::move(diags));
}

}  // namespace cyborg
