#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cyborg/cyborg.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

using cyborg::ExperimentConfig;
using nlohmann::ordered_json;

struct Options {
    cyborg::ScenarioPaths paths{"scenarios/ctf/scenario.yaml", "scenarios/ctf/images.yaml",
                                "scenarios/ctf/actions.yaml"};
    std::string agent = "ddqn";
    int runs = 1;
    int episodes = 1000;
    int max_steps = 1000;
    std::uint64_t seed = 0;
    std::string out = "out";
    int parallel = 0;
    std::string config;
    bool wall_time = false;
    std::string checkpoint;
    std::uint64_t bench_steps = 1000000;
    std::string log;
    std::string curves_out = "-";
    // Train flags given explicitly on the command line; these override --config.
    std::vector<CLI::Option*> explicit_train;
};

void add_scenario_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--scenario", o.paths.scenario, "scenario YAML")->capture_default_str();
    cmd->add_option("--images", o.paths.images, "images YAML")->capture_default_str();
    cmd->add_option("--actions", o.paths.actions, "actions YAML")->capture_default_str();
}

cyborg::Scenario load(const Options& o) {
    return cyborg::load_scenario_files(o.paths.scenario, o.paths.images, o.paths.actions);
}

void print_json(const ordered_json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_train(const Options& o) {
    ExperimentConfig cfg;
    cfg.paths = o.paths;
    if (!o.config.empty()) cyborg::apply_overrides(cfg, cyborg::read_text_file(o.config), o.config);
    const bool from_file = !o.config.empty();
    auto given = [&](const char* name) {
        if (!from_file) return true;
        for (auto* opt : o.explicit_train)
            if (opt->check_lname(name)) return opt->count() > 0;
        return false;
    };
    if (given("agent")) cfg.agent = cyborg::parse_agent_kind(o.agent);
    if (given("runs")) cfg.runs = o.runs;
    if (given("episodes")) cfg.episodes_per_run = o.episodes;
    if (given("max-steps")) cfg.max_steps = o.max_steps;
    if (given("seed")) cfg.seed = o.seed;
    if (given("parallel")) cfg.parallel = o.parallel;
    if (o.wall_time) cfg.record_wall_time = true;
    cfg.validate();

    const auto scenario = load(o);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto res = cyborg::run_experiment(scenario, cfg, &g_stop);
    cyborg::write_experiment(o.out, cfg, res);

    const auto sum = cyborg::summarize(res.log);
    ordered_json j;
    j["agent"] = std::string(cyborg::to_string(cfg.agent));
    j["runs"] = cfg.runs;
    j["episodes_per_run"] = cfg.episodes_per_run;
    j["rows"] = res.log.size();
    j["interrupted"] = res.interrupted;
    j["window"] = sum.window;
    j["capture_rate"] = sum.capture_rate;
    j["mean_steps"] = sum.mean_steps;
    for (const auto& r : sum.runs)
        j["per_run"].push_back({{"run", r.run}, {"capture_rate", r.capture_rate}, {"mean_steps", r.mean_steps}});
    cyborg::write_text_file(std::filesystem::path(o.out) / "summary.json", j.dump(2) + "\n");
    print_json(j);
    return res.interrupted ? 2 : 0;
}

int cmd_eval(const Options& o) {
    const auto ckpt = cyborg::load_checkpoint(o.checkpoint);
    cyborg::EnvConfig env;
    env.scenario = load(o);
    env.max_steps = o.max_steps;
    env.seed = o.seed;
    const auto s = cyborg::evaluate(ckpt, env, o.episodes);
    print_json({{"episodes", s.episodes}, {"capture_rate", s.capture_rate}, {"mean_steps", s.mean_steps}});
    return 0;
}

int cmd_bench(const Options& o) {
    cyborg::EnvConfig env;
    env.scenario = load(o);
    env.max_steps = o.max_steps;
    env.seed = o.seed;
    const auto r = cyborg::bench(env, o.bench_steps, o.seed);
    char checksum[19];
    std::snprintf(checksum, sizeof checksum, "%016llx", static_cast<unsigned long long>(r.checksum));
    print_json({{"steps", r.steps},
                {"episodes", r.episodes},
                {"seconds", r.seconds},
                {"steps_per_second", r.steps_per_second},
                {"p50_us", r.p50_us},
                {"p99_us", r.p99_us},
                {"checksum", checksum}});
    return 0;
}

int cmd_validate(const Options& o) {
    const auto s = load(o);
    std::cout << "ok: " << s.name << " (" << s.hosts.size() << " hosts, " << s.subnets.size()
              << " subnets)\n";
    return 0;
}

int cmd_curves(const Options& o) {
    const auto log = cyborg::parse_runlog(cyborg::read_text_file(o.log));
    const auto csv = cyborg::curves_csv(cyborg::aggregate_curves(log));
    if (o.curves_out.empty() || o.curves_out == "-") std::cout << csv;
    else cyborg::write_text_file(o.curves_out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-state cyber operations simulator and agent trainer"};
    app.require_subcommand(1);
    Options o;

    auto* train = app.add_subcommand("train", "train agents over seeded runs");
    add_scenario_flags(train, o);
    o.explicit_train = {
        train->add_option("--agent", o.agent, "random | tabular_q | ddqn")
            ->check(CLI::IsMember({"random", "tabular_q", "ddqn"}))
            ->capture_default_str(),
        train->add_option("--runs", o.runs)->capture_default_str(),
        train->add_option("--episodes", o.episodes, "episodes per run")->capture_default_str(),
        train->add_option("--max-steps", o.max_steps)->capture_default_str(),
        train->add_option("--seed", o.seed, "base seed; run r uses seed + r")->capture_default_str(),
        train->add_option("--parallel", o.parallel, "worker threads, 0 = all cores")->capture_default_str(),
    };
    train->add_option("--out", o.out, "output directory")->capture_default_str();
    train->add_option("--config", o.config, "YAML overrides");
    train->add_flag("--wall-time", o.wall_time, "record per-episode wall-clock ms");

    auto* eval = app.add_subcommand("eval", "greedy rollouts of a checkpoint");
    add_scenario_flags(eval, o);
    eval->add_option("--checkpoint", o.checkpoint)->required();
    eval->add_option("--episodes", o.episodes)->capture_default_str();
    eval->add_option("--max-steps", o.max_steps)->capture_default_str();
    eval->add_option("--seed", o.seed)->capture_default_str();

    auto* benchc = app.add_subcommand("bench", "random-agent throughput on one thread");
    add_scenario_flags(benchc, o);
    benchc->add_option("--steps", o.bench_steps)->capture_default_str();
    benchc->add_option("--max-steps", o.max_steps)->capture_default_str();
    benchc->add_option("--seed", o.seed)->capture_default_str();

    auto* validate = app.add_subcommand("validate", "parse and validate scenario files");
    add_scenario_flags(validate, o);

    auto* curves = app.add_subcommand("curves", "per-episode mean/std across runs");
    curves->add_option("log", o.log, "runlog.csv")->required();
    curves->add_option("--out", o.curves_out, "output CSV, '-' for stdout")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(o);
        if (*eval) return cmd_eval(o);
        if (*benchc) return cmd_bench(o);
        if (*validate) return cmd_validate(o);
        if (*curves) return cmd_curves(o);
    } catch (const cyborg::ValidationError& e) {
        for (const auto& d : e.diagnostics()) std::cerr << "error: " << d.path << ": " << d.message << '\n';
        return 1;
    } catch (const cyborg::SyntaxError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
