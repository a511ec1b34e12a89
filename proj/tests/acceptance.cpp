// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fail.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "oracles.hpp"

using namespace cyborg;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 3) {
    std::ostringstream s;
    s.precision(precision);
    s << std::fixed << v;
    return s.str();
}

double window_mean(const RunLog& log, int run, int first, int last, bool captured) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : log)
        if (r.run == run && r.episode >= first && r.episode < last) {
            sum += captured ? (r.captured ? 1.0 : 0.0) : r.steps;
            ++n;
        }
    return n ? sum / n : 0.0;
}

// Per-episode mean steps of one run, as the curves command reports it.
std::vector<double> run_curve(const RunLog& log, int run) {
    RunLog mine;
    for (const auto& r : log)
        if (r.run == run) mine.push_back(r);
    std::vector<double> out;
    for (const auto& p : aggregate_curves(mine)) out.push_back(p.steps_mean);
    return out;
}

Verdict learning() {
    const int runs = 5, episodes = 1000;
    ExperimentConfig cfg;
    cfg.runs = runs;
    cfg.episodes_per_run = episodes;
    cfg.max_steps = 1000;
    cfg.seed = 0;

    cfg.agent = AgentKind::random;
    const auto baseline = run_experiment(ctf_scenario(), cfg);
    double random_steps = 0.0;
    for (const auto& r : baseline.log) random_steps += r.steps;
    random_steps /= static_cast<double>(baseline.log.size());

    cfg.agent = AgentKind::ddqn;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run_experiment(ctf_scenario(), cfg);
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;

    bool ok = res.log.size() == static_cast<std::size_t>(runs * episodes);
    double capture = 0.0, steps = 0.0, worst_capture = 1.0;
    std::string per_run;
    for (int r = 0; r < runs; ++r) {
        const double c = window_mean(res.log, r, episodes - 100, episodes, true);
        const auto curve = run_curve(res.log, r);
        double first = 0.0, last = 0.0;
        for (int e = 0; e < 100; ++e) {
            first += curve[e];
            last += curve[episodes - 100 + e];
        }
        first /= 100;
        last /= 100;
        ok = ok && c >= 0.9 && last < first;
        capture += c / runs;
        steps += last / runs;
        worst_capture = std::min(worst_capture, c);
        per_run += " run" + std::to_string(r) + "=" + fmt(c, 2) + "/" + fmt(first, 1) + "->" + fmt(last, 1);
    }
    ok = ok && steps <= 0.25 * random_steps;
    return {ok, "final-100 capture mean " + fmt(capture) + " (min " + fmt(worst_capture, 2) + "), steps " +
                    fmt(steps, 1) + " vs random " + fmt(random_steps, 1) + " (bound " + fmt(0.25 * random_steps, 1) +
                    "); capture/first->final steps:" + per_run + "; " + fmt(minutes, 1) + " min"};
}

Verdict random_captures() {
    EnvConfig c;
    c.scenario = ctf_scenario();
    c.seed = 2;
    Env env(c);
    RandomAgent agent(2);
    int captures = 0;
    for (int e = 0; e < 500; ++e) captures += run_episode(agent, env, false).captured;
    return {captures >= 1, std::to_string(captures) + "/500 episodes captured"};
}

Verdict throughput() {
    EnvConfig c;
    c.scenario = ctf_scenario();
    const auto r = bench(c, 1'000'000, 0);
    return {r.steps_per_second >= 2000.0, fmt(r.steps_per_second, 0) + " steps/s over 1M steps (stretch 10000: " +
                                              (r.steps_per_second >= 10000.0 ? "met" : "missed") + "), p50 " +
                                              fmt(r.p50_us, 1) + " us, p99 " + fmt(r.p99_us, 1) + " us"};
}

Verdict gradients() {
    Rng rng(404);
    double worst = 0.0;
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> sizes{2 + static_cast<int>(rng.index(8))};
        const int depth = 1 + static_cast<int>(rng.index(3));
        for (int d = 0; d < depth; ++d) sizes.push_back(2 + static_cast<int>(rng.index(12)));
        sizes.push_back(1 + static_cast<int>(rng.index(6)));
        Mlp net(sizes, rng);
        for (auto& l : net.layers())
            for (auto& b : l.bias) b = rng.uniform(-0.3, 0.3);
        const int batch = 1 + static_cast<int>(rng.index(8));
        std::vector<double> states;
        std::vector<int> actions;
        std::vector<double> targets;
        for (int b = 0; b < batch; ++b) {
            for (int i = 0; i < sizes.front(); ++i) states.push_back(rng.uniform(-1, 1));
            actions.push_back(static_cast<int>(rng.index(static_cast<std::uint64_t>(sizes.back()))));
            targets.push_back(rng.uniform(-2, 2));
        }
        Mlp grads;
        mse_loss_and_gradient(net, states, actions, targets, grads);
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            for (int which = 0; which < 2; ++which) {
                auto& params = which ? net.layers()[l].bias : net.layers()[l].weights;
                const auto& g = which ? grads.layers()[l].bias : grads.layers()[l].weights;
                for (std::size_t i = 0; i < params.size(); ++i) {
                    const double saved = params[i];
                    params[i] = saved + h;
                    const double up = mse_loss(net, states, actions, targets);
                    params[i] = saved - h;
                    const double down = mse_loss(net, states, actions, targets);
                    params[i] = saved;
                    const double fd = (up - down) / (2 * h);
                    // Relative above magnitude 1, absolute below it.
                    const double err = std::abs(fd - g[i]) / std::max({1.0, std::abs(fd), std::abs(g[i])});
                    worst = std::max(worst, err);
                }
            }
        }
    }
    return {worst <= 1e-4, "max error " + [&] {
                std::ostringstream s;
                s << worst;
                return s.str();
            }() + " over 100 networks"};
}

Verdict planner() {
    bool ok = true;
    std::string detail;
    for (int n : {2, 3}) {
        const auto s = with_certain_outcomes(chain_scenario(n));
        const int bfs = oracle::RedModel(s).min_steps();
        EnvConfig c;
        c.scenario = s;
        c.max_steps = 100;
        Env env(c);
        TabularConfig tc;
        tc.seed = static_cast<std::uint64_t>(n);
        TabularQAgent agent(tc, env.indexer().size());
        for (int e = 0; e < 5000; ++e) run_episode(agent, env, true);
        const auto greedy = run_episode(agent, env, false);
        const int len = greedy.captured ? greedy.steps : -1;
        ok = ok && len == bfs;
        detail += "chain" + std::to_string(n) + " greedy " + std::to_string(len) + " bfs " + std::to_string(bfs) + "; ";
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Verdict calibration() {
    bool ok = true;
    std::string detail;
    const int trials = 10000;
    for (double p : {0.3, 0.5, 0.7}) {
        auto s = with_certain_outcomes(ctf_scenario());
        for (auto& a : s.red_actions)
            if (a.type == ActionType::exploit_service) a.success_prob = p;
        const auto layout = std::make_shared<const WorldLayout>(canonicalize(s));
        auto base = init_world(layout, 0);
        const auto& L = *layout;
        const auto web = L.addresses[L.host_index("dmz_web")];
        apply_action(base, {&base.action(Team::red, "ping_sweep"), 0, Target::for_subnet(L.subnet_index("dmz"))});
        apply_action(base, {&base.action(Team::red, "port_scan"), 0, Target::for_host(web)});
        const ActionInstance exploit{&base.action(Team::red, "exploit_service"), 0, Target::for_service(web, 80)};
        int hits = 0;
        for (int t = 0; t < trials; ++t) {
            auto w = base;
            w.rng = Rng(mix_seed(0xca11b, static_cast<std::uint64_t>(t)));
            hits += apply_action(w, exploit).success;
        }
        const double freq = hits / static_cast<double>(trials);
        const double band = 3.0 * std::sqrt(p * (1 - p) / trials);
        ok = ok && std::abs(freq - p) <= band;
        detail += "p=" + fmt(p, 1) + " freq " + fmt(freq, 4) + " (band " + fmt(band, 4) + "); ";
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Verdict determinism() {
    const auto dir = fs::temp_directory_path() / ("cyborg_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    const std::string args = "train " + oracle::scenario_flags("scenarios/ctf") +
                             " --agent ddqn --runs 3 --episodes 40 --max-steps 300 --seed 17 --out ";
    const auto a = oracle::run_cli(args + (dir / "a").string());
    const auto b = oracle::run_cli(args + (dir / "b").string());
    if (a.exit_code != 0 || b.exit_code != 0) {
        fs::remove_all(dir);
        return {false, "train exited with " + std::to_string(a.exit_code) + "/" + std::to_string(b.exit_code)};
    }
    const auto x = read_text_file((dir / "a" / "runlog.csv").string());
    const auto y = read_text_file((dir / "b" / "runlog.csv").string());
    fs::remove_all(dir);
    return {x == y && !x.empty(), std::to_string(x.size()) + " bytes, " + (x == y ? "identical" : "different")};
}

Verdict round_trip() {
    int checked = 0;
    auto same = [&](const Scenario& s) {
        ++checked;
        const auto t = serialize_scenario(s);
        const auto back = parse_scenario(t.scenario, t.images, t.actions);
        return back == canonicalize(s) && serialize_scenario(back) == t;
    };
    bool ok = true;
    for (const char* dir : {"scenarios/ctf", "scenarios/minimal"}) ok = ok && same(oracle::load_shipped(dir));
    for (const auto& s : {ctf_scenario(), chain_scenario(2), chain_scenario(3)}) ok = ok && same(s);
    Rng rng(8080);
    int generated = 0;
    while (generated < 1000) {
        const auto s = oracle::random_scenario(rng);
        if (!validate(s).empty()) continue;
        ++generated;
        ok = ok && same(s);
    }
    return {ok, std::to_string(checked) + " scenarios"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
        {"1 learning", learning},          {"2 early exploration", random_captures},
        {"3 throughput", throughput},      {"4 gradient oracle", gradients},
        {"5 planner oracle", planner},     {"6 stochasticity calibration", calibration},
        {"7 determinism", determinism},    {"8 format round-trip", round_trip},
    };
    bool all = true;
    for (const auto& [name, fn] : criteria) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        all = all && v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << name << ": " << v.detail << std::endl;
    }
    return all ? 0 : 1;
}
