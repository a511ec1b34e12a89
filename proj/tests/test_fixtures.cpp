#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace cyborg;

namespace {

// CTF where only `keep` among the dmz hosts retains its vulnerabilities.
Scenario only_pivot(const std::string& keep) {
    auto s = with_certain_outcomes(ctf_scenario());
    for (const char* h : {"dmz_web", "dmz_files", "dmz_db"}) {
        if (h == keep) continue;
        auto& host = s.hosts.at(h);
        auto img = s.images.at(host.image);
        img.name = std::string(h) + "_hardened";
        for (auto& svc : img.services) {
            svc.vulnerability.reset();
            svc.exploit_success_prob = 0.0;
            svc.dead_end = false;
        }
        s.images[img.name] = img;
        host.image = img.name;
    }
    return canonicalize(s);
}

}  // namespace

TEST(Ctf, Shape) {
    const auto s = ctf_scenario();
    EXPECT_TRUE(validate(s).empty());
    EXPECT_EQ(s.subnets.size(), 3u);
    EXPECT_EQ(s.hosts.size(), 9u);
    int flags = 0;
    for (const auto& [name, h] : s.hosts) flags += h.flag;
    EXPECT_EQ(flags, 1);
    EXPECT_TRUE(s.hosts.at("sec_vault").flag);
    EXPECT_EQ(s.entry_points.at(Team::red), "pub_gateway");
    EXPECT_EQ(s.entry_points.at(Team::blue), "sec_admin");
    EXPECT_EQ(s.red_actions.size(), 6u);
    EXPECT_EQ(s.blue_actions.size(), 4u);
    EXPECT_EQ(max_action_space_size(s), 84);
    EXPECT_EQ(Encoder(s).size(), 103);
}

TEST(Ctf, SecureSubnetNeedsPivot) {
    const auto w = init_world(ctf_scenario(), 0);
    const int pub = w.layout->subnet_index("public");
    const int sec = w.layout->subnet_index("secure");
    // Routable, but red cannot name it before it owns a dmz host.
    EXPECT_TRUE(w.reachable[pub][sec]);
    EXPECT_FALSE(w.kb(Team::red).known_subnets[sec]);
    EXPECT_EQ(w.kb(Team::red).known_subnets[w.layout->subnet_index("dmz")], 1);
}

TEST(Ctf, ShortestCertainAttackIsEight) {
    // sweep dmz, scan, exploit, sweep secure, scan vault, brute rdp, escalate, capture.
    EXPECT_EQ(oracle::RedModel(with_certain_outcomes(ctf_scenario())).min_steps(), 8);
}

TEST(Ctf, EveryDmzHostIsAPivot) {
    int chains = 0;
    for (const char* keep : {"dmz_web", "dmz_files", "dmz_db"}) {
        const auto s = only_pivot(keep);
        ASSERT_TRUE(validate(s).empty()) << keep;
        const int steps = oracle::RedModel(s).min_steps();
        EXPECT_GT(steps, 0) << keep;
        chains += steps > 0;
    }
    EXPECT_GE(chains, 2);
    // Without any dmz foothold the flag is out of reach.
    auto none = only_pivot("dmz_web");
    for (auto& [name, img] : none.images)
        if (name == "web_linux")
            for (auto& svc : img.services) {
                svc.vulnerability.reset();
                svc.exploit_success_prob = 0.0;
            }
    EXPECT_EQ(oracle::RedModel(canonicalize(none)).min_steps(), -1);
    EXPECT_FALSE(attack_path_exists(none));
}

TEST(Ctf, YamlMatchesConstructor) {
    EXPECT_EQ(oracle::load_shipped("scenarios/ctf"), ctf_scenario());
}

TEST(Ctf, RandomAgentCaptures) {
    EnvConfig c;
    c.scenario = ctf_scenario();
    c.seed = 1;
    Env env(c);
    RandomAgent agent(1);
    int captures = 0;
    for (int e = 0; e < 50; ++e) captures += run_episode(agent, env, false).captured;
    EXPECT_GT(captures, 25);
}

TEST(Chain, Shape) {
    for (int n = 1; n <= 5; ++n) {
        const auto s = chain_scenario(n);
        EXPECT_TRUE(validate(s).empty()) << n;
        EXPECT_EQ(s.hosts.size(), static_cast<std::size_t>(n));
        EXPECT_TRUE(s.hosts.at("node" + std::to_string(n - 1)).flag);
    }
    EXPECT_THROW(chain_scenario(0), ValidationError);
    EXPECT_EQ(chain_minimal_steps(1), 2);
    EXPECT_EQ(chain_minimal_steps(3), 8);
}

TEST(Chain, MinimalStepsAgreeWithBothOracles) {
    for (int n = 1; n <= 5; ++n)
        EXPECT_EQ(oracle::RedModel(chain_scenario(n)).min_steps(), chain_minimal_steps(n)) << n;
    for (int n = 1; n <= 3; ++n)
        EXPECT_EQ(oracle::simulator_bfs_min_steps(chain_scenario(n)), chain_minimal_steps(n)) << n;
}

TEST(Chain, TabularSolvesChainOfThree) {
    EnvConfig c;
    c.scenario = chain_scenario(3);
    c.max_steps = 50;
    Env env(c);
    TabularConfig tc;
    tc.seed = 3;
    tc.epsilon_decay_episodes = 300;
    TabularQAgent agent(tc, env.indexer().size());
    int solved_at = -1;
    for (int e = 0; e < 5000 && solved_at < 0; ++e) {
        run_episode(agent, env, true);
        if (e % 50 == 49) {
            const auto greedy = run_episode(agent, env, false);
            if (greedy.captured && greedy.steps == chain_minimal_steps(3)) solved_at = e;
        }
    }
    EXPECT_GE(solved_at, 0);
    const auto rec = run_episode(agent, env, false);
    EXPECT_TRUE(rec.captured);
    EXPECT_EQ(rec.steps, chain_minimal_steps(3));
}

TEST(Certain, OnlyProbabilitiesChange) {
    const auto s = ctf_scenario();
    const auto c = with_certain_outcomes(s);
    EXPECT_EQ(c.hosts, s.hosts);
    EXPECT_EQ(c.subnets, s.subnets);
    for (const auto& a : c.red_actions) EXPECT_EQ(a.success_prob, 1.0);
    for (const auto& [name, img] : c.images) {
        const auto& orig = s.images.at(name);
        for (std::size_t i = 0; i < img.services.size(); ++i) {
            EXPECT_EQ(img.services[i].dead_end, orig.services[i].dead_end);
            EXPECT_EQ(img.services[i].exploit_success_prob, img.services[i].vulnerability ? 1.0 : 0.0);
        }
    }
}
