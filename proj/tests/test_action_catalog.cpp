#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace cyborg;

namespace {

Ipv4Address addr_of(const WorldState& w, const std::string& host) {
    return w.layout->addresses[w.layout->host_index(host)];
}

// CTF with certain outcomes and blue stationed on the gateway, where it can route-block.
WorldState blue_on_gateway(double detection_prob = 0.5) {
    auto s = with_certain_outcomes(ctf_scenario());
    s.entry_points[Team::blue] = "pub_gateway";
    for (auto& a : s.blue_actions)
        if (a.type == ActionType::monitor_host) a.params["detection_prob"] = detection_prob;
    return init_world(s, 0);
}

Outcome red_act(WorldState& w, const char* name, int session, Target t) {
    return apply_action(w, {&w.action(Team::red, name), session, t});
}

Outcome blue_act(WorldState& w, const char* name, Target t) {
    return apply_action(w, {&w.action(Team::blue, name), kBlueEntrySession, t});
}

int pivot_to_dmz_web(WorldState& w) {
    red_act(w, "ping_sweep", 0, Target::for_subnet(w.layout->subnet_index("dmz")));
    red_act(w, "port_scan", 0, Target::for_host(addr_of(w, "dmz_web")));
    const auto out = red_act(w, "exploit_service", 0, Target::for_service(addr_of(w, "dmz_web"), 80));
    EXPECT_TRUE(out.success) << out.reason;
    return out.revealed.sessions.empty() ? -1 : out.revealed.sessions[0];
}

}  // namespace

TEST(Catalog, SixRedFourBlue) {
    const auto cat = builtin_catalog();
    ASSERT_EQ(cat.size(), 10u);
    int red = 0, blue = 0;
    for (const auto& a : cat) (a.team == Team::red ? red : blue)++;
    EXPECT_EQ(red, 6);
    EXPECT_EQ(blue, 4);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(cat[i].team, Team::red);
    for (std::size_t i = 6; i < 10; ++i) EXPECT_EQ(cat[i].team, Team::blue);
}

TEST(Catalog, DefaultCostsAndKinds) {
    const std::map<std::string, std::pair<double, TargetKind>> expected = {
        {"ping_sweep", {0.1, TargetKind::subnet}},     {"port_scan", {0.1, TargetKind::host}},
        {"brute_force", {1.0, TargetKind::service}},   {"exploit_service", {1.0, TargetKind::service}},
        {"escalate_privilege", {1.0, TargetKind::host}}, {"capture_flag", {0.0, TargetKind::host}},
        {"monitor_host", {0.5, TargetKind::host}},     {"patch_service", {0.5, TargetKind::service}},
        {"block_route", {0.5, TargetKind::subnet}},    {"reset_host", {0.5, TargetKind::host}},
    };
    for (const auto& a : builtin_catalog()) {
        const auto& [cost, kind] = expected.at(a.name);
        EXPECT_DOUBLE_EQ(a.cost, cost) << a.name;
        EXPECT_EQ(a.target_kind(), kind) << a.name;
        EXPECT_EQ(a.success_prob, 1.0);
    }
    EXPECT_DOUBLE_EQ(make_action(ActionType::monitor_host).param("detection_prob"), 0.5);
}

TEST(Catalog, NameRoundTrip) {
    for (auto t : kAllActionTypes) EXPECT_EQ(parse_action_type(to_string(t)), t);
    EXPECT_FALSE(parse_action_type("teleport"));
    EXPECT_EQ(parse_team("blue"), Team::blue);
    EXPECT_FALSE(parse_team("green"));
    EXPECT_EQ(parse_privilege("root"), Privilege::root);
}

TEST(Catalog, ResolveNames) {
    const std::vector<std::string> names = {"capture_flag", "ping_sweep"};
    const auto out = resolve_action_names(names, Team::red);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].type, ActionType::capture_flag);
    EXPECT_EQ(out[1].type, ActionType::ping_sweep);

    const std::vector<std::string> unknown = {"ping_sweep", "teleport"};
    EXPECT_THROW(resolve_action_names(unknown, Team::red), UnknownAction);
    const std::vector<std::string> wrong = {"reset_host"};
    EXPECT_THROW(resolve_action_names(wrong, Team::red), WrongTeam);
    try {
        resolve_action_names(wrong, Team::red);
    } catch (const WrongTeam& e) {
        EXPECT_NE(std::string(e.what()).find("reset_host"), std::string::npos);
    }
}

TEST(Catalog, ResolveAgainstCustomCatalog) {
    auto cat = builtin_catalog();
    auto variant = make_action(ActionType::exploit_service);
    variant.name = "exploit_service_v1";
    variant.success_prob = 0.25;
    cat.push_back(variant);
    const std::vector<std::string> names = {"exploit_service_v1"};
    const auto out = resolve_action_names(names, Team::red, cat);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], variant);
}

TEST(Effects, ScanIsIdempotent) {
    auto w = blue_on_gateway();
    red_act(w, "ping_sweep", 0, Target::for_subnet(w.layout->subnet_index("dmz")));
    const auto scan = Target::for_host(addr_of(w, "dmz_files"));
    const auto first = red_act(w, "port_scan", 0, scan);
    EXPECT_EQ(first.revealed.services.size(), 3u);
    const auto kb = w.kb(Team::red);
    const auto second = red_act(w, "port_scan", 0, scan);
    EXPECT_TRUE(second.success);
    EXPECT_TRUE(second.revealed.empty());
    EXPECT_EQ(w.kb(Team::red), kb);
}

TEST(Effects, SweepIsIdempotent) {
    auto w = blue_on_gateway();
    const auto t = Target::for_subnet(w.layout->subnet_index("dmz"));
    EXPECT_EQ(red_act(w, "ping_sweep", 0, t).revealed.hosts.size(), 3u);
    const auto kb = w.kb(Team::red);
    EXPECT_TRUE(red_act(w, "ping_sweep", 0, t).revealed.empty());
    EXPECT_EQ(w.kb(Team::red), kb);
}

TEST(Effects, ExploitDoesNotDuplicateSessions) {
    auto w = blue_on_gateway();
    pivot_to_dmz_web(w);
    const auto n = w.sessions.size();
    const auto again = red_act(w, "exploit_service", 0, Target::for_service(addr_of(w, "dmz_web"), 80));
    EXPECT_TRUE(again.success);
    EXPECT_TRUE(again.revealed.sessions.empty());
    EXPECT_EQ(w.sessions.size(), n);
}

TEST(Effects, DeadEndChargesCostWithoutSession) {
    auto w = blue_on_gateway();
    red_act(w, "ping_sweep", 0, Target::for_subnet(w.layout->subnet_index("dmz")));
    red_act(w, "port_scan", 0, Target::for_host(addr_of(w, "dmz_web")));
    const auto sessions = w.sessions;
    const auto out = red_act(w, "exploit_service", 0, Target::for_service(addr_of(w, "dmz_web"), 443));
    EXPECT_FALSE(out.success);
    EXPECT_EQ(out.reason, "dead end");
    EXPECT_DOUBLE_EQ(out.cost, 1.0);
    EXPECT_EQ(w.sessions, sessions);
    EXPECT_EQ(w.hosts[w.layout->host_index("dmz_web")].compromised_level, Compromise::none);
}

TEST(Effects, BruteForceRevealsGuessableCredentials) {
    auto w = blue_on_gateway();
    const int web = pivot_to_dmz_web(w);
    red_act(w, "ping_sweep", web, Target::for_subnet(w.layout->subnet_index("secure")));
    red_act(w, "port_scan", web, Target::for_host(addr_of(w, "sec_backup")));
    const auto out = red_act(w, "brute_force", web, Target::for_service(addr_of(w, "sec_backup"), 3389));
    ASSERT_TRUE(out.success);
    std::set<std::string> users;
    for (const auto& c : out.revealed.credentials) users.insert(c.username);
    EXPECT_EQ(users, (std::set<std::string>{"Administrator", "backup"}));
    // The backup host's root credential also opens the vault.
    EXPECT_TRUE(w.layout->root_credential_known(w.layout->host_index("sec_vault"), w.kb(Team::red).known_credentials));
}

TEST(Effects, EscalateNeedsRootCredential) {
    auto w = blue_on_gateway();
    const int web = pivot_to_dmz_web(w);
    const auto out = red_act(w, "escalate_privilege", web, Target::for_host(addr_of(w, "dmz_web")));
    EXPECT_FALSE(out.success);
    EXPECT_EQ(out.reason, "no root credential");
}

TEST(Effects, BlockRouteShrinksReachability) {
    auto w = blue_on_gateway();
    const int pub = w.layout->subnet_index("public");
    const int dmz = w.layout->subnet_index("dmz");
    const int sec = w.layout->subnet_index("secure");
    ASSERT_TRUE(w.reachable[pub][sec]);
    const auto before = w.reachable;
    ASSERT_TRUE(blue_act(w, "block_route", Target::for_subnet(dmz)).success);
    EXPECT_FALSE(w.routes[pub][dmz]);
    EXPECT_FALSE(w.reachable[pub][dmz]);
    EXPECT_FALSE(w.reachable[pub][sec]);
    EXPECT_TRUE(w.reachable[dmz][sec]);
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = 0; j < before.size(); ++j)
            if (w.reachable[i][j]) { EXPECT_TRUE(before[i][j]); }
    const auto sweep = red_act(w, "ping_sweep", 0, Target::for_subnet(dmz));
    EXPECT_EQ(sweep.reason, "unreachable");
    // The blocked subnet is now out of reach; the own subnet is reachable but has no edge to remove.
    EXPECT_EQ(blue_act(w, "block_route", Target::for_subnet(dmz)).reason, "unreachable");
    EXPECT_EQ(blue_act(w, "block_route", Target::for_subnet(pub)).reason, "no route");
}

TEST(Effects, PatchStopsExploit) {
    auto w = blue_on_gateway();
    ASSERT_TRUE(blue_act(w, "patch_service", Target::for_service(addr_of(w, "dmz_web"), 80)).success);
    red_act(w, "ping_sweep", 0, Target::for_subnet(w.layout->subnet_index("dmz")));
    red_act(w, "port_scan", 0, Target::for_host(addr_of(w, "dmz_web")));
    const auto out = red_act(w, "exploit_service", 0, Target::for_service(addr_of(w, "dmz_web"), 80));
    EXPECT_FALSE(out.success);
    EXPECT_EQ(out.reason, "patched");
}

TEST(Effects, MonitorDetectsAtConfiguredRate) {
    auto base = blue_on_gateway(0.3);
    const int web = pivot_to_dmz_web(base);
    const auto t = Target::for_host(addr_of(base, "dmz_web"));
    int hits = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        auto w = base;
        w.rng = Rng(mix_seed(99, static_cast<std::uint64_t>(i)));
        const auto out = blue_act(w, "monitor_host", t);
        ASSERT_TRUE(out.success);
        if (!out.revealed.detected_sessions.empty()) {
            EXPECT_EQ(out.revealed.detected_sessions, std::vector<int>{web});
            ++hits;
        }
    }
    EXPECT_NEAR(hits / static_cast<double>(n), 0.3, 3 * std::sqrt(0.3 * 0.7 / n));
}

TEST(Effects, ResetSparesRedEntrySession) {
    auto w = blue_on_gateway();
    const int web = pivot_to_dmz_web(w);
    ASSERT_TRUE(blue_act(w, "reset_host", Target::for_host(addr_of(w, "pub_gateway"))).success);
    EXPECT_TRUE(w.sessions[kRedEntrySession].alive);
    EXPECT_TRUE(w.sessions[web].alive);
    ASSERT_TRUE(blue_act(w, "reset_host", Target::for_host(addr_of(w, "dmz_web"))).success);
    EXPECT_FALSE(w.sessions[web].alive);
    // The session can be regained.
    const auto out = red_act(w, "exploit_service", 0, Target::for_service(addr_of(w, "dmz_web"), 80));
    ASSERT_TRUE(out.success);
    EXPECT_EQ(out.revealed.sessions.size(), 1u);
}

namespace {

void check_invariants(const WorldState& w, const std::vector<std::vector<char>>& initial_routes) {
    const auto& L = *w.layout;
    const auto n = w.routes.size();
    // reachable is the reflexive transitive closure of routes.
    auto closure = w.routes;
    for (std::size_t i = 0; i < n; ++i) closure[i][i] = 1;
    for (bool grew = true; grew;) {
        grew = false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (closure[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (closure[k][j] && !closure[i][j]) closure[i][j] = grew = true;
    }
    ASSERT_EQ(closure, w.reachable);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (w.routes[i][j]) { ASSERT_TRUE(initial_routes[i][j]); }

    for (int h = 0; h < L.num_hosts(); ++h) {
        Compromise level = Compromise::none;
        for (const auto& s : w.sessions)
            if (s.team == Team::red && s.alive && s.host == h)
                level = std::max(level, s.privilege == Privilege::root ? Compromise::root : Compromise::user);
        ASSERT_EQ(w.hosts[h].compromised_level, level) << L.host_names[h];
    }
    std::set<std::pair<int, int>> live;
    for (std::size_t i = 0; i < w.sessions.size(); ++i) {
        const auto& s = w.sessions[i];
        ASSERT_EQ(s.id, static_cast<int>(i));
        if (s.team == Team::red && s.alive && s.id != kRedEntrySession) {
            ASSERT_TRUE(live.insert({s.host, 0}).second) << "two live red sessions on " << L.host_names[s.host];
        }
    }
    for (Team t : {Team::red, Team::blue}) {
        const auto& kb = w.kb(t);
        for (int id : kb.owned_sessions) ASSERT_EQ(w.sessions[id].team, t);
        for (int h = 0; h < L.num_hosts(); ++h)
            for (std::size_t i = 0; i < kb.known_services[h].size(); ++i)
                if (kb.known_services[h][i] && t == Team::red) { ASSERT_TRUE(kb.known_hosts[h]); }
    }
    ASSERT_TRUE(w.sessions[kRedEntrySession].alive);
}

}  // namespace

TEST(Effects, InvariantsHoldOnRandomScenarios) {
    Rng rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const auto s = oracle::random_scenario(rng);
        auto w = init_world(s, static_cast<std::uint64_t>(trial));
        const auto initial = w.routes;
        check_invariants(w, initial);
        for (int step = 0; step < 120; ++step) {
            const Team team = rng.index(3) == 0 ? Team::blue : Team::red;
            const auto list = enumerate_actions(w, team);
            if (list.empty()) continue;
            apply_action(w, list[rng.index(list.size())]);
            check_invariants(w, initial);
            if (HasFatalFailure()) return;
        }
    }
}
