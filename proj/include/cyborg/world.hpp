#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cyborg/random.hpp"
#include "cyborg/scenario.hpp"

namespace cyborg {

enum class Compromise { none, user, root };

inline std::string_view to_string(Compromise c) {
    switch (c) {
        case Compromise::none: return "none";
        case Compromise::user: return "user";
        case Compromise::root: return "root";
    }
    return "?";
}

inline constexpr int kRedEntrySession = 0;
inline constexpr int kBlueEntrySession = 1;

// Immutable index tables derived from a scenario. Hosts are indexed in name order,
// subnets in canonical (name) order, services in each image's canonical order.
struct WorldLayout {
    Scenario scenario;
    std::vector<std::string> host_names;
    std::vector<int> host_subnet;
    std::vector<Ipv4Address> addresses;
    std::vector<const ImageSpec*> host_image;
    std::vector<std::vector<int>> subnet_hosts;
    std::vector<std::vector<char>> initial_routes;  // [from][to]
    int max_services = 0;
    int flag_host = -1;
    int entry_host[2] = {-1, -1};

    explicit WorldLayout(Scenario s) : scenario(std::move(s)) {
        const auto addr = host_addresses(scenario);
        std::map<std::string, int> subnet_index;
        for (std::size_t i = 0; i < scenario.subnets.size(); ++i)
            subnet_index[scenario.subnets[i].name] = static_cast<int>(i);
        subnet_hosts.resize(scenario.subnets.size());
        for (const auto& [name, h] : scenario.hosts) {
            const int idx = static_cast<int>(host_names.size());
            host_names.push_back(name);
            host_subnet.push_back(subnet_index.at(h.subnet));
            addresses.push_back(addr.at(name));
            host_image.push_back(&scenario.images.at(h.image));
            subnet_hosts[host_subnet.back()].push_back(idx);
            max_services =
                std::max(max_services, static_cast<int>(host_image.back()->services.size()));
            if (h.flag) flag_host = idx;
        }
        const auto n = scenario.subnets.size();
        initial_routes.assign(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& r : scenario.subnets[i].routes_to)
                initial_routes[i][subnet_index.at(r)] = 1;
        entry_host[0] = host_index(scenario.entry_points.at(Team::red));
        entry_host[1] = host_index(scenario.entry_points.at(Team::blue));
    }

    WorldLayout(const WorldLayout&) = delete;
    WorldLayout& operator=(const WorldLayout&) = delete;

    int num_hosts() const { return static_cast<int>(host_names.size()); }
    int num_subnets() const { return static_cast<int>(scenario.subnets.size()); }

    int host_index(const std::string& name) const {
        auto it = std::lower_bound(host_names.begin(), host_names.end(), name);
        return it != host_names.end() && *it == name ? static_cast<int>(it - host_names.begin())
                                                     : -1;
    }

    int host_at(Ipv4Address a) const {
        for (int i = 0; i < num_hosts(); ++i)
            if (addresses[i] == a) return i;
        return -1;
    }

    int service_slot(int host, int port) const {
        const auto& svcs = host_image[host]->services;
        for (std::size_t i = 0; i < svcs.size(); ++i)
            if (svcs[i].port == port) return static_cast<int>(i);
        return -1;
    }

    int subnet_index(const std::string& name) const {
        for (int i = 0; i < num_subnets(); ++i)
            if (scenario.subnets[i].name == name) return i;
        return -1;
    }

    // Does this host accept a root credential contained in `creds`?
    bool root_credential_known(int host, const std::set<CredentialSpec>& creds) const {
        for (const auto& c : host_image[host]->credentials)
            if (c.privilege == Privilege::root && creds.count(c)) return true;
        return false;
    }
};

struct ServiceState {
    ServiceSpec spec;
    bool patched = false;
    bool running = true;

    bool operator==(const ServiceState&) const = default;
};

struct HostState {
    HostSpec spec;
    Ipv4Address address;
    std::vector<ServiceState> services;
    Compromise compromised_level = Compromise::none;

    bool operator==(const HostState&) const = default;
};

struct Session {
    int id = 0;
    Team team = Team::red;
    int host = 0;  // host index
    Privilege privilege = Privilege::user;
    bool alive = true;

    bool operator==(const Session&) const = default;
};

// Per-team knowledge, index-addressed by the layout's host/subnet/service order.
struct KnowledgeBase {
    std::vector<char> known_hosts;
    std::vector<char> scanned_hosts;
    std::vector<std::vector<char>> known_services;      // [host][service slot]
    std::vector<std::vector<char>> exploited_services;  // [host][service slot]
    std::set<CredentialSpec> known_credentials;
    std::vector<char> known_subnets;
    std::vector<int> owned_sessions;
    std::set<int> detected_sessions;  // opposing sessions revealed by monitoring

    bool operator==(const KnowledgeBase&) const = default;
};

struct Target {
    TargetKind kind = TargetKind::none;
    int subnet = -1;  // subnet index
    Ipv4Address address{};
    int port = 0;
    int credential = -1;

    static Target for_subnet(int s) { return Target{TargetKind::subnet, s, {}, 0, -1}; }
    static Target for_host(Ipv4Address a) { return Target{TargetKind::host, -1, a, 0, -1}; }
    static Target for_service(Ipv4Address a, int port) {
        return Target{TargetKind::service, -1, a, port, -1};
    }

    bool operator==(const Target&) const = default;
};

struct ActionInstance {
    const ActionSpec* spec = nullptr;  // points into the world's scenario action lists
    int source_session = 0;
    Target target;

    bool operator==(const ActionInstance&) const = default;
};

struct PreconditionResult {
    bool ok = false;
    std::string reason;

    explicit operator bool() const { return ok; }
};

struct Revealed {
    std::vector<Ipv4Address> hosts;
    std::vector<std::pair<Ipv4Address, int>> services;
    std::vector<CredentialSpec> credentials;
    std::vector<Cidr> subnets;
    std::vector<int> sessions;
    std::vector<int> detected_sessions;

    bool empty() const {
        return hosts.empty() && services.empty() && credentials.empty() && subnets.empty() &&
               sessions.empty() && detected_sessions.empty();
    }
};

struct Outcome {
    bool success = false;
    std::string reason;
    double cost = 0.0;
    Revealed revealed;
};

struct SessionView {
    int id = 0;
    Ipv4Address host;
    Privilege privilege = Privilege::user;
    bool alive = true;

    auto operator<=>(const SessionView&) const = default;
};

struct Observation {
    Team team = Team::red;
    std::set<Ipv4Address> known_hosts;
    std::map<Ipv4Address, std::set<std::pair<int, std::string>>> known_services;
    std::set<CredentialSpec> known_credentials;
    std::set<Cidr> known_subnets;
    std::set<int> owned_sessions;
    std::vector<SessionView> sessions;
    std::set<Ipv4Address> scanned_hosts;
    std::set<std::pair<Ipv4Address, int>> exploited_services;
    std::map<Ipv4Address, Compromise> access;
    std::set<int> detected_sessions;
    bool flag_captured = false;

    bool operator==(const Observation&) const = default;
};

class WorldState {
public:
    std::shared_ptr<const WorldLayout> layout;
    std::vector<HostState> hosts;
    std::vector<std::vector<char>> routes;     // [from][to], mutable by block_route
    std::vector<std::vector<char>> reachable;  // reflexive transitive closure of routes
    std::vector<Session> sessions;             // index == session id
    KnowledgeBase known[2];
    bool flag_captured = false;
    std::uint64_t step_count = 0;
    Rng rng;

    const Scenario& scenario() const { return layout->scenario; }
    KnowledgeBase& kb(Team t) { return known[static_cast<int>(t)]; }
    const KnowledgeBase& kb(Team t) const { return known[static_cast<int>(t)]; }

    const ActionSpec& action(Team t, const std::string& name) const {
        for (const auto& a : scenario().actions(t))
            if (a.name == name) return a;
        throw UnknownAction("team " + std::string(to_string(t)) + " has no action '" + name + "'");
    }

    void recompute_reachability() {
        const auto n = routes.size();
        reachable = routes;
        for (std::size_t i = 0; i < n; ++i) reachable[i][i] = 1;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (reachable[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (reachable[k][j]) reachable[i][j] = 1;
    }

    bool operator==(const WorldState& o) const {
        return layout->scenario == o.layout->scenario && hosts == o.hosts && routes == o.routes &&
               reachable == o.reachable && sessions == o.sessions && known[0] == o.known[0] &&
               known[1] == o.known[1] && flag_captured == o.flag_captured &&
               step_count == o.step_count && rng == o.rng;
    }
};

namespace world_detail {

inline void learn_subnet(WorldState& w, Team team, int subnet, Revealed* rev) {
    auto& kb = w.kb(team);
    if (kb.known_subnets[subnet]) return;
    kb.known_subnets[subnet] = 1;
    if (rev) rev->subnets.push_back(w.scenario().subnets[subnet].address_range);
}

// Holding a session on a host exposes its routing table.
inline void learn_routes_from(WorldState& w, Team team, int host, Revealed* rev) {
    const int sn = w.layout->host_subnet[host];
    learn_subnet(w, team, sn, rev);
    for (int to = 0; to < static_cast<int>(w.routes.size()); ++to)
        if (w.routes[sn][to]) learn_subnet(w, team, to, rev);
}

inline void learn_host(WorldState& w, Team team, int host, Revealed* rev) {
    auto& kb = w.kb(team);
    if (kb.known_hosts[host]) return;
    kb.known_hosts[host] = 1;
    if (rev) rev->hosts.push_back(w.layout->addresses[host]);
}

inline void refresh_compromise(WorldState& w, int host) {
    Compromise level = Compromise::none;
    for (const auto& s : w.sessions) {
        if (s.team != Team::red || !s.alive || s.host != host) continue;
        level = std::max(level, s.privilege == Privilege::root ? Compromise::root : Compromise::user);
    }
    w.hosts[host].compromised_level = level;
}

inline int open_session(WorldState& w, Team team, int host, Privilege priv) {
    const int id = static_cast<int>(w.sessions.size());
    w.sessions.push_back(Session{id, team, host, priv, true});
    w.kb(team).owned_sessions.push_back(id);
    if (team == Team::red) refresh_compromise(w, host);
    return id;
}

// New user-level foothold, unless the team already holds a live session there.
inline void gain_session(WorldState& w, Team team, int host, Revealed* rev) {
    bool have = false;
    for (const auto& s : w.sessions)
        have = have || (s.team == team && s.alive && s.host == host);
    if (!have) {
        const int id = open_session(w, team, host, Privilege::user);
        if (rev) rev->sessions.push_back(id);
    }
    learn_routes_from(w, team, host, rev);
}

inline PreconditionResult fail(std::string reason) { return {false, std::move(reason)}; }

}  // namespace world_detail

// Fresh world: hosts from images, one entry session per team (user unless configured), and each team
// seeded with its foothold (host address, subnet, routing table, login credentials).
inline WorldState init_world(std::shared_ptr<const WorldLayout> layout, std::uint64_t seed) {
    WorldState w;
    w.layout = layout;
    const Scenario& s = layout->scenario;
    const int nh = layout->num_hosts();
    const int ns = layout->num_subnets();
    for (int i = 0; i < nh; ++i) {
        HostState h;
        h.spec = s.hosts.at(layout->host_names[i]);
        h.address = layout->addresses[i];
        for (const auto& svc : layout->host_image[i]->services) h.services.push_back({svc});
        w.hosts.push_back(std::move(h));
    }
    w.routes = layout->initial_routes;
    w.recompute_reachability();
    for (auto& kb : w.known) {
        kb.known_hosts.assign(nh, 0);
        kb.scanned_hosts.assign(nh, 0);
        kb.known_subnets.assign(ns, 0);
        kb.known_services.resize(nh);
        kb.exploited_services.resize(nh);
        for (int i = 0; i < nh; ++i) {
            kb.known_services[i].assign(layout->host_image[i]->services.size(), 0);
            kb.exploited_services[i].assign(layout->host_image[i]->services.size(), 0);
        }
    }
    for (Team t : {Team::red, Team::blue}) {
        const int host = layout->entry_host[static_cast<int>(t)];
        const auto priv = s.entry_privileges.find(t);
        world_detail::open_session(w, t, host,
                                   priv == s.entry_privileges.end() ? Privilege::user : priv->second);
        world_detail::learn_host(w, t, host, nullptr);
        world_detail::learn_routes_from(w, t, host, nullptr);
        for (const auto& c : layout->host_image[host]->credentials)
            w.kb(t).known_credentials.insert(c);
    }
    // The defender starts with the full network inventory.
    auto& blue = w.kb(Team::blue);
    for (int i = 0; i < nh; ++i) {
        blue.known_hosts[i] = 1;
        std::fill(blue.known_services[i].begin(), blue.known_services[i].end(), 1);
    }
    std::fill(blue.known_subnets.begin(), blue.known_subnets.end(), 1);
    w.rng = Rng(seed);
    return w;
}

inline WorldState init_world(const Scenario& s, std::uint64_t seed) {
    return init_world(std::make_shared<const WorldLayout>(canonicalize(s)), seed);
}

// Pure check of every condition under which `a` is available.
inline PreconditionResult check_preconditions(const WorldState& w, const ActionInstance& a) {
    using world_detail::fail;
    const auto& L = *w.layout;
    if (!a.spec) return fail("no action");
    const Team team = a.spec->team;
    if (a.source_session < 0 || a.source_session >= static_cast<int>(w.sessions.size()))
        return fail("dead session");
    const Session& src = w.sessions[a.source_session];
    if (!src.alive) return fail("dead session");
    if (src.team != team) return fail("session not owned");
    if (a.target.kind != a.spec->target_kind()) return fail("target kind mismatch");

    const auto& kb = w.kb(team);
    const int src_subnet = L.host_subnet[src.host];
    int host = -1;
    int slot = -1;
    int subnet = -1;
    switch (a.target.kind) {
        case TargetKind::subnet:
            subnet = a.target.subnet;
            if (subnet < 0 || subnet >= L.num_subnets() || !kb.known_subnets[subnet])
                return fail("target unknown");
            break;
        case TargetKind::host:
            host = L.host_at(a.target.address);
            if (host < 0 || !kb.known_hosts[host]) return fail("target unknown");
            subnet = L.host_subnet[host];
            break;
        case TargetKind::service:
            host = L.host_at(a.target.address);
            if (host < 0 || !kb.known_hosts[host]) return fail("target unknown");
            slot = L.service_slot(host, a.target.port);
            if (slot < 0 || !kb.known_services[host][slot]) return fail("target unknown");
            subnet = L.host_subnet[host];
            break;
        default: return fail("target kind mismatch");
    }
    if (!w.reachable[src_subnet][subnet]) return fail("unreachable");

    switch (a.spec->type) {
        case ActionType::ping_sweep:
        case ActionType::port_scan:
        case ActionType::monitor_host:
        case ActionType::patch_service:
        case ActionType::reset_host: return {true, "ok"};
        case ActionType::brute_force:
        case ActionType::exploit_service: {
            const auto& svc = w.hosts[host].services[slot];
            const auto want = a.spec->type == ActionType::brute_force
                                  ? Vulnerability::credential_bruteforce
                                  : Vulnerability::remote_exploit;
            if (!svc.running) return fail("not running");
            if (svc.spec.vulnerability != want) return fail("not vulnerable");
            if (svc.patched) return fail("patched");
            return {true, "ok"};
        }
        case ActionType::escalate_privilege:
            if (src.host != host || src.privilege != Privilege::user)
                return fail("no user session");
            if (!L.root_credential_known(host, kb.known_credentials))
                return fail("no root credential");
            return {true, "ok"};
        case ActionType::capture_flag:
            if (src.host != host || src.privilege != Privilege::root)
                return fail("no root session");
            if (!w.hosts[host].spec.flag) return fail("not flag host");
            return {true, "ok"};
        case ActionType::block_route:
            if (!w.routes[src_subnet][subnet]) return fail("no route");
            return {true, "ok"};
    }
    return fail("unknown type");
}

namespace world_detail {

inline void validate_instance(const WorldState& w, const ActionInstance& a) {
    if (!a.spec) throw MalformedTarget("action instance without a spec");
    if (a.source_session < 0 || a.source_session >= static_cast<int>(w.sessions.size()))
        throw UnknownSession("no session with id " + std::to_string(a.source_session));
    if (a.target.kind != a.spec->target_kind())
        throw MalformedTarget("action '" + a.spec->name + "' targets a " +
                              std::string(to_string(a.spec->target_kind())) + ", got a " +
                              std::string(to_string(a.target.kind)));
    if (a.target.kind == TargetKind::subnet &&
        (a.target.subnet < 0 || a.target.subnet >= w.layout->num_subnets()))
        throw MalformedTarget("subnet index out of range");
}

inline double target_modifier(const WorldState& w, const ActionInstance& a) {
    if (a.target.kind != TargetKind::service) return 1.0;
    if (a.spec->type != ActionType::brute_force && a.spec->type != ActionType::exploit_service)
        return 1.0;
    const int host = w.layout->host_at(a.target.address);
    return w.hosts[host].services[w.layout->service_slot(host, a.target.port)]
        .spec.exploit_success_prob;
}

inline void apply_effects(WorldState& w, const ActionInstance& a, Outcome& out) {
    const auto& L = *w.layout;
    const Team team = a.spec->team;
    auto& kb = w.kb(team);
    const Session src = w.sessions[a.source_session];
    Revealed* rev = &out.revealed;
    const int host = a.target.kind == TargetKind::subnet ? -1 : L.host_at(a.target.address);
    const int slot = a.target.kind == TargetKind::service ? L.service_slot(host, a.target.port) : -1;

    switch (a.spec->type) {
        case ActionType::ping_sweep:
            for (int h : L.subnet_hosts[a.target.subnet]) learn_host(w, team, h, rev);
            break;
        case ActionType::port_scan: {
            kb.scanned_hosts[host] = 1;
            const auto& svcs = w.hosts[host].services;
            for (std::size_t i = 0; i < svcs.size(); ++i) {
                if (!svcs[i].running || kb.known_services[host][i]) continue;
                kb.known_services[host][i] = 1;
                rev->services.push_back({w.hosts[host].address, svcs[i].spec.port});
            }
            break;
        }
        case ActionType::brute_force:
            kb.exploited_services[host][slot] = 1;
            for (const auto& c : L.host_image[host]->credentials) {
                if (c.guessable && kb.known_credentials.insert(c).second)
                    rev->credentials.push_back(c);
            }
            gain_session(w, team, host, rev);
            break;
        case ActionType::exploit_service:
            if (w.hosts[host].services[slot].spec.dead_end) {
                out.success = false;
                out.reason = "dead end";
                return;
            }
            kb.exploited_services[host][slot] = 1;
            gain_session(w, team, host, rev);
            break;
        case ActionType::escalate_privilege:
            w.sessions[src.id].privilege = Privilege::root;
            refresh_compromise(w, host);
            break;
        case ActionType::capture_flag:
            w.flag_captured = true;
            break;
        case ActionType::monitor_host: {
            const double p = a.spec->param("detection_prob");
            for (const auto& s : w.sessions) {
                if (s.team == team || !s.alive || s.host != host) continue;
                if (w.rng.uniform() < p && kb.detected_sessions.insert(s.id).second)
                    rev->detected_sessions.push_back(s.id);
            }
            break;
        }
        case ActionType::patch_service:
            w.hosts[host].services[slot].patched = true;
            break;
        case ActionType::block_route:
            w.routes[L.host_subnet[src.host]][a.target.subnet] = 0;
            w.recompute_reachability();
            break;
        case ActionType::reset_host:
            for (auto& s : w.sessions) {
                if (s.team == Team::red && s.host == host && s.id != kRedEntrySession)
                    s.alive = false;
            }
            refresh_compromise(w, host);
            break;
    }
    out.success = true;
    out.reason = "ok";
}

}  // namespace world_detail

// Executes one action instance. Unmet preconditions and unlucky draws are gameplay
// outcomes, not errors; step_count advances in every case.
inline Outcome apply_action(WorldState& w, const ActionInstance& a) {
    world_detail::validate_instance(w, a);
    Outcome out;
    out.cost = a.spec->cost;
    ++w.step_count;
    const auto pre = check_preconditions(w, a);
    if (!pre) {
        out.reason = pre.reason;
        return out;
    }
    const double p = a.spec->success_prob * world_detail::target_modifier(w, a);
    if (!(w.rng.uniform() < p)) {
        out.reason = "probability failure";
        return out;
    }
    world_detail::apply_effects(w, a, out);
    return out;
}

inline Observation observe(const WorldState& w, Team team) {
    const auto& L = *w.layout;
    const auto& kb = w.kb(team);
    Observation o;
    o.team = team;
    for (int h = 0; h < L.num_hosts(); ++h) {
        const auto addr = L.addresses[h];
        if (kb.known_hosts[h]) o.known_hosts.insert(addr);
        if (kb.scanned_hosts[h]) o.scanned_hosts.insert(addr);
        const auto& svcs = w.hosts[h].services;
        for (std::size_t i = 0; i < svcs.size(); ++i) {
            if (kb.known_services[h][i])
                o.known_services[addr].insert({svcs[i].spec.port, svcs[i].spec.name});
            if (kb.exploited_services[h][i]) o.exploited_services.insert({addr, svcs[i].spec.port});
        }
    }
    o.known_credentials = kb.known_credentials;
    for (int s = 0; s < L.num_subnets(); ++s)
        if (kb.known_subnets[s]) o.known_subnets.insert(L.scenario.subnets[s].address_range);
    for (int id : kb.owned_sessions) {
        const auto& s = w.sessions[id];
        o.owned_sessions.insert(id);
        o.sessions.push_back({id, L.addresses[s.host], s.privilege, s.alive});
        if (!s.alive) continue;
        auto level = team == Team::red ? w.hosts[s.host].compromised_level
                                       : (s.privilege == Privilege::root ? Compromise::root
                                                                         : Compromise::user);
        auto& slot = o.access[L.addresses[s.host]];
        slot = std::max(slot, level);
    }
    o.detected_sessions = kb.detected_sessions;
    o.flag_captured = team == Team::red && w.flag_captured;
    return o;
}

// Every available instance, ordered by action name, then session id, then target
// (subnet index, host index, service slot).
inline std::vector<ActionInstance> enumerate_actions(const WorldState& w, Team team) {
    const auto& L = *w.layout;
    const auto& kb = w.kb(team);
    std::vector<ActionInstance> out;
    for (const auto& spec : w.scenario().actions(team)) {
        for (int sid : kb.owned_sessions) {
            const auto& src = w.sessions[sid];
            if (!src.alive) continue;
            auto consider = [&](const Target& t) {
                ActionInstance a{&spec, sid, t};
                if (check_preconditions(w, a)) out.push_back(a);
            };
            switch (spec.target_kind()) {
                case TargetKind::subnet:
                    for (int s = 0; s < L.num_subnets(); ++s)
                        if (kb.known_subnets[s]) consider(Target::for_subnet(s));
                    break;
                case TargetKind::host:
                    for (int h = 0; h < L.num_hosts(); ++h)
                        if (kb.known_hosts[h]) consider(Target::for_host(L.addresses[h]));
                    break;
                case TargetKind::service:
                    for (int h = 0; h < L.num_hosts(); ++h) {
                        if (!kb.known_hosts[h]) continue;
                        for (std::size_t i = 0; i < kb.known_services[h].size(); ++i)
                            if (kb.known_services[h][i])
                                consider(Target::for_service(
                                    L.addresses[h], w.hosts[h].services[i].spec.port));
                    }
                    break;
                default: break;
            }
        }
    }
    return out;
}

inline std::string describe(const WorldState& w, const ActionInstance& a) {
    const auto& L = *w.layout;
    std::string target;
    switch (a.target.kind) {
        case TargetKind::subnet:
            target = L.scenario.subnets.at(a.target.subnet).name + " (" +
                     L.scenario.subnets.at(a.target.subnet).address_range.str() + ")";
            break;
        case TargetKind::host: target = a.target.address.str(); break;
        case TargetKind::service:
            target = a.target.address.str() + ":" + std::to_string(a.target.port);
            break;
        default: target = "-"; break;
    }
    return a.spec->name + " from session " + std::to_string(a.source_session) + " -> " + target;
}

// Full ground-truth dump for fixtures and debugging.
inline std::string dump_world_yaml(const WorldState& w) {
    const auto& L = *w.layout;
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "scenario" << YAML::Value << L.scenario.name;
    out << YAML::Key << "step_count" << YAML::Value << w.step_count;
    out << YAML::Key << "flag_captured" << YAML::Value << w.flag_captured;
    out << YAML::Key << "subnets" << YAML::Value << YAML::BeginSeq;
    for (int s = 0; s < L.num_subnets(); ++s) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << L.scenario.subnets[s].name;
        out << YAML::Key << "cidr" << YAML::Value << L.scenario.subnets[s].address_range.str();
        out << YAML::Key << "routes_to" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (int t = 0; t < L.num_subnets(); ++t)
            if (w.routes[s][t]) out << L.scenario.subnets[t].name;
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "hosts" << YAML::Value << YAML::BeginMap;
    for (int h = 0; h < L.num_hosts(); ++h) {
        const auto& hs = w.hosts[h];
        out << YAML::Key << L.host_names[h] << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "address" << YAML::Value << hs.address.str();
        out << YAML::Key << "image" << YAML::Value << hs.spec.image;
        out << YAML::Key << "subnet" << YAML::Value << hs.spec.subnet;
        out << YAML::Key << "value" << YAML::Value << hs.spec.value;
        out << YAML::Key << "flag" << YAML::Value << hs.spec.flag;
        out << YAML::Key << "compromised" << YAML::Value << std::string(to_string(hs.compromised_level));
        out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
        for (const auto& svc : hs.services) {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << svc.spec.name;
            out << YAML::Key << "port" << YAML::Value << svc.spec.port;
            out << YAML::Key << "patched" << YAML::Value << svc.patched;
            out << YAML::Key << "running" << YAML::Value << svc.running;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndMap;
    out << YAML::Key << "sessions" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : w.sessions) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << s.id;
        out << YAML::Key << "team" << YAML::Value << std::string(to_string(s.team));
        out << YAML::Key << "host" << YAML::Value << L.host_names[s.host];
        out << YAML::Key << "privilege" << YAML::Value << std::string(to_string(s.privilege));
        out << YAML::Key << "alive" << YAML::Value << s.alive;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "knowledge" << YAML::Value << YAML::BeginMap;
    for (Team t : {Team::red, Team::blue}) {
        const auto o = observe(w, t);
        out << YAML::Key << std::string(to_string(t)) << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "hosts" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (auto a : o.known_hosts) out << a.str();
        out << YAML::EndSeq;
        out << YAML::Key << "subnets" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (auto c : o.known_subnets) out << c.str();
        out << YAML::EndSeq;
        out << YAML::Key << "services" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& [addr, svcs] : o.known_services)
            for (const auto& [port, name] : svcs) out << addr.str() + ":" + std::to_string(port);
        out << YAML::EndSeq;
        out << YAML::Key << "credentials" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& c : o.known_credentials)
            out << c.username + "@" + std::string(to_string(c.privilege));
        out << YAML::EndSeq;
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace cyborg
