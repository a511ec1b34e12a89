#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cyborg/errors.hpp"

namespace cyborg {

enum class Team { red, blue };
enum class Privilege { user, root };

enum class ActionType {
    ping_sweep,
    port_scan,
    brute_force,
    exploit_service,
    escalate_privilege,
    capture_flag,
    monitor_host,
    patch_service,
    block_route,
    reset_host,
};

enum class TargetKind { subnet, host, service, credential, none };

inline constexpr std::array<ActionType, 10> kAllActionTypes = {
    ActionType::ping_sweep,      ActionType::port_scan,          ActionType::brute_force,
    ActionType::exploit_service, ActionType::escalate_privilege, ActionType::capture_flag,
    ActionType::monitor_host,    ActionType::patch_service,      ActionType::block_route,
    ActionType::reset_host,
};

inline std::string_view to_string(Team t) { return t == Team::red ? "red" : "blue"; }
inline std::string_view to_string(Privilege p) { return p == Privilege::user ? "user" : "root"; }

inline std::string_view to_string(ActionType t) {
    switch (t) {
        case ActionType::ping_sweep: return "ping_sweep";
        case ActionType::port_scan: return "port_scan";
        case ActionType::brute_force: return "brute_force";
        case ActionType::exploit_service: return "exploit_service";
        case ActionType::escalate_privilege: return "escalate_privilege";
        case ActionType::capture_flag: return "capture_flag";
        case ActionType::monitor_host: return "monitor_host";
        case ActionType::patch_service: return "patch_service";
        case ActionType::block_route: return "block_route";
        case ActionType::reset_host: return "reset_host";
    }
    return "?";
}

inline std::string_view to_string(TargetKind k) {
    switch (k) {
        case TargetKind::subnet: return "subnet";
        case TargetKind::host: return "host";
        case TargetKind::service: return "service";
        case TargetKind::credential: return "credential";
        case TargetKind::none: return "none";
    }
    return "?";
}

inline std::optional<Team> parse_team(std::string_view s) {
    if (s == "red") return Team::red;
    if (s == "blue") return Team::blue;
    return std::nullopt;
}

inline std::optional<Privilege> parse_privilege(std::string_view s) {
    if (s == "user") return Privilege::user;
    if (s == "root") return Privilege::root;
    return std::nullopt;
}

inline std::optional<ActionType> parse_action_type(std::string_view s) {
    for (auto t : kAllActionTypes)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

inline constexpr Team team_of(ActionType t) {
    switch (t) {
        case ActionType::monitor_host:
        case ActionType::patch_service:
        case ActionType::block_route:
        case ActionType::reset_host: return Team::blue;
        default: return Team::red;
    }
}

inline constexpr TargetKind target_kind_of(ActionType t) {
    switch (t) {
        case ActionType::ping_sweep:
        case ActionType::block_route: return TargetKind::subnet;
        case ActionType::brute_force:
        case ActionType::exploit_service:
        case ActionType::patch_service: return TargetKind::service;
        default: return TargetKind::host;
    }
}

inline constexpr double default_cost(ActionType t) {
    switch (t) {
        case ActionType::ping_sweep:
        case ActionType::port_scan: return 0.1;
        case ActionType::brute_force:
        case ActionType::exploit_service:
        case ActionType::escalate_privilege: return 1.0;
        case ActionType::capture_flag: return 0.0;
        default: return 0.5;
    }
}

// Per-type tunables accepted under `params` in the actions file, with defaults.
inline std::map<std::string, double> default_params(ActionType t) {
    if (t == ActionType::monitor_host) return {{"detection_prob", 0.5}};
    return {};
}

struct ActionSpec {
    std::string name;
    Team team = Team::red;
    ActionType type = ActionType::ping_sweep;
    double cost = 0.0;
    double success_prob = 1.0;
    std::map<std::string, double> params;

    TargetKind target_kind() const { return target_kind_of(type); }

    double param(const std::string& key) const {
        if (auto it = params.find(key); it != params.end()) return it->second;
        return default_params(type).at(key);
    }

    bool operator==(const ActionSpec&) const = default;
};

inline ActionSpec make_action(ActionType type) {
    return ActionSpec{std::string(to_string(type)), team_of(type), type, default_cost(type), 1.0,
                      default_params(type)};
}

// Six red types followed by four blue types, in declaration order.
inline std::vector<ActionSpec> builtin_catalog() {
    std::vector<ActionSpec> out;
    out.reserve(kAllActionTypes.size());
    for (auto t : kAllActionTypes) out.push_back(make_action(t));
    return out;
}

inline std::vector<ActionSpec> resolve_action_names(std::span<const std::string> names, Team team,
                                                    std::span<const ActionSpec> catalog) {
    std::vector<ActionSpec> out;
    out.reserve(names.size());
    for (const auto& name : names) {
        const ActionSpec* found = nullptr;
        for (const auto& spec : catalog) {
            if (spec.name == name) {
                found = &spec;
                break;
            }
        }
        if (!found) throw UnknownAction("unknown action '" + name + "'");
        if (found->team != team)
            throw WrongTeam("action '" + name + "' belongs to team " +
                            std::string(to_string(found->team)) + ", not " +
                            std::string(to_string(team)));
        out.push_back(*found);
    }
    return out;
}

inline std::vector<ActionSpec> resolve_action_names(std::span<const std::string> names, Team team) {
    const auto catalog = builtin_catalog();
    return resolve_action_names(names, team, catalog);
}

}  // namespace cyborg
