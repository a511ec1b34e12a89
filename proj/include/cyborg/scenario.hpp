#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cyborg/action_catalog.hpp"
#include "cyborg/errors.hpp"
#include "cyborg/net.hpp"

namespace cyborg {

enum class OsFamily { Linux, Windows };
enum class Vulnerability { remote_exploit, credential_bruteforce };

inline std::string_view to_string(OsFamily os) { return os == OsFamily::Linux ? "linux" : "windows"; }
inline std::string_view to_string(Vulnerability v) {
    return v == Vulnerability::remote_exploit ? "remote_exploit" : "credential_bruteforce";
}

struct ServiceSpec {
    std::string name;
    int port = 0;
    std::optional<Vulnerability> vulnerability;
    double exploit_success_prob = 0.0;
    bool dead_end = false;  // exploitable, but never yields a session

    bool operator==(const ServiceSpec&) const = default;
};

struct CredentialSpec {
    std::string username;
    std::string password;
    Privilege privilege = Privilege::user;
    bool guessable = false;

    auto operator<=>(const CredentialSpec&) const = default;
};

struct ImageSpec {
    std::string name;
    OsFamily os = OsFamily::Linux;
    std::vector<ServiceSpec> services;
    std::vector<CredentialSpec> credentials;
    std::optional<std::string> cloud_image_id;  // carried for emulation, unused by the simulator

    bool operator==(const ImageSpec&) const = default;
};

struct HostSpec {
    std::string name;
    std::string image;
    std::string subnet;
    double value = 0.0;
    bool flag = false;

    bool operator==(const HostSpec&) const = default;
};

struct SubnetSpec {
    std::string name;
    Cidr address_range;
    std::vector<std::string> host_names;
    std::vector<std::string> routes_to;  // directional

    bool operator==(const SubnetSpec&) const = default;
};

struct Scenario {
    std::string name;
    std::vector<SubnetSpec> subnets;
    std::map<std::string, HostSpec> hosts;
    std::map<std::string, ImageSpec> images;
    std::vector<ActionSpec> red_actions;
    std::vector<ActionSpec> blue_actions;
    std::map<Team, std::string> entry_points;
    std::map<Team, Privilege> entry_privileges;  // absent = user

    const SubnetSpec* find_subnet(const std::string& n) const {
        for (const auto& s : subnets)
            if (s.name == n) return &s;
        return nullptr;
    }

    const std::vector<ActionSpec>& actions(Team t) const {
        return t == Team::red ? red_actions : blue_actions;
    }

    const ImageSpec& image_of(const std::string& host) const {
        return images.at(hosts.at(host).image);
    }

    bool operator==(const Scenario&) const = default;
};

// Canonical form: subnet host lists rebuilt from the hosts map, every list sorted by
// name, defaults expanded. Two scenarios are structurally equal iff their canonical
// forms compare equal.
inline Scenario canonicalize(Scenario s) {
    for (auto& [key, h] : s.hosts) h.name = key;
    for (auto& [key, img] : s.images) {
        img.name = key;
        for (auto& svc : img.services) {
            if (!svc.vulnerability) {
                svc.exploit_success_prob = 0.0;
                svc.dead_end = false;
            }
        }
        std::sort(img.services.begin(), img.services.end(),
                  [](const auto& a, const auto& b) {
                      return std::tie(a.name, a.port) < std::tie(b.name, b.port);
                  });
        std::sort(img.credentials.begin(), img.credentials.end());
    }
    for (auto& sn : s.subnets) {
        sn.host_names.clear();
        std::sort(sn.routes_to.begin(), sn.routes_to.end());
    }
    std::sort(s.subnets.begin(), s.subnets.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& [key, h] : s.hosts) {
        for (auto& sn : s.subnets)
            if (sn.name == h.subnet) sn.host_names.push_back(key);
    }
    std::erase_if(s.entry_privileges, [](const auto& kv) { return kv.second == Privilege::user; });
    auto by_name = [](const ActionSpec& a, const ActionSpec& b) { return a.name < b.name; };
    for (auto* list : {&s.red_actions, &s.blue_actions}) {
        for (auto& a : *list) {
            auto full = default_params(a.type);
            for (const auto& [k, v] : a.params) full[k] = v;
            a.params = std::move(full);
        }
        std::sort(list->begin(), list->end(), by_name);
    }
    return s;
}

namespace detail {

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

inline void validate_action(const ActionSpec& a, const std::string& path, Team listed_team,
                            std::vector<Diagnostic>& out) {
    if (a.team != team_of(a.type))
        out.push_back({path + ".team", "type " + std::string(to_string(a.type)) +
                                           " is a " + std::string(to_string(team_of(a.type))) +
                                           " action"});
    if (a.team != listed_team)
        out.push_back({path, "action '" + a.name + "' belongs to team " +
                                 std::string(to_string(a.team))});
    if (!(a.cost >= 0.0)) out.push_back({path + ".cost", "cost must be >= 0"});
    if (!is_probability(a.success_prob))
        out.push_back({path + ".success_prob", "probability outside [0,1]"});
    const auto allowed = default_params(a.type);
    for (const auto& [k, v] : a.params) {
        if (!allowed.count(k))
            out.push_back({path + ".params." + k, "unknown parameter"});
        else if (!is_probability(v))
            out.push_back({path + ".params." + k, "probability outside [0,1]"});
    }
}

}  // namespace detail

// Checks every structural invariant of a scenario. Returns an empty list when valid.
inline std::vector<Diagnostic> validate(const Scenario& s) {
    std::vector<Diagnostic> out;

    std::set<std::string> subnet_names;
    for (const auto& sn : s.subnets) {
        if (sn.name.empty()) out.push_back({"subnets", "subnet with empty name"});
        if (!subnet_names.insert(sn.name).second)
            out.push_back({"subnets." + sn.name, "duplicate subnet name '" + sn.name + "'"});
    }
    for (std::size_t i = 0; i < s.subnets.size(); ++i) {
        const auto& sn = s.subnets[i];
        const std::string path = "subnets." + sn.name;
        std::set<std::string> seen;
        for (const auto& r : sn.routes_to) {
            if (r == sn.name) out.push_back({path + ".routes_to", "subnet routes to itself"});
            else if (!subnet_names.count(r))
                out.push_back({path + ".routes_to", "unknown subnet '" + r + "'"});
            if (!seen.insert(r).second)
                out.push_back({path + ".routes_to", "duplicate route to '" + r + "'"});
        }
        for (std::size_t j = i + 1; j < s.subnets.size(); ++j) {
            const auto& other = s.subnets[j];
            if (sn.address_range.contains(other.address_range.network) ||
                other.address_range.contains(sn.address_range.network))
                out.push_back({path + ".cidr", "overlaps subnet '" + other.name + "'"});
        }
        std::uint64_t count = 0;
        for (const auto& [name, h] : s.hosts)
            if (h.subnet == sn.name) ++count;
        if (count > sn.address_range.usable())
            out.push_back({path + ".cidr", sn.address_range.str() + " has " +
                                               std::to_string(sn.address_range.usable()) +
                                               " usable addresses for " + std::to_string(count) +
                                               " hosts"});
    }

    for (const auto& [key, img] : s.images) {
        const std::string path = "images." + key;
        std::set<int> ports;
        for (const auto& svc : img.services) {
            const std::string sp = path + ".services." + svc.name;
            if (svc.port < 1 || svc.port > 65535)
                out.push_back({sp + ".port", "port outside 1-65535"});
            if (!ports.insert(svc.port).second)
                out.push_back({sp + ".port", "duplicate port " + std::to_string(svc.port)});
            if (!detail::is_probability(svc.exploit_success_prob))
                out.push_back({sp + ".exploit_success_prob", "probability outside [0,1]"});
            if (!svc.vulnerability && svc.exploit_success_prob != 0.0)
                out.push_back({sp + ".exploit_success_prob",
                               "must be 0 when no vulnerability is declared"});
        }
        std::set<std::pair<std::string, Privilege>> creds;
        for (const auto& c : img.credentials) {
            if (!creds.insert({c.username, c.privilege}).second)
                out.push_back({path + ".credentials." + c.username,
                               "duplicate credential (" + c.username + ", " +
                                   std::string(to_string(c.privilege)) + ")"});
        }
    }

    int flags = 0;
    for (const auto& [key, h] : s.hosts) {
        const std::string path = "hosts." + key;
        if (!s.images.count(h.image))
            out.push_back({path + ".image", "unknown image '" + h.image + "'"});
        if (!subnet_names.count(h.subnet))
            out.push_back({path + ".subnet", "unknown subnet '" + h.subnet + "'"});
        if (!(h.value >= 0.0)) out.push_back({path + ".value", "value must be >= 0"});
        if (h.flag) {
            ++flags;
            if (!(h.value > 0.0)) out.push_back({path + ".value", "flag host must have value > 0"});
        }
    }
    if (s.hosts.empty()) out.push_back({"hosts", "scenario has no hosts"});
    if (flags == 0) out.push_back({"hosts", "no flag host"});
    if (flags > 1) out.push_back({"hosts", "multiple flag hosts (" + std::to_string(flags) + ")"});

    for (Team t : {Team::red, Team::blue}) {
        const std::string path = "entry_points." + std::string(to_string(t));
        auto it = s.entry_points.find(t);
        if (it == s.entry_points.end()) out.push_back({path, "missing entry point"});
        else if (!s.hosts.count(it->second))
            out.push_back({path, "unknown host '" + it->second + "'"});
    }

    for (Team t : {Team::red, Team::blue}) {
        const std::string list = std::string(to_string(t)) + "_actions";
        std::set<std::string> names;
        for (const auto& a : s.actions(t)) {
            if (!names.insert(a.name).second)
                out.push_back({list + "." + a.name, "duplicate action '" + a.name + "'"});
            detail::validate_action(a, list + "." + a.name, t, out);
        }
    }
    return out;
}

inline void validate_or_throw(const Scenario& s) {
    auto diags = validate(s);
    if (!diags.empty()) throw ValidationError(std::move(diags));
}

// Addresses are handed out per subnet from the first usable address, following the
// canonical (name-sorted) host order.
inline std::map<std::string, Ipv4Address> host_addresses(const Scenario& s) {
    std::map<std::string, Ipv4Address> out;
    for (const auto& sn : s.subnets) {
        std::uint32_t next = sn.address_range.first_usable().value;
        for (const auto& [key, h] : s.hosts) {
            if (h.subnet != sn.name) continue;
            out[key] = Ipv4Address{next++};
        }
    }
    return out;
}

}  // namespace cyborg
