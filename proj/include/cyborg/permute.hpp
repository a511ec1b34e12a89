#pragma once

#include <algorithm>
#include <numeric>
#include <set>

#include "cyborg/random.hpp"
#include "cyborg/scenario.hpp"

namespace cyborg {

struct PermutationKnobs {
    bool flag_placement = false;            // move the flag within its subnet
    bool vulnerability_assignment = false;  // shuffle vulnerabilities among an image's services
    bool success_probabilities = false;     // resample exploit_success_prob of vulnerable services
    double prob_low = 0.2;
    double prob_high = 1.0;
    bool route_shuffle = false;  // relabel route endpoints by a random subnet permutation
    int max_attempts = 64;

    bool any() const {
        return flag_placement || vulnerability_assignment || success_probabilities || route_shuffle;
    }
};

// Static over-approximation-free analysis of the red attack graph: can red, starting from its
// entry host, reach a root session on the flag host and capture it with some action sequence?
// Mirrors the simulator's rules (knowledge-gated pivoting, brute force yields guessable
// credentials, escalation needs a root credential the host accepts). Ignores blue.
inline bool attack_path_exists(const Scenario& s) {
    auto has = [&](ActionType t) {
        for (const auto& a : s.red_actions)
            if (a.type == t && a.success_prob > 0.0) return true;
        return false;
    };
    const auto red_entry = s.entry_points.at(Team::red);
    std::set<std::string> known_subnets, known_hosts, sessions, roots;
    std::set<CredentialSpec> creds;

    auto learn_routes = [&](const std::string& host) {
        const auto& sn = s.hosts.at(host).subnet;
        known_subnets.insert(sn);
        for (const auto& r : s.find_subnet(sn)->routes_to) known_subnets.insert(r);
    };
    known_hosts.insert(red_entry);
    sessions.insert(red_entry);
    if (auto p = s.entry_privileges.find(Team::red); p != s.entry_privileges.end() && p->second == Privilege::root)
        roots.insert(red_entry);
    learn_routes(red_entry);
    for (const auto& c : s.image_of(red_entry).credentials) creds.insert(c);

    bool changed = true;
    while (changed) {
        changed = false;
        auto add = [&](std::set<std::string>& set, const std::string& v) {
            changed = set.insert(v).second || changed;
        };
        if (has(ActionType::ping_sweep)) {
            for (const auto& [name, h] : s.hosts)
                if (known_subnets.count(h.subnet)) add(known_hosts, name);
        }
        if (has(ActionType::port_scan)) {
            for (const auto& name : std::set<std::string>(known_hosts)) {
                for (const auto& svc : s.image_of(name).services) {
                    if (!svc.vulnerability || svc.exploit_success_prob <= 0.0) continue;
                    if (*svc.vulnerability == Vulnerability::remote_exploit && !svc.dead_end &&
                        has(ActionType::exploit_service)) {
                        add(sessions, name);
                    }
                    if (*svc.vulnerability == Vulnerability::credential_bruteforce &&
                        has(ActionType::brute_force)) {
                        add(sessions, name);
                        for (const auto& c : s.image_of(name).credentials)
                            if (c.guessable) changed = creds.insert(c).second || changed;
                    }
                }
            }
        }
        for (const auto& name : std::set<std::string>(sessions)) {
            const auto before = known_subnets.size();
            learn_routes(name);
            changed = changed || known_subnets.size() != before;
            if (!has(ActionType::escalate_privilege)) continue;
            for (const auto& c : s.image_of(name).credentials)
                if (c.privilege == Privilege::root && creds.count(c)) add(roots, name);
        }
    }
    for (const auto& [name, h] : s.hosts)
        if (h.flag) return roots.count(name) && has(ActionType::capture_flag);
    return false;
}

namespace permute_detail {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

inline Scenario permute_once(Scenario s, Rng& rng, const PermutationKnobs& k) {
    if (k.flag_placement) {
        std::string flag;
        for (const auto& [name, h] : s.hosts)
            if (h.flag) flag = name;
        const auto& subnet = s.hosts.at(flag).subnet;
        std::vector<std::string> candidates;
        for (const auto& [name, h] : s.hosts)
            if (h.subnet == subnet) candidates.push_back(name);
        const auto& pick = candidates[rng.index(candidates.size())];
        if (pick != flag) {
            auto& a = s.hosts.at(flag);
            auto& b = s.hosts.at(pick);
            std::swap(a.flag, b.flag);
            std::swap(a.value, b.value);
            if (!(b.value > 0.0)) b.value = 1.0;
        }
    }
    if (k.vulnerability_assignment) {
        for (auto& [name, img] : s.images) {
            struct Vuln {
                std::optional<Vulnerability> kind;
                double prob;
                bool dead_end;
            };
            std::vector<Vuln> v;
            for (const auto& svc : img.services)
                v.push_back({svc.vulnerability, svc.exploit_success_prob, svc.dead_end});
            shuffle(v, rng);
            for (std::size_t i = 0; i < v.size(); ++i) {
                img.services[i].vulnerability = v[i].kind;
                img.services[i].exploit_success_prob = v[i].prob;
                img.services[i].dead_end = v[i].dead_end;
            }
        }
    }
    if (k.success_probabilities) {
        for (auto& [name, img] : s.images)
            for (auto& svc : img.services)
                if (svc.vulnerability) svc.exploit_success_prob = rng.uniform(k.prob_low, k.prob_high);
    }
    if (k.route_shuffle) {
        std::vector<std::size_t> perm(s.subnets.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle(perm, rng);
        std::vector<std::vector<std::string>> routes(s.subnets.size());
        for (std::size_t i = 0; i < s.subnets.size(); ++i)
            for (const auto& r : s.subnets[i].routes_to) {
                std::size_t j = 0;
                while (s.subnets[j].name != r) ++j;
                routes[perm[i]].push_back(s.subnets[perm[j]].name);
            }
        for (std::size_t i = 0; i < s.subnets.size(); ++i) s.subnets[i].routes_to = routes[i];
    }
    return canonicalize(std::move(s));
}

}  // namespace permute_detail

// Deterministic in (s, seed, knobs). Draws are retried up to knobs.max_attempts times until
// the result still admits an attack path; otherwise InfeasibleError.
inline Scenario permute_scenario(const Scenario& s, std::uint64_t seed, const PermutationKnobs& knobs) {
    validate_or_throw(s);
    if (!knobs.any()) return canonicalize(s);
    if (knobs.success_probabilities &&
        !(0.0 <= knobs.prob_low && knobs.prob_low <= knobs.prob_high && knobs.prob_high <= 1.0))
        throw ValidationError("knobs.prob_low", "probability range must satisfy 0 <= low <= high <= 1");
    for (int attempt = 0; attempt < knobs.max_attempts; ++attempt) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        auto out = permute_detail::permute_once(canonicalize(s), rng, knobs);
        if (validate(out).empty() && attack_path_exists(out)) return out;
    }
    throw InfeasibleError("no permutation with a reachable flag after " +
                          std::to_string(knobs.max_attempts) + " attempts");
}

}  // namespace cyborg
