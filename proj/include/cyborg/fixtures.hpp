#pragma once

#include <string>

#include "cyborg/scenario.hpp"

namespace cyborg {

namespace fixture_detail {

inline ServiceSpec svc(std::string name, int port) { return {std::move(name), port, std::nullopt, 0.0, false}; }

inline ServiceSpec svc(std::string name, int port, Vulnerability v, double p, bool dead_end = false) {
    return {std::move(name), port, v, p, dead_end};
}

inline CredentialSpec cred(std::string user, std::string pass, Privilege p, bool guessable) {
    return {std::move(user), std::move(pass), p, guessable};
}

inline std::vector<ActionSpec> all_actions(Team team) {
    std::vector<ActionSpec> out;
    for (auto t : kAllActionTypes)
        if (team_of(t) == team) out.push_back(make_action(t));
    return out;
}

}  // namespace fixture_detail

// Three subnets (public -> dmz -> secure) with three hosts each. The flag sits on
// sec_vault. Red enters on pub_gateway and must pivot into the dmz before it can learn
// the secure subnet. Pivot candidates: dmz_web (http exploit), dmz_files (smb exploit or
// rdp brute force) and dmz_db (mysql brute force). The vault's root credential is
// guessable by brute forcing rdp on either vault_windows host.
inline Scenario ctf_scenario() {
    using namespace fixture_detail;
    using V = Vulnerability;
    Scenario s;
    s.name = "ctf";
    s.subnets = {
        {"dmz", *Cidr::parse("10.0.1.0/24"), {}, {"secure"}},
        {"public", *Cidr::parse("10.0.0.0/24"), {}, {"dmz"}},
        {"secure", *Cidr::parse("10.0.2.0/24"), {}, {}},
    };
    auto host = [&](const char* name, const char* image, const char* subnet, double value,
                    bool flag = false) {
        s.hosts[name] = HostSpec{name, image, subnet, value, flag};
    };
    host("pub_gateway", "foothold", "public", 0.0);
    host("pub_mail", "mail_linux", "public", 1.0);
    host("pub_web", "web_linux", "public", 1.0);
    host("dmz_db", "db_linux", "dmz", 2.0);
    host("dmz_files", "files_windows", "dmz", 2.0);
    host("dmz_web", "web_linux", "dmz", 2.0);
    host("sec_admin", "admin_linux", "secure", 3.0);
    host("sec_backup", "vault_windows", "secure", 3.0);
    host("sec_vault", "vault_windows", "secure", 10.0, true);

    auto image = [&](const char* name, OsFamily os, std::vector<ServiceSpec> services,
                     std::vector<CredentialSpec> creds, std::optional<std::string> ami = {}) {
        s.images[name] = ImageSpec{name, os, std::move(services), std::move(creds), std::move(ami)};
    };
    image("foothold", OsFamily::Linux, {svc("ssh", 22)},
          {cred("operator", "op3rator", Privilege::user, false)}, "ami-0f00d5ee1c0ffee01");
    image("web_linux", OsFamily::Linux,
          {svc("http", 80, V::remote_exploit, 0.8), svc("https", 443, V::remote_exploit, 1.0, true),
           svc("ssh", 22, V::credential_bruteforce, 0.5)},
          {cred("root", "t00r-web", Privilege::root, false),
           cred("www", "www", Privilege::user, true)});
    image("mail_linux", OsFamily::Linux,
          {svc("imap", 143, V::credential_bruteforce, 0.6), svc("smtp", 25, V::remote_exploit, 1.0, true),
           svc("ssh", 22)},
          {cred("mail", "mail123", Privilege::user, true)});
    image("db_linux", OsFamily::Linux,
          {svc("http-alt", 8080), svc("mysql", 3306, V::credential_bruteforce, 0.3),
           svc("ssh", 22, V::remote_exploit, 1.0, true)},
          {cred("dbadmin", "dbadmin", Privilege::user, true)});
    image("files_windows", OsFamily::Windows,
          {svc("http", 80), svc("rdp", 3389, V::credential_bruteforce, 0.4),
           svc("smb", 445, V::remote_exploit, 0.7)},
          {cred("Administrator", "c0rp-Adm1n!", Privilege::root, false),
           cred("filesvc", "files2019", Privilege::user, true)});
    image("admin_linux", OsFamily::Linux,
          {svc("http", 80, V::remote_exploit, 1.0, true), svc("ssh", 22, V::credential_bruteforce, 0.5)},
          {cred("admin", "admin", Privilege::user, true)});
    image("vault_windows", OsFamily::Windows,
          {svc("http", 80, V::remote_exploit, 1.0, true), svc("rdp", 3389, V::credential_bruteforce, 0.6),
           svc("smb", 445, V::remote_exploit, 0.5)},
          {cred("Administrator", "Summer2019!", Privilege::root, true),
           cred("backup", "backup", Privilege::user, true)});

    s.entry_points = {{Team::red, "pub_gateway"}, {Team::blue, "sec_admin"}};
    s.red_actions = all_actions(Team::red);
    for (auto& a : s.red_actions)
        if (a.type == ActionType::escalate_privilege) a.success_prob = 0.9;
    s.blue_actions = all_actions(Team::blue);
    return canonicalize(std::move(s));
}

// n hosts in a line, one per subnet, routes only forward. Every host runs an always
// exploitable ssh service and shares a root credential that red holds from its foothold
// on node0, so the minimal capture is 3 actions per hop (sweep, scan, exploit) plus
// escalate and capture: 3(n-1) + 2.
inline Scenario chain_scenario(int n) {
    using namespace fixture_detail;
    if (n < 1) throw ValidationError("n", "chain length must be >= 1");
    Scenario s;
    s.name = "chain" + std::to_string(n);
    for (int i = 0; i < n; ++i) {
        const auto idx = std::to_string(i);
        SubnetSpec sn;
        sn.name = "net" + idx;
        sn.address_range = *Cidr::parse("10.10." + idx + ".0/29");
        if (i + 1 < n) sn.routes_to = {"net" + std::to_string(i + 1)};
        s.subnets.push_back(std::move(sn));
        const bool flag = i == n - 1;
        s.hosts["node" + idx] = HostSpec{"node" + idx, "chain_node", "net" + idx, flag ? 1.0 : 0.0, flag};
    }
    s.images["chain_node"] = ImageSpec{
        "chain_node",
        OsFamily::Linux,
        {svc("ssh", 22, Vulnerability::remote_exploit, 1.0)},
        {cred("operator", "chain-root", Privilege::root, false)},
        std::nullopt};
    s.entry_points = {{Team::red, "node0"}, {Team::blue, "node0"}};
    s.red_actions = all_actions(Team::red);
    return canonicalize(std::move(s));
}

inline int chain_minimal_steps(int n) { return 3 * (n - 1) + 2; }

// Every action and every declared vulnerability succeeds with certainty. Dead ends stay dead.
inline Scenario with_certain_outcomes(Scenario s) {
    for (auto* list : {&s.red_actions, &s.blue_actions})
        for (auto& a : *list) a.success_prob = 1.0;
    for (auto& [name, img] : s.images)
        for (auto& svc : img.services)
            if (svc.vulnerability) svc.exploit_success_prob = 1.0;
    return s;
}

}  // namespace cyborg
