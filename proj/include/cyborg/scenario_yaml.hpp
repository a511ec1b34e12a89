#pragma once

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <tuple>

#include "cyborg/scenario.hpp"

namespace cyborg {

struct ScenarioTexts {
    std::string scenario;
    std::string images;
    std::string actions;

    bool operator==(const ScenarioTexts&) const = default;
};

namespace yaml_detail {

inline YAML::Node load(const std::string& text, const std::string& file) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw SyntaxError(file, e.mark.line + 1, e.msg);
    }
}

// Strict reader: collects diagnostics instead of throwing so that a single pass
// reports every problem in a file.
class Reader {
public:
    std::vector<Diagnostic> diags;

    void fail(const std::string& path, const std::string& msg) { diags.push_back({path, msg}); }

    bool expect_map(const YAML::Node& n, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        if (!n.IsMap()) {
            fail(path, "expected a mapping");
            return false;
        }
        std::set<std::string> seen;
        for (const auto& kv : n) {
            const auto key = kv.first.Scalar();
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) fail(join(path, key), "unknown key '" + key + "'");
            if (!seen.insert(key).second) fail(join(path, key), "duplicate key '" + key + "'");
        }
        return true;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

    std::optional<std::string> str(const YAML::Node& parent, const char* key,
                                   const std::string& path, bool required = true) {
        const auto n = parent[key];
        if (!n) {
            if (required) fail(join(path, key), "missing required key");
            return std::nullopt;
        }
        if (!n.IsScalar()) {
            fail(join(path, key), "expected a string");
            return std::nullopt;
        }
        return n.Scalar();
    }

    template <class T>
    std::optional<T> scalar(const YAML::Node& parent, const char* key, const std::string& path,
                            const char* what) {
        const auto n = parent[key];
        if (!n) return std::nullopt;
        T v{};
        if (!n.IsScalar() || !YAML::convert<T>::decode(n, v)) {
            fail(join(path, key), std::string("expected ") + what);
            return std::nullopt;
        }
        return v;
    }

    std::vector<std::string> str_list(const YAML::Node& parent, const char* key,
                                      const std::string& path) {
        std::vector<std::string> out;
        const auto n = parent[key];
        if (!n || n.IsNull()) return out;
        if (!n.IsSequence()) {
            fail(join(path, key), "expected a list");
            return out;
        }
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (!n[i].IsScalar()) fail(join(path, key) + "[" + std::to_string(i) + "]",
                                       "expected a string");
            else out.push_back(n[i].Scalar());
        }
        return out;
    }
};

inline std::vector<ServiceSpec> read_services(Reader& r, const YAML::Node& n,
                                              const std::string& path) {
    std::vector<ServiceSpec> out;
    if (!n || n.IsNull()) return out;
    if (!n.IsSequence()) {
        r.fail(path, "expected a list");
        return out;
    }
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto& sn = n[i];
        std::string sp = path + "[" + std::to_string(i) + "]";
        if (!r.expect_map(sn, sp, {"name", "port", "vulnerability", "exploit_success_prob",
                                   "dead_end"}))
            continue;
        ServiceSpec svc;
        svc.name = r.str(sn, "name", sp).value_or("");
        if (!svc.name.empty()) sp = path + "." + svc.name;
        if (auto port = r.scalar<int>(sn, "port", sp, "an integer port")) svc.port = *port;
        else if (!sn["port"]) r.fail(sp + ".port", "missing required key");
        if (auto v = sn["vulnerability"]; v && !v.IsNull()) {
            const auto text = v.IsScalar() ? v.Scalar() : std::string();
            if (text == "remote_exploit") svc.vulnerability = Vulnerability::remote_exploit;
            else if (text == "credential_bruteforce")
                svc.vulnerability = Vulnerability::credential_bruteforce;
            else if (text != "none")
                r.fail(sp + ".vulnerability", "unknown vulnerability '" + text + "'");
        }
        svc.exploit_success_prob = r.scalar<double>(sn, "exploit_success_prob", sp, "a number")
                                       .value_or(svc.vulnerability ? 1.0 : 0.0);
        svc.dead_end = r.scalar<bool>(sn, "dead_end", sp, "a boolean").value_or(false);
        out.push_back(std::move(svc));
    }
    return out;
}

inline std::vector<CredentialSpec> read_credentials(Reader& r, const YAML::Node& n,
                                                    const std::string& path) {
    std::vector<CredentialSpec> out;
    if (!n || n.IsNull()) return out;
    if (!n.IsSequence()) {
        r.fail(path, "expected a list");
        return out;
    }
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto& cn = n[i];
        const std::string cp = path + "[" + std::to_string(i) + "]";
        if (!r.expect_map(cn, cp, {"username", "password", "privilege", "guessable"})) continue;
        CredentialSpec c;
        c.username = r.str(cn, "username", cp).value_or("");
        c.password = r.str(cn, "password", cp).value_or("");
        if (auto p = r.str(cn, "privilege", cp, false)) {
            if (auto pv = parse_privilege(*p)) c.privilege = *pv;
            else r.fail(cp + ".privilege", "unknown privilege '" + *p + "'");
        }
        c.guessable = r.scalar<bool>(cn, "guessable", cp, "a boolean").value_or(false);
        out.push_back(std::move(c));
    }
    return out;
}

inline std::map<std::string, ImageSpec> read_images(Reader& r, const YAML::Node& root) {
    std::map<std::string, ImageSpec> out;
    if (!r.expect_map(root, "", {"images"})) return out;
    const auto images = root["images"];
    if (!images) {
        r.fail("images", "missing required key");
        return out;
    }
    if (!images.IsMap()) {
        r.fail("images", "expected a mapping");
        return out;
    }
    for (const auto& kv : images) {
        const auto name = kv.first.Scalar();
        const std::string path = "images." + name;
        if (out.count(name)) {
            r.fail(path, "duplicate image name '" + name + "'");
            continue;
        }
        if (!r.expect_map(kv.second, path, {"os", "services", "credentials", "cloud_image_id"}))
            continue;
        ImageSpec img;
        img.name = name;
        if (auto os = r.str(kv.second, "os", path)) {
            if (*os == "linux") img.os = OsFamily::Linux;
            else if (*os == "windows") img.os = OsFamily::Windows;
            else r.fail(path + ".os", "unknown os '" + *os + "'");
        }
        img.services = read_services(r, kv.second["services"], path + ".services");
        img.credentials = read_credentials(r, kv.second["credentials"], path + ".credentials");
        img.cloud_image_id = r.str(kv.second, "cloud_image_id", path, false);
        out.emplace(name, std::move(img));
    }
    return out;
}

inline std::vector<ActionSpec> read_actions(Reader& r, const YAML::Node& root) {
    std::vector<ActionSpec> out;
    if (!r.expect_map(root, "", {"actions"})) return out;
    const auto actions = root["actions"];
    if (!actions || actions.IsNull()) return out;
    if (!actions.IsSequence()) {
        r.fail("actions", "expected a list");
        return out;
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const auto& an = actions[i];
        std::string path = "actions[" + std::to_string(i) + "]";
        if (!r.expect_map(an, path, {"name", "team", "type", "cost", "success_prob", "params"}))
            continue;
        ActionSpec a;
        a.name = r.str(an, "name", path).value_or("");
        if (!a.name.empty()) path = "actions." + a.name;
        if (!a.name.empty() && !names.insert(a.name).second)
            r.fail(path, "duplicate action name '" + a.name + "'");
        bool ok = true;
        if (auto t = r.str(an, "type", path)) {
            if (auto tv = parse_action_type(*t)) a.type = *tv;
            else {
                r.fail(path + ".type", "unknown action type '" + *t + "'");
                ok = false;
            }
        } else {
            ok = false;
        }
        if (auto team = r.str(an, "team", path)) {
            if (auto tv = parse_team(*team)) a.team = *tv;
            else r.fail(path + ".team", "unknown team '" + *team + "'");
        }
        if (!ok) continue;
        a.cost = r.scalar<double>(an, "cost", path, "a number").value_or(default_cost(a.type));
        a.success_prob = r.scalar<double>(an, "success_prob", path, "a number").value_or(1.0);
        a.params = default_params(a.type);
        if (auto pn = an["params"]; pn && !pn.IsNull()) {
            if (!pn.IsMap()) {
                r.fail(path + ".params", "expected a mapping");
            } else {
                for (const auto& kv : pn) {
                    const auto key = kv.first.Scalar();
                    double v = 0;
                    if (!kv.second.IsScalar() || !YAML::convert<double>::decode(kv.second, v))
                        r.fail(path + ".params." + key, "expected a number");
                    else a.params[key] = v;
                }
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

inline void read_scenario(Reader& r, const YAML::Node& root, Scenario& s,
                          std::vector<std::string> action_names[2]) {
    if (!r.expect_map(root, "", {"name", "subnets", "hosts", "entry_points", "red_actions",
                                 "blue_actions"}))
        return;
    s.name = r.str(root, "name", "").value_or("");

    const auto subnets = root["subnets"];
    if (!subnets) r.fail("subnets", "missing required key");
    else if (!subnets.IsSequence()) r.fail("subnets", "expected a list");
    else {
        for (std::size_t i = 0; i < subnets.size(); ++i) {
            const auto& sn = subnets[i];
            std::string path = "subnets[" + std::to_string(i) + "]";
            if (!r.expect_map(sn, path, {"name", "cidr", "routes_to"})) continue;
            SubnetSpec spec;
            spec.name = r.str(sn, "name", path).value_or("");
            if (!spec.name.empty()) path = "subnets." + spec.name;
            if (auto c = r.str(sn, "cidr", path)) {
                if (auto cidr = Cidr::parse(*c)) spec.address_range = *cidr;
                else r.fail(path + ".cidr", "invalid CIDR block '" + *c + "'");
            }
            spec.routes_to = r.str_list(sn, "routes_to", path);
            s.subnets.push_back(std::move(spec));
        }
    }

    const auto hosts = root["hosts"];
    if (!hosts) r.fail("hosts", "missing required key");
    else if (!hosts.IsMap()) r.fail("hosts", "expected a mapping");
    else {
        for (const auto& kv : hosts) {
            const auto name = kv.first.Scalar();
            const std::string path = "hosts." + name;
            if (s.hosts.count(name)) {
                r.fail(path, "duplicate host name '" + name + "'");
                continue;
            }
            if (!r.expect_map(kv.second, path, {"image", "subnet", "value", "flag"})) continue;
            HostSpec h;
            h.name = name;
            h.image = r.str(kv.second, "image", path).value_or("");
            h.subnet = r.str(kv.second, "subnet", path).value_or("");
            h.value = r.scalar<double>(kv.second, "value", path, "a number").value_or(0.0);
            h.flag = r.scalar<bool>(kv.second, "flag", path, "a boolean").value_or(false);
            s.hosts.emplace(name, std::move(h));
        }
    }

    const auto entries = root["entry_points"];
    if (!entries) r.fail("entry_points", "missing required key");
    else if (r.expect_map(entries, "entry_points", {"red", "blue"})) {
        for (Team t : {Team::red, Team::blue}) {
            const std::string key(to_string(t));
            const auto e = entries[key];
            const std::string path = "entry_points." + key;
            if (e && e.IsMap()) {
                if (!r.expect_map(e, path, {"host", "privilege"})) continue;
                if (auto h = r.str(e, "host", path)) s.entry_points[t] = *h;
                if (auto p = r.str(e, "privilege", path, false)) {
                    if (auto pv = parse_privilege(*p)) s.entry_privileges[t] = *pv;
                    else r.fail(path + ".privilege", "unknown privilege '" + *p + "'");
                }
            } else if (auto h = r.str(entries, key.c_str(), "entry_points")) {
                s.entry_points[t] = *h;
            }
        }
    }
    action_names[0] = r.str_list(root, "red_actions", "");
    action_names[1] = r.str_list(root, "blue_actions", "");
}

// Plain scalars are used only where they cannot be misread as another YAML type.
inline void emit_string(YAML::Emitter& out, const std::string& s) {
    static const std::set<std::string> reserved = {
        "true", "false", "yes", "no", "on", "off", "null", "~", "y", "n",
        "True", "False", "Yes", "No", "On", "Off", "Null", "NULL", "TRUE", "FALSE", "Y", "N"};
    bool plain = !s.empty() && !reserved.count(s) &&
                 (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_');
    for (char c : s)
        plain = plain && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                          c == '.');
    if (plain) out << s;
    else out << YAML::DoubleQuoted << s;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

inline void emit_double(YAML::Emitter& out, double v) { out << format_double(v); }

}  // namespace yaml_detail

// Parses and validates the three deployment documents. Throws SyntaxError for malformed
// YAML and ValidationError (listing every problem found) for schema or invariant violations.
inline Scenario parse_scenario(const std::string& scenario_text, const std::string& images_text,
                               const std::string& actions_text) {
    using namespace yaml_detail;
    const auto scenario_root = load(scenario_text, "scenario");
    const auto images_root = load(images_text, "images");
    const auto actions_root = load(actions_text, "actions");

    Reader r;
    Scenario s;
    std::vector<std::string> names[2];
    read_scenario(r, scenario_root, s, names);
    s.images = read_images(r, images_root);
    const auto catalog = read_actions(r, actions_root);

    for (int t = 0; t < 2; ++t) {
        const Team team = t == 0 ? Team::red : Team::blue;
        auto& list = team == Team::red ? s.red_actions : s.blue_actions;
        for (std::size_t i = 0; i < names[t].size(); ++i) {
            const std::string path =
                std::string(to_string(team)) + "_actions[" + std::to_string(i) + "]";
            try {
                auto one = resolve_action_names(std::span(&names[t][i], 1), team, catalog);
                list.push_back(std::move(one.front()));
            } catch (const UnknownAction& e) {
                r.fail(path, e.what());
            } catch (const WrongTeam& e) {
                r.fail(path, e.what());
            }
        }
    }
    if (!r.diags.empty()) throw ValidationError(std::move(r.diags));

    s = canonicalize(std::move(s));
    validate_or_throw(s);
    return s;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Scenario load_scenario_files(const std::string& scenario_path,
                                    const std::string& images_path,
                                    const std::string& actions_path) {
    return parse_scenario(read_text_file(scenario_path), read_text_file(images_path),
                          read_text_file(actions_path));
}

// Emits the canonical form with every default written out explicitly.
inline ScenarioTexts serialize_scenario(const Scenario& input) {
    using namespace yaml_detail;
    const Scenario s = canonicalize(input);
    ScenarioTexts texts;

    {
        YAML::Emitter out;
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value;
        emit_string(out, s.name);
        out << YAML::Key << "subnets" << YAML::Value << YAML::BeginSeq;
        for (const auto& sn : s.subnets) {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value;
            emit_string(out, sn.name);
            out << YAML::Key << "cidr" << YAML::Value << sn.address_range.str();
            out << YAML::Key << "routes_to" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (const auto& rt : sn.routes_to) emit_string(out, rt);
            out << YAML::EndSeq << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::Key << "hosts" << YAML::Value << YAML::BeginMap;
        for (const auto& [name, h] : s.hosts) {
            out << YAML::Key;
            emit_string(out, name);
            out << YAML::Value << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "image" << YAML::Value;
            emit_string(out, h.image);
            out << YAML::Key << "subnet" << YAML::Value;
            emit_string(out, h.subnet);
            out << YAML::Key << "value" << YAML::Value;
            emit_double(out, h.value);
            out << YAML::Key << "flag" << YAML::Value << h.flag;
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
        out << YAML::Key << "entry_points" << YAML::Value << YAML::BeginMap;
        for (const auto& [team, host] : s.entry_points) {
            out << YAML::Key << std::string(to_string(team)) << YAML::Value;
            if (auto p = s.entry_privileges.find(team); p != s.entry_privileges.end()) {
                out << YAML::Flow << YAML::BeginMap << YAML::Key << "host" << YAML::Value;
                emit_string(out, host);
                out << YAML::Key << "privilege" << YAML::Value << std::string(to_string(p->second))
                    << YAML::EndMap;
            } else {
                emit_string(out, host);
            }
        }
        out << YAML::EndMap;
        for (Team t : {Team::red, Team::blue}) {
            out << YAML::Key << std::string(to_string(t)) + "_actions" << YAML::Value
                << YAML::Flow << YAML::BeginSeq;
            for (const auto& a : s.actions(t)) emit_string(out, a.name);
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
        texts.scenario = std::string(out.c_str()) + "\n";
    }

    {
        YAML::Emitter out;
        out << YAML::BeginMap << YAML::Key << "images" << YAML::Value << YAML::BeginMap;
        for (const auto& [name, img] : s.images) {
            out << YAML::Key;
            emit_string(out, name);
            out << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "os" << YAML::Value << std::string(to_string(img.os));
            out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
            for (const auto& svc : img.services) {
                out << YAML::Flow << YAML::BeginMap;
                out << YAML::Key << "name" << YAML::Value;
                emit_string(out, svc.name);
                out << YAML::Key << "port" << YAML::Value << svc.port;
                out << YAML::Key << "vulnerability" << YAML::Value
                    << (svc.vulnerability ? std::string(to_string(*svc.vulnerability))
                                          : std::string("none"));
                out << YAML::Key << "exploit_success_prob" << YAML::Value;
                emit_double(out, svc.exploit_success_prob);
                out << YAML::Key << "dead_end" << YAML::Value << svc.dead_end;
                out << YAML::EndMap;
            }
            out << YAML::EndSeq;
            out << YAML::Key << "credentials" << YAML::Value << YAML::BeginSeq;
            for (const auto& c : img.credentials) {
                out << YAML::Flow << YAML::BeginMap;
                out << YAML::Key << "username" << YAML::Value;
                emit_string(out, c.username);
                out << YAML::Key << "password" << YAML::Value;
                emit_string(out, c.password);
                out << YAML::Key << "privilege" << YAML::Value
                    << std::string(to_string(c.privilege));
                out << YAML::Key << "guessable" << YAML::Value << c.guessable;
                out << YAML::EndMap;
            }
            out << YAML::EndSeq;
            if (img.cloud_image_id) {
                out << YAML::Key << "cloud_image_id" << YAML::Value;
                emit_string(out, *img.cloud_image_id);
            }
            out << YAML::EndMap;
        }
        out << YAML::EndMap << YAML::EndMap;
        texts.images = std::string(out.c_str()) + "\n";
    }

    {
        YAML::Emitter out;
        out << YAML::BeginMap << YAML::Key << "actions" << YAML::Value << YAML::BeginSeq;
        std::set<std::string> emitted;
        for (Team t : {Team::red, Team::blue}) {
            for (const auto& a : s.actions(t)) {
                if (!emitted.insert(a.name).second) continue;
                out << YAML::Flow << YAML::BeginMap;
                out << YAML::Key << "name" << YAML::Value;
                emit_string(out, a.name);
                out << YAML::Key << "team" << YAML::Value << std::string(to_string(a.team));
                out << YAML::Key << "type" << YAML::Value << std::string(to_string(a.type));
                out << YAML::Key << "cost" << YAML::Value;
                emit_double(out, a.cost);
                out << YAML::Key << "success_prob" << YAML::Value;
                emit_double(out, a.success_prob);
                out << YAML::Key << "params" << YAML::Value << YAML::Flow << YAML::BeginMap;
                for (const auto& [k, v] : a.params) {
                    out << YAML::Key << k << YAML::Value;
                    emit_double(out, v);
                }
                out << YAML::EndMap << YAML::EndMap;
            }
        }
        out << YAML::EndSeq << YAML::EndMap;
        texts.actions = std::string(out.c_str()) + "\n";
    }
    return texts;
}

}  // namespace cyborg
