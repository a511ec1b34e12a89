#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cyborg/world.hpp"

namespace cyborg {

enum class RewardMode { sparse_flag, flag_minus_cost };
enum class BluePolicy { passive, scripted, external };

struct EnvConfig {
    Scenario scenario;
    int max_steps = 1000;
    std::uint64_t seed = 0;
    RewardMode reward_mode = RewardMode::sparse_flag;
    BluePolicy blue_policy = BluePolicy::passive;
};

struct StepInfo {
    std::string reason;
    double cost = 0.0;
    int step = 0;  // 1-based index of this step within the episode
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

// Fixed-length encoding of a team's knowledge. Per host, in host-name order:
//   [known, scanned, root_credential_known,
//    (service_discovered, service_exploited) x max_services,
//    has_session, has_root]
// followed by one known flag per subnet and a final flag-captured bit.
// Length = hosts * (5 + 2 * max_services) + subnets + 1.
class Encoder {
public:
    explicit Encoder(std::shared_ptr<const WorldLayout> layout) : layout_(std::move(layout)) {}
    explicit Encoder(const Scenario& s) : Encoder(std::make_shared<const WorldLayout>(canonicalize(s))) {}

    int host_block() const { return 5 + 2 * layout_->max_services; }
    int size() const { return layout_->num_hosts() * host_block() + layout_->num_subnets() + 1; }

    std::vector<double> encode(const Observation& obs) const {
        std::vector<double> v(static_cast<std::size_t>(size()), 0.0);
        encode_into(obs, v.data());
        return v;
    }

    void encode_into(const Observation& obs, double* out) const {
        const auto& L = *layout_;
        std::fill(out, out + size(), 0.0);
        for (int h = 0; h < L.num_hosts(); ++h) {
            double* b = out + h * host_block();
            const auto addr = L.addresses[h];
            b[0] = obs.known_hosts.count(addr) ? 1.0 : 0.0;
            b[1] = obs.scanned_hosts.count(addr) ? 1.0 : 0.0;
            b[2] = L.root_credential_known(h, obs.known_credentials) ? 1.0 : 0.0;
            const auto& svcs = L.host_image[h]->services;
            auto known = obs.known_services.find(addr);
            for (std::size_t i = 0; i < svcs.size(); ++i) {
                if (known != obs.known_services.end() &&
                    known->second.count({svcs[i].port, svcs[i].name}))
                    b[3 + 2 * i] = 1.0;
                if (obs.exploited_services.count({addr, svcs[i].port})) b[4 + 2 * i] = 1.0;
            }
            const int tail = 3 + 2 * L.max_services;
            if (auto it = obs.access.find(addr); it != obs.access.end()) {
                b[tail] = it->second != Compromise::none ? 1.0 : 0.0;
                b[tail + 1] = it->second == Compromise::root ? 1.0 : 0.0;
            }
        }
        double* sn = out + L.num_hosts() * host_block();
        for (int s = 0; s < L.num_subnets(); ++s)
            sn[s] = obs.known_subnets.count(L.scenario.subnets[s].address_range) ? 1.0 : 0.0;
        out[size() - 1] = obs.flag_captured ? 1.0 : 0.0;
    }

private:
    std::shared_ptr<const WorldLayout> layout_;
};

inline std::vector<double> encode(const Observation& obs, const Scenario& s) {
    return Encoder(s).encode(obs);
}

// Session-independent global indexing of a team's actions: each action spec owns a
// contiguous block of slots sized by its target kind (subnets, hosts, or hosts x
// max_services). The Q-network output layer has one unit per slot.
class ActionIndexer {
public:
    ActionIndexer(std::shared_ptr<const WorldLayout> layout, Team team)
        : layout_(std::move(layout)), team_(team) {
        int offset = 0;
        for (const auto& a : layout_->scenario.actions(team_)) {
            offsets_.push_back(offset);
            offset += slots(a.target_kind());
        }
        size_ = offset;
    }
    ActionIndexer(const Scenario& s, Team team)
        : ActionIndexer(std::make_shared<const WorldLayout>(canonicalize(s)), team) {}

    int size() const { return size_; }

    int slots(TargetKind k) const {
        switch (k) {
            case TargetKind::subnet: return layout_->num_subnets();
            case TargetKind::host: return layout_->num_hosts();
            case TargetKind::service: return layout_->num_hosts() * layout_->max_services;
            case TargetKind::credential: {
                int n = 0;
                for (const auto& [name, img] : layout_->scenario.images)
                    n += static_cast<int>(img.credentials.size());
                return n;
            }
            case TargetKind::none: return 1;
        }
        return 0;
    }

    int global_index(const ActionInstance& a) const {
        const auto& list = layout_->scenario.actions(team_);
        const auto action = static_cast<int>(a.spec - list.data());
        if (action < 0 || action >= static_cast<int>(list.size()))
            throw MalformedTarget("action instance does not belong to this scenario");
        int slot = 0;
        switch (a.target.kind) {
            case TargetKind::subnet: slot = a.target.subnet; break;
            case TargetKind::host: slot = layout_->host_at(a.target.address); break;
            case TargetKind::service: {
                const int h = layout_->host_at(a.target.address);
                slot = h * layout_->max_services + layout_->service_slot(h, a.target.port);
                break;
            }
            case TargetKind::credential: slot = a.target.credential; break;
            case TargetKind::none: slot = 0; break;
        }
        return offsets_[action] + slot;
    }

private:
    std::shared_ptr<const WorldLayout> layout_;
    Team team_;
    std::vector<int> offsets_;
    int size_ = 0;
};

inline int max_action_space_size(const Scenario& s) { return ActionIndexer(s, Team::red).size(); }

// Episodic red-team environment. Each step executes red's chosen action, then lets blue
// act according to the configured policy.
class Env {
public:
    explicit Env(EnvConfig cfg)
        : cfg_(checked(std::move(cfg))),
          layout_(std::make_shared<const WorldLayout>(cfg_.scenario)),
          encoder_(layout_),
          indexer_(layout_, Team::red) {}

    Observation reset() {
        const std::uint64_t episode_seed = mix_seed(cfg_.seed, episode_);
        ++episode_;
        world_ = init_world(layout_, episode_seed);
        steps_ = 0;
        done_ = false;
        active_ = true;
        refresh();
        return observe(world_, Team::red);
    }

    // action_index refers to the current action_space() list.
    StepResult step(int action_index) {
        require_active();
        if (action_index < 0 || action_index >= static_cast<int>(actions_.size()))
            throw IndexError("action index " + std::to_string(action_index) + " outside [0, " +
                             std::to_string(actions_.size()) + ")");
        return execute(actions_[action_index]);
    }

    // Executes the first available instance (lowest session id) with this global index.
    StepResult step_global(int global_index) {
        require_active();
        if (global_index < 0 || global_index >= indexer_.size() || first_by_global_[global_index] < 0)
            throw IndexError("global action " + std::to_string(global_index) + " is not available");
        return execute(actions_[first_by_global_[global_index]]);
    }

    std::vector<std::pair<int, std::string>> action_space() const {
        std::vector<std::pair<int, std::string>> out;
        for (std::size_t i = 0; i < actions_.size(); ++i)
            out.emplace_back(static_cast<int>(i), describe(world_, actions_[i]));
        return out;
    }

    const std::vector<ActionInstance>& actions() const { return actions_; }
    const std::vector<char>& valid_mask() const { return mask_; }
    const std::vector<int>& global_indices() const { return globals_; }

    std::vector<ActionInstance> blue_actions() const { return enumerate_actions(world_, Team::blue); }

    // Blue move under BluePolicy::external. Counts as a world step, not an episode step.
    Outcome step_blue(int action_index) {
        require_active();
        const auto list = blue_actions();
        if (action_index < 0 || action_index >= static_cast<int>(list.size()))
            throw IndexError("blue action index out of range");
        auto out = apply_action(world_, list[action_index]);
        refresh();
        return out;
    }

    const WorldState& world() const { return world_; }
    const Scenario& scenario() const { return layout_->scenario; }
    const EnvConfig& config() const { return cfg_; }
    const Encoder& encoder() const { return encoder_; }
    const ActionIndexer& indexer() const { return indexer_; }
    int episode_steps() const { return steps_; }
    bool done() const { return done_; }
    std::uint64_t episodes_started() const { return episode_; }

private:
    static EnvConfig checked(EnvConfig cfg) {
        if (cfg.max_steps < 1) throw ValidationError("max_steps", "must be >= 1");
        validate_or_throw(cfg.scenario);
        cfg.scenario = canonicalize(std::move(cfg.scenario));
        return cfg;
    }

    void require_active() const {
        if (!active_) throw StaleEpisodeError("step called before reset");
        if (done_) throw StaleEpisodeError("episode finished; call reset");
    }

    void refresh() {
        actions_ = enumerate_actions(world_, Team::red);
        mask_.assign(static_cast<std::size_t>(indexer_.size()), 0);
        first_by_global_.assign(static_cast<std::size_t>(indexer_.size()), -1);
        globals_.clear();
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            const int g = indexer_.global_index(actions_[i]);
            globals_.push_back(g);
            if (!mask_[g]) {
                mask_[g] = 1;
                first_by_global_[g] = static_cast<int>(i);
            }
        }
    }

    void scripted_blue() {
        const auto list = blue_actions();
        if (list.empty()) return;
        const auto& blue = world_.kb(Team::blue);
        for (const auto& a : list) {
            if (a.spec->type != ActionType::reset_host) continue;
            const int h = layout_->host_at(a.target.address);
            for (int id : blue.detected_sessions) {
                const auto& s = world_.sessions[id];
                if (s.alive && s.host == h && s.id != kRedEntrySession) {
                    apply_action(world_, a);
                    return;
                }
            }
        }
        std::vector<const ActionInstance*> monitors;
        for (const auto& a : list)
            if (a.spec->type == ActionType::monitor_host) monitors.push_back(&a);
        if (!monitors.empty()) apply_action(world_, *monitors[static_cast<std::size_t>(steps_) % monitors.size()]);
    }

    StepResult execute(ActionInstance a) {
        const bool was_captured = world_.flag_captured;
        const Outcome out = apply_action(world_, a);
        ++steps_;
        const bool captured = world_.flag_captured && !was_captured;
        if (!captured && !world_.flag_captured && cfg_.blue_policy == BluePolicy::scripted)
            scripted_blue();

        StepResult r;
        r.reward = captured ? 1.0 : 0.0;
        if (cfg_.reward_mode == RewardMode::flag_minus_cost) r.reward -= out.cost;
        r.done = world_.flag_captured || steps_ >= cfg_.max_steps;
        r.info = StepInfo{out.reason, out.cost, steps_};
        done_ = r.done;
        refresh();
        r.observation = observe(world_, Team::red);
        return r;
    }

    EnvConfig cfg_;
    std::shared_ptr<const WorldLayout> layout_;
    Encoder encoder_;
    ActionIndexer indexer_;
    WorldState world_;
    std::vector<ActionInstance> actions_;
    std::vector<char> mask_;
    std::vector<int> first_by_global_;
    std::vector<int> globals_;
    std::uint64_t episode_ = 0;
    int steps_ = 0;
    bool done_ = false;
    bool active_ = false;
};

}  // namespace cyborg
