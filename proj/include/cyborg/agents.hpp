#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cyborg/env.hpp"
#include "cyborg/mlp.hpp"
#include "cyborg/replay_buffer.hpp"

namespace cyborg {

struct DdqnConfig {
    double gamma = 0.9;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_episodes = 500;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int buffer_capacity = 10000;
    int target_sync_interval = 500;  // environment steps
    std::vector<int> hidden_sizes = {64, 64};
    double grad_clip = 10.0;  // global gradient norm
    std::uint64_t seed = 0;

    void validate() const {
        std::vector<Diagnostic> d;
        if (!(gamma >= 0.0 && gamma < 1.0)) d.push_back({"gamma", "must lie in [0, 1)"});
        if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0))
            d.push_back({"epsilon_start", "must be a probability"});
        if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start))
            d.push_back({"epsilon_end", "must lie in [0, epsilon_start]"});
        if (epsilon_decay_episodes < 1) d.push_back({"epsilon_decay_episodes", "must be positive"});
        if (!(learning_rate > 0.0)) d.push_back({"learning_rate", "must be positive"});
        if (batch_size < 1) d.push_back({"batch_size", "must be positive"});
        if (buffer_capacity < batch_size) d.push_back({"buffer_capacity", "must be >= batch_size"});
        if (target_sync_interval < 1) d.push_back({"target_sync_interval", "must be positive"});
        for (int h : hidden_sizes)
            if (h < 1) d.push_back({"hidden_sizes", "layer sizes must be positive"});
        if (!(grad_clip > 0.0)) d.push_back({"grad_clip", "must be positive"});
        if (!d.empty()) throw ValidationError(std::move(d));
    }

    bool operator==(const DdqnConfig&) const = default;
};

inline double linear_epsilon(double start, double end, int decay_episodes, int episode) {
    if (episode >= decay_episodes) return end;
    return start + (end - start) * (static_cast<double>(episode) / decay_episodes);
}

// Lowest-index argmax over valid entries, -1 when nothing is valid.
inline int masked_argmax(std::span<const double> q, std::span<const char> mask) {
    int best = -1;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!mask[i]) continue;
        if (best < 0 || q[i] > q[best]) best = static_cast<int>(i);
    }
    return best;
}

inline int uniform_valid(std::span<const char> mask, Rng& rng) {
    const auto count = static_cast<std::uint64_t>(std::count(mask.begin(), mask.end(), 1));
    if (count == 0) throw EmptyMask("no valid action");
    std::uint64_t k = rng.index(count);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && k-- == 0) return static_cast<int>(i);
    return -1;
}

// Epsilon-greedy over valid actions. One uniform draw decides explore vs exploit.
inline int select_action(const Mlp& net, std::span<const double> enc, std::span<const char> mask,
                         double epsilon, Rng& rng) {
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) throw EmptyMask("no valid action");
    if (rng.uniform() < epsilon) return uniform_valid(mask, rng);
    const auto q = net.forward(enc);
    return masked_argmax(q, mask);
}

// Double DQN bootstrap target: the online network picks the next action, the target
// network scores it. Terminal transitions (including step-budget truncation) do not bootstrap.
inline double ddqn_target(const Mlp& online, const Mlp& target, const Transition& t, double gamma) {
    if (t.done) return t.reward;
    const int best = masked_argmax(online.forward(t.next_state), t.next_mask);
    if (best < 0) return t.reward;
    return t.reward + gamma * target.forward(t.next_state)[best];
}

// Mean squared error of Q(s, a) against fixed targets, and its gradient.
inline double mse_loss_and_gradient(const Mlp& net, std::span<const double> states,
                                    std::span<const int> actions, std::span<const double> targets,
                                    Mlp& grads) {
    const int batch = static_cast<int>(actions.size());
    const int out = net.output_size();
    Mlp::Cache cache;
    net.forward(states, batch, cache);
    const auto& q = cache.acts.back();
    std::vector<double> d_out(q.size(), 0.0);
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
        const std::size_t k = static_cast<std::size_t>(b) * out + actions[b];
        const double err = q[k] - targets[b];
        loss += err * err;
        d_out[k] = 2.0 * err / batch;
    }
    loss /= batch;
    grads = net.zeros_like();
    net.backward(cache, std::move(d_out), grads);
    return loss;
}

inline double mse_loss(const Mlp& net, std::span<const double> states, std::span<const int> actions,
                       std::span<const double> targets) {
    const int batch = static_cast<int>(actions.size());
    const auto q = net.forward(states, batch);
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
        const double err = q[static_cast<std::size_t>(b) * net.output_size() + actions[b]] - targets[b];
        loss += err * err;
    }
    return loss / batch;
}

// One gradient-descent step on the squared Bellman error. Returns the pre-update loss.
inline double train_step(Mlp& net, const Mlp& target, std::span<const Transition> batch, double lr,
                         double gamma = 0.9, double grad_clip = 10.0) {
    if (batch.empty()) throw ValidationError("batch", "must not be empty");
    const int n = static_cast<int>(batch.size());
    const int in = net.input_size();
    const int out = net.output_size();
    std::vector<double> states, next;
    states.reserve(static_cast<std::size_t>(n) * in);
    next.reserve(static_cast<std::size_t>(n) * in);
    std::vector<int> actions;
    for (const auto& t : batch) {
        states.insert(states.end(), t.state.begin(), t.state.end());
        next.insert(next.end(), t.next_state.begin(), t.next_state.end());
        actions.push_back(t.action);
    }
    const auto q_next_online = net.forward(next, n);
    const auto q_next_target = target.forward(next, n);
    std::vector<double> targets(n);
    for (int b = 0; b < n; ++b) {
        const auto& t = batch[b];
        targets[b] = t.reward;
        if (t.done) continue;
        const auto row = std::span(q_next_online).subspan(static_cast<std::size_t>(b) * out, out);
        const int best = masked_argmax(row, t.next_mask);
        if (best >= 0) targets[b] += gamma * q_next_target[static_cast<std::size_t>(b) * out + best];
    }
    Mlp grads;
    const double loss = mse_loss_and_gradient(net, states, actions, targets, grads);
    if (!std::isfinite(loss)) throw NonFiniteLoss("loss is not finite");
    const double norm = std::sqrt(grads.squared_norm());
    const double scale = norm > grad_clip ? grad_clip / norm : 1.0;
    net.add_scaled(grads, -lr * scale);
    if (!net.all_finite()) throw NonFiniteLoss("parameters diverged");
    return loss;
}

// ---------------------------------------------------------------------------
// Agents

struct EpisodeRecord {
    double total_reward = 0.0;
    int steps = 0;
    bool captured = false;
    double epsilon = 0.0;
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual void begin_episode(bool /*training*/) {}
    // Returns a global action index valid under env.valid_mask().
    virtual int act(const Env& env, std::span<const double> state) = 0;
    virtual void learn(std::span<const double> /*state*/, int /*action*/, double /*reward*/,
                       std::span<const double> /*next_state*/, bool /*done*/,
                       std::span<const char> /*next_mask*/) {}
    virtual double epsilon() const { return 0.0; }
};

class RandomAgent : public Agent {
public:
    explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}
    int act(const Env& env, std::span<const double>) override {
        return uniform_valid(env.valid_mask(), rng_);
    }
    double epsilon() const override { return 1.0; }

private:
    Rng rng_;
};

// Tabular Q-learning keyed by the exact observation encoding.
using QTable = std::unordered_map<std::string, std::vector<double>>;

inline std::string state_key(std::span<const double> enc) {
    std::string key((enc.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < enc.size(); ++i)
        if (enc[i] != 0.0) key[i / 8] = static_cast<char>(key[i / 8] | (1 << (i % 8)));
    return key;
}

inline std::string state_key(const Observation& obs, const Encoder& enc) {
    return state_key(enc.encode(obs));
}

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)); no bootstrap when done.
// The max runs over next_mask when given, otherwise over every entry of the row.
// Rows not yet in the table read as `initial` everywhere.
inline void tabular_q_update(QTable& table, const std::string& state, int action, double reward,
                             const std::string& next_state, bool done, double alpha, double gamma,
                             int num_actions, std::span<const char> next_mask = {},
                             double initial = 0.0) {
    auto& row = table.try_emplace(state, num_actions, initial).first->second;
    double target = reward;
    if (!done) {
        double best = initial;
        if (auto it = table.find(next_state); it != table.end()) {
            best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < num_actions; ++a)
                if (next_mask.empty() || next_mask[a]) best = std::max(best, it->second[a]);
            if (!std::isfinite(best)) best = initial;
        }
        target += gamma * best;
    }
    row[action] += alpha * (target - row[action]);
}

struct TabularConfig {
    double alpha = 0.5;
    double gamma = 0.9;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_episodes = 500;
    double initial_q = 1.0;  // the largest episode return under sparse flag reward
    std::uint64_t seed = 0;
};

class TabularQAgent : public Agent {
public:
    TabularQAgent(TabularConfig cfg, int num_actions) : cfg_(cfg), num_actions_(num_actions), rng_(cfg.seed) {}

    void begin_episode(bool training) override {
        epsilon_ = training ? linear_epsilon(cfg_.epsilon_start, cfg_.epsilon_end,
                                             cfg_.epsilon_decay_episodes, episode_++)
                            : 0.0;
    }

    int act(const Env& env, std::span<const double> state) override {
        const auto& mask = env.valid_mask();
        if (rng_.uniform() < epsilon_) return uniform_valid(mask, rng_);
        auto it = table_.find(state_key(state));
        if (it == table_.end()) return masked_argmax(std::vector<double>(num_actions_, 0.0), mask);
        return masked_argmax(it->second, mask);
    }

    void learn(std::span<const double> s, int a, double r, std::span<const double> s2, bool done,
               std::span<const char> next_mask) override {
        tabular_q_update(table_, state_key(s), a, r, state_key(s2), done, cfg_.alpha, cfg_.gamma,
                         num_actions_, next_mask, cfg_.initial_q);
    }

    double epsilon() const override { return epsilon_; }
    const QTable& table() const { return table_; }

private:
    TabularConfig cfg_;
    int num_actions_;
    Rng rng_;
    QTable table_;
    int episode_ = 0;
    double epsilon_ = 0.0;
};

class DdqnAgent : public Agent {
public:
    DdqnAgent(DdqnConfig cfg, int state_dim, int num_actions)
        : cfg_((cfg.validate(), std::move(cfg))),
          rng_(mix_seed(cfg_.seed, 0x6464716eULL)),
          online_(layer_sizes(state_dim, num_actions), rng_),
          target_(online_),
          buffer_(static_cast<std::size_t>(cfg_.buffer_capacity), state_dim, num_actions) {}

    // Greedy-only agent around a trained network.
    DdqnAgent(DdqnConfig cfg, Mlp net)
        : cfg_((cfg.validate(), std::move(cfg))),
          rng_(mix_seed(cfg_.seed, 0x6464716eULL)),
          online_(std::move(net)),
          target_(online_),
          buffer_(static_cast<std::size_t>(cfg_.buffer_capacity), online_.input_size(),
                  online_.output_size()) {}

    void begin_episode(bool training) override {
        training_ = training;
        epsilon_ = training ? linear_epsilon(cfg_.epsilon_start, cfg_.epsilon_end,
                                             cfg_.epsilon_decay_episodes, episode_++)
                            : 0.0;
    }

    int act(const Env& env, std::span<const double> state) override {
        return select_action(online_, state, env.valid_mask(), epsilon_, rng_);
    }

    void learn(std::span<const double> s, int a, double r, std::span<const double> s2, bool done,
               std::span<const char> next_mask) override {
        buffer_.push(s, a, r, s2, done, next_mask);
        if (buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size)) {
            const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
            last_loss_ = train_step(online_, target_, batch, cfg_.learning_rate, cfg_.gamma,
                                    cfg_.grad_clip);
            ++updates_;
        }
        if (++steps_ % static_cast<std::uint64_t>(cfg_.target_sync_interval) == 0) target_ = online_;
    }

    double epsilon() const override { return epsilon_; }
    const Mlp& online() const { return online_; }
    const Mlp& target() const { return target_; }
    const DdqnConfig& config() const { return cfg_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::uint64_t steps() const { return steps_; }
    std::uint64_t updates() const { return updates_; }
    double last_loss() const { return last_loss_; }

private:
    std::vector<int> layer_sizes(int in, int out) const {
        std::vector<int> sizes{in};
        sizes.insert(sizes.end(), cfg_.hidden_sizes.begin(), cfg_.hidden_sizes.end());
        sizes.push_back(out);
        return sizes;
    }

    DdqnConfig cfg_;
    Rng rng_;
    Mlp online_;
    Mlp target_;
    ReplayBuffer buffer_;
    int episode_ = 0;
    double epsilon_ = 0.0;
    bool training_ = false;
    std::uint64_t steps_ = 0;
    std::uint64_t updates_ = 0;
    double last_loss_ = 0.0;
};

// Plays one episode. In training mode transitions are handed to the agent as they happen.
inline EpisodeRecord run_episode(Agent& agent, Env& env, bool training) {
    EpisodeRecord rec;
    const auto& encoder = env.encoder();
    std::vector<double> state = encoder.encode(env.reset());
    std::vector<double> next(state.size());
    agent.begin_episode(training);
    rec.epsilon = agent.epsilon();
    for (;;) {
        const int a = agent.act(env, state);
        auto r = env.step_global(a);
        encoder.encode_into(r.observation, next.data());
        if (training) agent.learn(state, a, r.reward, next, r.done, env.valid_mask());
        rec.total_reward += r.reward;
        ++rec.steps;
        state.swap(next);
        if (r.done) break;
    }
    rec.captured = env.world().flag_captured;
    return rec;
}

}  // namespace cyborg
