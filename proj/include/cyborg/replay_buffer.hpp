#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "cyborg/errors.hpp"
#include "cyborg/random.hpp"

namespace cyborg {

struct Transition {
    std::vector<double> state;
    int action = 0;  // global action index
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
    std::vector<char> next_mask;  // valid actions in next_state
};

// Bounded ring of transitions in flat storage. Oldest entries are overwritten first.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
        : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
        if (capacity == 0) throw ValidationError("buffer_capacity", "must be positive");
        states_.resize(capacity * state_dim);
        next_states_.resize(capacity * state_dim);
        masks_.resize(capacity * action_dim);
        actions_.resize(capacity);
        rewards_.resize(capacity);
        dones_.resize(capacity);
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }

    void push(std::span<const double> state, int action, double reward,
              std::span<const double> next_state, bool done, std::span<const char> next_mask) {
        if (state.size() != static_cast<std::size_t>(state_dim_) ||
            next_state.size() != static_cast<std::size_t>(state_dim_) ||
            next_mask.size() != static_cast<std::size_t>(action_dim_))
            throw ShapeMismatch("transition does not match buffer dimensions");
        const std::size_t slot = head_;
        std::copy(state.begin(), state.end(), states_.begin() + slot * state_dim_);
        std::copy(next_state.begin(), next_state.end(), next_states_.begin() + slot * state_dim_);
        std::copy(next_mask.begin(), next_mask.end(), masks_.begin() + slot * action_dim_);
        actions_[slot] = action;
        rewards_[slot] = reward;
        dones_[slot] = done ? 1 : 0;
        head_ = (head_ + 1) % capacity_;
        size_ = std::min(size_ + 1, capacity_);
    }

    void push(const Transition& t) {
        push(t.state, t.action, t.reward, t.next_state, t.done, t.next_mask);
    }

    // Distinct uniformly chosen slots (Floyd's algorithm).
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
        if (batch > size_) throw ValidationError("batch_size", "batch larger than buffer contents");
        std::vector<std::size_t> out;
        out.reserve(batch);
        for (std::size_t j = size_ - batch; j < size_; ++j) {
            const std::size_t t = rng.index(j + 1);
            if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
            else out.push_back(j);
        }
        return out;
    }

    Transition at(std::size_t i) const {
        Transition t;
        t.state.assign(states_.begin() + i * state_dim_, states_.begin() + (i + 1) * state_dim_);
        t.next_state.assign(next_states_.begin() + i * state_dim_,
                            next_states_.begin() + (i + 1) * state_dim_);
        t.next_mask.assign(masks_.begin() + i * action_dim_, masks_.begin() + (i + 1) * action_dim_);
        t.action = actions_[i];
        t.reward = rewards_[i];
        t.done = dones_[i] != 0;
        return t;
    }

    std::vector<Transition> sample(std::size_t batch, Rng& rng) const {
        std::vector<Transition> out;
        for (auto i : sample_indices(batch, rng)) out.push_back(at(i));
        return out;
    }

private:
    std::size_t capacity_;
    int state_dim_;
    int action_dim_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    std::vector<double> states_;
    std::vector<double> next_states_;
    std::vector<char> masks_;
    std::vector<int> actions_;
    std::vector<double> rewards_;
    std::vector<char> dones_;
};

}  // namespace cyborg
