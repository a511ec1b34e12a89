#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "cyborg/agents.hpp"

namespace cyborg {

// Checkpoint byte layout (all little-endian):
//   char[4]  magic "CYBQ"
//   u32      version (1)
//   f64      gamma, epsilon_start, epsilon_end
//   u64      epsilon_decay_episodes
//   f64      learning_rate
//   u64      batch_size, buffer_capacity, target_sync_interval
//   f64      grad_clip
//   u64      seed
//   u64      hidden layer count, then u64 per hidden size
//   u64      layer count
//   per layer: u64 in, u64 out, f64 weights[in][out] (row-major), f64 bias[out]
struct Checkpoint {
    DdqnConfig config;
    Mlp net;
};

namespace checkpoint_detail {

inline constexpr char kMagic[4] = {'C', 'Y', 'B', 'Q'};
inline constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    template <class T>
    T get() {
        if (pos_ + sizeof(T) > data_.size()) throw ShapeMismatch("checkpoint truncated");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::uint64_t count(std::uint64_t limit) {
        const auto n = get<std::uint64_t>();
        if (n > limit) throw ShapeMismatch("checkpoint field out of range");
        return n;
    }

    std::string_view bytes(std::size_t n) {
        if (pos_ + n > data_.size()) throw ShapeMismatch("checkpoint truncated");
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == data_.size(); }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace checkpoint_detail

inline std::string serialize_checkpoint(const DdqnConfig& cfg, const Mlp& net) {
    using checkpoint_detail::put;
    std::string out(checkpoint_detail::kMagic, 4);
    put<std::uint32_t>(out, checkpoint_detail::kVersion);
    put<double>(out, cfg.gamma);
    put<double>(out, cfg.epsilon_start);
    put<double>(out, cfg.epsilon_end);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(cfg.epsilon_decay_episodes));
    put<double>(out, cfg.learning_rate);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(cfg.batch_size));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(cfg.buffer_capacity));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(cfg.target_sync_interval));
    put<double>(out, cfg.grad_clip);
    put<std::uint64_t>(out, cfg.seed);
    put<std::uint64_t>(out, cfg.hidden_sizes.size());
    for (int h : cfg.hidden_sizes) put<std::uint64_t>(out, static_cast<std::uint64_t>(h));
    put<std::uint64_t>(out, net.layers().size());
    for (const auto& l : net.layers()) {
        put<std::uint64_t>(out, static_cast<std::uint64_t>(l.in));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(l.out));
        for (double w : l.weights) put<double>(out, w);
        for (double b : l.bias) put<double>(out, b);
    }
    return out;
}

inline Checkpoint parse_checkpoint(std::string_view data) {
    checkpoint_detail::Reader r(data);
    if (r.bytes(4) != std::string_view(checkpoint_detail::kMagic, 4))
        throw ShapeMismatch("not a checkpoint file");
    if (r.get<std::uint32_t>() != checkpoint_detail::kVersion)
        throw ShapeMismatch("unsupported checkpoint version");
    constexpr std::uint64_t kMaxDim = 1u << 24;
    Checkpoint c;
    auto& cfg = c.config;
    cfg.gamma = r.get<double>();
    cfg.epsilon_start = r.get<double>();
    cfg.epsilon_end = r.get<double>();
    cfg.epsilon_decay_episodes = static_cast<int>(r.count(kMaxDim));
    cfg.learning_rate = r.get<double>();
    cfg.batch_size = static_cast<int>(r.count(kMaxDim));
    cfg.buffer_capacity = static_cast<int>(r.count(1u << 30));
    cfg.target_sync_interval = static_cast<int>(r.count(1u << 30));
    cfg.grad_clip = r.get<double>();
    cfg.seed = r.get<std::uint64_t>();
    cfg.hidden_sizes.resize(r.count(1024));
    for (auto& h : cfg.hidden_sizes) h = static_cast<int>(r.count(kMaxDim));
    std::vector<Mlp::Layer> layers(r.count(1024));
    for (auto& l : layers) {
        l.in = static_cast<int>(r.count(kMaxDim));
        l.out = static_cast<int>(r.count(kMaxDim));
        l.weights.resize(static_cast<std::size_t>(l.in) * l.out);
        l.bias.resize(static_cast<std::size_t>(l.out));
        for (auto& w : l.weights) w = r.get<double>();
        for (auto& b : l.bias) b = r.get<double>();
    }
    if (!r.at_end()) throw ShapeMismatch("trailing bytes in checkpoint");
    c.net = Mlp(std::move(layers));
    if (c.net.sizes().size() != cfg.hidden_sizes.size() + 2 ||
        !std::equal(cfg.hidden_sizes.begin(), cfg.hidden_sizes.end(), c.net.sizes().begin() + 1))
        throw ShapeMismatch("checkpoint hidden sizes disagree with its layers");
    return c;
}

inline void save_checkpoint(const std::string& path, const DdqnConfig& cfg, const Mlp& net) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    const auto bytes = serialize_checkpoint(cfg, net);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("cannot write " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace cyborg
