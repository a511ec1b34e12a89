#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cyborg {

struct Ipv4Address {
    std::uint32_t value = 0;

    auto operator<=>(const Ipv4Address&) const = default;

    std::string str() const {
        return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xff) + '.' +
               std::to_string((value >> 8) & 0xff) + '.' + std::to_string(value & 0xff);
    }

    static std::optional<Ipv4Address> parse(std::string_view text) {
        std::uint32_t out = 0;
        const char* p = text.data();
        const char* end = text.data() + text.size();
        for (int octet = 0; octet < 4; ++octet) {
            if (octet > 0) {
                if (p == end || *p != '.') return std::nullopt;
                ++p;
            }
            unsigned v = 0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{} || next == p || v > 255 || next - p > 3) return std::nullopt;
            out = (out << 8) | v;
            p = next;
        }
        if (p != end) return std::nullopt;
        return Ipv4Address{out};
    }
};

// An IPv4 block a.b.c.d/nn. The stored base is normalized to the network address.
struct Cidr {
    Ipv4Address network;
    int prefix = 32;

    auto operator<=>(const Cidr&) const = default;

    std::uint64_t size() const { return std::uint64_t{1} << (32 - prefix); }

    // Network and broadcast addresses are reserved for blocks larger than /31.
    std::uint64_t usable() const { return prefix <= 30 ? size() - 2 : size(); }

    Ipv4Address first_usable() const {
        return Ipv4Address{network.value + (prefix <= 30 ? 1u : 0u)};
    }

    bool contains(Ipv4Address a) const {
        const std::uint32_t mask = prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - prefix);
        return (a.value & mask) == network.value;
    }

    std::string str() const { return network.str() + '/' + std::to_string(prefix); }

    // Rejects host bits set below the prefix so that the textual form is canonical.
    static std::optional<Cidr> parse(std::string_view text) {
        const auto slash = text.find('/');
        if (slash == std::string_view::npos) return std::nullopt;
        auto addr = Ipv4Address::parse(text.substr(0, slash));
        if (!addr) return std::nullopt;
        const auto rest = text.substr(slash + 1);
        int prefix = -1;
        auto [next, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), prefix);
        if (ec != std::errc{} || next != rest.data() + rest.size() || rest.empty() || prefix < 0 ||
            prefix > 32)
            return std::nullopt;
        const std::uint32_t mask = prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - prefix);
        if ((addr->value & ~mask) != 0) return std::nullopt;
        return Cidr{*addr, prefix};
    }
};

}  // namespace cyborg
