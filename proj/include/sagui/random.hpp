#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sagui {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based derivation of named RNG sub-streams from one master seed.
///
/// Stream map used by the trainers and the CLI:
///   "init"      network initialisation
///   "env"       environment resets and transition sampling
///   "action"    behaviour-policy action sampling and mode draws
///   "buffer"    replay sampling
///   "update"    reparameterisation noise inside gradient steps
///   "eval"      evaluation episodes (one sub-index per epoch)
class SeedStreams {
public:
    explicit SeedStreams(std::uint64_t master) : master_(master) {}

    std::uint64_t seed(std::string_view name, std::uint64_t index = 0) const {
        return splitmix64(splitmix64(master_ ^ stable_hash(name)) + index);
    }

    Rng rng(std::string_view name, std::uint64_t index = 0) const { return Rng(seed(name, index)); }

    std::uint64_t master() const { return master_; }

private:
    std::uint64_t master_;
};

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Inverse-CDF draw from a discrete distribution; tolerant of rounding in the tail.
template <class Range> std::size_t sample_discrete(const Range& probs, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    std::size_t i = 0;
    for (double p : probs) {
        if (p > 0.0) last_positive = i;
        acc += p;
        if (u < acc) return i;
        ++i;
    }
    return last_positive;
}

} // namespace sagui
