#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pz {

/// Seeded random stream. One root seed per run is split into named
/// independent streams so that adding a new stream never perturbs the
/// draws of an existing one.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return unit_(engine_); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal(double mean, double stddev) {
        std::normal_distribution<double> d(mean, stddev);
        return d(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Index drawn from an explicit probability vector (assumed normalized).
    std::size_t categorical(const std::vector<double>& probs) {
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

    std::uint64_t raw() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

namespace detail {
constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
} // namespace detail

/// Derives the named child stream of a root seed.
inline RngStream make_stream(std::uint64_t root_seed, std::string_view name) {
    return RngStream(detail::splitmix64(root_seed ^ detail::fnv1a(name)));
}

/// Derives an indexed child stream (e.g. one per oracle grid point).
inline RngStream make_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t index) {
    return RngStream(detail::splitmix64(detail::splitmix64(root_seed ^ detail::fnv1a(name)) + index));
}

} // namespace pz
