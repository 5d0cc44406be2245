#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace qvi {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * Seeded generator with explicit streams.
 *
 * A stream is identified by a root seed plus a path of integers
 * (e.g. {iteration, episode}); two generators built from the same seed and
 * path produce identical draws regardless of construction order, which is
 * what makes per-episode collection reproducible under any scheduling.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
        : engine_(derive(seed, path)) {}

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Unbiased (rejection sampling).
    int uniform_int(int n);

    /// Index drawn from an unnormalized nonnegative weight vector.
    int categorical(std::span<const double> weights);

    std::uint64_t next_u64() { return engine_(); }

    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = mix64(seed);
        for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
        return h;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace qvi
