#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace slimtsf {

/// Deterministic RNG built on SplitMix64. Everything here is fully specified
/// arithmetic (no standard-library distributions), so streams are identical
/// across compilers, platforms, and thread schedules.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    /// Uniform double in [0, 1), 53 bits of randomness.
    double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes exactly two draws per call.
    double normal() {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = real01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    /// k distinct indices from [0, n), returned ascending (Floyd's algorithm).
    std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k) {
        std::vector<std::size_t> out;
        if (k >= n) {
            out.resize(n);
            std::iota(out.begin(), out.end(), std::size_t{0});
            return out;
        }
        out.reserve(k);
        for (std::size_t j = n - k; j < n; ++j) {
            const std::size_t t = index(j + 1);
            if (std::find(out.begin(), out.end(), t) != out.end()) {
                out.push_back(j);
            } else {
                out.push_back(t);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::uint64_t state_;
};

/// Counter-based seed derivation: folds stream identifiers into a base seed so
/// that each parallel unit (tree, node, bootstrap iteration, grid cell, run)
/// owns an independent reproducible stream. The fold is a hash-combine followed
/// by the SplitMix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t base) { return base; }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t word, Rest... rest) {
    base ^= word + 0x9E3779B97F4A7C15ull + (base << 6) + (base >> 2);
    base = (base ^ (base >> 30)) * 0xBF58476D1CE4E5B9ull;
    base = (base ^ (base >> 27)) * 0x94D049BB133111EBull;
    base ^= base >> 31;
    return derive_seed(base, rest...);
}

/// Stream identifiers used with derive_seed. Distinct tags keep unrelated
/// consumers of one master seed from colliding.
namespace seed_stream {
inline constexpr std::uint64_t kTree = 0x01;
inline constexpr std::uint64_t kTreeBootstrap = 0x02;
inline constexpr std::uint64_t kNodeFeatures = 0x03;
inline constexpr std::uint64_t kLeftChild = 0x04;
inline constexpr std::uint64_t kRightChild = 0x05;
inline constexpr std::uint64_t kBootstrapIteration = 0x06;
inline constexpr std::uint64_t kBootstrapForest = 0x07;
inline constexpr std::uint64_t kSplit = 0x08;
inline constexpr std::uint64_t kRunForest = 0x09;
inline constexpr std::uint64_t kEvent = 0x0A;
inline constexpr std::uint64_t kExplain = 0x0B;
}  // namespace seed_stream

}  // namespace slimtsf
