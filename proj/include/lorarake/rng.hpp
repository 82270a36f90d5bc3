#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "lorarake/types.hpp"

namespace lorarake {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seeded generator. Independent streams are derived from (master seed,
/// stream index) so trials can run in any order on any thread.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
    }

    std::mt19937_64& engine() noexcept { return eng_; }

    std::size_t uniform_index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }

    double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }

    double normal() { return normal_(eng_); }

    /// Circular complex Gaussian with E|w|^2 = variance (variance/2 per part).
    cplx complex_normal(double variance = 1.0) {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal_(eng_);
        const double im = normal_(eng_);
        return {s * re, s * im};
    }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lorarake
