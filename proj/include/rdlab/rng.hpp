/**
 * @file rng.hpp
 * @brief Counter-keyed random substreams.
 *
 * Every random draw in the library comes from a Rng seeded by hashing a
 * tuple of integers (master seed, sequence id, frame index, ...). Streams are
 * therefore independent of evaluation order and thread count. The engine is
 * std::mt19937_64, whose output is fully specified by the standard; the
 * distributions are implemented here because the std:: ones are not.
 */
#pragma once

#include "rdlab/core.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rdlab {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds an ordered key tuple into one 64-bit seed.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto p : parts) h = mix64(h ^ mix64(p));
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
    Rng(std::initializer_list<std::uint64_t> key) : engine_(stream_key(key)) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection sampled (no modulo bias).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw DomainError("Rng::below: empty range");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    /// Standard normal via Box-Muller (the spare deviate is cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    /// Circular complex Gaussian with E|z|^2 = variance.
    cplx complex_normal(double variance) {
        const double sd = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {sd * re, sd * im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Fisher-Yates with Rng::below, so the permutation is the same on every standard library.
template <typename Vec>
void deterministic_shuffle(Vec& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace rdlab
