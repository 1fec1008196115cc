#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace valuebet::rng {

// Stream derivation and all variates below are defined bit-for-bit so that a
// (seed, stream index) pair reproduces the same draws on any platform:
//
//   engine seed = splitmix64(splitmix64(seed ^ (tag * 0x9E3779B97F4A7C15)) + index)
//   engine      = std::mt19937_64 (fully specified by the standard)
//   uniform     = (next() >> 11) * 2^-53
//
// std:: distributions are deliberately not used; their algorithms are
// implementation-defined.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0) noexcept
{
    return splitmix64(splitmix64(seed ^ (tag * 0x9E3779B97F4A7C15ULL)) + index);
}

/// Stream tags keep independent consumers of one user seed apart.
enum class Tag : std::uint64_t {
    Generator = 1,
    Bootstrap = 2,
    Staleness = 3,
};

class Stream {
public:
    explicit Stream(std::uint64_t engine_seed) : engine_(engine_seed) {}

    Stream(std::uint64_t seed, std::uint64_t index, Tag tag)
        : engine_(derive_seed(seed, index, static_cast<std::uint64_t>(tag)))
    {
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer on [0, n); n must be > 0.
    std::uint64_t index(std::uint64_t n)
    {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t x = next();
            if (x >= threshold)
                return x % n;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Box-Muller, one variate per call.
    double normal()
    {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Marsaglia-Tsang; shapes below 1 use the U^(1/a) boost.
    double gamma(double shape)
    {
        if (shape < 1.0) {
            double g = gamma(shape + 1.0);
            double u = 0.0;
            do {
                u = uniform();
            } while (u <= 0.0);
            return g * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0)
                continue;
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    /// Index drawn with the given (not necessarily normalized) weights.
    std::size_t categorical(std::span<const double> weights)
    {
        double total = 0.0;
        for (double w : weights)
            total += w;
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc)
                return i;
        }
        // u landed on the rounding slack above the last cumulative sum
        for (std::size_t i = weights.size(); i-- > 0;)
            if (weights[i] > 0.0)
                return i;
        return 0;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace valuebet::rng
