#pragma once
//
// Counter-based random streams.
//
// Every draw is a pure function of (seed, role, counter): the state is a
// splitmix64-style hash of the counter under a key derived from the seed and
// a role tag. Draws can therefore be generated in any order and by any number
// of workers without changing the stream, and the sketches drawn for
// different roles (CountSketch hash, CountSketch signs, Gaussian entries, ...)
// are independent sub-streams of one user seed.
//
// Normal deviates use the inverse-CDF method with Acklam's rational
// approximation (relative error below 1.15e-9), one uniform per deviate.
//

#include <cmath>
#include <cstdint>

namespace lspack {

enum class stream_role : std::uint64_t {
    countsketch_hash = 1,
    countsketch_sign = 2,
    gaussian         = 3,
    srht_sign        = 4,
    srht_sample      = 5,
    jlt              = 6,
    generator_left   = 7,
    generator_right  = 8,
    generator_sparse = 9,
    derived_seed     = 10,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for a nested component (e.g. the column selection inside a leverage
// estimator), so components invoked with one user seed draw independently.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) + mix64(tag + static_cast<std::uint64_t>(stream_role::derived_seed)));
}

class counter_stream {
public:
    constexpr counter_stream(std::uint64_t seed, stream_role role) noexcept
        : key_(mix64(mix64(seed) ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(role)))) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform in the open interval (0, 1).
    double uniform(std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits(counter)) * bound) >> 64);
    }

    double sign(std::uint64_t counter) const noexcept {
        return (bits(counter) >> 63) ? -1.0 : 1.0;
    }

    double normal(std::uint64_t counter) const noexcept { return inverse_normal_cdf(uniform(counter)); }

    static double inverse_normal_cdf(double p) noexcept {
        constexpr double a1 = -3.969683028665376e+01, a2 = 2.209460984245205e+02,
                         a3 = -2.759285104469687e+02, a4 = 1.383577518672690e+02,
                         a5 = -3.066479806614716e+01, a6 = 2.506628277459239e+00;
        constexpr double b1 = -5.447609879822406e+01, b2 = 1.615858368580409e+02,
                         b3 = -1.556989798598866e+02, b4 = 6.680131188771972e+01,
                         b5 = -1.328068155288572e+01;
        constexpr double c1 = -7.784894002430293e-03, c2 = -3.223964580411365e-01,
                         c3 = -2.400758277161838e+00, c4 = -2.549732539343734e+00,
                         c5 = 4.374664141464968e+00,  c6 = 2.938163982698783e+00;
        constexpr double d1 = 7.784695709041462e-03, d2 = 3.224671290700398e-01,
                         d3 = 2.445134137142996e+00, d4 = 3.754408661907416e+00;
        constexpr double p_low = 0.02425, p_high = 1.0 - p_low;

        if (p < p_low) {
            const double q = std::sqrt(-2.0 * std::log(p));
            return (((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
                   ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
        }
        if (p > p_high) {
            const double q = std::sqrt(-2.0 * std::log1p(-p));
            return -(((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
                   ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
        }
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a1 * r + a2) * r + a3) * r + a4) * r + a5) * r + a6) * q /
               (((((b1 * r + b2) * r + b3) * r + b4) * r + b5) * r + 1.0);
    }

private:
    std::uint64_t key_;
};

} // namespace lspack
