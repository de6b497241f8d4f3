#ifndef GRQSM_RNG_HPP
#define GRQSM_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace grqsm {

namespace detail {

// 64-bit avalanche mix (murmur3 fmix64).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

} // namespace detail

/// Deterministic random stream derived from a master seed and up to three
/// stream indices. Every unit of work (trial, SNR point, realization, ...)
/// owns its own SubStream, so results do not depend on scheduling or on the
/// number of workers. The generator is a splitmix64 counter sequence; each
/// output is a hash of an advancing counter, which makes derivation and
/// replay trivially reproducible.
class SubStream {
public:
    explicit SubStream(std::uint64_t master_seed, std::uint64_t id0 = 0,
                       std::uint64_t id1 = 0, std::uint64_t id2 = 0) {
        std::uint64_t s = detail::mix64(master_seed + 0x9e3779b97f4a7c15ULL);
        s = detail::mix64(s ^ (id0 + 0xbf58476d1ce4e5b9ULL));
        s = detail::mix64(s ^ (id1 + 0x94d049bb133111ebULL));
        s = detail::mix64(s ^ (id2 + 0x2545f4914f6cdd1dULL));
        state_ = s;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    bool next_bit() { return (next_u64() >> 63) != 0; }

    /// Standard normal via Box-Muller (portable, unlike std::normal_distribution).
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_unit(); // (0, 1]
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian CN(0, variance):
    /// variance/2 in each of the real and imaginary parts.
    std::complex<double> next_cgauss(double variance) {
        const double s = std::sqrt(variance * 0.5);
        return {s * next_normal(), s * next_normal()};
    }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace grqsm

#endif // GRQSM_RNG_HPP
