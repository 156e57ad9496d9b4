#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace labb {

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seeded random stream. Distribution transforms are implemented here rather
// than with std:: distributions so draws are identical across standard
// library implementations; substreams make parallel runs order-independent.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(mix64(seed)) {}

    // Independent stream derived from (master seed, stream index).
    static Rng substream(uint64_t master, uint64_t index) {
        return Rng(mix64(master ^ mix64(index + 0x2545f4914f6cdd1dULL)));
    }

    uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0,1).
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be positive.
    uint64_t uniform_int(uint64_t n) {
        uint64_t threshold = (0 - n) % n; // rejection zone for unbiasedness
        for (;;) {
            uint64_t r = gen_();
            if (r >= threshold)
                return r % n;
        }
    }

    // Standard normal via Box-Muller (no cached second variate).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double exponential(double rate) {
        return -std::log(uniform01()) / rate;
    }

    // Marsaglia-Tsang; unit scale, any shape > 0.
    double gamma(double shape) {
        if (shape < 1.0)
            return gamma(shape + 1.0) * std::pow(uniform01(), 1.0 / shape);
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0)
                continue;
            double v = t * t * t;
            double u = uniform01();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2)
                return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

private:
    std::mt19937_64 gen_;
};

} // namespace labb
