#pragma once

// Deterministic PRNG + samplers used by tests, checkers and the CLI.
// splitmix64 is used instead of std::mt19937 + distributions because the
// standard distributions are not guaranteed to produce identical streams
// across library implementations, and we promise byte-identical reruns.

#include <cmath>
#include <cstdint>
#include <vector>

namespace shrink {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // log-uniform on [lo,hi], lo > 0
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // standard normal via Box-Muller (uses only libm, stream stays reproducible)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // point in the positive cone: entries log-uniform in [0.1, 10]
    std::vector<double> positive_cone_point(int n) {
        std::vector<double> k(static_cast<std::size_t>(n));
        for (auto& v : k) v = log_uniform(0.1, 10.0);
        return k;
    }

    // direction vector with standard normal entries
    std::vector<double> normal_vector(int n) {
        std::vector<double> y(static_cast<std::size_t>(n));
        for (auto& v : y) v = normal();
        return y;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace shrink
