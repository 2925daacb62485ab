#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nlkrylov {

/// Seeded generator with hand-rolled distributions, so streams are identical
/// across standard library implementations (std distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double m = std::sqrt(-2.0 * std::log(u1));
        spare_ = m * std::sin(6.283185307179586 * u2);
        have_spare_ = true;
        return m * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 g_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nlkrylov
