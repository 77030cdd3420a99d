#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "recon/pose.hpp"

namespace recon {

// Seeded generator with hand-rolled distributions so that identical seeds
// give identical streams on every platform (std:: distribution
// implementations vary between standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double normal(double mu = 0.0, double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mu + sigma * spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return mu + sigma * r * std::cos(2.0 * M_PI * u2);
    }

    Vec3 unit_vector() {
        while (true) {
            const Vec3 v{normal(), normal(), normal()};
            const double n = v.norm();
            if (n > 1e-12) return v / n;
        }
    }

    Quaternion unit_quaternion() {
        while (true) {
            const Quaternion q{normal(), normal(), normal(), normal()};
            const double n = q.norm();
            if (n > 1e-12) return {q.a / n, q.b / n, q.c / n, q.d / n};
        }
    }

    Mat3 rotation() { return quat_to_rotmat(unit_quaternion()); }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace recon
