#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

namespace satbasin {

/// Seeded random source with hand-rolled mappings, so streams are identical
/// across standard-library implementations (std:: distributions are not).
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
        return v;
    }

    Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
        return m;
    }

    /// Uniform direction on the unit sphere (normalized Gaussian vector).
    Eigen::VectorXd unit_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        double norm = 0.0;
        do {
            for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
            norm = v.norm();
        } while (norm < 1e-12);
        return v / norm;
    }

   private:
    std::mt19937_64 gen_;
};

}  // namespace satbasin
