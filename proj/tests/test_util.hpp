#pragma once

#include "dpglmb/stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

namespace dpglmb::test {

inline MatrixXd random_spd(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd;
    MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
    }
    return scale * (a * a.transpose() + n * MatrixXd::Identity(n, n));
}

inline VectorXd random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd;
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * nd(rng);
    return v;
}

/// Log-density of N(x; m, P) computed by explicit inversion, independent of
/// the library's Cholesky path.
inline double log_normal_pdf(const VectorXd& x, const VectorXd& m, const MatrixXd& P) {
    const VectorXd d = x - m;
    const double k = static_cast<double>(x.size());
    return -0.5 * (k * std::log(2.0 * std::numbers::pi) + std::log(P.determinant()) + d.dot(P.inverse() * d));
}

}  // namespace dpglmb::test
