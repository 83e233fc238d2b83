#include "dpglmb/errors.hpp"
#include "dpglmb/models.hpp"
#include "dpglmb/stats.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dpglmb;
using dpglmb::test::random_spd;
using dpglmb::test::random_vector;

namespace {

double trace_scale(const MatrixXd& p) { return std::max(1.0, p.trace()); }

}  // namespace

TEST(KalmanPredict, IdentityTransitionIsNoOp) {
    std::mt19937_64 rng(1);
    const Gaussian prior(random_vector(4, rng), random_spd(4, rng));
    const Gaussian out = kalman_predict(prior, MatrixXd::Identity(4, 4), MatrixXd::Zero(4, 4));
    EXPECT_TRUE(out.mean.isApprox(prior.mean, 1e-15));
    EXPECT_TRUE(out.cov.isApprox(prior.cov, 1e-15));
}

TEST(KalmanPredict, ConstantVelocityExample) {
    const auto cv = cv_transition(1.0, 5.0);
    VectorXd m(4);
    m << 0, 0, 10, 0;
    const Gaussian out = kalman_predict(Gaussian(m, MatrixXd::Zero(4, 4)), cv.F, cv.Q);
    VectorXd expected(4);
    expected << 10, 0, 10, 0;
    EXPECT_TRUE(out.mean.isApprox(expected, 1e-15));
    EXPECT_DOUBLE_EQ(out.cov(0, 0), 6.25);
    EXPECT_DOUBLE_EQ(out.cov(0, 2), 12.5);
    EXPECT_DOUBLE_EQ(out.cov(2, 2), 25.0);
}

TEST(KalmanPredict, MatchesDirectMatrixProducts) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXd F = random_spd(4, rng) + random_spd(4, rng).transpose() * 0.1;
        const MatrixXd Q = random_spd(4, rng, 0.5);
        const Gaussian prior(random_vector(4, rng, 10.0), random_spd(4, rng, 2.0));
        const Gaussian out = kalman_predict(prior, F, Q);
        MatrixXd expected_cov = MatrixXd::Zero(4, 4);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                double acc = Q(i, j);
                for (int k = 0; k < 4; ++k) {
                    for (int l = 0; l < 4; ++l) acc += F(i, k) * prior.cov(k, l) * F(j, l);
                }
                expected_cov(i, j) = acc;
            }
        }
        EXPECT_LE((out.mean - F * prior.mean).norm(), 1e-10 * (F * prior.mean).norm());
        EXPECT_LE((out.cov - expected_cov).norm(), 1e-10 * expected_cov.norm());
        EXPECT_EQ(out.cov, out.cov.transpose());
        EXPECT_GE(min_eigenvalue(out.cov), -1e-9 * trace_scale(out.cov));
    }
}

TEST(KalmanPredict, DimensionMismatchThrows) {
    const Gaussian prior(VectorXd::Zero(4), MatrixXd::Identity(4, 4));
    EXPECT_THROW(kalman_predict(prior, MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3)), ContractViolation);
}

TEST(KalmanUpdate, ScalarHandExample) {
    const Gaussian prior(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    const auto out = kalman_update(prior, VectorXd::Constant(1, 2.0), MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1));
    EXPECT_NEAR(out.posterior.mean(0), 1.0, 1e-15);
    EXPECT_NEAR(out.posterior.cov(0, 0), 0.5, 1e-15);
    // z ~ N(0, 2) under the prior predictive.
    EXPECT_NEAR(out.log_likelihood, -0.5 * std::log(2.0 * std::numbers::pi * 2.0) - 1.0, 1e-12);
}

TEST(KalmanUpdate, UninformativeMeasurementKeepsPrior) {
    std::mt19937_64 rng(3);
    const Gaussian prior(random_vector(4, rng), random_spd(4, rng));
    MatrixXd H = MatrixXd::Zero(2, 4);
    H(0, 0) = H(1, 1) = 1.0;
    const auto out = kalman_update(prior, random_vector(2, rng, 5.0), H, 1e12 * MatrixXd::Identity(2, 2));
    const double scale = std::sqrt(prior.cov.diagonal().maxCoeff());
    EXPECT_LT((out.posterior.mean - prior.mean).cwiseAbs().maxCoeff(), 1e-3 * scale);
    EXPECT_LT((out.posterior.cov - prior.cov).cwiseAbs().maxCoeff(), 1e-3 * prior.cov.cwiseAbs().maxCoeff());
}

TEST(KalmanUpdate, MatchesGridQuadrature) {
    // Two-dimensional state, scalar measurement: posterior moments and the
    // evidence by brute-force quadrature on a dense grid.
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 3; ++trial) {
        const Gaussian prior(random_vector(2, rng), random_spd(2, rng, 0.5));
        MatrixXd H = random_vector(2, rng).transpose();
        const MatrixXd R = MatrixXd::Constant(1, 1, 0.7);
        const VectorXd z = H * prior.mean + random_vector(1, rng);
        const auto out = kalman_update(prior, z, H, R);

        const int n = 801;
        const double sx = std::sqrt(prior.cov(0, 0)) * 9.0;
        const double sy = std::sqrt(prior.cov(1, 1)) * 9.0;
        const double hx = 2.0 * sx / (n - 1);
        const double hy = 2.0 * sy / (n - 1);
        double mass = 0.0;
        Eigen::Vector2d m1 = Eigen::Vector2d::Zero();
        Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Eigen::Vector2d x(prior.mean(0) - sx + i * hx, prior.mean(1) - sy + j * hy);
                const double lp = test::log_normal_pdf(x, prior.mean, prior.cov) +
                                  test::log_normal_pdf(z, H * x, R);
                const double w = std::exp(lp) * hx * hy;
                mass += w;
                m1 += w * x;
                m2 += w * x * x.transpose();
            }
        }
        const Eigen::Vector2d mean = m1 / mass;
        const Eigen::Matrix2d cov = m2 / mass - mean * mean.transpose();
        const double scale = std::sqrt(prior.cov.trace());
        EXPECT_LT((out.posterior.mean - mean).norm(), 1e-4 * scale);
        EXPECT_LT((out.posterior.cov - cov).norm(), 1e-4 * prior.cov.norm());
        EXPECT_NEAR(out.log_likelihood, std::log(mass), 1e-4);
    }
}

TEST(KalmanUpdate, PreservesSymmetryAndPsd) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Gaussian prior(random_vector(4, rng), random_spd(4, rng, 100.0));
        MatrixXd H = MatrixXd::Zero(2, 4);
        H(0, 0) = H(1, 1) = 1.0;
        const auto out = kalman_update(prior, random_vector(2, rng), H, random_spd(2, rng, 0.01));
        EXPECT_EQ(out.posterior.cov, out.posterior.cov.transpose());
        EXPECT_GE(min_eigenvalue(out.posterior.cov), -1e-9 * trace_scale(out.posterior.cov));
    }
}

TEST(KalmanUpdate, NonPositiveDefiniteInnovationThrows) {
    const Gaussian prior(VectorXd::Zero(2), MatrixXd::Zero(2, 2));
    EXPECT_THROW(kalman_update(prior, VectorXd::Zero(2), MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)),
                 NumericalDegeneracy);
}

TEST(UkfUpdate, LinearMeasurementAgreesWithKalman) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const Gaussian prior(random_vector(4, rng, 10.0), random_spd(4, rng, 3.0));
        const MatrixXd H = random_vector(8, rng).reshaped(2, 4);
        const MatrixXd R = random_spd(2, rng);
        const VectorXd z = H * prior.mean + random_vector(2, rng);
        const auto k = kalman_update(prior, z, H, R);
        const auto u = ukf_update(prior, z, [&](const VectorXd& x) -> VectorXd { return H * x; }, R);
        EXPECT_LT((k.posterior.mean - u.posterior.mean).norm(), 1e-8 * (1.0 + k.posterior.mean.norm()));
        EXPECT_LT((k.posterior.cov - u.posterior.cov).norm(), 1e-8 * (1.0 + k.posterior.cov.norm()));
        EXPECT_NEAR(k.log_likelihood, u.log_likelihood, 1e-8);
    }
}

TEST(UkfUpdate, BearingRangePredictedMeasurement) {
    VectorXd x(5);
    x << 100, 100, 0, 0, 0;
    const Gaussian prior(x, 1e-10 * MatrixXd::Identity(5, 5));
    const auto innov = unscented_innovation(prior, [](const VectorXd& s) -> VectorXd { return bearing_range_sensor(s); },
                                            MatrixXd::Identity(2, 2));
    EXPECT_NEAR(innov.z_pred(0), std::atan(1.0), 1e-9);
    EXPECT_NEAR(innov.z_pred(1), 100.0 * std::sqrt(2.0), 1e-7);
}

TEST(UkfUpdate, CholeskyFailureThrows) {
    VectorXd x(2);
    x << 1, 2;
    MatrixXd P(2, 2);
    P << 1, 2, 2, 1;  // indefinite
    EXPECT_THROW(ukf_update(Gaussian(x, P), x, [](const VectorXd& s) -> VectorXd { return s; }, MatrixXd::Identity(2, 2)),
                 NumericalDegeneracy);
}

namespace {

struct SampleMoments {
    VectorXd mean;
    MatrixXd cov;
};

SampleMoments monte_carlo(const Gaussian& g, const VectorFunction& f, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const MatrixXd L = g.cov.llt().matrixL();
    const int dout = static_cast<int>(f(g.mean).size());
    VectorXd s1 = VectorXd::Zero(dout);
    MatrixXd s2 = MatrixXd::Zero(dout, dout);
    VectorXd e(g.dim());
    for (int i = 0; i < samples; ++i) {
        for (Eigen::Index k = 0; k < e.size(); ++k) e(k) = nd(rng);
        const VectorXd y = f(g.mean + L * e);
        s1 += y;
        s2 += y * y.transpose();
    }
    SampleMoments out;
    out.mean = s1 / samples;
    out.cov = s2 / samples - out.mean * out.mean.transpose();
    return out;
}

}  // namespace

TEST(UnscentedTransform, MatchesMonteCarloOnQuadratic) {
    // n + lambda = 3 in one dimension captures the fourth moment, so with no
    // extra central-point covariance weight (beta = 0) the transform is exact
    // for quadratic maps. The mean is exact for any beta.
    const Gaussian g(VectorXd::Constant(1, 1.0), MatrixXd::Constant(1, 1, 0.5));
    const VectorFunction f = [](const VectorXd& x) -> VectorXd { return VectorXd::Constant(1, x(0) * x(0) + x(0)); };
    const Gaussian ut = unscented_predict(g, f, MatrixXd::Zero(1, 1), UnscentedParams{1.0, 0.0, 2.0});
    const Gaussian ut_default = unscented_predict(g, f, MatrixXd::Zero(1, 1));
    const int n = 1000000;
    const auto mc = monte_carlo(g, f, n, 7);
    const double se_mean = std::sqrt(mc.cov(0, 0) / n);
    const double se_var = mc.cov(0, 0) * std::sqrt(2.0 / n) * 3.0;  // heavy tails of a chi-square mix
    EXPECT_LT(std::abs(ut.mean(0) - mc.mean(0)), 3.0 * se_mean);
    EXPECT_NEAR(ut_default.mean(0), ut.mean(0), 1e-12);
    EXPECT_LT(std::abs(ut.cov(0, 0) - mc.cov(0, 0)), 3.0 * se_var);
}

TEST(UnscentedTransform, MatchesMonteCarloOnBearingRange) {
    VectorXd x(5);
    x << 600, 800, 3, -2, 0.01;
    MatrixXd P = MatrixXd::Zero(5, 5);
    P.diagonal() << 100, 100, 25, 25, 1e-4;
    const Gaussian g(x, P);
    const VectorFunction h = [](const VectorXd& s) -> VectorXd { return bearing_range_sensor(s); };
    const auto innov = unscented_innovation(g, h, MatrixXd::Zero(2, 2));
    const int n = 1000000;
    const auto mc = monte_carlo(g, h, n, 8);
    for (int k = 0; k < 2; ++k) {
        const double se_mean = std::sqrt(mc.cov(k, k) / n);
        const double se_var = mc.cov(k, k) * std::sqrt(2.0 / n);
        EXPECT_LT(std::abs(innov.z_pred(k) - mc.mean(k)), 3.0 * se_mean) << "component " << k;
        EXPECT_LT(std::abs(innov.S(k, k) - mc.cov(k, k)), 3.0 * se_var) << "component " << k;
    }
}

TEST(GmReduce, SingleComponentUnchanged) {
    std::mt19937_64 rng(9);
    const auto mix = GaussianMixture::single(Gaussian(random_vector(3, rng), random_spd(3, rng)), 0.7);
    const auto out = gm_reduce(mix, 1e-5, 4.0, 10);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_DOUBLE_EQ(out.components[0].weight, 0.7);
    EXPECT_TRUE(out.components[0].gaussian.mean.isApprox(mix.components[0].gaussian.mean, 1e-15));
    EXPECT_TRUE(out.components[0].gaussian.cov.isApprox(mix.components[0].gaussian.cov, 1e-14));
}

TEST(GmReduce, IdenticalComponentsMerge) {
    std::mt19937_64 rng(10);
    const Gaussian g(random_vector(3, rng), random_spd(3, rng));
    GaussianMixture mix;
    mix.components = {{0.5, g}, {0.5, g}};
    const auto out = gm_reduce(mix, 1e-5, 0.1, 10);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_NEAR(out.components[0].weight, 1.0, 1e-15);
    EXPECT_TRUE(out.components[0].gaussian.mean.isApprox(g.mean, 1e-14));
    EXPECT_TRUE(out.components[0].gaussian.cov.isApprox(g.cov, 1e-14));
}

TEST(GmReduce, CapKeepsHeaviest) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    GaussianMixture mix;
    std::vector<double> weights;
    for (int i = 0; i < 10; ++i) {
        VectorXd m = VectorXd::Zero(2);
        m(0) = 1000.0 * i;  // far apart: nothing merges
        weights.push_back(u(rng));
        mix.components.push_back({weights.back(), Gaussian(m, MatrixXd::Identity(2, 2))});
    }
    const auto out = gm_reduce(mix, 0.0, 4.0, 3);
    ASSERT_EQ(out.size(), 3u);
    std::vector<double> sorted = weights;
    std::sort(sorted.rbegin(), sorted.rend());
    const double total = mix.total_weight();
    const double kept = sorted[0] + sorted[1] + sorted[2];
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(out.components[i].weight, sorted[i] * total / kept, 1e-12);
    EXPECT_NEAR(out.total_weight(), total, 1e-12 * total);
}

TEST(GmReduce, NeverGrowsAndPreservesWeight) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        GaussianMixture mix;
        const int n = 1 + static_cast<int>(u(rng) * 20);
        for (int i = 0; i < n; ++i) {
            mix.components.push_back({u(rng) < 0.2 ? 1e-7 : u(rng), Gaussian(random_vector(2, rng, 3.0), random_spd(2, rng))});
        }
        const auto out = gm_reduce(mix, 1e-5, 4.0, 5);
        EXPECT_LE(out.size(), mix.size());
        if (out.empty()) continue;  // everything pruned
        EXPECT_NEAR(out.total_weight(), mix.total_weight(), 1e-12 * mix.total_weight());
    }
}

TEST(BetaPredict, PreservesInitialMean) {
    const BetaParams b = beta_predict({90.0, 10.0}, 1.2);
    EXPECT_NEAR(b.mean(), 0.9, 1e-15);
}

TEST(BetaPredict, InflatesVarianceByFactor) {
    const BetaParams prior{90.0, 10.0};
    const BetaParams b = beta_predict(prior, 1.2);
    const double expected = 1.2 * (90.0 * 10.0) / (100.0 * 100.0 * 101.0);
    EXPECT_NEAR(b.variance(), expected, 1e-15);
    const double n = b.s + b.t;
    EXPECT_NEAR(b.s * b.t / (n * n * (n + 1.0)), expected, 1e-15);
    EXPECT_NEAR(b.s / n, 0.9, 1e-14);
}

TEST(BetaPredict, InflationNearOneIsNearlyIdentity) {
    const BetaParams b = beta_predict({90.0, 10.0}, 1.0 + 1e-12);
    EXPECT_NEAR(b.s, 90.0, 1e-6);
    EXPECT_NEAR(b.t, 10.0, 1e-6);
}

TEST(BetaPredict, ClampsAtMaximumVariance) {
    const BetaParams b = beta_predict({0.5, 0.5}, 100.0);
    EXPECT_NEAR(b.mean(), 0.5, 1e-15);
    EXPECT_NEAR(b.variance(), 0.999 * 0.25, 1e-12);
    EXPECT_GT(b.s, 0.0);
    EXPECT_GT(b.t, 0.0);
}

TEST(BetaPredict, RejectsInflationAtOrBelowOne) {
    EXPECT_THROW(beta_predict({2.0, 3.0}, 1.0), ContractViolation);
}

TEST(BetaPredict, MeanPreservedAndVarianceGrowsOnRandomInputs) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.5, 200.0);
    std::uniform_real_distribution<double> inf(1.001, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const BetaParams prior{u(rng), u(rng)};
        const BetaParams b = beta_predict(prior, inf(rng));
        EXPECT_NEAR(b.mean(), prior.mean(), 1e-13);
        if (prior.variance() * 2.0 < 0.999 * prior.mean() * (1.0 - prior.mean())) {
            EXPECT_GT(b.variance(), prior.variance());
        }
    }
}

TEST(BetaMerge, MomentMatchesMixture) {
    const std::vector<double> w{0.3, 0.7};
    const std::vector<BetaParams> b{{20.0, 5.0}, {40.0, 2.0}};
    const BetaParams m = beta_merge(w, b);
    const double mean = 0.3 * b[0].mean() + 0.7 * b[1].mean();
    const double second = 0.3 * (b[0].variance() + b[0].mean() * b[0].mean()) +
                          0.7 * (b[1].variance() + b[1].mean() * b[1].mean());
    EXPECT_NEAR(m.mean(), mean, 1e-14);
    EXPECT_NEAR(m.variance(), second - mean * mean, 1e-14);
}

TEST(LogSumExp, StableForLargeMagnitudes) {
    const std::vector<double> v{-1000.0, -1000.0};
    EXPECT_NEAR(log_sum_exp(v), -1000.0 + std::log(2.0), 1e-12);
    const std::vector<double> e;
    EXPECT_EQ(log_sum_exp(e), -std::numeric_limits<double>::infinity());
}
