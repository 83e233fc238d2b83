#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dpglmb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Multivariate normal N(mean, cov). The covariance is symmetrized on
/// construction; dimensions are checked.
struct Gaussian {
    VectorXd mean;
    MatrixXd cov;

    Gaussian() = default;
    Gaussian(VectorXd m, MatrixXd p);

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

struct WeightedGaussian {
    double weight = 0.0;
    Gaussian gaussian;
};

struct GaussianMixture {
    std::vector<WeightedGaussian> components;

    static GaussianMixture single(Gaussian g, double weight = 1.0);

    [[nodiscard]] bool empty() const { return components.empty(); }
    [[nodiscard]] std::size_t size() const { return components.size(); }
    [[nodiscard]] double total_weight() const;
    /// Weighted mean of the component means (weights normalized internally).
    [[nodiscard]] VectorXd mean() const;
};

/// Beta(s, t) distribution over a probability, here the detection probability.
struct BetaParams {
    double s = 1.0;
    double t = 1.0;

    [[nodiscard]] double mean() const { return s / (s + t); }
    [[nodiscard]] double variance() const {
        const double n = s + t;
        return s * t / (n * n * (n + 1.0));
    }
    /// Inverts the moment equations. Requires 0 < mean < 1 and
    /// 0 < variance < mean (1 - mean).
    static BetaParams from_moments(double mean, double variance);
};

struct BetaGaussianComponent {
    double weight = 0.0;
    BetaParams beta;
    Gaussian gaussian;
};

/// Unscented transform scaling. Defaults are the classical alpha=1, beta=2, kappa=2.
struct UnscentedParams {
    double alpha = 1.0;
    double beta = 2.0;
    double kappa = 2.0;
};

using VectorFunction = std::function<VectorXd(const VectorXd&)>;
/// residual(z, z_pred): measurement difference, e.g. with angle wrapping.
using ResidualFunction = std::function<VectorXd(const VectorXd&, const VectorXd&)>;

/// Predicted-measurement moments of a Gaussian prior, shared between gating,
/// likelihood evaluation and conditioning.
struct Innovation {
    VectorXd z_pred;
    MatrixXd S;
    MatrixXd cross;  // Cov(x, z)
    Eigen::LLT<MatrixXd> S_chol;
    double log_normalizer = 0.0;  // -0.5 (d log 2pi + log det S)

    [[nodiscard]] double mahalanobis2(const VectorXd& residual) const;
    [[nodiscard]] double log_likelihood(const VectorXd& residual) const;
};

struct UpdateResult {
    Gaussian posterior;
    double log_likelihood = 0.0;
};

Gaussian kalman_predict(const Gaussian& prior, const MatrixXd& F, const MatrixXd& Q);

/// Unscented prediction through a nonlinear mean function with additive noise Q.
Gaussian unscented_predict(const Gaussian& prior, const VectorFunction& f, const MatrixXd& Q,
                           const UnscentedParams& ut = {});

Innovation linear_innovation(const Gaussian& prior, const MatrixXd& H, const MatrixXd& R);
Innovation unscented_innovation(const Gaussian& prior, const VectorFunction& h, const MatrixXd& R,
                                const UnscentedParams& ut = {}, const ResidualFunction& residual = {});

/// Conditions `prior` on a measurement given its precomputed innovation and residual z - z_pred.
Gaussian condition(const Gaussian& prior, const Innovation& innov, const VectorXd& residual);

UpdateResult kalman_update(const Gaussian& prior, const VectorXd& z, const MatrixXd& H, const MatrixXd& R);
UpdateResult ukf_update(const Gaussian& prior, const VectorXd& z, const VectorFunction& h, const MatrixXd& R,
                        const UnscentedParams& ut = {}, const ResidualFunction& residual = {});

struct ReductionConfig {
    double prune_threshold = 1e-5;
    double merge_threshold = 4.0;  // Mahalanobis^2
    std::size_t max_components = 100;
};

/// Prune, greedily moment-merge around the heaviest component, cap by weight,
/// then rescale to the pre-reduction total weight.
GaussianMixture gm_reduce(const GaussianMixture& mix, const ReductionConfig& cfg = {});
GaussianMixture gm_reduce(const GaussianMixture& mix, double prune_threshold, double merge_threshold,
                          std::size_t max_components);

/// Mean-preserving variance inflation of a beta belief. Variances reaching
/// mean (1 - mean) are clamped to 0.999 of that bound.
BetaParams beta_predict(const BetaParams& b, double variance_inflation);

/// Moment-matched single beta for a weighted set of betas.
BetaParams beta_merge(std::span<const double> weights, std::span<const BetaParams> betas);

double log_sum_exp(std::span<const double> values);

/// Smallest eigenvalue of a symmetric matrix (for PSD checks).
double min_eigenvalue(const MatrixXd& symmetric);

}  // namespace dpglmb
