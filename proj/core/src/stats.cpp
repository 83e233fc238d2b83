#include "dpglmb/stats.hpp"

#include "dpglmb/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace dpglmb {

namespace {

MatrixXd symmetrized(const MatrixXd& p) { return 0.5 * (p + p.transpose()); }

struct SigmaPoints {
    MatrixXd points;  // one column per point
    VectorXd wm;
    VectorXd wc;
};

SigmaPoints sigma_points(const Gaussian& g, const UnscentedParams& ut) {
    const auto n = static_cast<double>(g.dim());
    const double lambda = ut.alpha * ut.alpha * (n + ut.kappa) - n;
    const double scale = n + lambda;
    if (scale <= 0.0) throw ContractViolation("unscented: n + lambda must be positive");

    Eigen::LLT<MatrixXd> llt(scale * g.cov);
    if (llt.info() != Eigen::Success) throw NumericalDegeneracy("unscented: covariance is not positive definite");
    const MatrixXd L = llt.matrixL();

    const Eigen::Index d = g.dim();
    SigmaPoints sp;
    sp.points.resize(d, 2 * d + 1);
    sp.wm.resize(2 * d + 1);
    sp.wc.resize(2 * d + 1);
    sp.points.col(0) = g.mean;
    sp.wm(0) = lambda / scale;
    sp.wc(0) = lambda / scale + (1.0 - ut.alpha * ut.alpha + ut.beta);
    for (Eigen::Index i = 0; i < d; ++i) {
        sp.points.col(1 + i) = g.mean + L.col(i);
        sp.points.col(1 + d + i) = g.mean - L.col(i);
        sp.wm(1 + i) = sp.wm(1 + d + i) = 0.5 / scale;
        sp.wc(1 + i) = sp.wc(1 + d + i) = 0.5 / scale;
    }
    return sp;
}

Innovation finish_innovation(Innovation innov) {
    innov.S = symmetrized(innov.S);
    innov.S_chol.compute(innov.S);
    if (innov.S_chol.info() != Eigen::Success) {
        throw NumericalDegeneracy("innovation covariance is not positive definite");
    }
    const MatrixXd L = innov.S_chol.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
    const auto d = static_cast<double>(innov.S.rows());
    innov.log_normalizer = -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det);
    return innov;
}

}  // namespace

Gaussian::Gaussian(VectorXd m, MatrixXd p) : mean(std::move(m)), cov(std::move(p)) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw ContractViolation("Gaussian: mean has dimension " + std::to_string(mean.size()) +
                                " but covariance is " + std::to_string(cov.rows()) + "x" +
                                std::to_string(cov.cols()));
    }
    cov = symmetrized(cov);
}

GaussianMixture GaussianMixture::single(Gaussian g, double weight) {
    GaussianMixture mix;
    mix.components.push_back({weight, std::move(g)});
    return mix;
}

double GaussianMixture::total_weight() const {
    double total = 0.0;
    for (const auto& c : components) total += c.weight;
    return total;
}

VectorXd GaussianMixture::mean() const {
    if (components.empty()) return {};
    VectorXd m = VectorXd::Zero(components.front().gaussian.dim());
    const double total = total_weight();
    if (total <= 0.0) return components.front().gaussian.mean;
    for (const auto& c : components) m += (c.weight / total) * c.gaussian.mean;
    return m;
}

BetaParams BetaParams::from_moments(double mean, double variance) {
    if (!(mean > 0.0 && mean < 1.0)) throw ContractViolation("beta mean must lie in (0,1)");
    if (!(variance > 0.0 && variance < mean * (1.0 - mean))) {
        throw ContractViolation("beta variance must lie in (0, mean(1-mean))");
    }
    const double n = mean * (1.0 - mean) / variance - 1.0;
    return {mean * n, (1.0 - mean) * n};
}

double Innovation::mahalanobis2(const VectorXd& residual) const {
    return S_chol.matrixL().solve(residual).squaredNorm();
}

double Innovation::log_likelihood(const VectorXd& residual) const {
    return log_normalizer - 0.5 * mahalanobis2(residual);
}

Gaussian kalman_predict(const Gaussian& prior, const MatrixXd& F, const MatrixXd& Q) {
    if (F.cols() != prior.dim() || F.rows() != Q.rows() || Q.rows() != Q.cols()) {
        throw ContractViolation("kalman_predict: dimension mismatch");
    }
    return {F * prior.mean, F * prior.cov * F.transpose() + Q};
}

Gaussian unscented_predict(const Gaussian& prior, const VectorFunction& f, const MatrixXd& Q,
                           const UnscentedParams& ut) {
    const SigmaPoints sp = sigma_points(prior, ut);
    const Eigen::Index n = sp.points.cols();
    MatrixXd propagated(Q.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) propagated.col(i) = f(sp.points.col(i));
    if (propagated.rows() != Q.rows()) throw ContractViolation("unscented_predict: dimension mismatch");

    VectorXd mean = propagated * sp.wm;
    MatrixXd cov = Q;
    for (Eigen::Index i = 0; i < n; ++i) {
        const VectorXd d = propagated.col(i) - mean;
        cov.noalias() += sp.wc(i) * d * d.transpose();
    }
    return {std::move(mean), std::move(cov)};
}

Innovation linear_innovation(const Gaussian& prior, const MatrixXd& H, const MatrixXd& R) {
    if (H.cols() != prior.dim() || H.rows() != R.rows() || R.rows() != R.cols()) {
        throw ContractViolation("linear_innovation: dimension mismatch");
    }
    Innovation innov;
    innov.z_pred = H * prior.mean;
    innov.cross = prior.cov * H.transpose();
    innov.S = H * innov.cross + R;
    return finish_innovation(std::move(innov));
}

Innovation unscented_innovation(const Gaussian& prior, const VectorFunction& h, const MatrixXd& R,
                                const UnscentedParams& ut, const ResidualFunction& residual) {
    const SigmaPoints sp = sigma_points(prior, ut);
    const Eigen::Index n = sp.points.cols();
    MatrixXd Zs(R.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) Zs.col(i) = h(sp.points.col(i));

    Innovation innov;
    innov.z_pred = Zs * sp.wm;
    innov.S = R;
    innov.cross = MatrixXd::Zero(prior.dim(), R.rows());
    for (Eigen::Index i = 0; i < n; ++i) {
        const VectorXd dz = residual ? residual(Zs.col(i), innov.z_pred) : VectorXd(Zs.col(i) - innov.z_pred);
        const VectorXd dx = sp.points.col(i) - prior.mean;
        innov.S.noalias() += sp.wc(i) * dz * dz.transpose();
        innov.cross.noalias() += sp.wc(i) * dx * dz.transpose();
    }
    return finish_innovation(std::move(innov));
}

Gaussian condition(const Gaussian& prior, const Innovation& innov, const VectorXd& residual) {
    // K = C S^-1, computed through the factorization.
    const MatrixXd K = innov.S_chol.solve(innov.cross.transpose()).transpose();
    MatrixXd cov = prior.cov - K * innov.S * K.transpose();
    return {prior.mean + K * residual, std::move(cov)};
}

UpdateResult kalman_update(const Gaussian& prior, const VectorXd& z, const MatrixXd& H, const MatrixXd& R) {
    const Innovation innov = linear_innovation(prior, H, R);
    const VectorXd r = z - innov.z_pred;
    return {condition(prior, innov, r), innov.log_likelihood(r)};
}

UpdateResult ukf_update(const Gaussian& prior, const VectorXd& z, const VectorFunction& h, const MatrixXd& R,
                        const UnscentedParams& ut, const ResidualFunction& residual) {
    const Innovation innov = unscented_innovation(prior, h, R, ut, residual);
    const VectorXd r = residual ? residual(z, innov.z_pred) : VectorXd(z - innov.z_pred);
    return {condition(prior, innov, r), innov.log_likelihood(r)};
}

GaussianMixture gm_reduce(const GaussianMixture& mix, const ReductionConfig& cfg) {
    if (cfg.prune_threshold < 0.0 || cfg.merge_threshold < 0.0) {
        throw ContractViolation("gm_reduce: thresholds must be non-negative");
    }
    const double original_total = mix.total_weight();

    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < mix.components.size(); ++i) {
        if (mix.components[i].weight >= cfg.prune_threshold && mix.components[i].weight > 0.0) alive.push_back(i);
    }

    GaussianMixture out;
    while (!alive.empty()) {
        const auto heaviest_it = std::max_element(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
            return mix.components[a].weight < mix.components[b].weight;
        });
        const Gaussian& pivot = mix.components[*heaviest_it].gaussian;
        Eigen::LLT<MatrixXd> pivot_chol(pivot.cov);
        const bool pivot_ok = pivot_chol.info() == Eigen::Success;

        std::vector<std::size_t> group;
        std::vector<std::size_t> rest;
        for (std::size_t idx : alive) {
            const VectorXd d = mix.components[idx].gaussian.mean - pivot.mean;
            const double m2 = pivot_ok ? pivot_chol.matrixL().solve(d).squaredNorm()
                                       : (d.isZero(0.0) ? 0.0 : std::numeric_limits<double>::infinity());
            (idx == *heaviest_it || m2 <= cfg.merge_threshold ? group : rest).push_back(idx);
        }

        double w = 0.0;
        VectorXd m = VectorXd::Zero(pivot.dim());
        for (std::size_t idx : group) {
            w += mix.components[idx].weight;
            m += mix.components[idx].weight * mix.components[idx].gaussian.mean;
        }
        m /= w;
        MatrixXd P = MatrixXd::Zero(pivot.dim(), pivot.dim());
        for (std::size_t idx : group) {
            const auto& c = mix.components[idx];
            const VectorXd d = c.gaussian.mean - m;
            P += c.weight * (c.gaussian.cov + d * d.transpose());
        }
        P /= w;
        out.components.push_back({w, Gaussian(std::move(m), std::move(P))});
        alive = std::move(rest);
    }

    std::stable_sort(out.components.begin(), out.components.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });
    if (out.components.size() > cfg.max_components) out.components.resize(cfg.max_components);

    const double kept = out.total_weight();
    if (kept > 0.0) {
        for (auto& c : out.components) c.weight *= original_total / kept;
    }
    return out;
}

GaussianMixture gm_reduce(const GaussianMixture& mix, double prune_threshold, double merge_threshold,
                          std::size_t max_components) {
    return gm_reduce(mix, ReductionConfig{prune_threshold, merge_threshold, max_components});
}

BetaParams beta_predict(const BetaParams& b, double variance_inflation) {
    if (!(variance_inflation > 1.0)) throw ContractViolation("beta_predict: inflation factor must exceed 1");
    if (!(b.s > 0.0 && b.t > 0.0)) throw ContractViolation("beta_predict: parameters must be positive");
    const double mean = b.mean();
    const double bound = mean * (1.0 - mean);
    double variance = b.variance() * variance_inflation;
    if (variance >= bound) variance = 0.999 * bound;
    return BetaParams::from_moments(mean, variance);
}

BetaParams beta_merge(std::span<const double> weights, std::span<const BetaParams> betas) {
    if (weights.size() != betas.size() || weights.empty()) throw ContractViolation("beta_merge: size mismatch");
    double w = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        w += weights[i];
        mean += weights[i] * betas[i].mean();
    }
    if (w <= 0.0) return betas.front();
    mean /= w;
    double var = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double d = betas[i].mean() - mean;
        var += weights[i] * (betas[i].variance() + d * d);
    }
    var /= w;
    const double bound = mean * (1.0 - mean);
    if (var >= bound) var = 0.999 * bound;
    if (var <= 0.0) return betas.front();
    return BetaParams::from_moments(mean, var);
}

double log_sum_exp(std::span<const double> values) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : values) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - mx);
    return mx + std::log(acc);
}

double min_eigenvalue(const MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace dpglmb
