#include "dpglmb/rcphd.hpp"

#include "dpglmb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dpglmb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_factorial(std::size_t n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(4096);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::lgamma(static_cast<double>(i) + 1.0);
        return t;
    }();
    return n < table.size() ? table[n] : std::lgamma(static_cast<double>(n) + 1.0);
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

void normalize(std::vector<double>& p) {
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(s > 0.0)) throw NumericalDegeneracy("cardinality distribution has zero mass");
    for (double& v : p) v /= s;
}

// log of sum_n rho(n) Gamma_s(n), Gamma_s(n) = P^n_{m+s} Phi^{n-m-s}.
double log_gamma_inner(const std::vector<double>& log_rho, std::size_t m, std::size_t s, double log_phi,
                       std::vector<double>* terms = nullptr) {
    const std::size_t k = m + s;
    std::vector<double> vals(log_rho.size(), kNegInf);
    for (std::size_t n = k; n < log_rho.size(); ++n) {
        if (log_rho[n] == kNegInf) continue;
        const double power = (n == k) ? 0.0 : static_cast<double>(n - k) * log_phi;
        vals[n] = log_rho[n] + log_factorial(n) - log_factorial(n - k) + power;
    }
    const double total = log_sum_exp(vals);
    if (terms) *terms = std::move(vals);
    return total;
}

}  // namespace

double BetaGaussianMixture::total_weight() const {
    double w = 0.0;
    for (const auto& c : components) w += c.weight;
    return w;
}

double BetaMixture::total_weight() const {
    double w = 0.0;
    for (const auto& c : components) w += c.weight;
    return w;
}

CardinalityDistribution CardinalityDistribution::delta(std::size_t n, std::size_t max_cardinality) {
    if (n > max_cardinality) throw ContractViolation("delta cardinality beyond support");
    CardinalityDistribution c;
    c.probabilities.assign(max_cardinality + 1, 0.0);
    c.probabilities[n] = 1.0;
    return c;
}

CardinalityDistribution CardinalityDistribution::uniform(std::size_t max_cardinality) {
    CardinalityDistribution c;
    c.probabilities.assign(max_cardinality + 1, 1.0 / static_cast<double>(max_cardinality + 1));
    return c;
}

CardinalityDistribution CardinalityDistribution::poisson(double mean, std::size_t max_cardinality) {
    if (mean < 0.0) throw ContractViolation("Poisson mean must be non-negative");
    if (mean == 0.0) return delta(0, max_cardinality);
    CardinalityDistribution c;
    c.probabilities.resize(max_cardinality + 1);
    for (std::size_t n = 0; n <= max_cardinality; ++n) {
        c.probabilities[n] = std::exp(static_cast<double>(n) * std::log(mean) - mean - log_factorial(n));
    }
    normalize(c.probabilities);
    return c;
}

CardinalityDistribution CardinalityDistribution::bernoulli_sum(std::span<const double> existence,
                                                               std::size_t max_cardinality) {
    CardinalityDistribution c = delta(0, max_cardinality);
    std::vector<double> next(max_cardinality + 1);
    for (double r : existence) {
        if (r < 0.0 || r > 1.0) throw ContractViolation("existence probability outside [0,1]");
        next[0] = (1.0 - r) * c.probabilities[0];
        for (std::size_t n = 1; n <= max_cardinality; ++n) {
            next[n] = (1.0 - r) * c.probabilities[n] + r * c.probabilities[n - 1];
        }
        c.probabilities.swap(next);
    }
    normalize(c.probabilities);
    return c;
}

double CardinalityDistribution::sum() const {
    return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

double CardinalityDistribution::mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < probabilities.size(); ++n) m += static_cast<double>(n) * probabilities[n];
    return m;
}

CardinalityDistribution convolve(const CardinalityDistribution& a, const CardinalityDistribution& b,
                                 std::size_t max_cardinality, double* lost_mass) {
    CardinalityDistribution out;
    out.probabilities.assign(max_cardinality + 1, 0.0);
    double lost = 0.0;
    for (std::size_t i = 0; i < a.probabilities.size(); ++i) {
        if (a.probabilities[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.probabilities.size(); ++j) {
            const double v = a.probabilities[i] * b.probabilities[j];
            if (i + j <= max_cardinality) {
                out.probabilities[i + j] += v;
            } else {
                lost += v;
            }
        }
    }
    if (lost_mass) *lost_mass = lost;
    normalize(out.probabilities);
    return out;
}

CardinalityDistribution binomial_thin(const CardinalityDistribution& rho, double survival) {
    if (survival < 0.0 || survival > 1.0) throw ContractViolation("binomial_thin: survival outside [0,1]");
    const std::size_t nmax = rho.max_cardinality();
    if (survival == 1.0) return rho;
    if (survival == 0.0) return CardinalityDistribution::delta(0, nmax);

    const double ls = std::log(survival);
    const double lq = std::log1p(-survival);
    CardinalityDistribution out;
    out.probabilities.assign(nmax + 1, 0.0);
    for (std::size_t l = 0; l <= nmax; ++l) {
        const double p = rho.probabilities[l];
        if (p == 0.0) continue;
        for (std::size_t j = 0; j <= l; ++j) {
            const double lb = log_factorial(l) - log_factorial(j) - log_factorial(l - j) +
                              static_cast<double>(j) * ls + static_cast<double>(l - j) * lq;
            out.probabilities[j] += p * std::exp(lb);
        }
    }
    normalize(out.probabilities);
    return out;
}

CphdState CphdState::initial(const ClutterModel& clutter, const CphdOptions& options) {
    CphdState s;
    s.clutter = clutter;
    s.options = options;
    s.rho = CardinalityDistribution::uniform(options.max_cardinality);
    return s;
}

CphdState cphd_predict(const CphdState& state, const CphdBirth& birth, const MotionModel& motion,
                       double beta_inflation) {
    CphdState out;
    out.clutter = state.clutter;
    out.options = state.options;
    out.truncation_events = state.truncation_events;

    const double ps1 = motion.survival_probability();
    const double ps0 = state.clutter.survival_probability;

    const double n1 = state.nu1.total_weight();
    const double n0 = state.nu0.total_weight();

    out.nu1.components.reserve(state.nu1.components.size() + birth.intensity.components.size());
    for (const auto& c : state.nu1.components) {
        out.nu1.components.push_back({ps1 * c.weight, beta_predict(c.beta, beta_inflation), motion.predict(c.gaussian)});
    }
    for (const auto& c : birth.intensity.components) out.nu1.components.push_back(c);

    for (const auto& c : state.nu0.components) out.nu0.components.push_back({ps0 * c.weight, c.beta});
    if (state.clutter.birth_rate > 0.0) {
        out.nu0.components.push_back({state.clutter.birth_rate, state.clutter.birth_beta});
    }

    const std::size_t nmax = state.options.max_cardinality;
    const double phi = (n1 + n0) > 0.0 ? (ps1 * n1 + ps0 * n0) / (n1 + n0) : 1.0;
    const CardinalityDistribution clutter_birth = CardinalityDistribution::poisson(state.clutter.birth_rate, nmax);

    CardinalityDistribution object_birth = birth.cardinality;
    if (object_birth.probabilities.empty()) object_birth = CardinalityDistribution::delta(0, nmax);

    double lost_birth = 0.0;
    double lost_total = 0.0;
    const CardinalityDistribution joint_birth = convolve(object_birth, clutter_birth, nmax, &lost_birth);
    out.rho = convolve(binomial_thin(state.rho, std::clamp(phi, 0.0, 1.0)), joint_birth, nmax, &lost_total);
    if (lost_birth > 1e-12 || lost_total > 1e-12) ++out.truncation_events;
    return out;
}

CphdState cphd_update(const CphdState& state, const MeasurementSet& measurements, const SensorModel& sensor) {
    const std::size_t m = measurements.size();
    const std::size_t nmax = state.rho.max_cardinality();
    if (m > nmax) {
        throw ContractViolation("cphd_update: " + std::to_string(m) + " measurements exceed maximum cardinality " +
                                std::to_string(nmax));
    }

    const double n1 = state.nu1.total_weight();
    const double n0 = state.nu0.total_weight();
    const double total_mass = n1 + n0;
    if (!(total_mass > 0.0)) throw NumericalDegeneracy("cphd_update: zero total intensity mass");

    const double clutter_likelihood = sensor.clutter_density();

    double detected_mass = 0.0;
    std::vector<Innovation> innovations;
    innovations.reserve(state.nu1.components.size());
    for (const auto& c : state.nu1.components) {
        detected_mass += c.weight * c.beta.mean();
        innovations.push_back(sensor.innovation(c.gaussian));
    }
    double clutter_detected_mass = 0.0;
    for (const auto& c : state.nu0.components) clutter_detected_mass += c.weight * c.beta.mean();

    const double phi_big = std::max(0.0, 1.0 - (detected_mass + clutter_detected_mass) / total_mass);
    const double log_phi = safe_log(phi_big);

    // Cardinality terms.
    std::vector<double> log_rho(state.rho.probabilities.size());
    for (std::size_t n = 0; n < log_rho.size(); ++n) log_rho[n] = safe_log(state.rho.probabilities[n]);
    std::vector<double> gamma0_terms;
    const double log_g0 = log_gamma_inner(log_rho, m, 0, log_phi, &gamma0_terms);
    const double log_g1 = log_gamma_inner(log_rho, m, 1, log_phi);
    if (log_g0 == kNegInf) throw NumericalDegeneracy("cphd_update: cardinality has no mass at n >= |Z|");
    const double missed_factor = (log_g1 == kNegInf ? 0.0 : std::exp(log_g1 - log_g0)) / total_mass;

    // Per-(component, measurement) likelihoods and the shared denominators.
    const std::size_t nc = state.nu1.components.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> gated(nc);  // (measurement, likelihood)
    std::vector<VectorXd> residuals;
    std::vector<double> denom(m, clutter_detected_mass * clutter_likelihood);
    for (std::size_t i = 0; i < nc; ++i) {
        const auto& c = state.nu1.components[i];
        const double a = c.beta.mean();
        for (std::size_t j = 0; j < m; ++j) {
            const VectorXd r = sensor.residual(measurements[j], innovations[i].z_pred);
            const double d2 = innovations[i].mahalanobis2(r);
            if (d2 > state.options.gate_threshold) continue;
            const double q = std::exp(innovations[i].log_normalizer - 0.5 * d2);
            gated[i].emplace_back(j, q);
            denom[j] += c.weight * a * q;
        }
    }

    CphdState out;
    out.clutter = state.clutter;
    out.options = state.options;
    out.truncation_events = state.truncation_events;

    for (std::size_t i = 0; i < nc; ++i) {
        const auto& c = state.nu1.components[i];
        const double n_beta = c.beta.s + c.beta.t;
        const double miss_w = c.weight * (c.beta.t / n_beta) * missed_factor;
        if (miss_w > 0.0) out.nu1.components.push_back({miss_w, {c.beta.s, c.beta.t + 1.0}, c.gaussian});
        for (const auto& [j, q] : gated[i]) {
            if (!(denom[j] > 0.0)) continue;
            const double w = c.weight * (c.beta.s / n_beta) * q / denom[j];
            if (!(w > 0.0)) continue;
            const VectorXd r = sensor.residual(measurements[j], innovations[i].z_pred);
            out.nu1.components.push_back({w, {c.beta.s + 1.0, c.beta.t}, condition(c.gaussian, innovations[i], r)});
        }
    }

    double clutter_share = 0.0;  // sum_z g0(z) / denom(z)
    for (std::size_t j = 0; j < m; ++j) {
        if (denom[j] > 0.0) clutter_share += clutter_likelihood / denom[j];
    }
    for (const auto& c : state.nu0.components) {
        const double n_beta = c.beta.s + c.beta.t;
        const double miss_w = c.weight * (c.beta.t / n_beta) * missed_factor;
        if (miss_w > 0.0) out.nu0.components.push_back({miss_w, {c.beta.s, c.beta.t + 1.0}});
        const double det_w = c.weight * (c.beta.s / n_beta) * clutter_share;
        if (det_w > 0.0) out.nu0.components.push_back({det_w, {c.beta.s + 1.0, c.beta.t}});
    }

    out.rho.probabilities.assign(nmax + 1, 0.0);
    for (std::size_t n = m; n <= nmax; ++n) {
        if (gamma0_terms[n] != kNegInf) out.rho.probabilities[n] = std::exp(gamma0_terms[n] - log_g0);
    }
    normalize(out.rho.probabilities);
    return out;
}

CphdState cphd_reduce(const CphdState& state) {
    CphdState out;
    out.clutter = state.clutter;
    out.options = state.options;
    out.truncation_events = state.truncation_events;
    out.rho = state.rho;

    const ReductionConfig& cfg = state.options.reduction;

    // Object intensity: greedy Mahalanobis merge of the beta-Gaussian products.
    const auto& comps = state.nu1.components;
    const double original = state.nu1.total_weight();
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (comps[i].weight >= cfg.prune_threshold && comps[i].weight > 0.0) alive.push_back(i);
    }
    while (!alive.empty()) {
        const auto heaviest = *std::max_element(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
            return comps[a].weight < comps[b].weight;
        });
        const Gaussian& pivot = comps[heaviest].gaussian;
        const double pivot_pd = comps[heaviest].beta.mean();
        Eigen::LLT<MatrixXd> chol(pivot.cov);
        std::vector<std::size_t> group;
        std::vector<std::size_t> rest;
        for (std::size_t idx : alive) {
            const VectorXd d = comps[idx].gaussian.mean - pivot.mean;
            const double m2 = chol.info() == Eigen::Success ? chol.matrixL().solve(d).squaredNorm()
                                                             : std::numeric_limits<double>::infinity();
            const bool same_beta = std::abs(comps[idx].beta.mean() - pivot_pd) <= state.options.object_beta_merge_tolerance;
            (idx == heaviest || (m2 <= cfg.merge_threshold && same_beta) ? group : rest).push_back(idx);
        }
        double w = 0.0;
        VectorXd mean = VectorXd::Zero(pivot.dim());
        std::vector<double> ws;
        std::vector<BetaParams> bs;
        for (std::size_t idx : group) {
            w += comps[idx].weight;
            mean += comps[idx].weight * comps[idx].gaussian.mean;
            ws.push_back(comps[idx].weight);
            bs.push_back(comps[idx].beta);
        }
        mean /= w;
        MatrixXd cov = MatrixXd::Zero(pivot.dim(), pivot.dim());
        for (std::size_t idx : group) {
            const VectorXd d = comps[idx].gaussian.mean - mean;
            cov += comps[idx].weight * (comps[idx].gaussian.cov + d * d.transpose());
        }
        cov /= w;
        out.nu1.components.push_back({w, beta_merge(ws, bs), Gaussian(std::move(mean), std::move(cov))});
        alive = std::move(rest);
    }
    std::stable_sort(out.nu1.components.begin(), out.nu1.components.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });
    if (out.nu1.components.size() > cfg.max_components) out.nu1.components.resize(cfg.max_components);
    if (const double kept = out.nu1.total_weight(); kept > 0.0) {
        for (auto& c : out.nu1.components) c.weight *= original / kept;
    }

    // Clutter intensity: merge betas with nearly identical means.
    std::vector<WeightedBeta> clutter = state.nu0.components;
    std::sort(clutter.begin(), clutter.end(), [](const auto& a, const auto& b) { return a.beta.mean() < b.beta.mean(); });
    const double clutter_total = state.nu0.total_weight();
    std::size_t i = 0;
    while (i < clutter.size()) {
        std::size_t j = i + 1;
        while (j < clutter.size() &&
               clutter[j].beta.mean() - clutter[i].beta.mean() <= state.options.clutter_merge_tolerance) {
            ++j;
        }
        std::vector<double> ws;
        std::vector<BetaParams> bs;
        double w = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            ws.push_back(clutter[k].weight);
            bs.push_back(clutter[k].beta);
            w += clutter[k].weight;
        }
        if (w > 0.0) out.nu0.components.push_back({w, beta_merge(ws, bs)});
        i = j;
    }
    std::stable_sort(out.nu0.components.begin(), out.nu0.components.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });
    if (out.nu0.components.size() > state.options.max_clutter_components) {
        out.nu0.components.resize(state.options.max_clutter_components);
    }
    if (const double kept = out.nu0.total_weight(); kept > 0.0) {
        for (auto& c : out.nu0.components) c.weight *= clutter_total / kept;
    }
    return out;
}

double estimate_clutter_rate(const CphdState& state) {
    double rate = 0.0;
    for (const auto& c : state.nu0.components) rate += c.weight * c.beta.mean();
    return rate;
}

double estimate_mean_pd(const CphdState& state, double fallback) {
    const auto weighted_mean = [&](double min_weight) {
        double w = 0.0;
        double acc = 0.0;
        for (const auto& c : state.nu1.components) {
            if (c.weight < min_weight) continue;
            w += c.weight;
            acc += c.weight * c.beta.mean();
        }
        return w > 0.0 ? acc / w : -1.0;
    };
    if (const double objects = weighted_mean(state.options.object_extraction_weight); objects >= 0.0) return objects;
    if (const double all = weighted_mean(0.0); all >= 0.0) return all;
    return fallback;
}

}  // namespace dpglmb
