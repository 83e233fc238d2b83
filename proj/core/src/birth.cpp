#include "dpglmb/birth.hpp"

#include "dpglmb/errors.hpp"

#include <algorithm>

namespace dpglmb {

double BirthModel::total_existence() const {
    double r = 0.0;
    for (const auto& e : entries) r += e.existence;
    return r;
}

BirthModel make_births(const MeasurementSet& previous_measurements, const std::vector<double>& association_probability,
                       const BirthConfig& cfg, const SensorModel& sensor, int next_time) {
    if (association_probability.size() != previous_measurements.size()) {
        throw ContractViolation("make_births: one association probability per measurement is required");
    }
    const int n = sensor.state_dim();
    if (cfg.covariance.rows() != n || cfg.covariance.cols() != n) {
        throw ContractViolation("make_births: birth covariance does not match the state dimension");
    }
    if (cfg.max_existence < 0.0 || cfg.max_existence > 1.0 || cfg.expected_births < 0.0) {
        throw ContractViolation("make_births: invalid birth parameters");
    }

    double unexplained = 0.0;
    for (double r : association_probability) {
        if (r < -1e-9 || r > 1.0 + 1e-9) throw ContractViolation("make_births: association probability outside [0,1]");
        unexplained += 1.0 - std::clamp(r, 0.0, 1.0);
    }

    BirthModel births;
    births.entries.reserve(previous_measurements.size());
    for (std::size_t j = 0; j < previous_measurements.size(); ++j) {
        const double free_share = 1.0 - std::clamp(association_probability[j], 0.0, 1.0);
        double r = 0.0;
        if (unexplained > 0.0) r = std::min(cfg.max_existence, cfg.expected_births * free_share / unexplained);

        VectorXd mean = VectorXd::Zero(n);
        mean.head<2>() = sensor.inverse(previous_measurements[j]);
        births.entries.push_back({Label{next_time, static_cast<int>(j) + 1}, r,
                                  GaussianMixture::single(Gaussian(std::move(mean), cfg.covariance))});
    }
    return births;
}

BirthModel relabel_births(const BirthModel& templ, int time) {
    BirthModel out = templ;
    for (std::size_t i = 0; i < out.entries.size(); ++i) out.entries[i].label = Label{time, static_cast<int>(i) + 1};
    return out;
}

CphdBirth birth_intensity_for_cphd(const BirthModel& births, const BetaParams& initial_beta,
                                   std::size_t max_cardinality) {
    CphdBirth out;
    std::vector<double> existence;
    existence.reserve(births.entries.size());
    for (const auto& e : births.entries) {
        existence.push_back(e.existence);
        if (e.existence <= 0.0) continue;
        for (const auto& c : e.density.components) {
            out.intensity.components.push_back({e.existence * c.weight, initial_beta, c.gaussian});
        }
    }
    out.cardinality = CardinalityDistribution::bernoulli_sum(existence, max_cardinality);
    return out;
}

}  // namespace dpglmb
