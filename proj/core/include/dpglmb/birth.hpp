#pragma once

#include "dpglmb/models.hpp"
#include "dpglmb/rcphd.hpp"
#include "dpglmb/stats.hpp"
#include "dpglmb/types.hpp"

#include <vector>

namespace dpglmb {

struct BirthEntry {
    Label label;
    double existence = 0.0;  // r_B
    GaussianMixture density;
};

/// Labeled multi-Bernoulli birth set for one step.
struct BirthModel {
    std::vector<BirthEntry> entries;

    [[nodiscard]] bool empty() const { return entries.empty(); }
    [[nodiscard]] double total_existence() const;
};

struct BirthConfig {
    double max_existence = 0.01;   // r_B,max
    double expected_births = 0.1;  // lambda_B, births per step
    MatrixXd covariance;           // P_B over the full state
};

/// Measurement-driven birth: one candidate per previous measurement with
///   r_B(z) = min(r_B,max, lambda_B (1 - r_U(z)) / sum_z' (1 - r_U(z'))),
/// a single Gaussian at the back-projected position with zero velocity (and
/// turn rate), covariance P_B, and labels (next_time, 1..|Z|) in measurement
/// order. When every measurement is fully explained the existence
/// probabilities are all zero.
BirthModel make_births(const MeasurementSet& previous_measurements, const std::vector<double>& association_probability,
                       const BirthConfig& cfg, const SensorModel& sensor, int next_time);

/// Static LMB birth set (same components every step) relabelled for `time`.
BirthModel relabel_births(const BirthModel& templ, int time);

/// PHD of the birth LMB with every component tagged by `initial_beta`, and the
/// LMB cardinality (convolution of independent Bernoulli counts).
CphdBirth birth_intensity_for_cphd(const BirthModel& births, const BetaParams& initial_beta,
                                   std::size_t max_cardinality);

}  // namespace dpglmb
