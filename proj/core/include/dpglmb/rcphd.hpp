#pragma once

#include "dpglmb/models.hpp"
#include "dpglmb/stats.hpp"
#include "dpglmb/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dpglmb {

/// Intensity over (kinematic state x detection probability) for actual objects.
/// Weights sum to the expected number of objects, not to one.
struct BetaGaussianMixture {
    std::vector<BetaGaussianComponent> components;

    [[nodiscard]] double total_weight() const;
};

struct WeightedBeta {
    double weight = 0.0;
    BetaParams beta;
};

/// Intensity over the detection probability of clutter generators. Their
/// spatial likelihood is uniform on the measurement space, so no kinematics.
struct BetaMixture {
    std::vector<WeightedBeta> components;

    [[nodiscard]] double total_weight() const;
};

/// Probability vector over the count n = 0..max_cardinality().
struct CardinalityDistribution {
    std::vector<double> probabilities;

    static CardinalityDistribution delta(std::size_t n, std::size_t max_cardinality);
    static CardinalityDistribution uniform(std::size_t max_cardinality);
    static CardinalityDistribution poisson(double mean, std::size_t max_cardinality);
    /// Count of independent Bernoulli(r_i) events.
    static CardinalityDistribution bernoulli_sum(std::span<const double> existence, std::size_t max_cardinality);

    [[nodiscard]] std::size_t max_cardinality() const { return probabilities.size() - 1; }
    [[nodiscard]] double sum() const;
    [[nodiscard]] double mean() const;
};

/// Convolution truncated at max_cardinality. `lost_mass`, if given, receives
/// the probability that fell beyond the support before renormalization.
CardinalityDistribution convolve(const CardinalityDistribution& a, const CardinalityDistribution& b,
                                 std::size_t max_cardinality, double* lost_mass = nullptr);

/// Independent thinning: each of the n objects survives with probability `survival`.
CardinalityDistribution binomial_thin(const CardinalityDistribution& rho, double survival);

/// Clutter-generator dynamics. The clutter birth cardinality is Poisson(birth_rate).
struct ClutterModel {
    double survival_probability = 0.9;
    double birth_rate = 5.0;
    BetaParams birth_beta{95.0, 5.0};
};

struct CphdOptions {
    std::size_t max_cardinality = 300;
    ReductionConfig reduction{1e-5, 4.0, 100};
    double gate_threshold = 18.42;  // Mahalanobis^2, chi^2(2) at 0.9999
    std::size_t max_clutter_components = 20;
    double clutter_merge_tolerance = 0.01;  // |difference of beta means|
    /// Object components merge only when their beta means also agree to
    /// within this tolerance, so missed and detected branches stay apart.
    double object_beta_merge_tolerance = 1e-3;
    /// Components at or above this weight count as estimated objects.
    double object_extraction_weight = 0.5;
};

struct CphdState {
    BetaGaussianMixture nu1;  // actual objects
    BetaMixture nu0;          // clutter generators
    CardinalityDistribution rho;  // hybrid count (objects + clutter generators)
    ClutterModel clutter;
    CphdOptions options;
    std::size_t truncation_events = 0;

    /// Empty intensities and a uniform hybrid cardinality prior.
    static CphdState initial(const ClutterModel& clutter, const CphdOptions& options = {});
};

/// Birth intensity and birth cardinality of actual objects for one step.
struct CphdBirth {
    BetaGaussianMixture intensity;
    CardinalityDistribution cardinality;
};

/// Survival-thinned, propagated intensities plus births; the hybrid cardinality
/// is binomially thinned by the mass-weighted survival fraction and convolved
/// with the joint (object x clutter) birth cardinality.
CphdState cphd_predict(const CphdState& state, const CphdBirth& birth, const MotionModel& motion,
                       double beta_inflation);

/// Measurement update on the hybrid space. Missed-detection branches move the
/// beta to (s, t+1), detected branches to (s+1, t). The result is not reduced;
/// see cphd_reduce.
CphdState cphd_update(const CphdState& state, const MeasurementSet& measurements, const SensorModel& sensor);

/// Mixture hygiene: prune, merge and cap both intensities, preserving mass.
CphdState cphd_reduce(const CphdState& state);

/// Expected clutter measurements per scan, <nu0, b> = sum w s/(s+t).
double estimate_clutter_rate(const CphdState& state);

/// Mean detection probability of the estimated actual objects: the
/// mass-weighted beta mean over components of weight at least
/// options.object_extraction_weight. Falls back to all components when none
/// qualifies, and to `fallback` when the object intensity is empty.
double estimate_mean_pd(const CphdState& state, double fallback);

}  // namespace dpglmb
