#pragma once

#include "dpglmb/birth.hpp"
#include "dpglmb/gibbs.hpp"
#include "dpglmb/models.hpp"
#include "dpglmb/stats.hpp"
#include "dpglmb/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dpglmb {

/// One versioned track entry: a label together with the state density that
/// results from one particular association history.
struct Track {
    Label label;
    GaussianMixture density;
    /// Association used when this entry was created: kMiss or a measurement index.
    int association = kMiss;
};

/// (I, xi) component: indices into the density's track table, sorted by label.
struct GlmbHypothesis {
    std::vector<int> tracks;
    double log_weight = 0.0;
};

struct GlmbDensity {
    std::vector<Track> track_table;
    std::vector<GlmbHypothesis> hypotheses;
    int time = 0;

    /// The single empty hypothesis with weight one.
    static GlmbDensity empty_set(int time = 0);

    [[nodiscard]] double total_weight() const;
    [[nodiscard]] std::vector<Label> labels(const GlmbHypothesis& h) const;
    /// Probability of each cardinality 0..max hypothesis size.
    [[nodiscard]] std::vector<double> cardinality_distribution() const;
};

struct FilterParams {
    double detection_probability = 0.95;
    double clutter_rate = 50.0;
    double clutter_density = 0.0;  // 1/V
    std::size_t max_hypotheses = 1000;
    /// Total Gibbs sweeps per step, shared between prior hypotheses in
    /// proportion to sqrt(weight). Zero selects max(1000, 10 max_hypotheses).
    std::size_t gibbs_iterations = 0;
    double gate_threshold = 18.42;
    double hypothesis_prune = 1e-15;
    ReductionConfig track_reduction{1e-5, 4.0, 10};
};

/// Joint prediction and update with Gibbs-sampled truncation.
/// Hypotheses built from the same set of track entries are merged; at most
/// params.max_hypotheses survive pruning and the result is normalized.
GlmbDensity joint_predict_update(const GlmbDensity& prior, const MeasurementSet& measurements, const BirthModel& births,
                                 const MotionModel& motion, const SensorModel& sensor, const FilterParams& params,
                                 std::uint64_t seed);

struct TrackEstimate {
    Label label;
    VectorXd mean;
};

/// MAP cardinality, then the heaviest hypothesis of that size (ties go to the
/// smaller label sequence); one mixture mean per label.
std::vector<TrackEstimate> extract_estimate(const GlmbDensity& posterior);

/// r_U(z_j): total weight of hypotheses that assigned measurement j at the
/// latest update. Requires num_measurements to cover every stored association.
std::vector<double> association_probability(const GlmbDensity& posterior, std::size_t num_measurements);

}  // namespace dpglmb
