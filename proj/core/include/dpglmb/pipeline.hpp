#pragma once

#include "dpglmb/birth.hpp"
#include "dpglmb/glmb.hpp"
#include "dpglmb/models.hpp"
#include "dpglmb/rcphd.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dpglmb {

struct Models {
    MotionModel motion;
    SensorModel sensor;
};

struct ParameterEstimate {
    double detection_probability = 0.0;
    double clutter_rate = 0.0;
};

struct PipelineConfig {
    /// GLMB settings; detection probability, clutter rate and clutter density
    /// are overwritten every step.
    FilterParams glmb;
    BirthConfig birth;
    BetaParams initial_beta{90.0, 10.0};
    double beta_inflation = 1.2;
    ClutterModel clutter;
    CphdOptions cphd;
    /// Weight of the newest raw estimate in the exponential smoothing of the
    /// bootstrapped parameters (1 disables smoothing).
    double smoothing = 0.9;
    /// Constant parameters of the ideal filter.
    ParameterEstimate true_parameters{0.95, 50.0};
    /// When set, this birth set (relabelled each step) replaces the
    /// measurement-driven birth model.
    std::optional<BirthModel> static_births;

    void validate() const;
};

struct DpGlmbState {
    GlmbDensity glmb;
    CphdState cphd;
    BirthModel next_births;
    /// Parameters supplied to the GLMB at each step so far.
    std::vector<ParameterEstimate> param_history;
    std::size_t fallback_count = 0;
};

struct EstimateRecord {
    int time = 0;
    std::vector<TrackEstimate> tracks;
    std::size_t cardinality = 0;
    double detection_probability = 0.0;
    double clutter_rate = 0.0;
};

/// Empty GLMB at time 0, CPHD with empty intensities and uniform cardinality,
/// and births from `config.static_births` (if any) for step 1.
DpGlmbState initial_pipeline_state(const PipelineConfig& config);

/// One bootstrapped step: CPHD predict/update/reduce, smoothed parameter
/// extraction, GLMB joint prediction-update, association probabilities,
/// births for the next step and the state estimate. A degenerate CPHD step
/// keeps the previous CPHD state and parameters and bumps fallback_count.
/// With `override_parameters` the CPHD is skipped and those values go
/// straight to the GLMB.
std::pair<DpGlmbState, EstimateRecord> dp_glmb_step(const DpGlmbState& state, const MeasurementSet& measurements,
                                                    const Models& models, const PipelineConfig& config,
                                                    std::uint64_t seed,
                                                    const std::optional<ParameterEstimate>& override_parameters = {});

/// GLMB step with the configured true parameters.
std::pair<DpGlmbState, EstimateRecord> run_ideal_glmb_step(const DpGlmbState& state, const MeasurementSet& measurements,
                                                           const Models& models, const PipelineConfig& config,
                                                           std::uint64_t seed);

}  // namespace dpglmb
