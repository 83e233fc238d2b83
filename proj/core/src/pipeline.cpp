#include "dpglmb/pipeline.hpp"

#include "dpglmb/errors.hpp"

#include <algorithm>

namespace dpglmb {

namespace {

constexpr double kMinDetection = 1e-3;
constexpr double kMaxDetection = 1.0 - 1e-3;
constexpr double kMinClutterRate = 1e-3;

ParameterEstimate clamp_parameters(ParameterEstimate p) {
    p.detection_probability = std::clamp(p.detection_probability, kMinDetection, kMaxDetection);
    p.clutter_rate = std::max(p.clutter_rate, kMinClutterRate);
    return p;
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(smoothing > 0.0 && smoothing <= 1.0)) throw ContractViolation("smoothing factor must lie in (0,1]");
    if (!(beta_inflation > 1.0)) throw ContractViolation("beta inflation must exceed 1");
    if (!(initial_beta.s > 0.0 && initial_beta.t > 0.0)) throw ContractViolation("initial beta must be positive");
    if (!(true_parameters.detection_probability > 0.0 && true_parameters.detection_probability < 1.0)) {
        throw ContractViolation("true detection probability must lie in (0,1)");
    }
    if (!(true_parameters.clutter_rate > 0.0)) throw ContractViolation("true clutter rate must be positive");
    if (glmb.max_hypotheses == 0) throw ContractViolation("max_hypotheses must be positive");
}

DpGlmbState initial_pipeline_state(const PipelineConfig& config) {
    config.validate();
    DpGlmbState s;
    s.glmb = GlmbDensity::empty_set(0);
    s.cphd = CphdState::initial(config.clutter, config.cphd);
    if (config.static_births) s.next_births = relabel_births(*config.static_births, 1);
    return s;
}

std::pair<DpGlmbState, EstimateRecord> dp_glmb_step(const DpGlmbState& state, const MeasurementSet& measurements,
                                                    const Models& models, const PipelineConfig& config,
                                                    std::uint64_t seed,
                                                    const std::optional<ParameterEstimate>& override_parameters) {
    DpGlmbState next;
    next.param_history = state.param_history;
    next.fallback_count = state.fallback_count;

    ParameterEstimate params;
    if (override_parameters) {
        params = clamp_parameters(*override_parameters);
        next.cphd = state.cphd;
    } else {
        ParameterEstimate previous = state.param_history.empty()
                                         ? ParameterEstimate{config.initial_beta.mean(), config.clutter.birth_rate}
                                         : state.param_history.back();
        try {
            const CphdBirth birth =
                birth_intensity_for_cphd(state.next_births, config.initial_beta, state.cphd.options.max_cardinality);
            const CphdState predicted = cphd_predict(state.cphd, birth, models.motion, config.beta_inflation);
            next.cphd = cphd_reduce(cphd_update(predicted, measurements, models.sensor));
            const ParameterEstimate raw{estimate_mean_pd(next.cphd, config.initial_beta.mean()),
                                        estimate_clutter_rate(next.cphd)};
            if (state.param_history.empty()) {
                params = raw;
            } else {
                const double a = config.smoothing;
                params = {a * raw.detection_probability + (1.0 - a) * previous.detection_probability,
                          a * raw.clutter_rate + (1.0 - a) * previous.clutter_rate};
            }
        } catch (const NumericalDegeneracy&) {
            next.cphd = state.cphd;
            ++next.fallback_count;
            params = previous;
        }
        params = clamp_parameters(params);
    }
    next.param_history.push_back(params);

    FilterParams fp = config.glmb;
    fp.detection_probability = params.detection_probability;
    fp.clutter_rate = params.clutter_rate;
    fp.clutter_density = models.sensor.clutter_density();
    next.glmb = joint_predict_update(state.glmb, measurements, state.next_births, models.motion, models.sensor, fp, seed);

    if (config.static_births) {
        next.next_births = relabel_births(*config.static_births, next.glmb.time + 1);
    } else {
        const std::vector<double> r_u = association_probability(next.glmb, measurements.size());
        next.next_births = make_births(measurements, r_u, config.birth, models.sensor, next.glmb.time + 1);
    }

    EstimateRecord record;
    record.time = next.glmb.time;
    record.tracks = extract_estimate(next.glmb);
    record.cardinality = record.tracks.size();
    record.detection_probability = params.detection_probability;
    record.clutter_rate = params.clutter_rate;
    return {std::move(next), std::move(record)};
}

std::pair<DpGlmbState, EstimateRecord> run_ideal_glmb_step(const DpGlmbState& state, const MeasurementSet& measurements,
                                                           const Models& models, const PipelineConfig& config,
                                                           std::uint64_t seed) {
    return dp_glmb_step(state, measurements, models, config, seed, config.true_parameters);
}

}  // namespace dpglmb
