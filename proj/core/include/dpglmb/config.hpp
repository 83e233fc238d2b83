#pragma once

#include "dpglmb/metrics.hpp"
#include "dpglmb/pipeline.hpp"
#include "dpglmb/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpglmb {

/// Malformed or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScenarioKind { Linear, ConstantTurn };
enum class FilterVariant { DpGlmb, IdealGlmb };

std::string to_string(ScenarioKind kind);
std::string to_string(FilterVariant variant);
FilterVariant parse_filter_variant(const std::string& text);

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Linear;
    std::uint64_t seed = 1;
    ScenarioShape shape;
    double dt = 1.0;
    double survival_probability = 0.99;
    double sigma_v = 5.0;
    double sigma_omega = 0.0;
    double detection_probability = 0.95;
    double clutter_rate = 50.0;
    // Linear sensor.
    double sigma_position = 15.0;
    Rectangle rectangle;
    // Bearing-range sensor.
    double sigma_bearing = 0.0;
    double sigma_range = 5.0;
    double max_range = 2000.0;
    /// Explicit ground truth; replaces random geometry when non-empty.
    std::vector<TruthTrack> tracks;
};

/// Everything needed to reproduce an experiment.
struct ExperimentConfig {
    ScenarioConfig scenario;
    PipelineConfig pipeline;
    /// Place a static birth at each truth track's initial state instead of
    /// using the measurement-driven model (applies to the ideal filter only).
    bool ideal_static_births = false;
    double ideal_static_existence = 0.03;
    MetricConfig metrics;
    FilterVariant variant = FilterVariant::DpGlmb;
    int runs = 25;
    std::uint64_t base_seed = 1000;
    int workers = 1;
    std::filesystem::path output_dir = "results";

    void validate() const;
    /// Flat key/value view, used for the reproducibility record.
    [[nodiscard]] std::map<std::string, std::string> echo() const;
};

/// Parses an INI file with sections [scenario], [filter], [birth], [clutter],
/// [metrics] and [experiment]. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

Models make_models(const ScenarioConfig& cfg);
/// Random geometry from the shape (or the explicit track list) with the
/// configured models and true parameters.
Scenario make_scenario(const ScenarioConfig& cfg);

}  // namespace dpglmb
