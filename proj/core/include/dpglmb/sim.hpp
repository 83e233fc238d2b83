#pragma once

#include "dpglmb/models.hpp"
#include "dpglmb/types.hpp"

#include <cstdint>
#include <vector>

namespace dpglmb {

struct TruthTrack {
    Label label;
    int birth = 1;  // first step alive
    int death = 2;  // first step no longer alive
    VectorXd initial_state;
};

struct Scenario {
    int duration = 100;
    double dt = 1.0;
    std::vector<TruthTrack> tracks;
    MotionModel motion;
    SensorModel sensor;
    double true_detection_probability = 0.95;
    double true_clutter_rate = 50.0;

    /// Noise-free state of track i at `time` (requires birth <= time < death).
    [[nodiscard]] VectorXd state_at(std::size_t track, int time) const;
    /// (label, state) of every track alive at `time`, in track order.
    [[nodiscard]] std::vector<std::pair<Label, VectorXd>> alive_at(int time) const;
    [[nodiscard]] std::size_t cardinality_at(int time) const;
};

/// Geometry knobs for random ground truth.
struct ScenarioShape {
    int num_tracks = 12;
    int duration = 100;
    int initial_births = 3;    // tracks alive from step 1
    int birth_spacing = 8;     // steps between later births
    int birth_jitter = 2;      // uniform extra delay 0..jitter
    int min_lifetime = 30;
    int max_lifetime = 70;
    double min_speed = 3.0;
    double max_speed = 15.0;
    double max_turn_rate = 0.0;  // rad/s, constant-turn only
    double margin = 50.0;        // keep trajectories this far inside the region
    double min_range = 200.0;    // half-disk only: stay this far from the sensor
};

/// Draws track schedules and initial states, retrying each track until its
/// whole noise-free trajectory stays inside the surveillance region. After
/// 1000 failed draws the trajectory is reflected into the region instead.
Scenario generate_scenario(const ScenarioShape& shape, const MotionModel& motion, const SensorModel& sensor,
                           double true_detection_probability, double true_clutter_rate, std::uint64_t seed);

/// 12 constant-velocity tracks on [-1000,1000]^2, p_D = 0.95, 50 clutter/scan.
Scenario generate_linear_scenario(std::uint64_t seed);
/// 10 constant-turn tracks on the radius-2000 half-disk observed in bearing and range.
Scenario generate_ct_scenario(std::uint64_t seed);

inline constexpr int kClutterOrigin = -1;

struct MeasurementFrame {
    int time = 0;
    MeasurementSet measurements;
    /// Index into Scenario::tracks, or kClutterOrigin. Never passed to filters.
    std::vector<int> provenance;
};

/// Bernoulli detections with Gaussian noise plus Poisson clutter uniform on
/// the measurement space, shuffled. Detections outside the measurement space
/// are clamped to its boundary.
MeasurementFrame simulate_frame(const Scenario& scenario, int time, std::uint64_t seed);

}  // namespace dpglmb
