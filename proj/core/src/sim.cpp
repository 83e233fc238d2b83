#include "dpglmb/sim.hpp"

#include "dpglmb/errors.hpp"
#include "dpglmb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dpglmb {

namespace {

constexpr int kMaxDraws = 1000;

bool inside_with_margin(const SurveillanceRegion& region, const VectorXd& x, double margin, double min_range) {
    if (const auto* r = std::get_if<Rectangle>(&region)) {
        return x(0) >= r->x_min + margin && x(0) <= r->x_max - margin && x(1) >= r->y_min + margin &&
               x(1) <= r->y_max - margin;
    }
    const auto& d = std::get<HalfDisk>(region);
    const double range = std::hypot(x(0), x(1));
    return x(1) >= margin && range <= d.radius - margin && range >= min_range;
}

// Position sample inside the region (with margin) by rejection from the bounding box.
Eigen::Vector2d sample_position(const SurveillanceRegion& region, const ScenarioShape& shape, std::mt19937_64& rng) {
    if (const auto* r = std::get_if<Rectangle>(&region)) {
        std::uniform_real_distribution<double> ux(r->x_min + shape.margin, r->x_max - shape.margin);
        std::uniform_real_distribution<double> uy(r->y_min + shape.margin, r->y_max - shape.margin);
        return {ux(rng), uy(rng)};
    }
    const auto& d = std::get<HalfDisk>(region);
    std::uniform_real_distribution<double> ux(-d.radius, d.radius);
    std::uniform_real_distribution<double> uy(0.0, d.radius);
    VectorXd p(2);
    do {
        p << ux(rng), uy(rng);
    } while (!inside_with_margin(region, p, shape.margin, shape.min_range));
    return p;
}

// Mirrors a position back into the rectangle / half-disk, flipping the
// matching velocity components. Fallback for trajectories that rejection
// sampling could not keep inside.
void reflect(const SurveillanceRegion& region, VectorXd& x) {
    if (const auto* r = std::get_if<Rectangle>(&region)) {
        for (int k = 0; k < 2; ++k) {
            const double lo = k == 0 ? r->x_min : r->y_min;
            const double hi = k == 0 ? r->x_max : r->y_max;
            if (x(k) < lo) {
                x(k) = 2.0 * lo - x(k);
                x(k + 2) = -x(k + 2);
            } else if (x(k) > hi) {
                x(k) = 2.0 * hi - x(k);
                x(k + 2) = -x(k + 2);
            }
        }
        return;
    }
    const auto& d = std::get<HalfDisk>(region);
    if (x(1) < 0.0) {
        x(1) = -x(1);
        x(3) = -x(3);
    }
    const double range = std::hypot(x(0), x(1));
    if (range > d.radius) {
        const Eigen::Vector2d n = x.head<2>() / range;
        x.head<2>() *= (2.0 * d.radius - range) / range;
        const double vn = x.segment<2>(2).dot(n);
        x.segment<2>(2) -= 2.0 * vn * n;
    }
}

}  // namespace

VectorXd Scenario::state_at(std::size_t track, int time) const {
    const TruthTrack& t = tracks.at(track);
    if (time < t.birth || time >= t.death) throw ContractViolation("Scenario::state_at: track not alive at this step");
    VectorXd x = t.initial_state;
    for (int k = t.birth; k < time; ++k) {
        x = motion.propagate(x);
        if (!region_contains(sensor.region(), x(0), x(1))) reflect(sensor.region(), x);
    }
    return x;
}

std::vector<std::pair<Label, VectorXd>> Scenario::alive_at(int time) const {
    std::vector<std::pair<Label, VectorXd>> out;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (time >= tracks[i].birth && time < tracks[i].death) out.emplace_back(tracks[i].label, state_at(i, time));
    }
    return out;
}

std::size_t Scenario::cardinality_at(int time) const {
    std::size_t n = 0;
    for (const auto& t : tracks) n += (time >= t.birth && time < t.death) ? 1 : 0;
    return n;
}

Scenario generate_scenario(const ScenarioShape& shape, const MotionModel& motion, const SensorModel& sensor,
                           double true_detection_probability, double true_clutter_rate, std::uint64_t seed) {
    if (shape.num_tracks < 0 || shape.duration < 1) throw ContractViolation("generate_scenario: invalid shape");
    if (shape.min_lifetime < 1 || shape.max_lifetime < shape.min_lifetime) {
        throw ContractViolation("generate_scenario: invalid lifetime range");
    }
    if (motion.state_dim() != sensor.state_dim()) {
        throw ContractViolation("generate_scenario: motion and sensor state dimensions differ");
    }
    Scenario sc;
    sc.duration = shape.duration;
    sc.dt = motion.dt();
    sc.motion = motion;
    sc.sensor = sensor;
    sc.true_detection_probability = true_detection_probability;
    sc.true_clutter_rate = true_clutter_rate;

    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Scenario)}));
    std::uniform_int_distribution<int> jitter(0, std::max(0, shape.birth_jitter));
    std::uniform_int_distribution<int> lifetime(shape.min_lifetime, shape.max_lifetime);
    std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> speed(shape.min_speed, shape.max_speed);
    std::uniform_real_distribution<double> turn(-shape.max_turn_rate, shape.max_turn_rate);

    const bool turning = motion.kind() == MotionModel::Kind::ConstantTurn;
    for (int i = 0; i < shape.num_tracks; ++i) {
        TruthTrack t;
        t.birth = i < shape.initial_births ? 1 : 1 + shape.birth_spacing * (i - shape.initial_births + 1) + jitter(rng);
        t.birth = std::min(t.birth, shape.duration);
        t.death = std::min(shape.duration + 1, t.birth + lifetime(rng));
        t.label = Label{t.birth, i + 1};

        VectorXd x;
        for (int draw = 0; draw < kMaxDraws; ++draw) {
            x = VectorXd::Zero(motion.state_dim());
            x.head<2>() = sample_position(sensor.region(), shape, rng);
            const double h = heading(rng);
            const double v = speed(rng);
            x(2) = v * std::sin(h);
            x(3) = v * std::cos(h);
            if (turning) x(4) = turn(rng);

            bool ok = true;
            VectorXd y = x;
            for (int k = t.birth + 1; k < t.death && ok; ++k) {
                y = motion.propagate(y);
                ok = inside_with_margin(sensor.region(), y, 0.0, shape.min_range / 2.0);
            }
            if (ok) break;
        }
        t.initial_state = x;
        sc.tracks.push_back(std::move(t));
    }
    return sc;
}

Scenario generate_linear_scenario(std::uint64_t seed) {
    ScenarioShape shape;
    shape.num_tracks = 12;
    const MotionModel motion = MotionModel::constant_velocity(1.0, 5.0, 0.99);
    const SensorModel sensor = SensorModel::linear(4, 15.0, Rectangle{});
    return generate_scenario(shape, motion, sensor, 0.95, 50.0, seed);
}

Scenario generate_ct_scenario(std::uint64_t seed) {
    ScenarioShape shape;
    shape.num_tracks = 10;
    shape.birth_spacing = 10;
    shape.max_turn_rate = 6.0 * std::numbers::pi / 180.0;
    const MotionModel motion = MotionModel::constant_turn(1.0, 5.0, std::numbers::pi / 180.0, 0.99);
    const SensorModel sensor = SensorModel::bearing_range(5, std::numbers::pi / 180.0, 5.0, 2000.0);
    return generate_scenario(shape, motion, sensor, 0.95, 50.0, seed);
}

MeasurementFrame simulate_frame(const Scenario& scenario, int time, std::uint64_t seed) {
    if (time < 1 || time > scenario.duration) throw ContractViolation("simulate_frame: time outside [1, T]");
    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Frame), static_cast<std::uint64_t>(time)}));
    std::bernoulli_distribution detect(scenario.true_detection_probability);
    std::normal_distribution<double> normal(0.0, 1.0);

    MeasurementFrame frame;
    frame.time = time;
    const SensorModel& sensor = scenario.sensor;
    const Eigen::LLT<MatrixXd> noise_chol(sensor.noise());
    const MatrixXd L = noise_chol.matrixL();
    for (std::size_t i = 0; i < scenario.tracks.size(); ++i) {
        const TruthTrack& t = scenario.tracks[i];
        if (time < t.birth || time >= t.death) continue;
        if (!detect(rng)) continue;
        const Eigen::Vector2d e(normal(rng), normal(rng));
        Eigen::Vector2d z = sensor.measure(scenario.state_at(i, time)) + L * e;
        frame.measurements.push_back(sensor.clamp_to_measurement_space(z));
        frame.provenance.push_back(static_cast<int>(i));
    }

    std::poisson_distribution<int> clutter_count(scenario.true_clutter_rate);
    const int nc = scenario.true_clutter_rate > 0.0 ? clutter_count(rng) : 0;
    const Eigen::Vector2d lo = sensor.measurement_lower();
    const Eigen::Vector2d hi = sensor.measurement_upper();
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 0; k < nc; ++k) {
        const Eigen::Vector2d z(lo(0) + (hi(0) - lo(0)) * u01(rng), lo(1) + (hi(1) - lo(1)) * u01(rng));
        frame.measurements.push_back(z);
        frame.provenance.push_back(kClutterOrigin);
    }

    std::vector<std::size_t> order(frame.measurements.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    MeasurementFrame shuffled;
    shuffled.time = time;
    for (std::size_t k : order) {
        shuffled.measurements.push_back(frame.measurements[k]);
        shuffled.provenance.push_back(frame.provenance[k]);
    }
    return shuffled;
}

}  // namespace dpglmb
