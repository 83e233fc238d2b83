#include "dpglmb/errors.hpp"
#include "dpglmb/rng.hpp"
#include "dpglmb/sim.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

using namespace dpglmb;

namespace {

std::uint64_t frame_seed(int t) { return derive_seed(99, {static_cast<std::uint64_t>(t)}); }

void expect_inside(const Scenario& sc) {
    for (int t = 1; t <= sc.duration; ++t) {
        for (const auto& [label, x] : sc.alive_at(t)) {
            EXPECT_TRUE(region_contains(sc.sensor.region(), x(0), x(1))) << label << " at " << t;
        }
    }
}

}  // namespace

TEST(Scenario, LinearShape) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto sc = generate_linear_scenario(seed);
        EXPECT_EQ(sc.tracks.size(), 12u);
        EXPECT_EQ(sc.duration, 100);
        std::size_t peak = 0;
        for (int t = 1; t <= sc.duration; ++t) peak = std::max(peak, sc.cardinality_at(t));
        EXPECT_LE(peak, 12u);
        EXPECT_GT(sc.cardinality_at(1), 0u);
        expect_inside(sc);
    }
}

TEST(Scenario, ConstantTurnShape) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto sc = generate_ct_scenario(seed);
        EXPECT_EQ(sc.tracks.size(), 10u);
        std::size_t peak = 0;
        for (int t = 1; t <= sc.duration; ++t) peak = std::max(peak, sc.cardinality_at(t));
        EXPECT_LE(peak, 10u);
        EXPECT_EQ(sc.tracks.front().initial_state.size(), 5);
        expect_inside(sc);
    }
}

TEST(Scenario, DeterministicInSeed) {
    const auto a = generate_linear_scenario(42);
    const auto b = generate_linear_scenario(42);
    const auto c = generate_linear_scenario(43);
    ASSERT_EQ(a.tracks.size(), b.tracks.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.tracks.size(); ++i) {
        EXPECT_EQ(a.tracks[i].birth, b.tracks[i].birth);
        EXPECT_EQ(a.tracks[i].death, b.tracks[i].death);
        EXPECT_EQ(a.tracks[i].initial_state, b.tracks[i].initial_state);
        differs = differs || a.tracks[i].initial_state != c.tracks[i].initial_state;
    }
    EXPECT_TRUE(differs);
}

TEST(Scenario, StateAtFollowsMotionModel) {
    const auto sc = generate_linear_scenario(8);
    const auto& tr = sc.tracks.front();
    VectorXd x = tr.initial_state;
    for (int t = tr.birth; t < tr.death; ++t) {
        EXPECT_LT((sc.state_at(0, t) - x).norm(), 1e-9);
        x = sc.motion.propagate(x);
    }
    EXPECT_THROW((void)sc.state_at(0, tr.death), ContractViolation);
}

TEST(Frames, PerfectSensorWithoutClutter) {
    auto sc = generate_linear_scenario(4);
    sc.true_detection_probability = 1.0;
    sc.true_clutter_rate = 0.0;
    for (int t = 1; t <= sc.duration; ++t) {
        const auto f = simulate_frame(sc, t, frame_seed(t));
        EXPECT_EQ(f.measurements.size(), sc.cardinality_at(t));
        EXPECT_EQ(f.provenance.size(), f.measurements.size());
        for (int p : f.provenance) EXPECT_NE(p, kClutterOrigin);
    }
}

TEST(Frames, Deterministic) {
    const auto sc = generate_ct_scenario(5);
    const auto a = simulate_frame(sc, 17, 1234);
    const auto b = simulate_frame(sc, 17, 1234);
    ASSERT_EQ(a.measurements.size(), b.measurements.size());
    for (std::size_t i = 0; i < a.measurements.size(); ++i) EXPECT_EQ(a.measurements[i], b.measurements[i]);
    EXPECT_EQ(a.provenance, b.provenance);
}

TEST(Frames, ClutterAndDetectionRates) {
    const auto sc = generate_linear_scenario(6);
    double clutter = 0.0;
    double detections = 0.0;
    double opportunities = 0.0;
    int frames = 0;
    for (int rep = 0; rep < 10; ++rep) {
        for (int t = 1; t <= sc.duration; ++t) {
            const auto f = simulate_frame(sc, t, derive_seed(7, {static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(t)}));
            for (int p : f.provenance) (p == kClutterOrigin ? clutter : detections) += 1.0;
            opportunities += static_cast<double>(sc.cardinality_at(t));
            ++frames;
        }
    }
    EXPECT_NEAR(clutter / frames, 50.0, 0.7);
    EXPECT_NEAR(detections / opportunities, 0.95, 0.01);
}

TEST(Frames, ClutterIsUniformOnMeasurementSpace) {
    for (const auto& sc : {generate_linear_scenario(9), generate_ct_scenario(9)}) {
        const Eigen::Vector2d lo = sc.sensor.measurement_lower();
        const Eigen::Vector2d hi = sc.sensor.measurement_upper();
        std::array<double, 100> bins{};
        double n = 0.0;
        for (int f = 0; n < 1e5; ++f) {
            const auto frame = simulate_frame(sc, 1 + f % sc.duration, derive_seed(13, {static_cast<std::uint64_t>(f)}));
            for (std::size_t i = 0; i < frame.measurements.size(); ++i) {
                if (frame.provenance[i] != kClutterOrigin) continue;
                const auto& z = frame.measurements[i];
                ASSERT_TRUE(sc.sensor.in_measurement_space(z));
                const int bx = std::min(9, static_cast<int>(10.0 * (z(0) - lo(0)) / (hi(0) - lo(0))));
                const int by = std::min(9, static_cast<int>(10.0 * (z(1) - lo(1)) / (hi(1) - lo(1))));
                bins[static_cast<std::size_t>(10 * by + bx)] += 1.0;
                n += 1.0;
            }
        }
        double chi2 = 0.0;
        for (double c : bins) chi2 += (c - n / 100.0) * (c - n / 100.0) / (n / 100.0);
        // Upper 1% point of chi-square with 99 degrees of freedom.
        EXPECT_LT(chi2, 134.642);
    }
}

TEST(Frames, DetectionsStayInMeasurementSpace) {
    const auto sc = generate_ct_scenario(10);
    for (int t = 1; t <= sc.duration; ++t) {
        const auto f = simulate_frame(sc, t, frame_seed(t));
        for (const auto& z : f.measurements) EXPECT_TRUE(sc.sensor.in_measurement_space(z));
    }
}
