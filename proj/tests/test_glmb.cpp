#include "dpglmb/errors.hpp"
#include "dpglmb/glmb.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

using namespace dpglmb;

namespace {

const Rectangle kRegion{};
const double kVolume = 2000.0 * 2000.0;

Track make_track(Label label, const VectorXd& mean, double pos_var = 100.0, double vel_var = 10.0, int association = kMiss) {
    MatrixXd P = MatrixXd::Zero(4, 4);
    P.diagonal() << pos_var, pos_var, vel_var, vel_var;
    return Track{label, GaussianMixture::single(Gaussian(mean, P)), association};
}

VectorXd state(double x, double y, double vx = 0.0, double vy = 0.0) {
    VectorXd s(4);
    s << x, y, vx, vy;
    return s;
}

FilterParams params(double pd, double lambda = 50.0) {
    FilterParams p;
    p.detection_probability = pd;
    p.clutter_rate = lambda;
    p.clutter_density = 1.0 / kVolume;
    p.max_hypotheses = 1000;
    return p;
}

GlmbDensity single_track_prior(const Track& t) {
    GlmbDensity d;
    d.track_table = {t};
    d.hypotheses = {GlmbHypothesis{{0}, 0.0}};
    return d;
}

std::vector<double> weights(const GlmbDensity& d) {
    std::vector<double> w;
    for (const auto& h : d.hypotheses) w.push_back(std::exp(h.log_weight));
    return w;
}

/// Hypothesis identity: sorted (label, association) pairs.
using HypKey = std::vector<std::pair<Label, int>>;

std::map<HypKey, double> keyed(const GlmbDensity& d) {
    std::map<HypKey, double> out;
    for (const auto& h : d.hypotheses) {
        HypKey k;
        for (int idx : h.tracks) {
            const Track& t = d.track_table[static_cast<std::size_t>(idx)];
            k.emplace_back(t.label, t.association);
        }
        std::sort(k.begin(), k.end());
        out[k] += std::exp(h.log_weight);
    }
    return out;
}

}  // namespace

TEST(JointPredictUpdate, EmptyPriorNoBirthsStaysEmpty) {
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.99);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    const auto post = joint_predict_update(GlmbDensity::empty_set(0), {}, {}, motion, sensor, params(0.9), 1);
    ASSERT_EQ(post.hypotheses.size(), 1u);
    EXPECT_TRUE(post.hypotheses[0].tracks.empty());
    EXPECT_NEAR(post.total_weight(), 1.0, 1e-12);
    EXPECT_EQ(post.time, 1);
}

TEST(JointPredictUpdate, SurviveMissedVersusDie) {
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.99);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    const auto prior = single_track_prior(make_track({0, 1}, state(0, 0, 5, 0)));
    const auto post = joint_predict_update(prior, {}, {}, motion, sensor, params(0.9), 1);
    ASSERT_EQ(post.hypotheses.size(), 2u);
    const double survive = 0.99 * 0.1;
    const double die = 0.01;
    EXPECT_NEAR(std::exp(post.hypotheses[0].log_weight), survive / (survive + die), 1e-12);
    EXPECT_NEAR(std::exp(post.hypotheses[1].log_weight), die / (survive + die), 1e-12);
    EXPECT_NEAR(std::exp(post.hypotheses[0].log_weight), 0.908, 5e-4);
    EXPECT_EQ(post.hypotheses[0].tracks.size(), 1u);
    EXPECT_TRUE(post.hypotheses[1].tracks.empty());
    // The surviving track is the Kalman prediction.
    const Track& t = post.track_table[static_cast<std::size_t>(post.hypotheses[0].tracks[0])];
    EXPECT_TRUE(t.density.components[0].gaussian.mean.isApprox(state(5, 0, 5, 0), 1e-12));
}

TEST(JointPredictUpdate, SingleBirthNoMeasurements) {
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.99);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    BirthModel births;
    births.entries.push_back({{1, 1}, 0.01, GaussianMixture::single(Gaussian(state(0, 0), MatrixXd::Identity(4, 4)))});
    const auto post = joint_predict_update(GlmbDensity::empty_set(0), {}, births, motion, sensor, params(0.9), 1);
    ASSERT_EQ(post.hypotheses.size(), 2u);
    const double none = 0.99;
    const double born = 0.01 * 0.1;
    EXPECT_NEAR(std::exp(post.hypotheses[0].log_weight), none / (none + born), 1e-12);
    EXPECT_NEAR(std::exp(post.hypotheses[1].log_weight), born / (none + born), 1e-12);
    EXPECT_EQ(post.labels(post.hypotheses[1]), std::vector<Label>{(Label{1, 1})});
}

TEST(JointPredictUpdate, DetectionVersusMissCrossover) {
    // Zero process noise and no velocity uncertainty: S = (p + sigma^2) I.
    // The detection hypothesis outweighs the missed one exactly when
    // pD N(0; 0, S) / kappa > 1 - pD, i.e. when s < pD / (2 pi (1 - pD) kappa).
    const auto motion = MotionModel::constant_velocity(1.0, 0.0, 0.99);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    const double pd = 0.9;
    const double kappa = 50.0 / kVolume;
    const double s_star = pd / (2.0 * std::numbers::pi * (1.0 - pd) * kappa);
    auto p = params(pd);
    p.gate_threshold = 1e9;
    for (const double factor : {0.9, 0.999, 1.001, 1.1}) {
        const double pos_var = factor * s_star - 225.0;
        const auto prior = single_track_prior(make_track({0, 1}, state(10, 20), pos_var, 1e-300));
        const auto post = joint_predict_update(prior, {Eigen::Vector2d(10, 20)}, {}, motion, sensor, p, 3);
        const auto k = keyed(post);
        const double detected = k.at({{Label{0, 1}, 0}});
        const double missed = k.at({{Label{0, 1}, kMiss}});
        const double ratio = detected / missed;
        const double expected = pd / (2.0 * std::numbers::pi * factor * s_star) / kappa / (1.0 - pd);
        EXPECT_NEAR(ratio, expected, 1e-9 * expected);
        EXPECT_EQ(ratio > 1.0, factor < 1.0) << "factor " << factor;
    }
}

TEST(JointPredictUpdate, DuplicateHypothesesMerge) {
    // Prior {A}:0.5 and {A,B}:0.5 over the same entry for A. With no
    // measurements, "A missed" arises from both (B dying in the second).
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.9);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    GlmbDensity prior;
    prior.track_table = {make_track({0, 1}, state(0, 0)), make_track({0, 2}, state(500, 500))};
    prior.hypotheses = {GlmbHypothesis{{0}, std::log(0.5)}, GlmbHypothesis{{0, 1}, std::log(0.5)}};
    const double pd = 0.8;
    const auto post = joint_predict_update(prior, {}, {}, motion, sensor, params(pd), 5);
    const auto k = keyed(post);
    const double a_miss = 0.9 * (1 - pd);
    const double die = 0.1;
    std::map<HypKey, double> expected;
    expected[{{Label{0, 1}, kMiss}}] = 0.5 * a_miss + 0.5 * a_miss * die;
    expected[{}] = 0.5 * die + 0.5 * die * die;
    expected[{{Label{0, 2}, kMiss}}] = 0.5 * die * a_miss;
    expected[{{Label{0, 1}, kMiss}, {Label{0, 2}, kMiss}}] = 0.5 * a_miss * a_miss;
    double z = 0.0;
    for (const auto& [key, w] : expected) z += w;
    ASSERT_EQ(k.size(), expected.size());
    for (const auto& [key, w] : expected) EXPECT_NEAR(k.at(key), w / z, 1e-12);
    EXPECT_EQ(post.hypotheses.size(), 4u);
}

TEST(JointPredictUpdate, RejectsMislabelledBirths) {
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.99);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    BirthModel births;
    births.entries.push_back({{5, 1}, 0.01, GaussianMixture::single(Gaussian(state(0, 0), MatrixXd::Identity(4, 4)))});
    EXPECT_THROW(joint_predict_update(GlmbDensity::empty_set(0), {}, births, motion, sensor, params(0.9), 1),
                 ContractViolation);
    EXPECT_THROW(joint_predict_update(GlmbDensity::empty_set(0), {}, {}, motion, sensor, params(1.0), 1),
                 ContractViolation);
}

namespace {

struct RandomProblem {
    GlmbDensity prior;
    MeasurementSet z;
    BirthModel births;
};

RandomProblem random_problem(std::mt19937_64& rng, int tracks, int measurements, int births) {
    std::uniform_real_distribution<double> pos(-60.0, 60.0);
    RandomProblem p;
    for (int i = 0; i < tracks; ++i) p.prior.track_table.push_back(make_track({0, i + 1}, state(pos(rng), pos(rng))));
    GlmbHypothesis h;
    for (int i = 0; i < tracks; ++i) h.tracks.push_back(i);
    p.prior.hypotheses = {h};
    for (int j = 0; j < measurements; ++j) p.z.push_back(Eigen::Vector2d(pos(rng), pos(rng)));
    for (int b = 0; b < births; ++b) {
        p.births.entries.push_back(
            {{1, b + 1}, 0.05, GaussianMixture::single(Gaussian(state(pos(rng), pos(rng)), 400.0 * MatrixXd::Identity(4, 4)))});
    }
    return p;
}

}  // namespace

TEST(JointPredictUpdate, PosteriorInvariants) {
    std::mt19937_64 rng(17);
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.95);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    for (int trial = 0; trial < 20; ++trial) {
        auto prob = random_problem(rng, 3, 4, 2);
        GlmbDensity d = prob.prior;
        for (int step = 0; step < 3; ++step) {
            for (auto& e : prob.births.entries) e.label.birth_time = d.time + 1;
            d = joint_predict_update(d, prob.z, prob.births, motion, sensor, params(0.9, 5.0), 100 + step);
            EXPECT_NEAR(d.total_weight(), 1.0, 1e-9);
            for (const auto& h : d.hypotheses) {
                auto labels = d.labels(h);
                for (const auto& l : labels) EXPECT_LE(l.birth_time, d.time);
                std::sort(labels.begin(), labels.end());
                EXPECT_EQ(std::adjacent_find(labels.begin(), labels.end()), labels.end());
                for (int idx : h.tracks) {
                    EXPECT_NEAR(d.track_table[static_cast<std::size_t>(idx)].density.total_weight(), 1.0, 1e-9);
                }
            }
            const auto r_u = association_probability(d, prob.z.size());
            for (double r : r_u) {
                EXPECT_GE(r, 0.0);
                EXPECT_LE(r, 1.0 + 1e-12);
            }
        }
    }
}

TEST(JointPredictUpdate, TruncationErrorIsMonotone) {
    std::mt19937_64 rng(23);
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.95);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    for (int trial = 0; trial < 10; ++trial) {
        const auto prob = random_problem(rng, 2, 3, 1);
        auto full_params = params(0.9, 5.0);
        full_params.gate_threshold = 1e9;
        full_params.max_hypotheses = 100000;
        full_params.gibbs_iterations = 20000;
        full_params.hypothesis_prune = 0.0;
        const auto full = keyed(joint_predict_update(prob.prior, prob.z, prob.births, motion, sensor, full_params, 7));
        double previous = 2.0;
        for (std::size_t k = 1; k <= full.size(); ++k) {
            auto p = full_params;
            p.max_hypotheses = k;
            const auto trunc = keyed(joint_predict_update(prob.prior, prob.z, prob.births, motion, sensor, p, 7));
            double l1 = 0.0;
            for (const auto& [key, w] : full) {
                const auto it = trunc.find(key);
                l1 += std::abs(w - (it == trunc.end() ? 0.0 : it->second));
            }
            EXPECT_LE(l1, previous + 1e-12) << "max_hypotheses " << k;
            previous = l1;
        }
        EXPECT_LT(previous, 1e-9);
    }
}

TEST(JointPredictUpdate, DeterministicGivenSeed) {
    std::mt19937_64 rng(29);
    const auto motion = MotionModel::constant_velocity(1.0, 5.0, 0.95);
    const auto sensor = SensorModel::linear(4, 15.0, kRegion);
    const auto prob = random_problem(rng, 3, 4, 2);
    const auto a = joint_predict_update(prob.prior, prob.z, prob.births, motion, sensor, params(0.9), 5);
    const auto b = joint_predict_update(prob.prior, prob.z, prob.births, motion, sensor, params(0.9), 5);
    EXPECT_EQ(weights(a), weights(b));
}

TEST(ExtractEstimate, EmptyHypothesisGivesNothing) {
    EXPECT_TRUE(extract_estimate(GlmbDensity::empty_set(3)).empty());
}

TEST(ExtractEstimate, PicksMapCardinality) {
    GlmbDensity d;
    d.track_table = {make_track({1, 1}, state(1, 2))};
    d.hypotheses = {GlmbHypothesis{{}, std::log(0.3)}, GlmbHypothesis{{0}, std::log(0.7)}};
    const auto est = extract_estimate(d);
    ASSERT_EQ(est.size(), 1u);
    EXPECT_EQ(est[0].label, (Label{1, 1}));
    EXPECT_TRUE(est[0].mean.isApprox(state(1, 2)));
}

TEST(ExtractEstimate, CardinalityMassBeatsSingleHeaviest) {
    GlmbDensity d;
    d.track_table = {make_track({1, 1}, state(1, 2)), make_track({1, 2}, state(3, 4))};
    d.hypotheses = {GlmbHypothesis{{}, std::log(0.4)}, GlmbHypothesis{{1}, std::log(0.3)},
                    GlmbHypothesis{{0}, std::log(0.3)}};
    const auto est = extract_estimate(d);
    ASSERT_EQ(est.size(), 1u);
    EXPECT_EQ(est[0].label, (Label{1, 1}));
}

TEST(AssociationProbability, EmptyPosteriorIsZero) {
    const auto r = association_probability(GlmbDensity::empty_set(1), 3);
    EXPECT_EQ(r, std::vector<double>(3, 0.0));
}

TEST(AssociationProbability, SumsWeightsOfUsingHypotheses) {
    GlmbDensity d;
    d.track_table = {make_track({1, 1}, state(0, 0), 1.0, 1.0, 0), make_track({1, 1}, state(0, 0), 1.0, 1.0, kMiss)};
    d.hypotheses = {GlmbHypothesis{{0}, std::log(0.6)}, GlmbHypothesis{{1}, std::log(0.4)}};
    const auto r = association_probability(d, 2);
    EXPECT_NEAR(r[0], 0.6, 1e-15);
    EXPECT_EQ(r[1], 0.0);

    GlmbDensity single;
    single.track_table = {make_track({1, 1}, state(0, 0), 1.0, 1.0, 0)};
    single.hypotheses = {GlmbHypothesis{{0}, 0.0}};
    const auto s = association_probability(single, 2);
    EXPECT_DOUBLE_EQ(s[0], 1.0);
    EXPECT_DOUBLE_EQ(s[1], 0.0);
    EXPECT_THROW(association_probability(single, 0), ContractViolation);
}

TEST(AssociationProbability, IndependentOfHypothesisOrder) {
    GlmbDensity d;
    d.track_table = {make_track({1, 1}, state(0, 0), 1.0, 1.0, 0), make_track({1, 2}, state(0, 0), 1.0, 1.0, 1)};
    d.hypotheses = {GlmbHypothesis{{0}, std::log(0.2)}, GlmbHypothesis{{1}, std::log(0.5)},
                    GlmbHypothesis{{0, 1}, std::log(0.3)}};
    const auto a = association_probability(d, 2);
    std::reverse(d.hypotheses.begin(), d.hypotheses.end());
    const auto b = association_probability(d, 2);
    EXPECT_NEAR(a[0], b[0], 1e-15);
    EXPECT_NEAR(a[1], b[1], 1e-15);
    EXPECT_NEAR(a[0], 0.5, 1e-15);
    EXPECT_NEAR(a[1], 0.8, 1e-15);
}
