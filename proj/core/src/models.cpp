#include "dpglmb/models.hpp"

#include "dpglmb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dpglmb {

namespace {

constexpr double kSmallTurnRate = 1e-6;

}  // namespace

CvMatrices cv_transition(double dt, double sigma_v) {
    if (dt < 0.0) throw ContractViolation("cv_transition: negative sampling interval");
    CvMatrices m;
    m.F = MatrixXd::Identity(4, 4);
    m.F(0, 2) = dt;
    m.F(1, 3) = dt;

    const double q = sigma_v * sigma_v;
    const double a = std::pow(dt, 4) / 4.0 * q;
    const double b = std::pow(dt, 3) / 2.0 * q;
    const double c = dt * dt * q;
    m.Q = MatrixXd::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
        m.Q(i, i) = a;
        m.Q(i, i + 2) = b;
        m.Q(i + 2, i) = b;
        m.Q(i + 2, i + 2) = c;
    }
    return m;
}

VectorXd ct_propagate(const VectorXd& x, double dt) {
    if (x.size() != 5) throw ContractViolation("ct_propagate: expected a 5-dimensional state");
    const double w = x(4);
    double sin_over_w;
    double one_minus_cos_over_w;
    if (std::abs(w) < kSmallTurnRate) {
        sin_over_w = dt - dt * dt * dt * w * w / 6.0;
        one_minus_cos_over_w = dt * dt * w / 2.0 - std::pow(dt, 4) * w * w * w / 24.0;
    } else {
        sin_over_w = std::sin(w * dt) / w;
        one_minus_cos_over_w = (1.0 - std::cos(w * dt)) / w;
    }
    const double c = std::cos(w * dt);
    const double s = std::sin(w * dt);

    VectorXd out(5);
    out(0) = x(0) + sin_over_w * x(2) - one_minus_cos_over_w * x(3);
    out(1) = x(1) + one_minus_cos_over_w * x(2) + sin_over_w * x(3);
    out(2) = c * x(2) - s * x(3);
    out(3) = s * x(2) + c * x(3);
    out(4) = w;
    return out;
}

MatrixXd ct_process_noise(double dt, double sigma_v, double sigma_omega) {
    MatrixXd G = MatrixXd::Zero(4, 2);
    G(0, 0) = dt * dt / 2.0;
    G(1, 1) = dt * dt / 2.0;
    G(2, 0) = dt;
    G(3, 1) = dt;
    MatrixXd Q = MatrixXd::Zero(5, 5);
    Q.topLeftCorner(4, 4) = sigma_v * sigma_v * G * G.transpose();
    Q(4, 4) = sigma_omega * sigma_omega * dt * dt;
    return Q;
}

CtPrediction ct_transition(const VectorXd& x, double dt, double sigma_v, double sigma_omega) {
    if (dt < 0.0) throw ContractViolation("ct_transition: negative sampling interval");
    return {ct_propagate(x, dt), ct_process_noise(dt, sigma_v, sigma_omega)};
}

MotionModel MotionModel::constant_velocity(double dt, double sigma_v, double survival_probability) {
    if (survival_probability < 0.0 || survival_probability > 1.0) {
        throw ContractViolation("survival probability must lie in [0,1]");
    }
    MotionModel m;
    m.kind_ = Kind::ConstantVelocity;
    m.dt_ = dt;
    m.sigma_v_ = sigma_v;
    m.p_s_ = survival_probability;
    auto mats = cv_transition(dt, sigma_v);
    m.F_ = std::move(mats.F);
    m.Q_ = std::move(mats.Q);
    return m;
}

MotionModel MotionModel::constant_turn(double dt, double sigma_v, double sigma_omega, double survival_probability,
                                       UnscentedParams ut) {
    if (survival_probability < 0.0 || survival_probability > 1.0) {
        throw ContractViolation("survival probability must lie in [0,1]");
    }
    MotionModel m;
    m.kind_ = Kind::ConstantTurn;
    m.dt_ = dt;
    m.sigma_v_ = sigma_v;
    m.sigma_omega_ = sigma_omega;
    m.p_s_ = survival_probability;
    m.ut_ = ut;
    m.Q_ = ct_process_noise(dt, sigma_v, sigma_omega);
    return m;
}

VectorXd MotionModel::propagate(const VectorXd& x) const {
    if (x.size() != state_dim()) throw ContractViolation("MotionModel::propagate: state dimension mismatch");
    if (kind_ == Kind::ConstantVelocity) return F_ * x;
    return ct_propagate(x, dt_);
}

Gaussian MotionModel::predict(const Gaussian& g) const {
    if (g.dim() != state_dim()) throw ContractViolation("MotionModel::predict: state dimension mismatch");
    if (kind_ == Kind::ConstantVelocity) return kalman_predict(g, F_, Q_);
    const double dt = dt_;
    return unscented_predict(g, [dt](const VectorXd& x) { return ct_propagate(x, dt); }, Q_, ut_);
}

bool region_contains(const SurveillanceRegion& region, double p_h, double p_v) {
    if (const auto* r = std::get_if<Rectangle>(&region)) {
        return p_h >= r->x_min && p_h <= r->x_max && p_v >= r->y_min && p_v <= r->y_max;
    }
    const auto& d = std::get<HalfDisk>(region);
    return p_v >= 0.0 && std::hypot(p_h, p_v) <= d.radius;
}

double region_area(const SurveillanceRegion& region) {
    if (const auto* r = std::get_if<Rectangle>(&region)) return (r->x_max - r->x_min) * (r->y_max - r->y_min);
    const auto& d = std::get<HalfDisk>(region);
    return std::numbers::pi * d.radius * d.radius / 2.0;
}

Eigen::Vector2d linear_sensor(const VectorXd& x) {
    if (x.size() < 2) throw ContractViolation("linear_sensor: state too short");
    return {x(0), x(1)};
}

Eigen::Vector2d bearing_range_sensor(const VectorXd& x) {
    if (x.size() < 2) throw ContractViolation("bearing_range_sensor: state too short");
    if (x(0) == 0.0 && x(1) == 0.0) throw NumericalDegeneracy("bearing_range_sensor: state at the sensor origin");
    return {std::atan2(x(0), x(1)), std::hypot(x(0), x(1))};
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

SensorModel SensorModel::linear(int state_dim, double sigma, Rectangle region, UnscentedParams ut) {
    if (state_dim < 2) throw ContractViolation("linear sensor needs at least two state coordinates");
    if (!(region.x_max > region.x_min && region.y_max > region.y_min)) {
        throw ContractViolation("linear sensor: empty surveillance rectangle");
    }
    SensorModel s;
    s.kind_ = Kind::Linear;
    s.state_dim_ = state_dim;
    s.H_ = MatrixXd::Zero(2, state_dim);
    s.H_(0, 0) = 1.0;
    s.H_(1, 1) = 1.0;
    s.R_ = sigma * sigma * MatrixXd::Identity(2, 2);
    s.region_ = region;
    s.z_lo_ = {region.x_min, region.y_min};
    s.z_hi_ = {region.x_max, region.y_max};
    s.ut_ = ut;
    return s;
}

SensorModel SensorModel::bearing_range(int state_dim, double sigma_theta, double sigma_r, double max_range,
                                       UnscentedParams ut) {
    if (state_dim < 2) throw ContractViolation("bearing-range sensor needs at least two state coordinates");
    if (!(max_range > 0.0)) throw ContractViolation("bearing-range sensor: max range must be positive");
    SensorModel s;
    s.kind_ = Kind::BearingRange;
    s.state_dim_ = state_dim;
    s.R_ = MatrixXd::Zero(2, 2);
    s.R_(0, 0) = sigma_theta * sigma_theta;
    s.R_(1, 1) = sigma_r * sigma_r;
    s.region_ = HalfDisk{max_range};
    s.z_lo_ = {-std::numbers::pi / 2.0, 0.0};
    s.z_hi_ = {std::numbers::pi / 2.0, max_range};
    s.ut_ = ut;
    return s;
}

Eigen::Vector2d SensorModel::measure(const VectorXd& x) const {
    if (x.size() != state_dim_) throw ContractViolation("SensorModel::measure: state dimension mismatch");
    return kind_ == Kind::Linear ? linear_sensor(x) : bearing_range_sensor(x);
}

Innovation SensorModel::innovation(const Gaussian& g) const {
    if (g.dim() != state_dim_) throw ContractViolation("SensorModel::innovation: state dimension mismatch");
    if (kind_ == Kind::Linear) return linear_innovation(g, H_, R_);
    return unscented_innovation(
        g, [](const VectorXd& x) -> VectorXd { return bearing_range_sensor(x); }, R_, ut_,
        [](const VectorXd& z, const VectorXd& zp) -> VectorXd {
            VectorXd r = z - zp;
            r(0) = wrap_angle(r(0));
            return r;
        });
}

VectorXd SensorModel::residual(const VectorXd& z, const VectorXd& z_pred) const {
    VectorXd r = z - z_pred;
    if (kind_ == Kind::BearingRange) r(0) = wrap_angle(r(0));
    return r;
}

Eigen::Vector2d SensorModel::inverse(const VectorXd& z) const {
    if (z.size() != 2) throw ContractViolation("SensorModel::inverse: expected a 2-vector measurement");
    if (kind_ == Kind::Linear) return {z(0), z(1)};
    return {z(1) * std::sin(z(0)), z(1) * std::cos(z(0))};
}

double SensorModel::measurement_volume() const { return (z_hi_ - z_lo_).prod(); }

bool SensorModel::in_measurement_space(const Eigen::Vector2d& z) const {
    return (z.array() >= z_lo_.array()).all() && (z.array() <= z_hi_.array()).all();
}

Eigen::Vector2d SensorModel::clamp_to_measurement_space(const Eigen::Vector2d& z) const {
    return z.cwiseMax(z_lo_).cwiseMin(z_hi_);
}

Eigen::Vector2d inverse_measurement(const VectorXd& z, const SensorModel& sensor) { return sensor.inverse(z); }

}  // namespace dpglmb
