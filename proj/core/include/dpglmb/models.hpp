#pragma once

#include "dpglmb/stats.hpp"

#include <Eigen/Dense>

#include <variant>

namespace dpglmb {

// State layouts:
//   constant velocity  x = [p_h, p_v, v_h, v_v]
//   constant turn      x = [p_h, p_v, v_h, v_v, omega]
// Positions always occupy the first two coordinates.

struct CvMatrices {
    MatrixXd F;
    MatrixXd Q;
};

/// Discrete white-noise-acceleration constant-velocity model.
CvMatrices cv_transition(double dt, double sigma_v);

struct CtPrediction {
    VectorXd mean;
    MatrixXd Q;
};

/// Coordinated turn evaluated at the state's own turn rate. Below 1e-6 rad/s
/// a second-order series replaces sin(w dt)/w and (1 - cos(w dt))/w.
CtPrediction ct_transition(const VectorXd& x, double dt, double sigma_v, double sigma_omega);

/// Noise-free part of ct_transition.
VectorXd ct_propagate(const VectorXd& x, double dt);

/// Additive noise of the turn model: sigma_v^2 G G^T on position/velocity and
/// sigma_omega^2 dt^2 on the turn rate.
MatrixXd ct_process_noise(double dt, double sigma_v, double sigma_omega);

class MotionModel {
public:
    enum class Kind { ConstantVelocity, ConstantTurn };

    static MotionModel constant_velocity(double dt, double sigma_v, double survival_probability);
    static MotionModel constant_turn(double dt, double sigma_v, double sigma_omega, double survival_probability,
                                     UnscentedParams ut = {});

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] int state_dim() const { return kind_ == Kind::ConstantVelocity ? 4 : 5; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] double sigma_v() const { return sigma_v_; }
    [[nodiscard]] double sigma_omega() const { return sigma_omega_; }
    [[nodiscard]] double survival_probability() const { return p_s_; }
    [[nodiscard]] const MatrixXd& process_noise() const { return Q_; }
    /// Exact transition matrix for the constant-velocity model (empty otherwise).
    [[nodiscard]] const MatrixXd& transition_matrix() const { return F_; }

    /// Noise-free one-step propagation of a state.
    [[nodiscard]] VectorXd propagate(const VectorXd& x) const;
    /// Kalman prediction (CV) or unscented prediction (CT).
    [[nodiscard]] Gaussian predict(const Gaussian& g) const;

private:
    Kind kind_ = Kind::ConstantVelocity;
    double dt_ = 1.0;
    double sigma_v_ = 0.0;
    double sigma_omega_ = 0.0;
    double p_s_ = 1.0;
    UnscentedParams ut_;
    MatrixXd F_;
    MatrixXd Q_;
};

struct Rectangle {
    double x_min = -1000.0;
    double x_max = 1000.0;
    double y_min = -1000.0;
    double y_max = 1000.0;
};

/// Upper half-disk {p_v >= 0, |p| <= radius} centred on the sensor.
struct HalfDisk {
    double radius = 2000.0;
};

using SurveillanceRegion = std::variant<Rectangle, HalfDisk>;

bool region_contains(const SurveillanceRegion& region, double p_h, double p_v);
double region_area(const SurveillanceRegion& region);

/// Noise-free measurement functions.
Eigen::Vector2d linear_sensor(const VectorXd& x);
/// [bearing, range] with bearing = atan2(p_h, p_v), i.e. measured from the
/// vertical axis. Throws NumericalDegeneracy at the origin.
Eigen::Vector2d bearing_range_sensor(const VectorXd& x);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

class SensorModel {
public:
    enum class Kind { Linear, BearingRange };

    static SensorModel linear(int state_dim, double sigma, Rectangle region, UnscentedParams ut = {});
    static SensorModel bearing_range(int state_dim, double sigma_theta, double sigma_r, double max_range,
                                     UnscentedParams ut = {});

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] int state_dim() const { return state_dim_; }
    [[nodiscard]] const MatrixXd& noise() const { return R_; }
    [[nodiscard]] const SurveillanceRegion& region() const { return region_; }

    [[nodiscard]] Eigen::Vector2d measure(const VectorXd& x) const;
    /// Predicted measurement moments: exact for the linear sensor, unscented otherwise.
    [[nodiscard]] Innovation innovation(const Gaussian& g) const;
    /// z - z_pred with the bearing component wrapped.
    [[nodiscard]] VectorXd residual(const VectorXd& z, const VectorXd& z_pred) const;
    /// Position implied by a noise-free measurement.
    [[nodiscard]] Eigen::Vector2d inverse(const VectorXd& z) const;

    /// Axis-aligned measurement space on which clutter is uniform:
    /// the rectangle itself, or [-pi/2, pi/2] x [0, R_max] for bearing-range.
    [[nodiscard]] const Eigen::Vector2d& measurement_lower() const { return z_lo_; }
    [[nodiscard]] const Eigen::Vector2d& measurement_upper() const { return z_hi_; }
    [[nodiscard]] double measurement_volume() const;
    [[nodiscard]] double clutter_density() const { return 1.0 / measurement_volume(); }
    [[nodiscard]] bool in_measurement_space(const Eigen::Vector2d& z) const;
    [[nodiscard]] Eigen::Vector2d clamp_to_measurement_space(const Eigen::Vector2d& z) const;

private:
    Kind kind_ = Kind::Linear;
    int state_dim_ = 4;
    MatrixXd H_;
    MatrixXd R_;
    SurveillanceRegion region_;
    Eigen::Vector2d z_lo_;
    Eigen::Vector2d z_hi_;
    UnscentedParams ut_;
};

Eigen::Vector2d inverse_measurement(const VectorXd& z, const SensorModel& sensor);

}  // namespace dpglmb
