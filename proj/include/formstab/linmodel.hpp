#pragma once

#include "formstab/lti.hpp"
#include "formstab/poly.hpp"

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>

namespace formstab {

/// State ordering (x, y, z, x', y', z', phi, theta, psi, p, q, r); z positive down.
namespace st {
inline constexpr int x = 0, y = 1, z = 2, vx = 3, vy = 4, vz = 5;
inline constexpr int phi = 6, theta = 7, psi = 8, p = 9, q = 10, r = 11;
inline constexpr int count = 12;
} // namespace st

/// Control ordering (thrust N, aileron, elevator, rudder rad).
namespace in {
inline constexpr int thrust = 0, aileron = 1, elevator = 2, rudder = 3;
inline constexpr int count = 4;
} // namespace in

inline constexpr std::array<int, 6> kLongitudinal{st::x, st::z, st::vx, st::vz, st::theta, st::q};
inline constexpr std::array<int, 6> kLateral{st::y, st::vy, st::phi, st::psi, st::p, st::r};

using Vec3 = Eigen::Vector3d;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec4 = Eigen::Vector4d;

struct AircraftParams {
    double mass = 0.0;
    double wingspan = 0.0;
    double mean_chord = 0.0;
    double cruise_speed = 0.0;
    double air_density = 0.0;
    double tail_span = 0.0;
    double vertical_tail_span = 0.0;
    double trimmed_thrust = 0.0;
    double zero_lift_drag = 0.0;
    double wake_circulation = 0.0;

    double aspect_ratio() const { return wingspan / mean_chord; }
    double wing_area() const { return wingspan * mean_chord; }
    /// Throws ConfigError unless every field is positive and the aspect ratio exceeds one.
    void validate() const;
};

/// Linear aircraft model x' = A x + B u + w with position/velocity/attitude selectors.
struct LtiModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd Cp;
    Eigen::MatrixXd Cv;
    Eigen::MatrixXd Calpha;

    int states() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    void validate() const;
};

/// Selectors for the standard 12-state ordering.
Eigen::MatrixXd position_selector();
Eigen::MatrixXd velocity_selector();
Eigen::MatrixXd attitude_selector();

struct BuiltinModel {
    LtiModel model;
    AircraftParams params;
};

BuiltinModel builtin_a320();

/// The reference 6x6 / 6x4 blocks in their own sub-ordering.
Eigen::MatrixXd a320_longitudinal_A();
Eigen::MatrixXd a320_lateral_A();
Eigen::MatrixXd a320_longitudinal_B();
Eigen::MatrixXd a320_lateral_B();

/// Sub-model on the given states (ordering preserved as passed).
LtiModel extract_block(const LtiModel& model, std::span<const int> states);

/// c_out^T (sI - A)^{-1} b_in for state output `output_index`.
RationalTF transfer_function(const LtiModel& model, int input_index, int output_index);

std::vector<cdouble> eigenvalues(const LtiModel& model);

} // namespace formstab
