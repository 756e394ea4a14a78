#pragma once

#include "formstab/linmodel.hpp"
#include "formstab/lti.hpp"

#include <Eigen/Dense>
#include <variant>

namespace formstab {

struct LqrWeights {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    /// Symmetry to 1e-12 and a successful Cholesky of R, else ConfigError.
    void validate(int n_states, int n_inputs) const;
};

enum class GainFlavor { plain, integral };

/// u = -K x (plain, 4x12) or u = -K [x; xi] (integral-augmented, 4x15).
struct StateFeedbackGain {
    Eigen::MatrixXd K;
    GainFlavor flavor = GainFlavor::plain;
};

/// u = K_v K_p int(e) + K_v K_d e - K_v int(v) - K_xv v - K_alpha alpha.
struct GainSet {
    Eigen::MatrixXd K_alpha; ///< 4x6 over (phi, theta, psi, p, q, r)
    Eigen::MatrixXd K_v;     ///< 4x3
    Eigen::MatrixXd K_p;     ///< 3x3
    Eigen::MatrixXd K_d;     ///< 3x3
    Eigen::MatrixXd K_xv;    ///< 4x3
    /// Column of the reference 4x7 attitude gain that has no matching state; kept for reference only.
    Eigen::VectorXd K_alpha_unused;

    void validate() const;
};

struct ControllerState {
    Vec3 int_e = Vec3::Zero();
    Vec3 int_v = Vec3::Zero();
};

using Controller = std::variant<StateFeedbackGain, GainSet>;

struct CareSolution {
    Eigen::MatrixXd P;
    double residual = 0.0; ///< Frobenius norm of the Riccati residual
};

/// A'P + PA - P B R^-1 B' P + Q = 0 via an ordered Schur form of the Hamiltonian,
/// polished by Newton-Kleinman steps. Throws SynthesisError when no stabilizing solution exists.
CareSolution solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                        const Eigen::MatrixXd& R);

/// K = R^-1 B' P; checks residual < 1e-8 ||P|| and a Hurwitz A - B K.
StateFeedbackGain lqr_synthesize(const LtiModel& model, const LqrWeights& weights);

/// Residual of the Riccati equation for a candidate P (Frobenius norm).
double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                     const Eigen::MatrixXd& R, const Eigen::MatrixXd& P);

/// 15-state model whose extra states integrate the own position (p_i relative to the leader).
LtiModel augment_integral(const LtiModel& model);

StateFeedbackGain preset_lqr();
StateFeedbackGain preset_lqr_integral();
GainSet preset_structured();
/// The reference 4x7 attitude gain as given.
Eigen::MatrixXd reference_K_alpha();

Vec4 structured_control(const GainSet& gains, const Vec3& e, const Vec3& v, const Eigen::Matrix<double, 6, 1>& alpha,
                        const ControllerState& cstate);

Vec3 apply_time_headway(const Vec3& delta_ref, double h, const Vec3& v);

/// Common form of every controller here:
///   u = C0 e - F0 x + M xi,   xi' = Ne e - Nx x,
/// with e the separation error and x the 12-state aircraft deviation.
struct LinearController {
    Eigen::MatrixXd C0; ///< m x 3
    Eigen::MatrixXd F0; ///< m x n
    Eigen::MatrixXd M;  ///< m x q
    Eigen::MatrixXd Ne; ///< q x 3
    Eigen::MatrixXd Nx; ///< q x n

    int order() const { return static_cast<int>(M.cols()); }
};

enum class Realization {
    minimal,  ///< one 3-state integrator K_p int(e) - int(v) for a GainSet
    explicit_ ///< separate int(e) and int(v) states
};

LinearController realize(const Controller& controller, Realization r = Realization::minimal);

/// Controller with identically zero output.
StateFeedbackGain zero_controller();

/// Follower closed loop from leader position deviation to own position deviation.
/// States are [x; xi]; e = p_{i-1} - p_i - h v_i.
StateSpace closed_loop(const LtiModel& model, const Controller& controller, double headway = 0.0,
                       Realization r = Realization::minimal);

} // namespace formstab
