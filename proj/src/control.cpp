#include "formstab/control.hpp"

#include "formstab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <sstream>

namespace formstab {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

void LqrWeights::validate(int n, int m) const {
    if (Q.rows() != n || Q.cols() != n) throw ConfigError("Q must be " + std::to_string(n) + "x" + std::to_string(n));
    if (R.rows() != m || R.cols() != m) throw ConfigError("R must be " + std::to_string(m) + "x" + std::to_string(m));
    const double qs = std::max(1.0, Q.cwiseAbs().maxCoeff());
    const double rs = std::max(1.0, R.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qs) throw ConfigError("Q is not symmetric");
    if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * rs) throw ConfigError("R is not symmetric");
    Eigen::LLT<MatrixXd> llt(R);
    if (llt.info() != Eigen::Success) throw ConfigError("R is not positive definite");
}

void GainSet::validate() const {
    const auto check = [](const MatrixXd& M, int r, int c, const char* name) {
        if (M.rows() != r || M.cols() != c)
            throw ConfigError(std::string(name) + " must be " + std::to_string(r) + "x" + std::to_string(c));
    };
    check(K_alpha, 4, 6, "K_alpha");
    check(K_v, 4, 3, "K_v");
    check(K_p, 3, 3, "K_p");
    check(K_d, 3, 3, "K_d");
    check(K_xv, 4, 3, "K_xv");
}

namespace {

using cd = std::complex<double>;

// LAPACK zlartg convention: [c s; -conj(s) c] [f; g] = [r; 0].
void givens(cd f, cd g, double& c, cd& s) {
    if (g == cd{}) {
        c = 1.0;
        s = 0.0;
    } else if (f == cd{}) {
        c = 0.0;
        s = std::conj(g) / std::abs(g);
    } else {
        const double fa = std::abs(f);
        const double d = std::hypot(fa, std::abs(g));
        c = fa / d;
        s = (f / fa) * std::conj(g) / d;
    }
}

// Swap diagonal entries k and k+1 of upper triangular T, updating Schur vectors U.
void swap_adjacent(MatrixXcd& T, MatrixXcd& U, int k) {
    const int n = static_cast<int>(T.rows());
    const cd t11 = T(k, k), t22 = T(k + 1, k + 1);
    double c;
    cd s;
    givens(T(k, k + 1), t22 - t11, c, s);
    for (int j = k + 2; j < n; ++j) {
        const cd x = T(k, j), y = T(k + 1, j);
        T(k, j) = c * x + s * y;
        T(k + 1, j) = -std::conj(s) * x + c * y;
    }
    const cd sc = std::conj(s);
    for (int i = 0; i < k; ++i) {
        const cd x = T(i, k), y = T(i, k + 1);
        T(i, k) = c * x + sc * y;
        T(i, k + 1) = -std::conj(sc) * x + c * y;
    }
    T(k, k) = t22;
    T(k + 1, k + 1) = t11;
    for (int i = 0; i < n; ++i) {
        const cd x = U(i, k), y = U(i, k + 1);
        U(i, k) = c * x + sc * y;
        U(i, k + 1) = -std::conj(sc) * x + c * y;
    }
}

// Solves A' X + X A + W = 0 through the Kronecker form (small n only).
MatrixXd lyapunov(const MatrixXd& A, const MatrixXd& W) {
    const int n = static_cast<int>(A.rows());
    const MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd K = MatrixXd::Zero(n * n, n * n);
    const MatrixXd At = A.transpose();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            K.block(i * n, j * n, n, n) += A(j, i) * I; // (A' kron I) acting on vec
            if (i == j) K.block(i * n, j * n, n, n) += At;
        }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(W.data(), n * n);
    Eigen::VectorXd x = K.partialPivLu().solve(rhs);
    MatrixXd X = Eigen::Map<MatrixXd>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

} // namespace

double care_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R, const MatrixXd& P) {
    const MatrixXd BtP = B.transpose() * P;
    return (A.transpose() * P + P * A - BtP.transpose() * R.ldlt().solve(BtP) + Q).norm();
}

CareSolution solve_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
        R.cols() != B.cols())
        throw ConfigError("CARE operands have inconsistent dimensions");
    const MatrixXd G = B * R.ldlt().solve(B.transpose());
    MatrixXd H(2 * n, 2 * n);
    H << A, -G, -Q, -A.transpose();

    Eigen::ComplexSchur<MatrixXcd> schur(H.cast<cd>());
    if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition of the Hamiltonian failed");
    MatrixXcd T = schur.matrixT();
    MatrixXcd U = schur.matrixU();

    int placed = 0;
    for (int i = 0; i < 2 * n; ++i) {
        if (T(i, i).real() < 0.0) {
            for (int k = i - 1; k >= placed; --k) swap_adjacent(T, U, k);
            ++placed;
        }
    }
    if (placed != n)
        throw SynthesisError("Hamiltonian has " + std::to_string(2 * n - placed - n) +
                             " eigenvalue(s) on the imaginary axis; no stabilizing Riccati solution");
    const MatrixXcd U11 = U.topLeftCorner(n, n);
    const MatrixXcd U21 = U.bottomLeftCorner(n, n);
    Eigen::PartialPivLU<MatrixXcd> lu(U11.transpose());
    MatrixXd P = lu.solve(U21.transpose()).transpose().real();
    P = 0.5 * (P + P.transpose());

    CareSolution sol{P, care_residual(A, B, Q, R, P)};
    // Newton-Kleinman polish from the Schur estimate.
    if (n <= 40) {
        for (int it = 0; it < 4 && sol.residual > 1e-13 * std::max(1.0, sol.P.norm()); ++it) {
            const MatrixXd K = R.ldlt().solve(B.transpose() * sol.P);
            const MatrixXd Ac = A - B * K;
            if (!is_hurwitz(Ac)) break;
            MatrixXd Pn = lyapunov(Ac, Q + K.transpose() * R * K);
            const double rn = care_residual(A, B, Q, R, Pn);
            if (!(rn < sol.residual)) break;
            sol = {Pn, rn};
        }
    }
    return sol;
}

StateFeedbackGain lqr_synthesize(const LtiModel& model, const LqrWeights& w) {
    model.validate();
    w.validate(model.states(), model.inputs());
    const auto sol = solve_care(model.A, model.B, w.Q, w.R);
    const double pn = std::max(sol.P.norm(), 1e-300);
    if (!(sol.residual < 1e-8 * pn)) {
        std::ostringstream os;
        os << "Riccati residual " << sol.residual << " exceeds 1e-8 * ||P|| = " << 1e-8 * pn;
        throw SynthesisError(os.str());
    }
    StateFeedbackGain g;
    g.K = w.R.ldlt().solve(model.B.transpose() * sol.P);
    g.flavor = model.states() == 15 ? GainFlavor::integral : GainFlavor::plain;
    const double abscissa = spectral_abscissa(model.A - model.B * g.K);
    if (!(abscissa < 0.0)) {
        std::ostringstream os;
        os << "LQR closed loop is not stable (spectral abscissa " << abscissa << "); is (A, B) stabilizable?";
        throw SynthesisError(os.str());
    }
    return g;
}

LtiModel augment_integral(const LtiModel& model) {
    if (model.states() != 12) throw ConfigError("integral augmentation expects the 12-state aircraft model");
    LtiModel out;
    out.A = MatrixXd::Zero(15, 15);
    out.A.topLeftCorner(12, 12) = model.A;
    out.A.block(12, 0, 3, 3) = Eigen::Matrix3d::Identity();
    out.B = MatrixXd::Zero(15, model.inputs());
    out.B.topRows(12) = model.B;
    out.Cp = MatrixXd::Zero(3, 15);
    out.Cp.leftCols(12) = position_selector();
    out.Cv = MatrixXd::Zero(3, 15);
    out.Cv.leftCols(12) = velocity_selector();
    out.Calpha = MatrixXd::Zero(6, 15);
    out.Calpha.leftCols(12) = attitude_selector();
    return out;
}

StateFeedbackGain preset_lqr() {
    MatrixXd K(4, 12);
    K << 2.23e4, -3.48e-8, -916, 5.93e4, 1.05e-8, -177, 8.25e-7, 5.54e4, 3.98e-6, 3.54e-7, 1.19e4, 3.05e-7,
        0, 7.75e-3, 0, 0, 4.25e-2, -3.91e-10, 0.751, 9.24e-8, 6.65, 0.828, 3.17e-9, -0.740,
        9.16e-4, 0, 4.45e-3, -7.74e-4, 0, 1.98e-2, 0, -4.70, 0, 0, -0.167, 0,
        0, 9.70e-3, -3.45e-10, 0, 6.63e-2, -1.07e-9, 0.192, 2.52e-7, 1.10, 2.52e-3, 7.24e-9, -4.96;
    return {K, GainFlavor::plain};
}

StateFeedbackGain preset_lqr_integral() {
    MatrixXd K(4, 15);
    K << 3.04e4, -6.24e-7, -3.27e3, 6.97e4, 3.27e-8, -3.83e3, 2.02e-6, 9.07e5, 8.93e-6, 1.49e-7, 2.59e4, 9.15e-7,
        3.14e3, -1.23e-7, -413,
        0, 3.46e-2, 5.65e-10, 0, 5.07e-2, 1.08e-9, 0.770, -2.53e-7, 6.77, 0.834, -4.71e-9, -1.04, 0, 1.05e-2, 0,
        2.50e-3, 0, 1.65e-2, -1.16e-3, 0, 4.44e-2, 0, -10.4, 0, 0, -0.283, 0, 1.85e-4, 0, 1.40e-3,
        0, 7.71e-2, -2.71e-10, 0, 8.63e-2, -5.19e-10, 0.231, 1.21e-7, 1.32, 1.13e-2, 2.28e-9, -5.70, 0, 3.14e-2, 0;
    return {K, GainFlavor::integral};
}

MatrixXd reference_K_alpha() {
    MatrixXd K(4, 7);
    K << -2.302e5, 9.372e-5, 5.411e7, 0.0007509, 4.229e-5, 9.616e5, -0.0007284,
        -9.863e-9, 0.5396, 2.309e-6, 4.472, 0.6881, 3.655e-8, 0.2467,
        0.09398, 0, -22.63, -3.302e-10, 0, -0.7453, 2.694e-10,
        -5.394e-8, 0.1307, 1.262e-5, 1.076, -0.01545, 1.878e-7, -3.75;
    return K;
}

GainSet preset_structured() {
    GainSet g;
    const MatrixXd Ka = reference_K_alpha();
    // The leading reference column repeats the z-velocity column of K_xv; the
    // remaining six line up with (phi, theta, psi, p, q, r).
    g.K_alpha = Ka.rightCols(6);
    g.K_alpha_unused = Ka.col(0);
    g.K_v.resize(4, 3);
    g.K_v << 84677.0, -6.893e-5, -1.239e5,
        -6.159e-10, 0.009398, -5.512e-9,
        0.005323, 0, 0.0291,
        -3.348e-9, 0.03092, -3.105e-8;
    g.K_p = Eigen::Vector3d(0.2421, 0.1559, 0.07919).asDiagonal();
    g.K_d = Eigen::Vector3d(0.1006, 0.01063, 0.1746).asDiagonal();
    g.K_xv.resize(4, 3);
    g.K_xv << 1.318e5, 1.606e-5, -2.302e5,
        1.067e-10, 0.01954, -9.863e-9,
        -0.001378, 0, 0.09398,
        5.834e-10, 0.03872, -5.394e-8;
    return g;
}

Vec4 structured_control(const GainSet& g, const Vec3& e, const Vec3& v, const Eigen::Matrix<double, 6, 1>& alpha,
                        const ControllerState& cs) {
    return g.K_v * (g.K_p * cs.int_e) + g.K_v * (g.K_d * e) - g.K_v * cs.int_v - g.K_xv * v - g.K_alpha * alpha;
}

Vec3 apply_time_headway(const Vec3& delta_ref, double h, const Vec3& v) {
    if (!(h >= 0.0)) throw DomainError("time headway must be non-negative");
    return delta_ref + h * v;
}

StateFeedbackGain zero_controller() { return {MatrixXd::Zero(4, 12), GainFlavor::plain}; }

LinearController realize(const Controller& controller, Realization r) {
    const MatrixXd Cv = velocity_selector(), Ca = attitude_selector();
    LinearController lc;
    if (const auto* sf = std::get_if<StateFeedbackGain>(&controller)) {
        const MatrixXd& K = sf->K;
        const bool integral = sf->flavor == GainFlavor::integral;
        if (K.cols() != (integral ? 15 : 12)) throw ConfigError("state-feedback gain has the wrong number of columns");
        const int m = static_cast<int>(K.rows());
        lc.C0 = K.leftCols(3);
        lc.F0 = K.leftCols(12);
        lc.F0.leftCols(3).setZero();
        if (integral) {
            // xi integrates p_i - p_{i-1} + delta = -e.
            lc.M = -K.rightCols(3);
            lc.Ne = -Eigen::Matrix3d::Identity();
            lc.Nx = MatrixXd::Zero(3, 12);
        } else {
            lc.M = MatrixXd::Zero(m, 0);
            lc.Ne = MatrixXd::Zero(0, 3);
            lc.Nx = MatrixXd::Zero(0, 12);
        }
        return lc;
    }
    const auto& g = std::get<GainSet>(controller);
    g.validate();
    lc.C0 = g.K_v * g.K_d;
    lc.F0 = g.K_xv * Cv + g.K_alpha * Ca;
    if (r == Realization::minimal) {
        lc.M = g.K_v;
        lc.Ne = g.K_p;
        lc.Nx = Cv;
    } else {
        lc.M.resize(4, 6);
        lc.M << g.K_v * g.K_p, -g.K_v;
        lc.Ne = MatrixXd::Zero(6, 3);
        lc.Ne.topRows(3) = Eigen::Matrix3d::Identity();
        lc.Nx = MatrixXd::Zero(6, 12);
        lc.Nx.bottomRows(3) = -Cv;
    }
    return lc;
}

StateSpace closed_loop(const LtiModel& model, const Controller& controller, double headway, Realization r) {
    model.validate();
    if (model.states() != 12) throw ConfigError("closed loop expects the 12-state aircraft model");
    if (!(headway >= 0.0)) throw DomainError("time headway must be non-negative");
    const LinearController lc = realize(controller, r);
    if (lc.C0.rows() != model.inputs()) throw ConfigError("controller output count does not match model inputs");
    const int n = 12, q = lc.order();
    const MatrixXd Cp = position_selector();
    const MatrixXd Ce = Cp + headway * velocity_selector();
    StateSpace s;
    s.A = MatrixXd::Zero(n + q, n + q);
    s.A.topLeftCorner(n, n) = model.A - model.B * lc.C0 * Ce - model.B * lc.F0;
    s.A.topRightCorner(n, q) = model.B * lc.M;
    s.A.bottomLeftCorner(q, n) = -lc.Ne * Ce - lc.Nx;
    s.B = MatrixXd::Zero(n + q, 3);
    s.B.topRows(n) = model.B * lc.C0;
    s.B.bottomRows(q) = lc.Ne;
    s.C = MatrixXd::Zero(3, n + q);
    s.C.leftCols(n) = Cp;
    s.D = MatrixXd::Zero(3, 3);
    return s;
}

} // namespace formstab
