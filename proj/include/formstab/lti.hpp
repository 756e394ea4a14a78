#pragma once

#include "formstab/poly.hpp"

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace formstab {

/// Continuous-time state-space system x' = A x + B u, y = C x + D u.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;

    int states() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }

    /// Throws ConfigError when the four blocks do not conform.
    void validate() const;

    /// C (sI - A)^{-1} B + D.
    Eigen::MatrixXcd response(cdouble s) const;
    Eigen::MatrixXcd response_at(double omega) const { return response(cdouble{0.0, omega}); }
};

/// All eigenvalues of a square matrix, real part descending (ties broken by imaginary part).
std::vector<cdouble> sorted_eigenvalues(const Eigen::MatrixXd& A);

/// max Re(lambda); -inf for an empty matrix.
double spectral_abscissa(const Eigen::MatrixXd& A);

bool is_hurwitz(const Eigen::MatrixXd& A);

/// SISO transfer function of (A, b, c) with d = 0: poles from eigenvalues, numerator
/// least-squares fitted on Chebyshev-spaced imaginary-axis points. States that are
/// structurally unreachable from b or unobservable from c are removed first.
/// Throws ConversionError when the fit is too ill-conditioned.
RationalTF ss_to_tf(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::RowVectorXd& c,
                    double cond_limit = 1e10);

} // namespace formstab
