#include "formstab/lti.hpp"

#include "formstab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace formstab {

void StateSpace::validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != C.rows() || D.cols() != B.cols())
        throw ConfigError("state-space blocks have inconsistent dimensions");
}

Eigen::MatrixXcd StateSpace::response(cdouble s) const {
    const auto n = A.rows();
    Eigen::MatrixXcd M = -A.cast<cdouble>();
    M.diagonal().array() += s;
    Eigen::MatrixXcd X = M.partialPivLu().solve(B.cast<cdouble>());
    if (n == 0) return D.cast<cdouble>();
    return C.cast<cdouble>() * X + D.cast<cdouble>();
}

std::vector<cdouble> sorted_eigenvalues(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw ConfigError("eigenvalues need a square matrix");
    std::vector<cdouble> out;
    if (A.rows() == 0) return out;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver did not converge");
    out.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](cdouble a, cdouble b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
    auto ev = sorted_eigenvalues(A);
    if (ev.empty()) return -std::numeric_limits<double>::infinity();
    return ev.front().real();
}

bool is_hurwitz(const Eigen::MatrixXd& A) { return spectral_abscissa(A) < 0.0; }

namespace {

std::vector<int> structural_core(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::RowVectorXd& c) {
    const int n = static_cast<int>(A.rows());
    std::vector<char> reach(n, 0), obs(n, 0);
    std::vector<int> stack;
    for (int i = 0; i < n; ++i)
        if (b(i) != 0.0) { reach[i] = 1; stack.push_back(i); }
    while (!stack.empty()) {
        int k = stack.back();
        stack.pop_back();
        for (int i = 0; i < n; ++i)
            if (!reach[i] && A(i, k) != 0.0) { reach[i] = 1; stack.push_back(i); }
    }
    for (int i = 0; i < n; ++i)
        if (c(i) != 0.0) { obs[i] = 1; stack.push_back(i); }
    while (!stack.empty()) {
        int k = stack.back();
        stack.pop_back();
        for (int j = 0; j < n; ++j)
            if (!obs[j] && A(k, j) != 0.0) { obs[j] = 1; stack.push_back(j); }
    }
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (reach[i] && obs[i]) keep.push_back(i);
    return keep;
}

// Eigenvalues with exact zeros for states whose row or column is structurally empty.
std::vector<cdouble> poles_with_exact_integrators(Eigen::MatrixXd A) {
    std::vector<cdouble> poles;
    bool again = true;
    while (again && A.rows() > 0) {
        again = false;
        for (int j = 0; j < A.cols(); ++j) {
            if (A.col(j).isZero(0.0) || A.row(j).isZero(0.0)) {
                poles.emplace_back(0.0, 0.0);
                const int n = static_cast<int>(A.rows());
                Eigen::MatrixXd R(n - 1, n - 1);
                for (int r = 0, rr = 0; r < n; ++r) {
                    if (r == j) continue;
                    for (int q = 0, qq = 0; q < n; ++q) {
                        if (q == j) continue;
                        R(rr, qq++) = A(r, q);
                    }
                    ++rr;
                }
                A = std::move(R);
                again = true;
                break;
            }
        }
    }
    auto rest = sorted_eigenvalues(A);
    poles.insert(poles.end(), rest.begin(), rest.end());
    return poles;
}

} // namespace

RationalTF ss_to_tf(const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b_in, const Eigen::RowVectorXd& c_in,
                    double cond_limit) {
    const auto keep = structural_core(A_in, b_in, c_in);
    const int n = static_cast<int>(keep.size());
    if (n == 0) return RationalTF(Poly{0.0}, Poly{1.0});
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    Eigen::RowVectorXd c(n);
    for (int i = 0; i < n; ++i) {
        b(i) = b_in(keep[i]);
        c(i) = c_in(keep[i]);
        for (int j = 0; j < n; ++j) A(i, j) = A_in(keep[i], keep[j]);
    }

    const auto poles = poles_with_exact_integrators(A);
    const Poly den = poly_from_roots(poles);

    // Relative degree from the first non-negligible Markov parameter.
    const double anorm = std::max(A.norm(), 1e-300);
    Eigen::VectorXd Akb = b;
    int rel = 0;
    double scale = c.norm() * b.norm();
    for (int k = 0; k < n; ++k) {
        const double mk = c.dot(Akb);
        if (std::abs(mk) > 1e-12 * scale) {
            rel = k + 1;
            break;
        }
        Akb = A * Akb;
        scale *= anorm;
    }
    if (rel == 0) return RationalTF(Poly{0.0}, den);
    const int m = n - rel;

    double rho = 0.0;
    for (const auto& p : poles) rho = std::max(rho, std::abs(p));
    if (rho <= 0.0) rho = 1.0;

    const int npts = 2 * (m + 1) + 2;
    Eigen::MatrixXd V(2 * npts, m + 1);
    Eigen::VectorXd rhs(2 * npts);
    StateSpace sys{A, b, c, Eigen::MatrixXd::Zero(1, 1)};
    for (int k = 0; k < npts; ++k) {
        const double x = std::cos(std::numbers::pi * (k + 0.5) / npts);
        const cdouble sigma{0.0, x};
        const cdouble s = rho * sigma;
        const cdouble value = sys.response(s)(0, 0) * polyval(den, s);
        cdouble pw{1.0, 0.0};
        for (int i = 0; i <= m; ++i) {
            V(2 * k, m - i) = pw.real();
            V(2 * k + 1, m - i) = pw.imag();
            pw *= sigma;
        }
        rhs(2 * k) = value.real();
        rhs(2 * k + 1) = value.imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond <= cond_limit)) throw ConversionError("transfer-function numerator fit is ill-conditioned", cond);
    Eigen::VectorXd a = svd.solve(rhs);

    Poly num(static_cast<std::size_t>(m + 1));
    for (int i = 0; i <= m; ++i) num[static_cast<std::size_t>(m - i)] = a(m - i) / std::pow(rho, i);
    return RationalTF(num, den);
}

} // namespace formstab
