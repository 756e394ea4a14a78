#pragma once

#include <complex>
#include <span>
#include <vector>

namespace formstab {

using cdouble = std::complex<double>;

/// Real polynomial, coefficients in descending powers of s.
using Poly = std::vector<double>;

cdouble polyval(const Poly& p, cdouble s);
double polyval(const Poly& p, double s);

/// Drops leading coefficients with |c| <= tol * max|c| (exact zeros when tol == 0).
Poly trim_leading(Poly p, double tol = 0.0);

/// Number of exactly-zero trailing coefficients, i.e. the multiplicity of the root s = 0.
int trailing_zeros(const Poly& p);

/// Roots from the eigenvalues of the companion matrix. Exact zero roots are
/// split off before the eigenvalue solve so they come back as exact zeros.
std::vector<cdouble> poly_roots(const Poly& p);

/// Monic real polynomial with the given roots (complex roots must come in conjugate pairs).
Poly poly_from_roots(std::span<const cdouble> roots);

Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(Poly a, double k);

/// SISO transfer function num(s)/den(s); den is monic and the ratio is proper.
class RationalTF {
public:
    RationalTF() : num_{0.0}, den_{1.0} {}
    /// Normalizes den to monic; throws DomainError if improper or den == 0.
    RationalTF(Poly num, Poly den);

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    cdouble operator()(cdouble s) const;

    int num_degree() const { return static_cast<int>(num_.size()) - 1; }
    int den_degree() const { return static_cast<int>(den_.size()) - 1; }
    int relative_degree() const { return den_degree() - num_degree(); }
    bool is_zero() const;

    RationalTF scaled(double k) const;

    /// Unity-feedback closures: G/(1+G) and 1/(1+G).
    RationalTF complementary() const;
    RationalTF sensitivity() const;

    std::vector<cdouble> zeros() const { return poly_roots(num_); }
    std::vector<cdouble> poles() const { return poly_roots(den_); }

private:
    Poly num_;
    Poly den_;
};

} // namespace formstab
