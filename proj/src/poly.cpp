#include "formstab/poly.hpp"

#include "formstab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace formstab {

cdouble polyval(const Poly& p, cdouble s) {
    cdouble acc{0.0, 0.0};
    for (double c : p) acc = acc * s + c;
    return acc;
}

double polyval(const Poly& p, double s) {
    double acc = 0.0;
    for (double c : p) acc = acc * s + c;
    return acc;
}

Poly trim_leading(Poly p, double tol) {
    double scale = 0.0;
    for (double c : p) scale = std::max(scale, std::abs(c));
    std::size_t k = 0;
    while (k + 1 < p.size() && std::abs(p[k]) <= tol * scale) ++k;
    p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(k));
    if (p.empty()) p.push_back(0.0);
    return p;
}

int trailing_zeros(const Poly& p) {
    int k = 0;
    for (auto it = p.rbegin(); it != p.rend() && *it == 0.0; ++it) ++k;
    if (k == static_cast<int>(p.size())) return 0;
    return k;
}

std::vector<cdouble> poly_roots(const Poly& p_in) {
    Poly p = trim_leading(p_in);
    std::vector<cdouble> roots;
    if (p.size() <= 1) return roots;
    const int nz = trailing_zeros(p);
    for (int i = 0; i < nz; ++i) roots.emplace_back(0.0, 0.0);
    p.resize(p.size() - static_cast<std::size_t>(nz));
    const int n = static_cast<int>(p.size()) - 1;
    if (n == 0) return roots;
    if (n == 1) {
        roots.emplace_back(-p[1] / p[0], 0.0);
        return roots;
    }
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) comp(0, j) = -p[static_cast<std::size_t>(j + 1)] / p[0];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericalError("companion eigenvalue solve did not converge");
    for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
    return roots;
}

Poly poly_from_roots(std::span<const cdouble> roots) {
    std::vector<cdouble> c{cdouble{1.0, 0.0}};
    for (const cdouble& r : roots) {
        std::vector<cdouble> next(c.size() + 1, cdouble{0.0, 0.0});
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * r;
        }
        c = std::move(next);
    }
    Poly out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    const std::size_t oa = out.size() - a.size();
    const std::size_t ob = out.size() - b.size();
    for (std::size_t i = 0; i < a.size(); ++i) out[oa + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[ob + i] += b[i];
    return out;
}

Poly poly_scale(Poly a, double k) {
    for (double& c : a) c *= k;
    return a;
}

RationalTF::RationalTF(Poly num, Poly den) {
    den = trim_leading(std::move(den));
    num = trim_leading(std::move(num));
    if (den.size() == 1 && den[0] == 0.0) throw DomainError("transfer function denominator is zero");
    if (num.size() > den.size() && !(num.size() == 1 && num[0] == 0.0))
        throw DomainError("transfer function is improper");
    const double lead = den.front();
    num_ = poly_scale(std::move(num), 1.0 / lead);
    den_ = poly_scale(std::move(den), 1.0 / lead);
}

cdouble RationalTF::operator()(cdouble s) const { return polyval(num_, s) / polyval(den_, s); }

bool RationalTF::is_zero() const {
    return std::all_of(num_.begin(), num_.end(), [](double c) { return c == 0.0; });
}

RationalTF RationalTF::scaled(double k) const { return RationalTF(poly_scale(num_, k), den_); }

RationalTF RationalTF::complementary() const { return RationalTF(num_, poly_add(den_, num_)); }

RationalTF RationalTF::sensitivity() const { return RationalTF(den_, poly_add(den_, num_)); }

} // namespace formstab
