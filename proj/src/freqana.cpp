#include "formstab/freqana.hpp"

#include "formstab/errors.hpp"
#include "formstab/parallel.hpp"

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace formstab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhpTol = 1e-9;
} // namespace

FrequencyGrid FrequencyGrid::logspace(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("frequency grid needs 0 < lo < hi and n >= 2");
    FrequencyGrid g;
    g.omega.resize(static_cast<std::size_t>(n));
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < n; ++i) g.omega[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
    return g;
}

void FrequencyGrid::validate() const {
    if (omega.empty()) throw ConfigError("frequency grid is empty");
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!(omega[i] > 0.0)) throw ConfigError("frequency grid must be positive");
        if (i > 0 && !(omega[i] > omega[i - 1])) throw ConfigError("frequency grid must be strictly increasing");
    }
}

double max_singular_value(const StateSpace& sys, double omega) {
    const Eigen::MatrixXcd H = sys.response_at(omega);
    if (H.size() == 0) return 0.0;
    if (H.size() == 1) return std::abs(H(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H);
    return svd.singularValues()(0);
}

SvSweep sv_sweep(const StateSpace& sys, const FrequencyGrid& grid) {
    sys.validate();
    grid.validate();
    SvSweep out;
    out.omega = grid.omega;
    out.sigma_max.resize(grid.omega.size());
    parallel_for(grid.omega.size(), [&](std::size_t i) { out.sigma_max[i] = max_singular_value(sys, grid.omega[i]); });

    const auto it = std::max_element(out.sigma_max.begin(), out.sigma_max.end());
    const std::size_t k = static_cast<std::size_t>(it - out.sigma_max.begin());
    out.peak = *it;
    out.peak_omega = grid.omega[k];
    if (grid.omega.size() < 2) return out;

    // Golden-section search on log10(omega) inside the bracketing cells.
    double a = std::log10(grid.omega[k == 0 ? 0 : k - 1]);
    double b = std::log10(grid.omega[std::min(k + 1, grid.omega.size() - 1)]);
    const auto f = [&](double t) { return max_singular_value(sys, std::pow(10.0, t)); };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int iter = 0; iter < 80 && (b - a) > 1e-12; ++iter) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    const double t = fc > fd ? c : d;
    const double ft = std::max(fc, fd);
    if (ft > out.peak) {
        out.peak = ft;
        out.peak_omega = std::pow(10.0, t);
    }
    return out;
}

StateSpace complementary_sensitivity(const LtiModel& plant, const Controller& controller, double headway) {
    return closed_loop(plant, controller, headway, Realization::minimal);
}

StateSpace sensitivity(const StateSpace& T) {
    T.validate();
    if (T.inputs() != T.outputs()) throw StructuralError("sensitivity needs a square transfer matrix");
    StateSpace S = T;
    S.C = -T.C;
    S.D = Eigen::MatrixXd::Identity(T.outputs(), T.inputs()) - T.D;
    return S;
}

StateSpace open_loop(const LtiModel& plant, const Controller& controller, double headway) {
    plant.validate();
    if (plant.states() != 12) throw ConfigError("open loop expects the 12-state aircraft model");
    const LinearController lc = realize(controller);
    const int n = 12, q = lc.order();
    const Eigen::MatrixXd hv = headway * velocity_selector();
    StateSpace s;
    s.A = Eigen::MatrixXd::Zero(n + q, n + q);
    s.A.topLeftCorner(n, n) = plant.A - plant.B * lc.F0 - plant.B * lc.C0 * hv;
    s.A.topRightCorner(n, q) = plant.B * lc.M;
    s.A.bottomLeftCorner(q, n) = -lc.Nx - lc.Ne * hv;
    s.B = Eigen::MatrixXd::Zero(n + q, 3);
    s.B.topRows(n) = plant.B * lc.C0;
    s.B.bottomRows(q) = lc.Ne;
    s.C = Eigen::MatrixXd::Zero(3, n + q);
    s.C.leftCols(n) = position_selector();
    s.D = Eigen::MatrixXd::Zero(3, 3);
    return s;
}

RationalTF siso_channel(const StateSpace& sys, int input, int output) {
    sys.validate();
    if (input < 0 || input >= sys.inputs() || output < 0 || output >= sys.outputs())
        throw ConfigError("channel index out of range");
    if (sys.D(output, input) != 0.0) throw StructuralError("channel has direct feedthrough");
    return ss_to_tf(sys.A, sys.B.col(input), sys.C.row(output));
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::marginal: return "marginal";
    case Verdict::unstable: return "unstable";
    }
    return "unstable";
}

Verdict classify(bool cl_stable, double peak) {
    if (!cl_stable || !(peak <= 1.0 + kPeakTolerance)) return Verdict::unstable;
    if (peak <= 1.0 - kMarginalBand) return Verdict::stable;
    return Verdict::marginal;
}

StringStabilityReport string_stable(const LtiModel& plant, const Controller& controller, const FrequencyGrid& grid,
                                    double headway) {
    const StateSpace T = complementary_sensitivity(plant, controller, headway);
    StringStabilityReport r;
    r.spectral_abscissa = spectral_abscissa(T.A);
    r.closed_loop_stable = r.spectral_abscissa < 0.0;
    const SvSweep sw = sv_sweep(T, grid);
    r.peak = sw.peak;
    r.peak_omega = sw.peak_omega;
    r.omega = sw.omega;
    r.sigma_max = sw.sigma_max;
    r.diagonal.resize(grid.omega.size());
    parallel_for(grid.omega.size(), [&](std::size_t i) {
        const Eigen::MatrixXcd H = T.response_at(grid.omega[i]);
        r.diagonal[i] = {std::abs(H(0, 0)), std::abs(H(1, 1)), std::abs(H(2, 2))};
    });
    r.verdict = classify(r.closed_loop_stable, r.peak);
    return r;
}

namespace {

struct Factored {
    int origin_poles = 0;
    int origin_zeros = 0;
    std::vector<cdouble> poles;
    std::vector<cdouble> zeros;
};

Factored factor(const RationalTF& tf, double tol) {
    Factored f;
    for (const auto& p : tf.poles()) {
        if (std::abs(p) < tol) ++f.origin_poles;
        else f.poles.push_back(p);
    }
    if (!tf.is_zero()) {
        for (const auto& z : tf.zeros()) {
            if (std::abs(z) < tol) ++f.origin_zeros;
            else f.zeros.push_back(z);
        }
    }
    return f;
}

// |p(j w)|^2 as a polynomial in x = w^2, ascending coefficients.
std::vector<double> squared_magnitude(const Poly& desc) {
    const std::size_t n = desc.size();
    std::vector<double> re, im;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = desc[n - 1 - k];
        const std::size_t half = k / 2;
        const double sign = (half % 2 == 0) ? 1.0 : -1.0;
        auto& dst = (k % 2 == 0) ? re : im;
        if (dst.size() <= half) dst.resize(half + 1, 0.0);
        dst[half] += sign * c;
    }
    std::vector<double> out(std::max(2 * re.size(), 2 * im.size() + 1) + 1, 0.0);
    for (std::size_t i = 0; i < re.size(); ++i)
        for (std::size_t j = 0; j < re.size(); ++j) out[i + j] += re[i] * re[j];
    for (std::size_t i = 0; i < im.size(); ++i)
        for (std::size_t j = 0; j < im.size(); ++j) out[i + j + 1] += im[i] * im[j];
    while (out.size() > 1 && out.back() == 0.0) out.pop_back();
    return out;
}

double eval_ascending(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

// (p(x) - p(0)) / x
std::vector<double> drop_constant(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    return {c.begin() + 1, c.end()};
}

double root_scale_max(const RationalTF& tf) {
    double m = 1.0;
    for (const auto& r : tf.poles()) m = std::max(m, std::abs(r));
    if (!tf.is_zero())
        for (const auto& r : tf.zeros()) m = std::max(m, std::abs(r));
    return m;
}

double root_scale_min(const RationalTF& tf) {
    double m = 1.0;
    for (const auto& r : tf.poles())
        if (std::abs(r) > 0.0) m = std::min(m, std::abs(r));
    if (!tf.is_zero())
        for (const auto& r : tf.zeros())
            if (std::abs(r) > 0.0) m = std::min(m, std::abs(r));
    return m;
}

std::vector<double> breakpoints(const RationalTF& tf, double lo, double hi) {
    std::vector<double> t{std::log(lo), std::log(hi)};
    const auto add = [&](const std::vector<cdouble>& roots) {
        for (const auto& r : roots) {
            const double m = std::abs(r);
            if (m > lo && m < hi) t.push_back(std::log(m));
        }
    };
    add(tf.poles());
    if (!tf.is_zero()) add(tf.zeros());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }), t.end());
    return t;
}

template <class F>
double integrate_log(F&& g, const std::vector<double>& cuts) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    const auto h = [&](double t) {
        const double w = std::exp(t);
        return g(w) * w;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        // Subdivide long stretches so the adaptive rule sees the local structure.
        const double a = cuts[i], b = cuts[i + 1];
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 2.0)));
        for (int k = 0; k < pieces; ++k) {
            const double lo = a + (b - a) * k / pieces, hi = a + (b - a) * (k + 1) / pieces;
            total += gauss_kronrod<double, 31>::integrate(h, lo, hi, 15, 1e-13);
        }
    }
    return total;
}

void require_stable(const RationalTF& closed, const char* what) {
    for (const auto& p : closed.poles())
        if (!(p.real() < 0.0)) throw DomainError(std::string(what) + " is not stable");
}

void require_no_rhp_poles(const RationalTF& G) {
    for (const auto& p : G.poles())
        if (p.real() > kRhpTol) throw DomainError("open loop has a right half-plane pole");
}

} // namespace

int system_type(const RationalTF& tf, double origin_tol) {
    const auto f = factor(tf, origin_tol);
    return f.origin_poles - f.origin_zeros;
}

double velocity_error_constant(const RationalTF& tf, double origin_tol) {
    if (tf.is_zero()) return 0.0;
    const auto f = factor(tf, origin_tol);
    const int type = f.origin_poles - f.origin_zeros;
    if (type <= 0) return 0.0;
    if (type >= 2) return kInf;
    // Leading coefficient times the remaining factors evaluated at s = 0.
    cdouble k = tf.num().front() / tf.den().front();
    for (const auto& z : f.zeros) k *= -z;
    for (const auto& p : f.poles) k /= -p;
    return k.real();
}

std::vector<cdouble> rhp_zeros(const RationalTF& tf) {
    std::vector<cdouble> out;
    if (tf.is_zero()) return out;
    for (const auto& z : tf.zeros())
        if (z.real() > kRhpTol) out.push_back(z);
    return out;
}

BodeIntegral bode_T_integral(const RationalTF& T, const RationalTF& G, double origin_tol) {
    require_stable(T, "complementary sensitivity");
    require_no_rhp_poles(G);
    BodeIntegral out;
    const double Kv = velocity_error_constant(G, origin_tol);
    if (Kv == 0.0) {
        out.rhs_infinite = true;
        out.rhs = kInf;
        out.lhs = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.rhs = std::isinf(Kv) ? 0.0 : -std::numbers::pi / (2.0 * Kv);
    for (const auto& z : rhp_zeros(G)) out.rhs += std::numbers::pi * (1.0 / z).real();

    const auto A = squared_magnitude(T.num());
    const auto B = squared_magnitude(T.den());
    const double a0 = A.front(), b0 = B.front();
    if (!(std::abs(a0 / b0 - 1.0) < 1e-8)) throw DomainError("T(0) must equal one for a loop of type >= 1");
    const auto A1 = drop_constant(A), B1 = drop_constant(B);
    const auto g = [&](double w) {
        const double x = w * w;
        return 0.5 * (std::log1p(x * eval_ascending(A1, x) / a0) - std::log1p(x * eval_ascending(B1, x) / b0)) / x;
    };
    const double lo = 1e-8 * root_scale_min(T), hi = 1e8 * root_scale_max(T);
    double lhs = integrate_log(g, breakpoints(T, lo, hi));
    // Below lo the integrand is its constant limit.
    lhs += 0.5 * (A1.front() / a0 - B1.front() / b0) * lo;
    // Above hi, |T| ~ K w^-r.
    if (!T.is_zero()) {
        const double K = std::abs(T.num().front());
        const int r = T.relative_degree();
        lhs += std::log(K) / hi - r * (std::log(hi) + 1.0) / hi;
    }
    out.lhs = lhs;
    return out;
}

double bode_S_integral(const RationalTF& S) {
    if (S.num() == S.den()) return 0.0;
    require_stable(S, "sensitivity");
    // G = (1 - S) / S = (den - num) / num.
    const Poly gnum = trim_leading(poly_add(S.den(), poly_scale(S.num(), -1.0)));
    const RationalTF G(gnum, S.num());
    require_no_rhp_poles(G);
    if (G.relative_degree() < 2) throw DomainError("Bode sensitivity integral needs an open loop of relative degree >= 2");

    const auto A = squared_magnitude(S.num());
    const auto B = squared_magnitude(S.den());
    std::vector<double> C(std::max(A.size(), B.size()), 0.0);
    for (std::size_t i = 0; i < A.size(); ++i) C[i] += A[i];
    for (std::size_t i = 0; i < B.size(); ++i) C[i] -= B[i];
    const auto h = [&](double w) {
        const double x = w * w;
        return 0.5 * std::log1p(eval_ascending(C, x) / eval_ascending(B, x));
    };
    const double lo = 1e-10 * root_scale_min(S), hi = 1e7 * root_scale_max(S);
    double total = integrate_log(h, breakpoints(S, lo, hi));
    total += lo * h(lo);
    if (G.relative_degree() == 2) total += G.num().front() / hi;
    return total;
}

double steady_state_ramp_error(const RationalTF& G, double origin_tol) {
    require_stable(G.complementary(), "unity-feedback loop");
    const double Kv = velocity_error_constant(G, origin_tol);
    if (std::isinf(Kv)) return 0.0;
    if (Kv == 0.0) return kInf;
    return 1.0 / Kv;
}

} // namespace formstab
