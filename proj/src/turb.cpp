#include "formstab/turb.hpp"

#include "formstab/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <random>

namespace formstab {

double von_karman_longitudinal(double Omega, double sigma, double L) {
    const double a = 1.339 * L * Omega;
    return sigma * sigma * (2.0 * L / std::numbers::pi) / std::pow(1.0 + a * a, 5.0 / 6.0);
}

double von_karman_transverse(double Omega, double sigma, double L) {
    const double a = 2.678 * L * Omega;
    return sigma * sigma * (2.0 * L / std::numbers::pi) * (1.0 + (8.0 / 3.0) * a * a) / std::pow(1.0 + a * a, 11.0 / 6.0);
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

std::vector<double> shaped_noise(std::size_t M, double dx, std::mt19937_64& rng, double (*spectrum)(double, double, double),
                                 double sigma, double L) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(M);
    for (auto& n : noise) n = normal(rng);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> X;
    fft.fwd(X, noise);
    const double dOmega = 2.0 * std::numbers::pi / (static_cast<double>(M) * dx);
    X[0] = 0.0;
    for (std::size_t k = 1; k < M; ++k) {
        const std::size_t kk = k <= M / 2 ? k : M - k;
        const double Omega = static_cast<double>(kk) * dOmega;
        X[k] *= std::sqrt(static_cast<double>(M) * spectrum(Omega, sigma, L) * dOmega / 2.0);
    }
    std::vector<double> out;
    fft.inv(out, X);
    return out;
}

} // namespace

TurbulenceField generate_turbulence(const TurbulenceSettings& s) {
    if (!(s.extent > 0.0) || !(s.spacing > 0.0) || !(s.length_scale > 0.0) || !(s.intensity >= 0.0) ||
        !(s.reference_speed > 0.0))
        throw DomainError("turbulence needs extent, spacing, length scale, speed > 0 and intensity >= 0");
    const double cells = std::ceil(s.extent / s.spacing);
    if (cells + 1.0 > static_cast<double>(s.max_samples))
        throw ResourceError("turbulence grid of " + std::to_string(cells + 1.0) + " samples exceeds the cap of " +
                            std::to_string(s.max_samples));
    const std::size_t N = static_cast<std::size_t>(cells) + 1;

    TurbulenceField f;
    f.settings_ = s;
    const double sigma = s.sigma();
    if (sigma == 0.0) {
        f.u_.assign(N, 0.0);
        f.v_.assign(N, 0.0);
        f.w_.assign(N, 0.0);
        return f;
    }
    const std::size_t M = next_pow2(std::max<std::size_t>(N, 2));
    std::mt19937_64 rng(s.seed);
    auto u = shaped_noise(M, s.spacing, rng, &von_karman_longitudinal, sigma, s.length_scale);
    auto v = shaped_noise(M, s.spacing, rng, &von_karman_transverse, sigma, s.length_scale);
    auto w = shaped_noise(M, s.spacing, rng, &von_karman_transverse, sigma, s.length_scale);
    u.resize(N);
    v.resize(N);
    w.resize(N);
    f.u_ = std::move(u);
    f.v_ = std::move(v);
    f.w_ = std::move(w);
    return f;
}

Vec3 TurbulenceField::sample(double x) const {
    if (u_.empty()) throw OutOfRangeError("turbulence field is empty");
    const double t = (x - settings_.origin) / settings_.spacing;
    const double last = static_cast<double>(u_.size() - 1);
    if (!(t >= 0.0) || !(t <= last))
        throw OutOfRangeError("x = " + std::to_string(x) + " m lies outside the turbulence field");
    auto i = static_cast<std::size_t>(std::floor(t));
    if (i >= u_.size() - 1) i = u_.size() >= 2 ? u_.size() - 2 : 0;
    const double a = u_.size() >= 2 ? t - static_cast<double>(i) : 0.0;
    const auto lerp = [&](const std::vector<double>& c) {
        if (a == 0.0) return c[i];
        if (a == 1.0) return c[i + 1];
        return (1.0 - a) * c[i] + a * c[i + 1];
    };
    return {lerp(u_), lerp(v_), lerp(w_)};
}

void TurbulenceField::write_csv(std::ostream& os) const {
    os << "x,u,v,w\n";
    os.precision(17);
    for (std::size_t i = 0; i < u_.size(); ++i) os << x_at(i) << ',' << u_[i] << ',' << v_[i] << ',' << w_[i] << '\n';
}

} // namespace formstab
