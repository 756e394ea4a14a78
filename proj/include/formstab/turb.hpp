#pragma once

#include "formstab/linmodel.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace formstab {

/// One-sided von Karman spatial spectra (m^2/s^2 per rad/m); sigma in m/s, Omega in rad/m.
double von_karman_longitudinal(double Omega, double sigma, double L);
double von_karman_transverse(double Omega, double sigma, double L);

struct TurbulenceSettings {
    double length_scale = 762.0;
    double intensity = 0.02;       ///< fraction of the reference speed
    double reference_speed = 230.0;
    double spacing = 2.3;          ///< grid spacing, m
    double extent = 0.0;           ///< covered length, m
    double origin = 0.0;           ///< x of the first grid node, m
    std::uint64_t seed = 0;
    std::size_t max_samples = std::size_t{1} << 24;

    double sigma() const { return intensity * reference_speed; }
};

/// Frozen one-dimensional gust field along x.
class TurbulenceField {
public:
    TurbulenceField() = default;

    const TurbulenceSettings& settings() const { return settings_; }
    std::size_t size() const { return u_.size(); }
    double x_at(std::size_t i) const { return settings_.origin + static_cast<double>(i) * settings_.spacing; }
    double x_end() const { return x_at(size() - 1); }

    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& v() const { return v_; }
    const std::vector<double>& w() const { return w_; }

    /// Linear interpolation; throws OutOfRangeError outside the grid.
    Vec3 sample(double x) const;

    void write_csv(std::ostream& os) const;

private:
    friend TurbulenceField generate_turbulence(const TurbulenceSettings&);
    TurbulenceSettings settings_;
    std::vector<double> u_, v_, w_;
};

/// Shapes seeded white noise in the frequency domain with the von Karman spectra.
/// Throws ResourceError when extent/spacing exceeds the sample cap.
TurbulenceField generate_turbulence(const TurbulenceSettings& settings);

} // namespace formstab
