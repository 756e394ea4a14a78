#include "formstab/wake.hpp"

#include "formstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace formstab {

namespace {
constexpr double kGravity = 9.81;
constexpr int kDynamicRows[] = {st::vx, st::vy, st::vz, st::p, st::q, st::r};
} // namespace

HorseshoeVortex HorseshoeVortex::behind(const AircraftParams& generator, const Vec3& head) {
    HorseshoeVortex h;
    h.head = head;
    h.leg_spacing = generator.wingspan * std::numbers::pi / 4.0;
    h.circulation = generator.wake_circulation;
    h.core_radius = 0.05 * generator.wingspan;
    return h;
}

void HorseshoeVortex::validate() const {
    if (!(leg_spacing > 0.0) || !(core_radius >= 0.0)) throw ConfigError("horseshoe needs d > 0 and r_c >= 0");
}

simd::HorseshoeParams HorseshoeVortex::flat() const {
    return {head.x(), head.y(), head.z(), leg_spacing, circulation, core_radius};
}

Vec3 filament_velocity(const VortexFilament& f, const Vec3& p) {
    Vec3 out;
    simd::filament_scalar(f.p1.data(), f.p2.data(), f.circulation, f.core_radius, p.data(), out.data());
    return out;
}

Vec3 horseshoe_velocity(const HorseshoeVortex& h, const Vec3& p) {
    const auto params = h.flat();
    Vec3 v;
    simd::horseshoe_batch_scalar(params, &p.x(), &p.y(), &p.z(), &v.x(), &v.y(), &v.z(), 1);
    return v;
}

void horseshoe_velocity_batch(const HorseshoeVortex& h, std::span<const double> x, std::span<const double> y,
                              std::span<const double> z, std::span<double> vx, std::span<double> vy,
                              std::span<double> vz) {
    const std::size_t n = x.size();
    if (y.size() != n || z.size() != n || vx.size() != n || vy.size() != n || vz.size() != n)
        throw ConfigError("batch spans differ in length");
    simd::horseshoe_batch()(h.flat(), x.data(), y.data(), z.data(), vx.data(), vy.data(), vz.data(), n);
}

Vec3 optimal_offset(const AircraftParams& params) {
    const double b = params.wingspan;
    return {10.0 * b, b * (1.0 + std::numbers::pi / 4.0) / 2.0, 0.0};
}

double wake_delay(double streamwise_separation, double speed) {
    if (!(speed > 0.0)) throw DomainError("wake delay needs a positive speed");
    return streamwise_separation / speed;
}

double span_averaged_upwash(const HorseshoeVortex& h, const Vec3& wing_center, double span, int n_stations) {
    if (n_stations < 2) throw DomainError("span average needs at least two stations");
    std::vector<double> x(n_stations, wing_center.x()), y(n_stations), z(n_stations, wing_center.z());
    for (int k = 0; k < n_stations; ++k) y[k] = wing_center.y() - span / 2.0 + span * k / (n_stations - 1);
    std::vector<double> vx(n_stations), vy(n_stations), vz(n_stations);
    horseshoe_velocity_batch(h, x, y, z, vx, vy, vz);
    double sum = 0.0;
    for (double v : vz) sum += v;
    return -sum / n_stations;
}

double drag_coefficient(double CL, double CD0, double aspect_ratio, double upwash, double speed) {
    if (!(speed > 0.0) || !(aspect_ratio > 0.0)) throw DomainError("drag coefficient needs U > 0 and AR > 0");
    return CD0 + CL * CL / (std::numbers::pi * aspect_ratio) - CL * upwash / speed;
}

double trim_lift_coefficient(const AircraftParams& p) {
    return 2.0 * p.mass * kGravity / (p.air_density * p.cruise_speed * p.cruise_speed * p.wing_area());
}

std::vector<GustSample> surface_stations(const GustGeometry& g, int n_wing) {
    if (n_wing < 3 || n_wing % 2 == 0) throw ConfigError("wing station count must be odd and at least three");
    std::vector<GustSample> out;
    const int mid = (n_wing - 1) / 2;
    for (int k = 0; k < n_wing; ++k) {
        GustSample s;
        s.kind = StationKind::wing;
        s.position = {0.0, -g.span / 2.0 + g.span * k / (n_wing - 1), 0.0};
        if (k == 0)
            s.station = "left_tip";
        else if (k == n_wing - 1)
            s.station = "right_tip";
        else
            s.station = "wing_" + std::to_string(k);
        if (k == mid) s.station = "center";
        out.push_back(std::move(s));
    }
    GustSample t;
    t.station = "tail";
    t.kind = StationKind::tail;
    t.position = {-g.tail_arm, 0.0, 0.0};
    out.push_back(t);
    return out;
}

Eigen::Matrix<double, 12, 3> disturbance_velocity_map(const LtiModel& model) {
    if (model.states() != 12) throw ConfigError("disturbance map expects the 12-state aircraft model");
    Eigen::Matrix<double, 12, 3> M = Eigen::Matrix<double, 12, 3>::Zero();
    for (int r : kDynamicRows) M.row(r) = model.A.block(r, st::vx, 1, 3);
    return M;
}

Eigen::Matrix<double, 12, 3> disturbance_rate_map(const LtiModel& model, double cruise_speed) {
    if (model.states() != 12) throw ConfigError("disturbance map expects the 12-state aircraft model");
    if (!(cruise_speed >= 0.0)) throw ConfigError("cruise speed must be non-negative");
    Eigen::Matrix<double, 12, 3> M = Eigen::Matrix<double, 12, 3>::Zero();
    for (int r : kDynamicRows) M.row(r) = model.A.block(r, st::p, 1, 3);
    // z'' = ... + (U + Z_q) q and y'' = ... + (Y_r - U) r: only Z_q, Y_r see the air's rotation
    M(st::vz, 1) -= cruise_speed;
    M(st::vy, 2) += cruise_speed;
    return M;
}

GustMap::GustMap(const LtiModel& model, std::span<const GustSample> stations, const GustGeometry& g)
    : vel_map_(disturbance_velocity_map(model)), rate_map_(disturbance_rate_map(model, g.cruise_speed)), tail_arm_(g.tail_arm) {
    if (!(g.tail_arm > 0.0) || !(g.span > 0.0)) throw ConfigError("gust geometry needs positive span and tail arm");
    bool left = false, right = false, center = false, tail = false;
    for (std::size_t k = 0; k < stations.size(); ++k) {
        const auto& s = stations[k];
        if (s.station == "left_tip") left = true;
        else if (s.station == "right_tip") right = true;
        else if (s.station == "center") { center = true; center_ = k; }
        else if (s.station == "tail") { tail = true; tail_ = k; }
        kind_.push_back(s.kind);
    }
    if (!left || !right || !center || !tail)
        throw ConfigError("gust samples must include left_tip, right_tip, center and tail stations");

    int count = 0;
    double ybar = 0.0;
    for (const auto& s : stations)
        if (s.kind == StationKind::wing) { ybar += s.position.y(); ++count; }
    ybar /= count;
    double sxx = 0.0;
    for (const auto& s : stations)
        if (s.kind == StationKind::wing) sxx += (s.position.y() - ybar) * (s.position.y() - ybar);
    if (sxx <= 0.0) throw ConfigError("wing stations must span a nonzero width");
    mean_w_.assign(stations.size(), 0.0);
    slope_w_.assign(stations.size(), 0.0);
    for (std::size_t k = 0; k < stations.size(); ++k) {
        if (stations[k].kind != StationKind::wing) continue;
        mean_w_[k] = 1.0 / count;
        slope_w_[k] = (stations[k].position.y() - ybar) / sxx;
    }
}

Vec12 GustMap::apply(std::span<const Vec3> vel) const {
    if (vel.size() != kind_.size()) throw ConfigError("velocity count does not match the station count");
    Vec3 mean = Vec3::Zero();
    double slope = 0.0;
    for (std::size_t k = 0; k < vel.size(); ++k) {
        mean += mean_w_[k] * vel[k];
        slope += slope_w_[k] * vel[k].z();
    }
    // Air moving down on the right wing looks like a positive roll rate of the air mass.
    const Vec3 omega_air{slope, (vel[tail_].z() - vel[center_].z()) / tail_arm_, 0.0};
    return -(vel_map_ * mean) - rate_map_ * omega_air;
}

double GustMap::wing_upwash(std::span<const Vec3> vel) const {
    double w = 0.0;
    for (std::size_t k = 0; k < vel.size(); ++k) w -= mean_w_[k] * vel[k].z();
    return w;
}

Vec12 gust_to_disturbance(const LtiModel& model, std::span<const GustSample> samples, const GustGeometry& g) {
    std::vector<Vec3> vel;
    vel.reserve(samples.size());
    for (const auto& s : samples) {
        if (!s.velocity.allFinite()) throw ConfigError("gust sample '" + s.station + "' is not finite");
        vel.push_back(s.velocity);
    }
    return GustMap(model, samples, g).apply(vel);
}

} // namespace formstab
