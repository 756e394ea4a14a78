#pragma once

#include "formstab/linmodel.hpp"
#include "formstab/wake_kernels.hpp"

#include <span>
#include <string>
#include <vector>

namespace formstab {

struct VortexFilament {
    Vec3 p1;
    Vec3 p2;
    double circulation = 0.0;
    double core_radius = 0.0;
};

/// Bound head at `head`, legs trailing to -x from head -/+ y*d/2.
struct HorseshoeVortex {
    Vec3 head = Vec3::Zero();
    double leg_spacing = 0.0;
    double circulation = 0.0;
    double core_radius = 0.0;

    /// d = b*pi/4, r_c = 0.05*b, Gamma from the generating aircraft.
    static HorseshoeVortex behind(const AircraftParams& generator, const Vec3& head);
    void validate() const;
    simd::HorseshoeParams flat() const;
};

Vec3 filament_velocity(const VortexFilament& f, const Vec3& p);
Vec3 horseshoe_velocity(const HorseshoeVortex& h, const Vec3& p);

/// Batch evaluation through the runtime-selected kernel.
void horseshoe_velocity_batch(const HorseshoeVortex& h, std::span<const double> x, std::span<const double> y,
                              std::span<const double> z, std::span<double> vx, std::span<double> vy,
                              std::span<double> vz);

/// (10b, b(1+pi/4)/2, 0): follower offset behind and beside its leader.
Vec3 optimal_offset(const AircraftParams& params);

double wake_delay(double streamwise_separation, double speed);

/// Mean upward velocity (positive up) over n equally spaced spanwise stations.
double span_averaged_upwash(const HorseshoeVortex& h, const Vec3& wing_center, double span, int n_stations);

double drag_coefficient(double CL, double CD0, double aspect_ratio, double upwash, double speed);

/// Level-flight lift coefficient 2 m g / (rho U^2 S).
double trim_lift_coefficient(const AircraftParams& params);

enum class StationKind { wing, tail };

struct GustSample {
    std::string station;
    StationKind kind = StationKind::wing;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
};

struct GustGeometry {
    double span = 34.1;
    double tail_arm = 18.0;
    /// Trim speed; its transport coupling (U q in the vertical, -U r in the lateral row)
    /// is removed from the rate map because air rotation does not turn the velocity vector.
    double cruise_speed = 230.0;
};

/// Standard stations relative to the aircraft center: left tip, center, right tip and tail.
/// With n_wing > 3 (odd) further wing stations are spread evenly between the tips.
std::vector<GustSample> surface_stations(const GustGeometry& geometry, int n_wing = 3);

/// Precomputed station weights for the flow-to-disturbance map.
class GustMap {
public:
    /// Stations must include "left_tip", "right_tip", "center" and "tail".
    GustMap(const LtiModel& model, std::span<const GustSample> stations, const GustGeometry& geometry);

    /// velocities[k] belongs to stations[k] of the constructor.
    Vec12 apply(std::span<const Vec3> velocities) const;
    /// Mean upward (positive up) velocity over the wing stations.
    double wing_upwash(std::span<const Vec3> velocities) const;
    std::size_t size() const { return kind_.size(); }

private:
    Eigen::Matrix<double, 12, 3> vel_map_, rate_map_;
    std::vector<double> mean_w_, slope_w_;
    std::size_t center_ = 0, tail_ = 0;
    double tail_arm_ = 0.0;
    std::vector<StationKind> kind_;
};

/// Maps sampled external flow to the state-rate disturbance w of x' = A x + B u + w.
/// Translation is the mean wing velocity; roll and pitch come from the least-squares
/// spanwise slope of the vertical velocity and the wing-to-tail difference.
/// Requires "left_tip", "right_tip", "center" and "tail" stations.
Vec12 gust_to_disturbance(const LtiModel& model, std::span<const GustSample> samples, const GustGeometry& geometry);

/// Velocity and rate columns of A restricted to the dynamic rows (kinematic rows zeroed).
/// The rate map keeps only the aerodynamic part: the trim-speed transport terms are subtracted.
Eigen::Matrix<double, 12, 3> disturbance_velocity_map(const LtiModel& model);
Eigen::Matrix<double, 12, 3> disturbance_rate_map(const LtiModel& model, double cruise_speed);

} // namespace formstab
