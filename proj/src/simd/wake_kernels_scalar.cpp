#include "formstab/wake_kernels.hpp"

#include <cmath>
#include <numbers>

namespace formstab::simd {

void filament_scalar(const double p1[3], const double p2[3], double gamma, double rc, const double p[3],
                     double out[3]) {
    const double r0[3] = {p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2]};
    const double r1[3] = {p[0] - p2[0], p[1] - p2[1], p[2] - p2[2]};
    const double r2[3] = {p[0] - p1[0], p[1] - p1[1], p[2] - p1[2]};
    const double cx = r1[1] * r2[2] - r1[2] * r2[1];
    const double cy = r1[2] * r2[0] - r1[0] * r2[2];
    const double cz = r1[0] * r2[1] - r1[1] * r2[0];
    // core scaled by the segment length so the head and the legs share one core model
    const double r0sq = r0[0] * r0[0] + r0[1] * r0[1] + r0[2] * r0[2];
    const double den = rc * rc * r0sq + (cx * cx + cy * cy + cz * cz);
    const double n1 = std::sqrt(r1[0] * r1[0] + r1[1] * r1[1] + r1[2] * r1[2]);
    const double n2 = std::sqrt(r2[0] * r2[0] + r2[1] * r2[1] + r2[2] * r2[2]);
    if (den == 0.0 || n1 == 0.0 || n2 == 0.0) {
        out[0] = out[1] = out[2] = 0.0;
        return;
    }
    const double proj = (r0[0] * r1[0] + r0[1] * r1[1] + r0[2] * r1[2]) / n1 -
                        (r0[0] * r2[0] + r0[1] * r2[1] + r0[2] * r2[2]) / n2;
    const double k = gamma / (4.0 * std::numbers::pi) * proj / den;
    out[0] = k * cx;
    out[1] = k * cy;
    out[2] = k * cz;
}

namespace {

// Semi-infinite leg from (xc, yc, zc) to x = -inf; sign +1 for the left leg, -1 for the right.
inline void leg(double xc, double yc, double zc, double sign, double gamma, double rc, double px, double py, double pz,
                double& vy, double& vz) {
    const double dx = px - xc, dy = py - yc, dz = pz - zc;
    const double den = rc * rc + dy * dy + dz * dz;
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (den == 0.0 || r == 0.0) return;
    const double f = gamma / (4.0 * std::numbers::pi) / den * (1.0 - dx / r);
    vy += -sign * dz * f;
    vz += sign * dy * f;
}

} // namespace

void horseshoe_batch_scalar(const HorseshoeParams& h, const double* x, const double* y, const double* z, double* vx,
                            double* vy, double* vz, std::size_t n) {
    const double half = 0.5 * h.leg_spacing;
    const double pL[3] = {h.xv, h.yv - half, h.zv};
    const double pR[3] = {h.xv, h.yv + half, h.zv};
    for (std::size_t i = 0; i < n; ++i) {
        const double p[3] = {x[i], y[i], z[i]};
        double u[3];
        filament_scalar(pR, pL, h.circulation, h.core_radius, p, u);
        leg(pL[0], pL[1], pL[2], 1.0, h.circulation, h.core_radius, p[0], p[1], p[2], u[1], u[2]);
        leg(pR[0], pR[1], pR[2], -1.0, h.circulation, h.core_radius, p[0], p[1], p[2], u[1], u[2]);
        vx[i] = u[0];
        vy[i] = u[1];
        vz[i] = u[2];
    }
}

} // namespace formstab::simd
