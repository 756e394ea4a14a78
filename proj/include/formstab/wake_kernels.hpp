#pragma once

#include <cstddef>
#include <string_view>

namespace formstab::simd {

/// Flat horseshoe description handed to the batch kernels.
struct HorseshoeParams {
    double xv, yv, zv;
    double leg_spacing;
    double circulation;
    double core_radius;
};

/// Structure-of-arrays evaluation of the horseshoe velocity at n points.
using HorseshoeBatchFn = void (*)(const HorseshoeParams&, const double* x, const double* y, const double* z,
                                  double* vx, double* vy, double* vz, std::size_t n);

void horseshoe_batch_scalar(const HorseshoeParams& h, const double* x, const double* y, const double* z, double* vx,
                            double* vy, double* vz, std::size_t n);

/// Available only when compiled with AVX2 support; falls back to scalar otherwise.
void horseshoe_batch_avx2(const HorseshoeParams& h, const double* x, const double* y, const double* z, double* vx,
                          double* vy, double* vz, std::size_t n);

enum class Level { scalar, avx2 };

/// Best level supported by both the build and the running CPU, overridable with
/// FORMSTAB_SIMD=scalar.
Level active_level();
bool avx2_available();
std::string_view level_name(Level level);

HorseshoeBatchFn horseshoe_batch(Level level);
inline HorseshoeBatchFn horseshoe_batch() { return horseshoe_batch(active_level()); }

/// Regularized finite filament from p1 to p2 (vortex sense p2 -> p1), scalar reference.
void filament_scalar(const double p1[3], const double p2[3], double gamma, double rc, const double p[3], double out[3]);

} // namespace formstab::simd
