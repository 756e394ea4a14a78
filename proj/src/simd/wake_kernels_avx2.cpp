#include "formstab/wake_kernels.hpp"

#include <cmath>
#include <numbers>

#if defined(FORMSTAB_HAVE_AVX2_TU) && defined(__AVX2__)
#include <immintrin.h>

namespace formstab::simd {

namespace {

inline __m256d safe_div(__m256d num, __m256d den, __m256d valid) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d d = _mm256_blendv_pd(one, den, valid);
    return _mm256_and_pd(_mm256_div_pd(num, d), valid);
}

inline __m256d nonzero(__m256d v) { return _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_NEQ_OQ); }

struct Lane {
    __m256d x, y, z;
};

inline void head(const HorseshoeParams& h, const Lane& p, __m256d& ux, __m256d& uy, __m256d& uz) {
    const double half = 0.5 * h.leg_spacing;
    // p1 = right corner, p2 = left corner.
    const __m256d r0y = _mm256_set1_pd(2.0 * half);
    const __m256d r1x = _mm256_sub_pd(p.x, _mm256_set1_pd(h.xv));
    const __m256d r1y = _mm256_sub_pd(p.y, _mm256_set1_pd(h.yv - half));
    const __m256d r1z = _mm256_sub_pd(p.z, _mm256_set1_pd(h.zv));
    const __m256d r2x = r1x;
    const __m256d r2y = _mm256_sub_pd(p.y, _mm256_set1_pd(h.yv + half));
    const __m256d r2z = r1z;
    const __m256d cx = _mm256_sub_pd(_mm256_mul_pd(r1y, r2z), _mm256_mul_pd(r1z, r2y));
    const __m256d cy = _mm256_sub_pd(_mm256_mul_pd(r1z, r2x), _mm256_mul_pd(r1x, r2z));
    const __m256d cz = _mm256_sub_pd(_mm256_mul_pd(r1x, r2y), _mm256_mul_pd(r1y, r2x));
    const __m256d rc2 = _mm256_set1_pd(h.core_radius * h.core_radius * h.leg_spacing * h.leg_spacing);
    const __m256d den = _mm256_add_pd(rc2, _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(cx, cx), _mm256_mul_pd(cy, cy)),
                                                         _mm256_mul_pd(cz, cz)));
    const __m256d n1 = _mm256_sqrt_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r1x, r1x), _mm256_mul_pd(r1y, r1y)), _mm256_mul_pd(r1z, r1z)));
    const __m256d n2 = _mm256_sqrt_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r2x, r2x), _mm256_mul_pd(r2y, r2y)), _mm256_mul_pd(r2z, r2z)));
    const __m256d valid = _mm256_and_pd(nonzero(den), _mm256_and_pd(nonzero(n1), nonzero(n2)));
    // r0 = (0, d, 0), so r0.r = d * r_y.
    const __m256d proj =
        _mm256_sub_pd(safe_div(_mm256_mul_pd(r0y, r1y), n1, valid), safe_div(_mm256_mul_pd(r0y, r2y), n2, valid));
    const __m256d k = _mm256_mul_pd(_mm256_set1_pd(h.circulation / (4.0 * std::numbers::pi)), safe_div(proj, den, valid));
    ux = _mm256_mul_pd(k, cx);
    uy = _mm256_mul_pd(k, cy);
    uz = _mm256_mul_pd(k, cz);
}

inline void leg(const HorseshoeParams& h, double yc, double sign, const Lane& p, __m256d& uy, __m256d& uz) {
    const __m256d dx = _mm256_sub_pd(p.x, _mm256_set1_pd(h.xv));
    const __m256d dy = _mm256_sub_pd(p.y, _mm256_set1_pd(yc));
    const __m256d dz = _mm256_sub_pd(p.z, _mm256_set1_pd(h.zv));
    const __m256d rc2 = _mm256_set1_pd(h.core_radius * h.core_radius);
    const __m256d den = _mm256_add_pd(rc2, _mm256_add_pd(_mm256_mul_pd(dy, dy), _mm256_mul_pd(dz, dz)));
    const __m256d r = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_add_pd(_mm256_mul_pd(dy, dy),
                                                                                         _mm256_mul_pd(dz, dz))));
    const __m256d valid = _mm256_and_pd(nonzero(den), nonzero(r));
    const __m256d g = _mm256_set1_pd(h.circulation / (4.0 * std::numbers::pi));
    const __m256d f = _mm256_mul_pd(safe_div(g, den, valid),
                                    _mm256_sub_pd(_mm256_set1_pd(1.0), safe_div(dx, r, valid)));
    const __m256d s = _mm256_set1_pd(sign);
    uy = _mm256_sub_pd(uy, _mm256_mul_pd(_mm256_mul_pd(s, dz), f));
    uz = _mm256_add_pd(uz, _mm256_mul_pd(_mm256_mul_pd(s, dy), f));
}

} // namespace

void horseshoe_batch_avx2(const HorseshoeParams& h, const double* x, const double* y, const double* z, double* vx,
                          double* vy, double* vz, std::size_t n) {
    const double half = 0.5 * h.leg_spacing;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const Lane p{_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), _mm256_loadu_pd(z + i)};
        __m256d ux, uy, uz;
        head(h, p, ux, uy, uz);
        leg(h, h.yv - half, 1.0, p, uy, uz);
        leg(h, h.yv + half, -1.0, p, uy, uz);
        _mm256_storeu_pd(vx + i, ux);
        _mm256_storeu_pd(vy + i, uy);
        _mm256_storeu_pd(vz + i, uz);
    }
    if (i < n) horseshoe_batch_scalar(h, x + i, y + i, z + i, vx + i, vy + i, vz + i, n - i);
}

} // namespace formstab::simd

#else

namespace formstab::simd {

void horseshoe_batch_avx2(const HorseshoeParams& h, const double* x, const double* y, const double* z, double* vx,
                          double* vy, double* vz, std::size_t n) {
    horseshoe_batch_scalar(h, x, y, z, vx, vy, vz, n);
}

} // namespace formstab::simd

#endif
