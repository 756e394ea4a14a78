#include "formstab/wake_kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace formstab::simd {

bool avx2_available() {
#if defined(FORMSTAB_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__)) && defined(__GNUC__)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Level active_level() {
    if (const char* env = std::getenv("FORMSTAB_SIMD"); env && std::strcmp(env, "scalar") == 0) return Level::scalar;
    return avx2_available() ? Level::avx2 : Level::scalar;
}

std::string_view level_name(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

HorseshoeBatchFn horseshoe_batch(Level level) {
    if (level == Level::avx2 && avx2_available()) return &horseshoe_batch_avx2;
    return &horseshoe_batch_scalar;
}

} // namespace formstab::simd
