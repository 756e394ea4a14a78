#include "formstab/parallel.hpp"

#include <atomic>

namespace formstab {

namespace {
std::atomic<int> g_workers{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
}

void set_max_workers(int n) { g_workers = std::max(1, n); }
int max_workers() { return g_workers; }

} // namespace formstab
