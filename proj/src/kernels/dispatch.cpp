#include <atomic>
#include <cstdlib>
#include <string>

#include "vgcrl/common.hpp"
#include "vgcrl/kernels/kernels.hpp"

namespace vgcrl::kern {
namespace {

const Ops* pick_default() {
#if defined(VGCRL_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return &avx2_ops();
#endif
  return &scalar_ops();
}

const Ops* resolve(const std::string& name) {
  if (name == "scalar") return &scalar_ops();
#if defined(VGCRL_HAVE_AVX2)
  if (name == "avx2") {
    VGCRL_CHECK(__builtin_cpu_supports("avx2"), "kernels: avx2 requested but CPU lacks AVX2");
    return &avx2_ops();
  }
#endif
  fail("kernels: unknown or unavailable kernel set '", name, "'");
}

std::atomic<const Ops*>& slot() {
  static std::atomic<const Ops*> current{[] {
    if (const char* env = std::getenv("VGCRL_KERNEL")) return resolve(env);
    return pick_default();
  }()};
  return current;
}

}  // namespace

const Ops& active() { return *slot().load(std::memory_order_relaxed); }

void set_active(const std::string& name) { slot().store(resolve(name), std::memory_order_relaxed); }

}  // namespace vgcrl::kern
