#include <cstdlib>
#include <string_view>

#include "gsub/kernels.hpp"

namespace gsub::kernels {

const KernelTable* avx2_table_unchecked() noexcept;

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& choose() noexcept {
    const char* env = std::getenv("GS_SIMD");
    const std::string_view mode = env ? env : "auto";
    if (mode == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table(); t != nullptr) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable* avx2_table() noexcept {
    static const bool supported = cpu_has_avx2();
    return supported ? avx2_table_unchecked() : nullptr;
}

const KernelTable& active() noexcept {
    static const KernelTable& table = choose();
    return table;
}

}  // namespace gsub::kernels
