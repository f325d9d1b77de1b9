#include <cstdlib>
#include <string>
#include <vector>

#include "wiser/kernels.hpp"

namespace wiser::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Backend* avx2_backend_impl();
#endif
#if defined(__aarch64__)
const Backend* neon_backend_impl();
#endif

std::vector<const Backend*> available_backends() {
    std::vector<const Backend*> out;
    out.push_back(&scalar_backend());
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        out.push_back(avx2_backend_impl());
#endif
#if defined(__aarch64__)
    out.push_back(neon_backend_impl());
#endif
    return out;
}

namespace {

const Backend* resolve() {
    const auto backends = available_backends();
    if (const char* want = std::getenv("WISER_KERNEL_BACKEND")) {
        const std::string name(want);
        for (const Backend* b : backends)
            if (name == b->name) return b;
        // unknown or unavailable name: fall through to the default choice
    }
    return backends.back();  // best available; scalar when nothing else is
}

}  // namespace

const Backend& active() {
    static const Backend* chosen = resolve();
    return *chosen;
}

}  // namespace wiser::kernels
