#include <cstdlib>

#include "iris/kernels.hpp"

namespace iris::kernels {

bool avx2_supported() {
#if defined(IRIS_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Kernels& active_kernels() {
    static const Kernels* selected = [] {
        const char* force = std::getenv("IRIS_FORCE_SCALAR");
        if (force && force[0] != '\0' && force[0] != '0') return &scalar_kernels();
#if defined(IRIS_HAVE_AVX2)
        if (avx2_supported()) return &avx2_kernels();
#endif
        return &scalar_kernels();
    }();
    return *selected;
}

}  // namespace iris::kernels
