// AVX2 four-wide double variants of the inner-loop kernels. Compiled with
// -mavx2 in its own translation unit; only reached through runtime dispatch
// on machines that report AVX2. Operation order mirrors kernels_scalar.cpp
// lane for lane (no FMA, contraction disabled project-wide), so results are
// bit-identical to the scalar reference.

#if defined(IRIS_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "iris/gaussian.hpp"
#include "iris/kernels.hpp"

namespace iris::kernels {
namespace {

void hit_test_avx2(const AnchorSoA& s, std::size_t begin, std::size_t n,
                   const double origin[3], const double dir[3], double t_min,
                   double* t_eval, double* d2) {
    const __m256d ox = _mm256_set1_pd(origin[0]);
    const __m256d oy = _mm256_set1_pd(origin[1]);
    const __m256d oz = _mm256_set1_pd(origin[2]);
    const __m256d vx = _mm256_set1_pd(dir[0]);
    const __m256d vy = _mm256_set1_pd(dir[1]);
    const __m256d vz = _mm256_set1_pd(dir[2]);
    const __m256d tmin = _mm256_set1_pd(t_min);
    const __m256d eps = _mm256_set1_pd(kDegenerateDirSq);
    const __m256d nan = _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN());
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());

    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const std::size_t i = begin + k;
        const __m256d dx = _mm256_sub_pd(ox, _mm256_loadu_pd(&s.mx[i]));
        const __m256d dy = _mm256_sub_pd(oy, _mm256_loadu_pd(&s.my[i]));
        const __m256d dz = _mm256_sub_pd(oz, _mm256_loadu_pd(&s.mz[i]));
        const __m256d w00 = _mm256_loadu_pd(&s.w00[i]);
        const __m256d w01 = _mm256_loadu_pd(&s.w01[i]);
        const __m256d w02 = _mm256_loadu_pd(&s.w02[i]);
        const __m256d w10 = _mm256_loadu_pd(&s.w10[i]);
        const __m256d w11 = _mm256_loadu_pd(&s.w11[i]);
        const __m256d w12 = _mm256_loadu_pd(&s.w12[i]);
        const __m256d w20 = _mm256_loadu_pd(&s.w20[i]);
        const __m256d w21 = _mm256_loadu_pd(&s.w21[i]);
        const __m256d w22 = _mm256_loadu_pd(&s.w22[i]);

        // a*x + b*y + c*z with the scalar association ((ax + by) + cz)
        auto row = [](__m256d a, __m256d b, __m256d c, __m256d px, __m256d py,
                      __m256d pz) {
            return _mm256_add_pd(
                _mm256_add_pd(_mm256_mul_pd(a, px), _mm256_mul_pd(b, py)),
                _mm256_mul_pd(c, pz));
        };
        const __m256d oox = row(w00, w01, w02, dx, dy, dz);
        const __m256d ooy = row(w10, w11, w12, dx, dy, dz);
        const __m256d ooz = row(w20, w21, w22, dx, dy, dz);
        const __m256d ovx = row(w00, w01, w02, vx, vy, vz);
        const __m256d ovy = row(w10, w11, w12, vx, vy, vz);
        const __m256d ovz = row(w20, w21, w22, vx, vy, vz);

        const __m256d vv = row(ovx, ovy, ovz, ovx, ovy, ovz);
        const __m256d ov = row(oox, ooy, ooz, ovx, ovy, ovz);
        const __m256d t_star =
            _mm256_div_pd(_mm256_sub_pd(_mm256_setzero_pd(), ov), vv);
        // maxpd picks the second operand when the first is NaN, matching
        // std::max(t_star, t_min)'s comparison order.
        const __m256d te = _mm256_max_pd(tmin, t_star);
        const __m256d px = _mm256_add_pd(oox, _mm256_mul_pd(te, ovx));
        const __m256d py = _mm256_add_pd(ooy, _mm256_mul_pd(te, ovy));
        const __m256d pz = _mm256_add_pd(ooz, _mm256_mul_pd(te, ovz));
        const __m256d dd = row(px, py, pz, px, py, pz);

        const __m256d degenerate = _mm256_cmp_pd(vv, eps, _CMP_LT_OQ);
        _mm256_storeu_pd(t_eval + k, _mm256_blendv_pd(te, nan, degenerate));
        _mm256_storeu_pd(d2 + k, _mm256_blendv_pd(dd, inf, degenerate));
    }
    if (k < n)
        scalar_kernels().hit_test(s, begin + k, n - k, origin, dir, t_min, t_eval + k,
                                  d2 + k);
}

void matvec_avx2(const double* w, const double* x, const double* b, double* y,
                 int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* wr = w + static_cast<std::size_t>(r) * cols;
        __m256d acc = _mm256_setzero_pd();
        int i = 0;
        for (; i + 4 <= cols; i += 4)
            acc = _mm256_add_pd(acc,
                                _mm256_mul_pd(_mm256_loadu_pd(wr + i), _mm256_loadu_pd(x + i)));
        alignas(32) double bank[4];
        _mm256_store_pd(bank, acc);
        for (; i < cols; ++i) bank[i & 3] += wr[i] * x[i];
        y[r] = ((bank[0] + bank[1]) + (bank[2] + bank[3])) + b[r];
    }
}

}  // namespace

const Kernels& avx2_kernels() {
    static const Kernels k{"avx2", &hit_test_avx2, &matvec_avx2};
    return k;
}

}  // namespace iris::kernels

#endif  // IRIS_HAVE_AVX2
