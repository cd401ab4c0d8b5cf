#include <cmath>
#include <limits>

#include "iris/gaussian.hpp"
#include "iris/kernels.hpp"

namespace iris::kernels {

AnchorSoA pack_anchors(std::span<const NeuralAnchor> anchors) {
    AnchorSoA soa;
    soa.count = anchors.size();
    const std::size_t padded = (anchors.size() + 3) & ~std::size_t{3};
    auto resize_all = [&](auto&... v) { (v.resize(padded), ...); };
    resize_all(soa.mx, soa.my, soa.mz, soa.w00, soa.w01, soa.w02, soa.w10, soa.w11,
               soa.w12, soa.w20, soa.w21, soa.w22);
    for (std::size_t i = 0; i < padded; ++i) {
        const bool pad = i >= anchors.size();
        const Mat3 w = pad ? Mat3::identity() : anchors[i].whitening();
        const Vec3 mu = pad ? Vec3{} : anchors[i].mean;
        soa.mx[i] = mu.x;
        soa.my[i] = mu.y;
        soa.mz[i] = mu.z;
        soa.w00[i] = w.m[0][0];
        soa.w01[i] = w.m[0][1];
        soa.w02[i] = w.m[0][2];
        soa.w10[i] = w.m[1][0];
        soa.w11[i] = w.m[1][1];
        soa.w12[i] = w.m[1][2];
        soa.w20[i] = w.m[2][0];
        soa.w21[i] = w.m[2][1];
        soa.w22[i] = w.m[2][2];
    }
    return soa;
}

namespace {

void hit_test_scalar(const AnchorSoA& s, std::size_t begin, std::size_t n,
                     const double origin[3], const double dir[3], double t_min,
                     double* t_eval, double* d2) {
    constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = begin + k;
        const double dx = origin[0] - s.mx[i];
        const double dy = origin[1] - s.my[i];
        const double dz = origin[2] - s.mz[i];
        const double oox = s.w00[i] * dx + s.w01[i] * dy + s.w02[i] * dz;
        const double ooy = s.w10[i] * dx + s.w11[i] * dy + s.w12[i] * dz;
        const double ooz = s.w20[i] * dx + s.w21[i] * dy + s.w22[i] * dz;
        const double ovx = s.w00[i] * dir[0] + s.w01[i] * dir[1] + s.w02[i] * dir[2];
        const double ovy = s.w10[i] * dir[0] + s.w11[i] * dir[1] + s.w12[i] * dir[2];
        const double ovz = s.w20[i] * dir[0] + s.w21[i] * dir[1] + s.w22[i] * dir[2];
        const double vv = ovx * ovx + ovy * ovy + ovz * ovz;
        const double ov = oox * ovx + ooy * ovy + ooz * ovz;
        const double t_star = -ov / vv;
        const double te = std::max(t_star, t_min);
        const double px = oox + te * ovx;
        const double py = ooy + te * ovy;
        const double pz = ooz + te * ovz;
        const double dd = px * px + py * py + pz * pz;
        if (vv < kDegenerateDirSq) {
            t_eval[k] = kNan;
            d2[k] = kInf;
        } else {
            t_eval[k] = te;
            d2[k] = dd;
        }
    }
}

// Four-bank accumulation: bank (i % 4) accumulates term i, banks combine as
// ((b0+b1)+(b2+b3)). The AVX2 variant vectorizes the same banking, which is
// what makes the two paths bit-identical.
void matvec_scalar(const double* w, const double* x, const double* b, double* y,
                   int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* wr = w + static_cast<std::size_t>(r) * cols;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        int i = 0;
        for (; i + 4 <= cols; i += 4) {
            a0 += wr[i] * x[i];
            a1 += wr[i + 1] * x[i + 1];
            a2 += wr[i + 2] * x[i + 2];
            a3 += wr[i + 3] * x[i + 3];
        }
        double bank[4] = {a0, a1, a2, a3};
        for (; i < cols; ++i) bank[i & 3] += wr[i] * x[i];
        y[r] = ((bank[0] + bank[1]) + (bank[2] + bank[3])) + b[r];
    }
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{"scalar", &hit_test_scalar, &matvec_scalar};
    return k;
}

}  // namespace iris::kernels
