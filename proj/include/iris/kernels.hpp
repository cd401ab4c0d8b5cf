#pragma once
// Data-parallel inner-loop kernels with runtime-dispatched SIMD variants.
// The scalar implementations are the reference; SIMD variants must produce
// bit-identical results (enforced by tests/test_kernels.cpp). Both paths
// follow the canonical operation order of gaussian.hpp's hit_eval and a
// four-bank dot-product accumulation for the dense matvec.

#include <cstddef>
#include <span>
#include <vector>

#include "iris/anchor.hpp"

namespace iris::kernels {

// Structure-of-arrays layout of per-anchor whitening data. Arrays are
// padded to a multiple of four entries so four-wide loads never run off
// the end; padding lanes are identity anchors.
struct AnchorSoA {
    std::size_t count = 0;
    std::vector<double> mx, my, mz;                    // mean
    std::vector<double> w00, w01, w02;                 // rows of S^-1 R^T
    std::vector<double> w10, w11, w12;
    std::vector<double> w20, w21, w22;

    std::size_t padded() const { return mx.size(); }
};

AnchorSoA pack_anchors(std::span<const NeuralAnchor> anchors);

// Analytic maximum-response evaluation of one ray against anchors
// [begin, begin+n). Writes t_eval = max(t_star, t_min) and the squared
// Mahalanobis distance at t_eval. Degenerate directions (|v_obj|^2 below
// the floor) produce t_eval = NaN and d2 = +inf.
using HitTestFn = void (*)(const AnchorSoA& soa, std::size_t begin, std::size_t n,
                           const double origin[3], const double dir[3], double t_min,
                           double* t_eval, double* d2);

// Dense y = W x + b, W row-major (rows x cols).
using MatvecFn = void (*)(const double* w, const double* x, const double* b, double* y,
                          int rows, int cols);

struct Kernels {
    const char* name;
    HitTestFn hit_test;
    MatvecFn matvec;
};

const Kernels& scalar_kernels();
bool avx2_supported();
#if defined(IRIS_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif

// Best available implementation; set IRIS_FORCE_SCALAR=1 to pin the scalar
// reference path.
const Kernels& active_kernels();

}  // namespace iris::kernels
