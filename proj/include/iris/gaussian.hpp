#pragma once
// Closed-form ray/Gaussian interaction primitives. Everything here reduces
// to the whitened object frame: with M = S^-1 R^T, a point x maps to
// M (x - mu) and the Gaussian becomes the standard isotropic unit Gaussian,
// so squared Mahalanobis distance is a plain squared norm and the maximum
// response point along a ray is the foot of the perpendicular from the
// frame origin.

#include <optional>

#include "iris/anchor.hpp"
#include "iris/ray.hpp"

namespace iris {

// Squared Mahalanobis distance threshold of the chi^2_3 confidence
// ellipsoid: ~90% mass for bounded scenes, ~99% for unbounded ones.
inline constexpr double kLambdaBounded = 6.25;
inline constexpr double kLambdaUnbounded = 11.3449;

// |v_obj|^2 below this counts as a degenerate direction (extreme
// anisotropy can amplify tiny components through S^-1).
inline constexpr double kDegenerateDirSq = 1e-24;

namespace detail {

// Canonical hit evaluation. The scalar and SIMD batch kernels replicate this
// exact operation sequence; keep them in sync so hit decisions are
// bit-identical across paths.
struct HitEval {
    double t_star;   // unclamped foot-point parameter
    double t_eval;   // max(t_star, t_min)
    double d2;       // squared Mahalanobis distance at t_eval
    double vv;       // |v_obj|^2
};

inline HitEval hit_eval(const Vec3& origin_obj, const Vec3& dir_obj, double t_min) {
    HitEval h;
    h.vv = dir_obj.x * dir_obj.x + dir_obj.y * dir_obj.y + dir_obj.z * dir_obj.z;
    const double ov =
        origin_obj.x * dir_obj.x + origin_obj.y * dir_obj.y + origin_obj.z * dir_obj.z;
    h.t_star = -ov / h.vv;
    h.t_eval = std::max(h.t_star, t_min);
    const double px = origin_obj.x + h.t_eval * dir_obj.x;
    const double py = origin_obj.y + h.t_eval * dir_obj.y;
    const double pz = origin_obj.z + h.t_eval * dir_obj.z;
    h.d2 = px * px + py * py + pz * pz;
    return h;
}

}  // namespace detail

inline ObjectFrameRay to_object_frame(const Ray& ray, const NeuralAnchor& anchor) {
    const Mat3 m = anchor.whitening();
    return {m * (ray.origin - anchor.mean), m * ray.direction};
}

inline double mahalanobis_sq(const Vec3& x, const NeuralAnchor& anchor) {
    return norm_sq(anchor.whitening() * (x - anchor.mean));
}

// Ray parameter of the Gaussian's maximum response point (Gaussian density
// along the ray is unimodal with its peak here).
inline double t_sample(const Ray& ray, const NeuralAnchor& anchor) {
    const ObjectFrameRay obj = to_object_frame(ray, anchor);
    const double vv = norm_sq(obj.dir_obj);
    if (vv < kDegenerateDirSq) throw DegenerateRayError{};
    return -dot(obj.origin_obj, obj.dir_obj) / vv;
}

// Maximum-response hit against the lambda-ellipsoid, restricted to the
// ray's t-range. When the range entry point already lies inside the
// ellipsoid (t_star < t_min), the hit is clamped to t_min so interior
// origins still produce a sample. No clamp at the far end.
inline std::optional<double> ellipsoid_hit(const Ray& ray, const NeuralAnchor& anchor,
                                           double lambda) {
    const ObjectFrameRay obj = to_object_frame(ray, anchor);
    const detail::HitEval h = detail::hit_eval(obj.origin_obj, obj.dir_obj, ray.t_min);
    if (h.vv < kDegenerateDirSq) throw DegenerateRayError{};
    if (h.t_eval > ray.t_max) return std::nullopt;
    if (h.d2 <= lambda) return h.t_eval;
    return std::nullopt;
}

inline double gaussian_falloff(double delta_sq) { return std::exp(-0.5 * delta_sq); }

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace iris
