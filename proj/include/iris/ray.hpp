#pragma once

#include <limits>
#include <stdexcept>

#include "iris/vec.hpp"

namespace iris {

struct Ray {
    Vec3 origin;
    Vec3 direction;        // unit
    int ray_index = 0;
    double t_min = 0.0;
    double t_max = std::numeric_limits<double>::infinity();
};

// Ray expressed in the whitened object frame of one Gaussian:
// origin_obj = S^-1 R^T (O - mu), dir_obj = S^-1 R^T v. dir_obj is in
// general not unit length.
struct ObjectFrameRay {
    Vec3 origin_obj;
    Vec3 dir_obj;
};

inline void validate_ray(const Ray& r) {
    if (std::abs(norm(r.direction) - 1.0) > 1e-9)
        throw std::invalid_argument("ray direction is not unit length");
    if (!(r.t_min >= 0.0)) throw std::invalid_argument("ray t_min must be >= 0");
    if (!(r.t_max > r.t_min)) throw std::invalid_argument("ray t_max must exceed t_min");
}

class DegenerateRayError : public std::runtime_error {
public:
    DegenerateRayError() : std::runtime_error("degenerate ray") {}
};

}  // namespace iris
