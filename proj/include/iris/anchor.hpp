#pragma once
// Neural anchor: an explicit 3D Gaussian (mean, rotation, scale, opacity
// logit) carrying a latent feature vector, a pruning confidence and a
// deformation rotation for view-direction adjustment after edits.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "iris/vec.hpp"

namespace iris {

inline constexpr int kFeatureDim = 32;

using Feature = std::array<double, kFeatureDim>;

struct NeuralAnchor {
    Vec3 mean;
    Quat rotation;                       // unit
    Vec3 scale{1.0, 1.0, 1.0};           // componentwise > 0
    double opacity_logit = 0.0;
    Feature feature{};
    double confidence = 1.0;             // in [0, 1]
    Quat deform_rotation;                // identity unless edited

    // Covariance is implicit: sigma = R diag(scale)^2 R^T.
    Mat3 covariance() const {
        const Mat3 r = rotation.to_matrix();
        Mat3 rs = r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) rs.m[i][j] *= scale[j];
        return rs * rs.transposed();
    }

    // Whitening transform S^-1 R^T; maps world offsets into the frame where
    // the Gaussian is the standard isotropic unit Gaussian.
    Mat3 whitening() const {
        const Mat3 rt = rotation.to_matrix().transposed();
        Mat3 w = rt;
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) w.m[j][k] /= scale[j];
        return w;
    }
};

inline void validate_anchor(const NeuralAnchor& a) {
    if (std::abs(a.rotation.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("anchor rotation quaternion is not unit");
    if (!(a.scale.x > 0.0 && a.scale.y > 0.0 && a.scale.z > 0.0))
        throw std::invalid_argument("anchor scale components must be positive");
    if (!(a.confidence >= 0.0 && a.confidence <= 1.0))
        throw std::invalid_argument("anchor confidence outside [0,1]");
}

using AnchorList = std::vector<NeuralAnchor>;

}  // namespace iris
