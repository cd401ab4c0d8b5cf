#pragma once
// Ray-Coherent Aggregation: a sliding-window, Mahalanobis-weighted softmax
// over the sorted per-ray sample list, acting as a 1D surrogate for 3D
// nearest-neighbor search. A hard validity mask (same ray, within tau_dist
// of the neighbor's anchor mean) stops geometrically disjoint anchors from
// blending.

#include <span>
#include <vector>

#include "iris/anchor.hpp"
#include "iris/ris.hpp"

namespace iris {

struct RcaConfig {
    int half_window = 2;       // N; window covers 2N+1 sorted samples
    double tau_dist = 0.0;     // validity radius; <= 0 means derive from scene
    double logit_scale = 0.5;  // l = -logit_scale * mahalanobis^2

    // Scale-relative default: 4x the mean of per-anchor max scale.
    static double auto_tau_dist(std::span<const NeuralAnchor> anchors);
    double resolved_tau(std::span<const NeuralAnchor> anchors) const {
        return tau_dist > 0.0 ? tau_dist : auto_tau_dist(anchors);
    }
};

struct AggregatedSample {
    int ray_index = 0;
    std::uint32_t anchor_index = 0;  // center sample's anchor (drives IST)
    double t = 0.0;
    Vec3 position;
    Feature feature_hat{};
    double alpha_hat = 0.0;
    bool valid = false;  // false iff the whole window was masked out
};

// Window indices {k-N..k+N} clipped to the group, no wraparound.
std::vector<int> window_neighbors(int k, int group_size, int n);

// Per-sample forward intermediates, recorded for the training backward.
struct RcaRecord {
    int valid_count = 0;
    std::array<std::uint32_t, 32> neighbor_anchor;
    std::array<double, 32> logit, weight, alpha_raw;
};

// features[i] is the resolved latent for anchor i (stored when baked,
// hash-grid query during training). When `records` is given it is filled
// with one entry per output sample.
std::vector<AggregatedSample> rca_aggregate(const SampleStream& stream,
                                            std::span<const NeuralAnchor> anchors,
                                            std::span<const Feature> features,
                                            const RcaConfig& cfg,
                                            std::vector<RcaRecord>* records = nullptr);

}  // namespace iris
