#pragma once
// CPU acceleration structure over per-anchor proxy bounds. Each anchor's
// lambda-ellipsoid is conservatively boxed (half-width sqrt(lambda *
// sigma_kk) along world axis k); traversal applies the exact ellipsoid test
// at the leaves, so the boxes only cull.

#include <cstdint>
#include <span>
#include <vector>

#include "iris/anchor.hpp"
#include "iris/kernels.hpp"
#include "iris/ray.hpp"

namespace iris {

struct ProxyBound {
    std::uint32_t anchor_index = 0;
    Vec3 aabb_min, aabb_max;
};

// Anchors with confidence below min_confidence are excluded (pruning
// normally removes them outright; the filter covers scenes loaded
// mid-training).
std::vector<ProxyBound> build_proxy_bounds(std::span<const NeuralAnchor> anchors,
                                           double lambda, double min_confidence = -1.0);

struct BvhNode {
    Vec3 bmin, bmax;
    std::uint32_t left = 0;   // internal: child node; leaf: first primitive slot
    std::uint32_t right = 0;  // internal only
    std::uint32_t count = 0;  // leaf primitive count, 0 for internal nodes
};

// Median split over the node's longest axis, leaf size <= 4, deterministic
// for a fixed input order. Rebuilt from scratch after any edit or prune.
struct Bvh {
    std::vector<BvhNode> nodes;              // nodes[0] is the root
    std::vector<std::uint32_t> prim_anchor;  // anchor index per packed slot
    kernels::AnchorSoA soa;                  // whitening data in packed slot order
    std::size_t anchor_count = 0;
};

Bvh build_bvh(const std::vector<ProxyBound>& bounds,
              std::span<const NeuralAnchor> anchors);

}  // namespace iris
