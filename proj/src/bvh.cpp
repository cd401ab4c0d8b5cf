#include "iris/bvh.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace iris {

std::vector<ProxyBound> build_proxy_bounds(std::span<const NeuralAnchor> anchors,
                                           double lambda, double min_confidence) {
    std::vector<ProxyBound> bounds;
    bounds.reserve(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const NeuralAnchor& a = anchors[i];
        if (a.confidence < min_confidence) continue;
        const Mat3 cov = a.covariance();
        const Vec3 half{std::sqrt(lambda * cov.m[0][0]), std::sqrt(lambda * cov.m[1][1]),
                        std::sqrt(lambda * cov.m[2][2])};
        bounds.push_back({static_cast<std::uint32_t>(i), a.mean - half, a.mean + half});
    }
    return bounds;
}

namespace {

struct BuildPrim {
    ProxyBound bound;
    Vec3 centroid;
};

constexpr std::uint32_t kLeafSize = 4;

std::uint32_t build_node(std::vector<BvhNode>& nodes, std::span<BuildPrim> prims,
                         std::uint32_t first_slot) {
    Vec3 bmin = prims[0].bound.aabb_min;
    Vec3 bmax = prims[0].bound.aabb_max;
    for (const BuildPrim& p : prims) {
        bmin = cwise_min(bmin, p.bound.aabb_min);
        bmax = cwise_max(bmax, p.bound.aabb_max);
    }
    const std::uint32_t index = static_cast<std::uint32_t>(nodes.size());
    nodes.push_back({bmin, bmax, 0, 0, 0});

    if (prims.size() <= kLeafSize) {
        nodes[index].left = first_slot;
        nodes[index].count = static_cast<std::uint32_t>(prims.size());
        return index;
    }

    const Vec3 extent = bmax - bmin;
    int axis = 0;
    if (extent.y > extent[axis]) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    const std::size_t mid = prims.size() / 2;
    std::nth_element(prims.begin(), prims.begin() + mid, prims.end(),
                     [axis](const BuildPrim& a, const BuildPrim& b) {
                         if (a.centroid[axis] != b.centroid[axis])
                             return a.centroid[axis] < b.centroid[axis];
                         return a.bound.anchor_index < b.bound.anchor_index;
                     });

    const std::uint32_t left =
        build_node(nodes, prims.subspan(0, mid), first_slot);
    const std::uint32_t right = build_node(nodes, prims.subspan(mid),
                                           first_slot + static_cast<std::uint32_t>(mid));
    nodes[index].left = left;
    nodes[index].right = right;
    return index;
}

}  // namespace

Bvh build_bvh(const std::vector<ProxyBound>& bounds,
              std::span<const NeuralAnchor> anchors) {
    if (bounds.empty()) throw std::runtime_error("empty scene");

    std::vector<BuildPrim> prims;
    prims.reserve(bounds.size());
    for (const ProxyBound& b : bounds)
        prims.push_back({b, (b.aabb_min + b.aabb_max) * 0.5});

    Bvh bvh;
    bvh.anchor_count = anchors.size();
    bvh.nodes.reserve(2 * bounds.size());
    build_node(bvh.nodes, prims, 0);

    bvh.prim_anchor.reserve(prims.size());
    std::vector<NeuralAnchor> ordered;
    ordered.reserve(prims.size());
    for (const BuildPrim& p : prims) {
        bvh.prim_anchor.push_back(p.bound.anchor_index);
        ordered.push_back(anchors[p.bound.anchor_index]);
    }
    bvh.soa = kernels::pack_anchors(ordered);
    return bvh;
}

}  // namespace iris
