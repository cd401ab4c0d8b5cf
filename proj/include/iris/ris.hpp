#pragma once
// Ray Intersection Selector: gathers per-ray maximum-response samples
// against the lambda-ellipsoids, sorted by t, truncated to a per-ray quota.
// Hits accumulate in a small sorted buffer during traversal; when the
// buffer overflows, the nearest half is flushed and traversal resumes past
// the last flushed entry, mirroring an iterative re-trace.

#include <cstdint>
#include <span>
#include <vector>

#include "iris/bvh.hpp"
#include "iris/gaussian.hpp"
#include "iris/ray.hpp"

namespace iris {

struct SamplerConfig {
    double lambda = kLambdaBounded;  // 11.3449 for unbounded scenes
    int quota = 128;                 // 256 for unbounded scenes
    int hit_buffer_capacity = 16;

    static SamplerConfig bounded() { return {}; }
    static SamplerConfig unbounded() { return {kLambdaUnbounded, 256, 16}; }
};

struct IntersectionSample {
    int ray_index = 0;
    std::uint32_t anchor_index = 0;
    double t = 0.0;
    Vec3 position;  // O + t v
};

std::vector<IntersectionSample> ris_sample(const Ray& ray, const Bvh& bvh,
                                           std::span<const NeuralAnchor> anchors,
                                           const SamplerConfig& cfg);

// Flat per-ray concatenation in ray order; ray_offsets has size rays+1.
struct SampleStream {
    std::vector<IntersectionSample> samples;
    std::vector<std::size_t> ray_offsets;

    std::size_t ray_count() const {
        return ray_offsets.empty() ? 0 : ray_offsets.size() - 1;
    }
    std::span<const IntersectionSample> ray_group(std::size_t r) const {
        return {samples.data() + ray_offsets[r], ray_offsets[r + 1] - ray_offsets[r]};
    }
};

SampleStream ris_sample_batch(std::span<const Ray> rays, const Bvh& bvh,
                              std::span<const NeuralAnchor> anchors,
                              const SamplerConfig& cfg, int threads = 1);

}  // namespace iris
