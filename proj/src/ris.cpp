#include "iris/ris.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "iris/threading.hpp"

namespace iris {
namespace {

struct HitKey {
    double t;
    std::int64_t anchor;  // int64 so a sentinel below any real index exists

    bool operator<(const HitKey& o) const {
        if (t != o.t) return t < o.t;
        return anchor < o.anchor;
    }
};

// Fixed-capacity sorted hit buffer. Keeps the nearest `cap` keys seen so
// far; anything dropped is recovered by a later re-trace segment.
class HitBuffer {
public:
    explicit HitBuffer(int cap) : cap_(static_cast<std::size_t>(std::max(1, cap))) {
        entries_.reserve(cap_);
    }

    void clear() {
        entries_.clear();
        overflowed_ = false;
    }

    void insert(const HitKey& k) {
        if (entries_.size() == cap_) {
            overflowed_ = true;
            if (!(k < entries_.back())) return;
            entries_.pop_back();
        }
        auto pos = std::upper_bound(entries_.begin(), entries_.end(), k);
        entries_.insert(pos, k);
    }

    bool full() const { return entries_.size() == cap_; }
    bool overflowed() const { return overflowed_; }
    void mark_overflow() { overflowed_ = true; }
    double max_t() const { return entries_.back().t; }
    bool empty() const { return entries_.empty(); }
    std::span<const HitKey> entries() const { return entries_; }

    // On overflow only the nearest half is emitted; the rest is re-found by
    // the next segment, which keeps the output complete and sorted.
    std::size_t flush_count() const {
        return overflowed_ ? std::max<std::size_t>(1, cap_ / 2) : entries_.size();
    }

private:
    std::size_t cap_;
    std::vector<HitKey> entries_;
    bool overflowed_ = false;
};

// Slab test against [t_lo, t_hi]; axis-parallel directions handled exactly.
bool aabb_hit(const Vec3& bmin, const Vec3& bmax, const Vec3& o, const Vec3& d,
              double t_lo, double t_hi, double* entry) {
    double t0 = t_lo, t1 = t_hi;
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < bmin[a] || o[a] > bmax[a]) return false;
            continue;
        }
        const double inv = 1.0 / d[a];
        double tn = (bmin[a] - o[a]) * inv;
        double tf = (bmax[a] - o[a]) * inv;
        if (tn > tf) std::swap(tn, tf);
        t0 = std::max(t0, tn);
        t1 = std::min(t1, tf);
        if (t0 > t1) return false;
    }
    *entry = t0;
    return true;
}

// One traversal pass collecting hits with key > lower into the buffer.
// When the buffer is full, subtrees entered beyond its farthest entry are
// skipped (their hits cannot beat the buffered ones) but still count as
// overflow so a re-trace segment follows.
void collect_segment(const Ray& ray, const Bvh& bvh, double lambda,
                     const HitKey& lower, HitBuffer& buf) {
    const kernels::Kernels& k = kernels::active_kernels();
    const double origin[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
    const double dir[3] = {ray.direction.x, ray.direction.y, ray.direction.z};

    std::uint32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    double te[8];
    double d2[8];

    while (sp > 0) {
        const BvhNode& node = bvh.nodes[stack[--sp]];
        double entry = 0.0;
        if (!aabb_hit(node.bmin, node.bmax, ray.origin, ray.direction, lower.t,
                      ray.t_max, &entry))
            continue;
        if (buf.full() && entry > buf.max_t()) {
            buf.mark_overflow();
            continue;
        }
        if (node.count > 0) {
            k.hit_test(bvh.soa, node.left, node.count, origin, dir, ray.t_min, te, d2);
            for (std::uint32_t i = 0; i < node.count; ++i) {
                if (std::isnan(te[i])) throw DegenerateRayError{};
                if (te[i] > ray.t_max || d2[i] > lambda) continue;
                const HitKey key{te[i],
                                 static_cast<std::int64_t>(bvh.prim_anchor[node.left + i])};
                if (lower < key) buf.insert(key);
            }
        } else {
            stack[sp++] = node.right;
            stack[sp++] = node.left;
        }
    }
}

}  // namespace

std::vector<IntersectionSample> ris_sample(const Ray& ray, const Bvh& bvh,
                                           std::span<const NeuralAnchor> anchors,
                                           const SamplerConfig& cfg) {
    if (anchors.size() != bvh.anchor_count)
        throw std::invalid_argument("bvh was built over a different anchor set");

    std::vector<IntersectionSample> out;
    HitBuffer buf(cfg.hit_buffer_capacity);
    HitKey lower{ray.t_min, -1};

    while (static_cast<int>(out.size()) < cfg.quota) {
        buf.clear();
        collect_segment(ray, bvh, cfg.lambda, lower, buf);
        if (buf.empty()) break;
        const std::size_t flush = buf.flush_count();
        for (std::size_t i = 0; i < flush; ++i) {
            const HitKey& key = buf.entries()[i];
            out.push_back({ray.ray_index, static_cast<std::uint32_t>(key.anchor), key.t,
                           ray.origin + key.t * ray.direction});
            lower = key;
            if (static_cast<int>(out.size()) == cfg.quota) return out;
        }
        if (!buf.overflowed()) break;
    }
    return out;
}

SampleStream ris_sample_batch(std::span<const Ray> rays, const Bvh& bvh,
                              std::span<const NeuralAnchor> anchors,
                              const SamplerConfig& cfg, int threads) {
    const int workers =
        std::max(1, std::min<int>(threads, static_cast<int>(rays.size())));
    std::vector<std::vector<IntersectionSample>> worker_out(workers);
    std::vector<std::exception_ptr> worker_error(workers);
    std::vector<std::size_t> per_ray_count(rays.size(), 0);

    parallel_for(rays.size(), workers, [&](std::size_t begin, std::size_t end, int w) {
        try {
            auto& local = worker_out[w];
            for (std::size_t r = begin; r < end; ++r) {
                auto s = ris_sample(rays[r], bvh, anchors, cfg);
                per_ray_count[r] = s.size();
                local.insert(local.end(), s.begin(), s.end());
            }
        } catch (...) {
            worker_error[w] = std::current_exception();
        }
    });
    for (const auto& e : worker_error)
        if (e) std::rethrow_exception(e);

    SampleStream stream;
    stream.ray_offsets.resize(rays.size() + 1);
    stream.ray_offsets[0] = 0;
    for (std::size_t r = 0; r < rays.size(); ++r)
        stream.ray_offsets[r + 1] = stream.ray_offsets[r] + per_ray_count[r];
    stream.samples.reserve(stream.ray_offsets.back());
    for (auto& v : worker_out)
        stream.samples.insert(stream.samples.end(), v.begin(), v.end());
    return stream;
}

}  // namespace iris
