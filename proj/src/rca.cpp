#include "iris/rca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iris/gaussian.hpp"

namespace iris {

double RcaConfig::auto_tau_dist(std::span<const NeuralAnchor> anchors) {
    if (anchors.empty()) return 1.0;
    double sum = 0.0;
    for (const NeuralAnchor& a : anchors)
        sum += std::max({a.scale.x, a.scale.y, a.scale.z});
    return 4.0 * sum / static_cast<double>(anchors.size());
}

std::vector<int> window_neighbors(int k, int group_size, int n) {
    const int lo = std::max(0, k - n);
    const int hi = std::min(group_size - 1, k + n);
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (int j = lo; j <= hi; ++j) idx.push_back(j);
    return idx;
}

std::vector<AggregatedSample> rca_aggregate(const SampleStream& stream,
                                            std::span<const NeuralAnchor> anchors,
                                            std::span<const Feature> features,
                                            const RcaConfig& cfg,
                                            std::vector<RcaRecord>* records) {
    const double tau = cfg.resolved_tau(anchors);
    const int n = cfg.half_window;
    if (n < 0 || 2 * n + 1 > 32)
        throw std::invalid_argument("rca half_window must be in [0, 15]");

    std::vector<AggregatedSample> out;
    out.reserve(stream.samples.size());
    if (records) {
        records->clear();
        records->reserve(stream.samples.size());
    }

    for (std::size_t r = 0; r < stream.ray_count(); ++r) {
        const auto group = stream.ray_group(r);
        const int count = static_cast<int>(group.size());
        for (int k = 0; k < count; ++k) {
            const IntersectionSample& center = group[k];
            AggregatedSample agg;
            agg.ray_index = center.ray_index;
            agg.anchor_index = center.anchor_index;
            agg.t = center.t;
            agg.position = center.position;

            const int lo = std::max(0, k - n);
            const int hi = std::min(count - 1, k + n);

            // First pass: logits of valid neighbors (masked ones stay out
            // entirely, the exact equivalent of a -inf logit).
            double logits[32];
            int neighbor[32];
            int valid_count = 0;
            double max_logit = 0.0;
            for (int j = lo; j <= hi; ++j) {
                const NeuralAnchor& a = anchors[group[j].anchor_index];
                if (norm(center.position - a.mean) >= tau) continue;
                const double l = -cfg.logit_scale * mahalanobis_sq(center.position, a);
                if (valid_count == 0 || l > max_logit) max_logit = l;
                logits[valid_count] = l;
                neighbor[valid_count] = j;
                ++valid_count;
            }
            RcaRecord rec;
            if (valid_count == 0) {
                agg.valid = false;
                out.push_back(agg);
                if (records) records->push_back(rec);
                continue;
            }

            double z = 0.0;
            double expv[32];
            for (int i = 0; i < valid_count; ++i) {
                expv[i] = std::exp(logits[i] - max_logit);
                z += expv[i];
            }
            for (int i = 0; i < valid_count; ++i) {
                const double w = expv[i] / z;
                const IntersectionSample& s = group[neighbor[i]];
                const NeuralAnchor& a = anchors[s.anchor_index];
                const Feature& f = features[s.anchor_index];
                for (int d = 0; d < kFeatureDim; ++d) agg.feature_hat[d] += w * f[d];
                const double alpha_raw =
                    std::exp(logits[i]) * sigmoid(a.opacity_logit);
                agg.alpha_hat += w * alpha_raw;
                if (records) {
                    rec.neighbor_anchor[i] = s.anchor_index;
                    rec.logit[i] = logits[i];
                    rec.weight[i] = w;
                    rec.alpha_raw[i] = alpha_raw;
                }
            }
            agg.valid = true;
            out.push_back(agg);
            if (records) {
                rec.valid_count = valid_count;
                records->push_back(rec);
            }
        }
    }
    return out;
}

}  // namespace iris
