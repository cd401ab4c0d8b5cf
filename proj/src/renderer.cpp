#include "iris/renderer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "iris/threading.hpp"

namespace iris {

RenderContext::RenderContext(const Scene& scene, const FieldModel& model,
                             const RenderConfig& cfg)
    : scene_(scene), model_(model), cfg_(cfg), empty_(scene.anchors.empty()) {
    if (!empty_) {
        bvh_ = build_bvh(build_proxy_bounds(scene.anchors, cfg.sampler.lambda),
                         scene.anchors);
        features_ = resolve_features(scene, model);

        double max_scale = 0.0;
        for (const NeuralAnchor& a : scene.anchors)
            max_scale = std::max({max_scale, a.scale.x, a.scale.y, a.scale.z});
        const double tau = cfg_.rca.resolved_tau(scene.anchors);
        if (tau < std::sqrt(cfg.sampler.lambda) * max_scale)
            std::fprintf(stderr,
                         "warning: tau_dist %.6g is below sqrt(lambda)*max_scale %.6g; "
                         "samples may mask their own anchor\n",
                         tau, std::sqrt(cfg.sampler.lambda) * max_scale);
        cfg_.rca.tau_dist = tau;  // freeze the resolved value
    }
}

Vec3 RenderContext::render_ray(const Ray& ray) const {
    if (empty_) return cfg_.background;
    SampleStream stream;
    stream.samples = ris_sample(ray, bvh_, scene_.anchors, cfg_.sampler);
    stream.ray_offsets = {0, stream.samples.size()};
    const auto agg = rca_aggregate(stream, scene_.anchors, features_, cfg_.rca);
    std::vector<DecodedSample> decoded;
    decoded.reserve(agg.size());
    for (const AggregatedSample& s : agg) {
        if (!s.valid) continue;
        decoded.push_back(decode(s.feature_hat.data(), s.alpha_hat, ray.direction,
                                 scene_.anchors[s.anchor_index].deform_rotation,
                                 model_));
    }
    return composite(decoded, cfg_.background);
}

ImageF RenderContext::render_frame(const CameraFrame& frame,
                                   double camera_angle_x) const {
    ImageF img;
    img.width = cfg_.width;
    img.height = cfg_.height;
    img.pixels.resize(static_cast<std::size_t>(cfg_.width) * cfg_.height);
    const auto rays = generate_rays(frame, camera_angle_x, cfg_.width, cfg_.height);
    parallel_for(rays.size(), cfg_.threads, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t i = begin; i < end; ++i) img.pixels[i] = render_ray(rays[i]);
    });
    return img;
}

ImageU8 to_u8(const ImageF& image) {
    ImageU8 out;
    out.width = image.width;
    out.height = image.height;
    out.rgb.resize(image.pixels.size() * 3);
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            const double v = std::clamp(image.pixels[i][c], 0.0, 1.0);
            out.rgb[i * 3 + c] = static_cast<unsigned char>(v * 255.0 + 0.5);
        }
    return out;
}

ImageF to_f(const ImageU8& image) {
    ImageF out;
    out.width = image.width;
    out.height = image.height;
    out.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = {image.rgb[i * 3] / 255.0, image.rgb[i * 3 + 1] / 255.0,
                         image.rgb[i * 3 + 2] / 255.0};
    return out;
}

double image_mse(const ImageF& a, const ImageF& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("image shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const Vec3 d = a.pixels[i] - b.pixels[i];
        sum += d.x * d.x + d.y * d.y + d.z * d.z;
    }
    return sum / (3.0 * static_cast<double>(a.pixels.size()));
}

double mse_to_psnr(double mse) { return -10.0 * std::log10(std::max(mse, 1e-300)); }

}  // namespace iris
