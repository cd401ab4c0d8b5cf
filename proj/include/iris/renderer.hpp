#pragma once
// End-to-end CPU renderer: camera rays -> intersection sampling -> windowed
// aggregation -> neural decode -> compositing. Pixels are independent, so
// output is byte-identical for any thread count.

#include "iris/bvh.hpp"
#include "iris/camera.hpp"
#include "iris/field.hpp"
#include "iris/rca.hpp"
#include "iris/ris.hpp"
#include "iris/scene.hpp"
#include "iris/scene_io.hpp"

namespace iris {

struct RenderConfig {
    int width = 64, height = 64;
    Vec3 background{0.0, 0.0, 0.0};
    SamplerConfig sampler;
    RcaConfig rca;
    int threads = 1;
};

struct ImageF {
    int width = 0, height = 0;
    std::vector<Vec3> pixels;
};

// Amortizes the BVH build, feature resolution and tau_dist across frames.
class RenderContext {
public:
    RenderContext(const Scene& scene, const FieldModel& model, const RenderConfig& cfg);

    ImageF render_frame(const CameraFrame& frame, double camera_angle_x) const;
    Vec3 render_ray(const Ray& ray) const;

    const Bvh& bvh() const { return bvh_; }

private:
    const Scene& scene_;
    const FieldModel& model_;
    RenderConfig cfg_;
    bool empty_;
    Bvh bvh_;
    std::vector<Feature> features_;
};

ImageU8 to_u8(const ImageF& image);
ImageF to_f(const ImageU8& image);
double image_mse(const ImageF& a, const ImageF& b);
double mse_to_psnr(double mse);

}  // namespace iris
