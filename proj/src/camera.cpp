#include "iris/camera.hpp"

#include <cmath>

namespace iris {

Ray pixel_ray(const CameraFrame& frame, double camera_angle_x, int width, int height,
              int px, int py) {
    const double focal = 0.5 * width / std::tan(0.5 * camera_angle_x);
    const Vec3 dir_cam{(px + 0.5 - 0.5 * width) / focal,
                       -(py + 0.5 - 0.5 * height) / focal, -1.0};
    Ray r;
    r.origin = frame.translation;
    r.direction = normalized(frame.rotation * dir_cam);
    r.ray_index = py * width + px;
    return r;
}

std::vector<Ray> generate_rays(const CameraFrame& frame, double camera_angle_x,
                               int width, int height) {
    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            rays.push_back(pixel_ray(frame, camera_angle_x, width, height, x, y));
    return rays;
}

}  // namespace iris
