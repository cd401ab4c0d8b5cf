#pragma once
// Camera frames in the transforms-manifest convention: camera-to-world
// matrices with the camera looking down its local -z, +x right, +y up.

#include <string>
#include <vector>

#include "iris/ray.hpp"
#include "iris/vec.hpp"

namespace iris {

struct CameraFrame {
    Mat3 rotation;     // camera-to-world rotation block
    Vec3 translation;  // camera position
    std::string image_path;
};

struct CameraSet {
    double camera_angle_x = 0.8;  // horizontal field of view, radians
    std::vector<CameraFrame> frames;
};

// Pixel-centered primary rays in row-major pixel order (ray_index = y*W+x).
std::vector<Ray> generate_rays(const CameraFrame& frame, double camera_angle_x,
                               int width, int height);

Ray pixel_ray(const CameraFrame& frame, double camera_angle_x, int width, int height,
              int px, int py);

}  // namespace iris
