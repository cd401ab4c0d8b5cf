#pragma once
// Persistence and ingestion: binary scene/model files, transforms-manifest
// cameras, deformation lists, PPM images and synthetic test scenes.

#include <cstdint>
#include <string>
#include <vector>

#include "iris/camera.hpp"
#include "iris/field.hpp"
#include "iris/scene.hpp"

namespace iris {

// Scene file: "IRIS" magic, version u32, flags u32 (bit 0 = baked),
// anchor count u64, feature dim u32, normalization transform 12 x f64,
// then one 48 x f32 record per anchor (mean, quaternion wxyz, scale,
// opacity, confidence, deform quaternion wxyz, feature). Little-endian.
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

// Model file: "IRSM" magic, version, seed, view encoding id/degree, layer
// shapes + activation ids, f32 weight arrays, then the optional hash grid
// (metadata + per-level f32 tables) when the model is not baked.
void save_model(const FieldModel& model, const std::string& path);
FieldModel load_model(const std::string& path);

// NeRF-synthetic style transforms manifest (camera_angle_x +
// frames[].transform_matrix).
CameraSet load_cameras(const std::string& path);
void save_cameras(const CameraSet& cameras, const std::string& path);

struct DeformationOp {
    bool all = true;
    std::uint64_t begin = 0, end = 0;  // [begin, end) when !all
    Quat rotation;
    Vec3 translation;
    double scale = 1.0;
};
using DeformationFile = std::vector<DeformationOp>;

DeformationFile load_deformation(const std::string& path);

// Per selected anchor: mean' = s Q mean + t, rotation' = Q rotation,
// scale' = s scale, deform' = Q deform; features travel untouched, which is
// the whole point of baking. Requires a baked scene.
void apply_deformation(Scene& scene, const DeformationFile& ops);

struct ImageU8 {
    int width = 0, height = 0;
    std::vector<unsigned char> rgb;  // 3 bytes per pixel, row-major
};

ImageU8 read_ppm(const std::string& path);
void write_ppm(const ImageU8& image, const std::string& path);

enum class SceneLayout { kCollinear, kTwoCluster, kRandomBox };

struct SynthSpec {
    std::uint64_t seed = 0;
    int count = 3;
    SceneLayout layout = SceneLayout::kCollinear;
    bool baked = true;  // false leaves features zero for grid-driven training
};

struct SynthResult {
    Scene scene;
    CameraSet cameras;
};

// Deterministic fixtures: collinear anchors at z = 2, 5, 9, ...; two
// clusters with an inter-cluster gap > 10x the max anchor scale; or a
// uniform random box. All persisted fields are f32-exact.
SynthResult generate_synthetic_scene(const SynthSpec& spec);

}  // namespace iris
