#pragma once
// Implicit appearance model: multi-resolution hash-grid feature source
// (training only), geometry and color MLPs, view-direction encoding,
// density gating through the aggregated Gaussian opacity, and volumetric
// compositing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "iris/anchor.hpp"
#include "iris/vec.hpp"

namespace iris {

struct Scene;  // scene.hpp

// ---------------------------------------------------------------------------
// Hash grid
// ---------------------------------------------------------------------------

struct HashGridConfig {
    int levels = 16;
    int n_min = 16;
    int n_max = 8192;
    int features_per_level = 2;
    std::uint64_t table_size = std::uint64_t{1} << 21;
};

class HashGrid {
public:
    HashGrid() = default;
    HashGrid(const HashGridConfig& cfg, std::uint64_t seed);

    const HashGridConfig& config() const { return cfg_; }
    double growth() const { return growth_b_; }
    int resolution(int level) const { return res_[level]; }
    bool level_hashed(int level) const;  // N_l^3 > table_size
    std::uint64_t level_entries(int level) const;
    int output_dim() const { return cfg_.levels * cfg_.features_per_level; }

    // Trilinear interpolation of the 8 cell corners per level, levels
    // concatenated. Positions are unit-cube coordinates; outside clamps to
    // the cube surface.
    void query(const Vec3& unit_pos, double* out) const;

    struct Corner {
        std::uint32_t index;
        double weight;
    };
    // As query(), additionally records the (index, weight) pairs per level
    // (8 per level) for the training backward scatter.
    void query_recorded(const Vec3& unit_pos, double* out, Corner* corners) const;

    std::vector<std::vector<float>>& tables() { return tables_; }
    const std::vector<std::vector<float>>& tables() const { return tables_; }

    std::uint32_t corner_index(int level, std::uint32_t x, std::uint32_t y,
                               std::uint32_t z) const;

private:
    HashGridConfig cfg_;
    double growth_b_ = 1.0;
    std::vector<int> res_;
    std::vector<std::vector<float>> tables_;
};

// ---------------------------------------------------------------------------
// Scene normalization (world -> grid unit cube), frozen at scene creation
// ---------------------------------------------------------------------------

struct NormTransform {
    Vec3 scale{1.0, 1.0, 1.0};
    Vec3 offset{0.0, 0.0, 0.0};

    Vec3 apply(const Vec3& p) const { return cwise_mul(scale, p) + offset; }

    std::array<double, 12> to_rows() const {
        return {scale.x, 0, 0, offset.x, 0, scale.y, 0, offset.y, 0, 0, scale.z, offset.z};
    }
    static NormTransform from_rows(const std::array<double, 12>& r) {
        return {{r[0], r[5], r[10]}, {r[3], r[7], r[11]}};
    }
};

// Maps the union of the anchors' bounded-lambda boxes, padded by `margin`
// per axis, onto [0,1]^3.
NormTransform compute_normalization(std::span<const NeuralAnchor> anchors,
                                    double margin = 0.05);

// ---------------------------------------------------------------------------
// View-direction encoding
// ---------------------------------------------------------------------------

enum class ViewEncoding : std::uint32_t { kSphericalHarmonics = 0, kFrequency = 1 };

inline constexpr int kShDegree = 4;  // bands 0..3, 16 values

// Real spherical harmonics basis, bands 0..degree-1 (degree^2 values).
// Non-unit directions are normalized with a one-time warning.
void sh_encode(const Vec3& direction, int degree, double* out);

// sin/cos at dyadic frequencies: 6 * levels values.
void frequency_encode(const Vec3& direction, int levels, double* out);

int view_encoding_dim(ViewEncoding enc, int degree);

// ---------------------------------------------------------------------------
// Field model
// ---------------------------------------------------------------------------

struct DenseLayer {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major out x in
    std::vector<double> b;
};

// y = W x + b through the dispatched matvec kernel; optional ReLU.
void layer_forward(const DenseLayer& layer, const double* x, double* y, bool relu);

struct FieldModel {
    // Geometry decoder 32 -> 64 -> 64 -> 16: output channel 0 is the raw
    // density, channels 1..15 the latent embedding for the color head.
    DenseLayer g1, g2, g3;
    // Color head (15 + view_dim) -> 64 -> 64 -> 3, sigmoid output.
    DenseLayer c1, c2, c3;
    ViewEncoding view_encoding = ViewEncoding::kSphericalHarmonics;
    int view_degree = kShDegree;
    std::uint64_t seed = 0;
    bool has_grid = false;
    HashGrid grid;

    int view_dim() const { return view_encoding_dim(view_encoding, view_degree); }
    int color_in_dim() const { return 15 + view_dim(); }

    static FieldModel init(std::uint64_t seed,
                           ViewEncoding enc = ViewEncoding::kSphericalHarmonics,
                           int degree = kShDegree, bool with_grid = true,
                           const HashGridConfig& grid_cfg = {});
};

struct DecodedSample {
    double sigma_eff = 0.0;
    double alpha = 0.0;
    Vec3 color;
};

inline double trunc_exp(double x) { return std::exp(std::clamp(x, -15.0, 15.0)); }

// Full per-sample decode: IST view adjustment d' = R_def^T d, geometry MLP,
// color MLP, truncated-exponential density with negative bias, gated by the
// aggregated opacity.
DecodedSample decode(const double* f_hat, double alpha_hat, const Vec3& direction,
                     const Quat& anchor_r_def, const FieldModel& model);

// Front-to-back compositing of t-sorted samples over a background color.
Vec3 composite(std::span<const DecodedSample> decoded, const Vec3& background);

// ---------------------------------------------------------------------------
// Baking and feature resolution
// ---------------------------------------------------------------------------

// feature[i] for anchor i: stored when the scene is baked, otherwise a hash
// grid query at the normalized anchor mean.
std::vector<Feature> resolve_features(const Scene& scene, const FieldModel& model);

// Freezes grid-queried features into the anchors and severs the grid
// dependency. Idempotent.
void bake(Scene& scene, FieldModel& model);

}  // namespace iris
