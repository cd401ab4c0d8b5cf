#include "iris/field.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "iris/bvh.hpp"
#include "iris/gaussian.hpp"
#include "iris/kernels.hpp"
#include "iris/rng.hpp"
#include "iris/scene.hpp"

namespace iris {

// ---------------------------------------------------------------------------
// Hash grid
// ---------------------------------------------------------------------------

HashGrid::HashGrid(const HashGridConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg.levels < 1 || cfg.n_min < 1 || cfg.n_max < cfg.n_min)
        throw std::invalid_argument("invalid hash grid configuration");
    growth_b_ = cfg.levels > 1
                    ? std::exp(std::log(static_cast<double>(cfg.n_max) / cfg.n_min) /
                               (cfg.levels - 1))
                    : 1.0;
    res_.resize(cfg.levels);
    for (int l = 0; l < cfg.levels; ++l) {
        // The 1e-6 nudge keeps the top level from landing on n_max - 1 when
        // exp/log round just below the integer.
        res_[l] = static_cast<int>(
            std::floor(cfg.n_min * std::exp(l * std::log(growth_b_)) + 1e-6));
    }
    std::mt19937_64 rng(seed);
    tables_.resize(cfg.levels);
    for (int l = 0; l < cfg.levels; ++l) {
        tables_[l].resize(level_entries(l) * cfg.features_per_level);
        for (float& v : tables_[l])
            v = static_cast<float>(uniform_in(rng, -1e-4, 1e-4));
    }
}

bool HashGrid::level_hashed(int level) const {
    const std::uint64_t n = static_cast<std::uint64_t>(res_[level]);
    return n * n * n > cfg_.table_size;
}

std::uint64_t HashGrid::level_entries(int level) const {
    if (level_hashed(level)) return cfg_.table_size;
    const std::uint64_t n1 = static_cast<std::uint64_t>(res_[level]) + 1;
    return n1 * n1 * n1;
}

std::uint32_t HashGrid::corner_index(int level, std::uint32_t x, std::uint32_t y,
                                     std::uint32_t z) const {
    if (level_hashed(level)) {
        const std::uint32_t h = (x * 1u) ^ (y * 2654435761u) ^ (z * 805459861u);
        return static_cast<std::uint32_t>(h % cfg_.table_size);
    }
    const std::uint32_t n1 = static_cast<std::uint32_t>(res_[level]) + 1;
    return (z * n1 + y) * n1 + x;
}

namespace {

struct CellCoords {
    std::uint32_t i[3];
    double f[3];
};

inline CellCoords cell_of(const Vec3& unit_pos, int n) {
    CellCoords c;
    const double p[3] = {std::clamp(unit_pos.x, 0.0, 1.0),
                         std::clamp(unit_pos.y, 0.0, 1.0),
                         std::clamp(unit_pos.z, 0.0, 1.0)};
    for (int a = 0; a < 3; ++a) {
        const double u = p[a] * n;
        double fl = std::floor(u);
        if (fl > n - 1) fl = n - 1;  // u == n at the far face
        c.i[a] = static_cast<std::uint32_t>(fl);
        c.f[a] = u - fl;
    }
    return c;
}

}  // namespace

void HashGrid::query(const Vec3& unit_pos, double* out) const {
    query_recorded(unit_pos, out, nullptr);
}

void HashGrid::query_recorded(const Vec3& unit_pos, double* out, Corner* corners) const {
    const int fpl = cfg_.features_per_level;
    for (int l = 0; l < cfg_.levels; ++l) {
        const CellCoords c = cell_of(unit_pos, res_[l]);
        double acc[8] = {};  // supports features_per_level <= 8
        for (int corner = 0; corner < 8; ++corner) {
            const std::uint32_t dx = corner & 1u;
            const std::uint32_t dy = (corner >> 1) & 1u;
            const std::uint32_t dz = (corner >> 2) & 1u;
            const double wx = dx ? c.f[0] : 1.0 - c.f[0];
            const double wy = dy ? c.f[1] : 1.0 - c.f[1];
            const double wz = dz ? c.f[2] : 1.0 - c.f[2];
            const double w = wx * wy * wz;
            const std::uint32_t idx =
                corner_index(l, c.i[0] + dx, c.i[1] + dy, c.i[2] + dz);
            const float* entry = &tables_[l][static_cast<std::size_t>(idx) * fpl];
            for (int f = 0; f < fpl; ++f) acc[f] += w * static_cast<double>(entry[f]);
            if (corners) corners[l * 8 + corner] = {idx, w};
        }
        for (int f = 0; f < fpl; ++f) out[l * fpl + f] = acc[f];
    }
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

NormTransform compute_normalization(std::span<const NeuralAnchor> anchors,
                                    double margin) {
    if (anchors.empty()) return {};
    const auto bounds = build_proxy_bounds(anchors, kLambdaBounded);
    Vec3 lo = bounds[0].aabb_min, hi = bounds[0].aabb_max;
    for (const ProxyBound& b : bounds) {
        lo = cwise_min(lo, b.aabb_min);
        hi = cwise_max(hi, b.aabb_max);
    }
    Vec3 extent = hi - lo;
    lo -= extent * margin;
    hi += extent * margin;
    extent = hi - lo;
    NormTransform t;
    for (int a = 0; a < 3; ++a) {
        const double e = std::max(extent[a], 1e-9);
        t.scale[a] = 1.0 / e;
        t.offset[a] = -lo[a] / e;
    }
    return t;
}

// ---------------------------------------------------------------------------
// View-direction encodings
// ---------------------------------------------------------------------------

int view_encoding_dim(ViewEncoding enc, int degree) {
    return enc == ViewEncoding::kSphericalHarmonics ? degree * degree : 6 * degree;
}

void sh_encode(const Vec3& direction, int degree, double* out) {
    if (degree < 1 || degree > 4)
        throw std::invalid_argument("sh_encode supports degrees 1..4");
    Vec3 d = direction;
    const double n = norm(d);
    if (std::abs(n - 1.0) > 1e-6) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::fprintf(stderr, "warning: non-unit view direction, normalizing\n");
        d = d / n;
    }
    const double x = d.x, y = d.y, z = d.z;

    out[0] = 0.28209479177387814;
    if (degree < 2) return;
    out[1] = 0.4886025119029199 * y;
    out[2] = 0.4886025119029199 * z;
    out[3] = 0.4886025119029199 * x;
    if (degree < 3) return;
    out[4] = 1.0925484305920792 * x * y;
    out[5] = 1.0925484305920792 * y * z;
    out[6] = 0.31539156525252005 * (3.0 * z * z - 1.0);
    out[7] = 1.0925484305920792 * x * z;
    out[8] = 0.5462742152960396 * (x * x - y * y);
    if (degree < 4) return;
    out[9] = 0.5900435899266435 * y * (3.0 * x * x - y * y);
    out[10] = 2.890611442640554 * x * y * z;
    out[11] = 0.4570457994644658 * y * (5.0 * z * z - 1.0);
    out[12] = 0.3731763325901154 * z * (5.0 * z * z - 3.0);
    out[13] = 0.4570457994644658 * x * (5.0 * z * z - 1.0);
    out[14] = 1.445305721320277 * z * (x * x - y * y);
    out[15] = 0.5900435899266435 * x * (x * x - 3.0 * y * y);
}

void frequency_encode(const Vec3& direction, int levels, double* out) {
    int k = 0;
    for (int l = 0; l < levels; ++l) {
        const double freq = std::ldexp(3.14159265358979323846, l);
        for (int a = 0; a < 3; ++a) {
            out[k++] = std::sin(freq * direction[a]);
            out[k++] = std::cos(freq * direction[a]);
        }
    }
}

// ---------------------------------------------------------------------------
// MLPs
// ---------------------------------------------------------------------------

void layer_forward(const DenseLayer& layer, const double* x, double* y, bool relu) {
    kernels::active_kernels().matvec(layer.w.data(), x, layer.b.data(), y, layer.out,
                                     layer.in);
    if (relu)
        for (int i = 0; i < layer.out; ++i) y[i] = std::max(0.0, y[i]);
}

namespace {

DenseLayer init_layer(int in, int out, std::mt19937_64& rng) {
    DenseLayer l;
    l.in = in;
    l.out = out;
    l.w.resize(static_cast<std::size_t>(in) * out);
    l.b.assign(out, 0.0);
    const double bound = std::sqrt(6.0 / (in + out));
    for (double& v : l.w)
        v = static_cast<double>(static_cast<float>(uniform_in(rng, -bound, bound)));
    return l;
}

}  // namespace

FieldModel FieldModel::init(std::uint64_t seed, ViewEncoding enc, int degree,
                            bool with_grid, const HashGridConfig& grid_cfg) {
    FieldModel m;
    m.seed = seed;
    m.view_encoding = enc;
    m.view_degree = degree;
    std::mt19937_64 rng(seed);
    m.g1 = init_layer(kFeatureDim, 64, rng);
    m.g2 = init_layer(64, 64, rng);
    m.g3 = init_layer(64, 16, rng);
    m.c1 = init_layer(m.color_in_dim(), 64, rng);
    m.c2 = init_layer(64, 64, rng);
    m.c3 = init_layer(64, 3, rng);
    if (with_grid) {
        m.grid = HashGrid(grid_cfg, seed + 1);
        m.has_grid = true;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Decode and composite
// ---------------------------------------------------------------------------

DecodedSample decode(const double* f_hat, double alpha_hat, const Vec3& direction,
                     const Quat& anchor_r_def, const FieldModel& model) {
    double h1[64], h2[64], g[16];
    layer_forward(model.g1, f_hat, h1, true);
    layer_forward(model.g2, h1, h2, true);
    layer_forward(model.g3, h2, g, false);
    const double sigma_mlp = g[0];

    const Vec3 d_local = anchor_r_def.to_matrix().transposed_mul(direction);
    double c_in[15 + 64];
    for (int i = 0; i < 15; ++i) c_in[i] = g[1 + i];
    if (model.view_encoding == ViewEncoding::kSphericalHarmonics)
        sh_encode(d_local, model.view_degree, c_in + 15);
    else
        frequency_encode(d_local, model.view_degree, c_in + 15);

    double u1[64], u2[64], y[3];
    layer_forward(model.c1, c_in, u1, true);
    layer_forward(model.c2, u1, u2, true);
    layer_forward(model.c3, u2, y, false);

    DecodedSample out;
    out.color = {sigmoid(y[0]), sigmoid(y[1]), sigmoid(y[2])};
    const double sigma_prime = trunc_exp(sigma_mlp - 1.0);
    out.sigma_eff = sigma_prime * alpha_hat;
    out.alpha = 1.0 - std::exp(-out.sigma_eff);
    return out;
}

Vec3 composite(std::span<const DecodedSample> decoded, const Vec3& background) {
    double transmittance = 1.0;
    Vec3 c;
    for (const DecodedSample& s : decoded) {
        c += transmittance * s.alpha * s.color;
        transmittance *= 1.0 - s.alpha;
    }
    c += transmittance * background;
    return {std::clamp(c.x, 0.0, 1.0), std::clamp(c.y, 0.0, 1.0),
            std::clamp(c.z, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------
// Feature resolution and baking
// ---------------------------------------------------------------------------

std::vector<Feature> resolve_features(const Scene& scene, const FieldModel& model) {
    std::vector<Feature> features(scene.anchors.size());
    if (scene.baked) {
        for (std::size_t i = 0; i < scene.anchors.size(); ++i)
            features[i] = scene.anchors[i].feature;
        return features;
    }
    if (!model.has_grid)
        throw std::runtime_error("scene is not baked and the model carries no hash grid");
    for (std::size_t i = 0; i < scene.anchors.size(); ++i)
        model.grid.query(scene.norm.apply(scene.anchors[i].mean), features[i].data());
    return features;
}

void bake(Scene& scene, FieldModel& model) {
    if (scene.baked) return;
    if (!model.has_grid)
        throw std::runtime_error("cannot bake: model carries no hash grid");
    for (NeuralAnchor& a : scene.anchors)
        model.grid.query(scene.norm.apply(a.mean), a.feature.data());
    scene.baked = true;
    model.has_grid = false;
    model.grid = HashGrid{};
}

}  // namespace iris
