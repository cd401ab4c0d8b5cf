#include "iris/scene_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "iris/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

namespace iris {
namespace {

using nlohmann::json;

// f32-exact double, so persisted fields round-trip bit-identically.
inline double q32(double v) { return static_cast<double>(static_cast<float>(v)); }

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open file for writing: " + path);
    }
    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f32(double v) {
        const float f = static_cast<float>(v);
        bytes(&f, 4);
    }
    void f64(double v) { bytes(&v, 8); }
    void close(const std::string& path) {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed: " + path);
        out_.close();
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    Reader(const std::string& path, const char* kind) : path_(path), kind_(kind) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error(std::string("cannot open ") + kind + ": " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        data_ = ss.str();
    }

    void context(std::string c) { context_ = std::move(c); }

    void bytes(void* p, std::size_t n) {
        if (pos_ + n > data_.size()) {
            std::ostringstream msg;
            msg << "truncated " << kind_ << " at byte offset " << data_.size();
            if (!context_.empty()) msg << " (" << context_ << ")";
            throw std::runtime_error(msg.str());
        }
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        bytes(&v, 8);
        return v;
    }
    double f32() {
        float v;
        bytes(&v, 4);
        return static_cast<double>(v);
    }
    double f64() {
        double v;
        bytes(&v, 8);
        return v;
    }
    std::size_t offset() const { return pos_; }
    void expect_end() const {
        if (pos_ != data_.size()) {
            std::ostringstream msg;
            msg << kind_ << " length mismatch: declared content ends at byte " << pos_
                << " but file has " << data_.size() << " bytes";
            throw std::runtime_error(msg.str());
        }
    }

private:
    std::string path_;
    const char* kind_;
    std::string data_;
    std::size_t pos_ = 0;
    std::string context_;
};

constexpr std::uint32_t kSceneVersion = 1;
constexpr std::uint32_t kModelVersion = 1;

void write_quat(Writer& w, const Quat& q) {
    w.f32(q.w);
    w.f32(q.x);
    w.f32(q.y);
    w.f32(q.z);
}
void write_vec3(Writer& w, const Vec3& v) {
    w.f32(v.x);
    w.f32(v.y);
    w.f32(v.z);
}
Quat read_quat(Reader& r) {
    Quat q;
    q.w = r.f32();
    q.x = r.f32();
    q.y = r.f32();
    q.z = r.f32();
    return q;
}
Vec3 read_vec3(Reader& r) {
    Vec3 v;
    v.x = r.f32();
    v.y = r.f32();
    v.z = r.f32();
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene file
// ---------------------------------------------------------------------------

void save_scene(const Scene& scene, const std::string& path) {
    Writer w(path);
    w.bytes("IRIS", 4);
    w.u32(kSceneVersion);
    w.u32(scene.baked ? 1u : 0u);
    w.u64(scene.anchors.size());
    w.u32(kFeatureDim);
    for (double v : scene.norm.to_rows()) w.f64(v);
    for (const NeuralAnchor& a : scene.anchors) {
        write_vec3(w, a.mean);
        write_quat(w, a.rotation);
        write_vec3(w, a.scale);
        w.f32(a.opacity_logit);
        w.f32(a.confidence);
        write_quat(w, a.deform_rotation);
        for (double f : a.feature) w.f32(f);
    }
    w.close(path);
}

Scene load_scene(const std::string& path) {
    Reader r(path, "IRIS scene file");
    char magic[4];
    r.context("header");
    r.bytes(magic, 4);
    if (std::memcmp(magic, "IRIS", 4) != 0)
        throw std::runtime_error("not an IRIS scene file: " + path);
    const std::uint32_t version = r.u32();
    if (version != kSceneVersion)
        throw std::runtime_error("unsupported IRIS scene version " +
                                 std::to_string(version));
    const std::uint32_t flags = r.u32();
    const std::uint64_t count = r.u64();
    const std::uint32_t dim = r.u32();
    if (dim != kFeatureDim)
        throw std::runtime_error("unsupported feature dimension " + std::to_string(dim));
    std::array<double, 12> rows;
    for (double& v : rows) v = r.f64();

    Scene scene;
    scene.baked = (flags & 1u) != 0;
    scene.norm = NormTransform::from_rows(rows);
    scene.anchors.resize(count);
    bool warned = false;
    for (std::uint64_t i = 0; i < count; ++i) {
        r.context("anchor record " + std::to_string(i));
        NeuralAnchor& a = scene.anchors[i];
        a.mean = read_vec3(r);
        a.rotation = read_quat(r);
        a.scale = read_vec3(r);
        a.opacity_logit = r.f32();
        a.confidence = r.f32();
        a.deform_rotation = read_quat(r);
        for (double& f : a.feature) f = r.f32();

        const double dev = std::abs(a.rotation.norm() - 1.0);
        if (dev > 1e-4)
            throw std::runtime_error("anchor record " + std::to_string(i) +
                                     ": rotation quaternion is not unit");
        if (dev > 1e-6) {
            a.rotation = a.rotation.normalized();
            if (!warned) {
                std::fprintf(stderr, "warning: re-normalized anchor quaternions in %s\n",
                             path.c_str());
                warned = true;
            }
        }
        if (!(a.scale.x > 0.0 && a.scale.y > 0.0 && a.scale.z > 0.0))
            throw std::runtime_error("anchor record " + std::to_string(i) +
                                     ": non-positive scale");
    }
    r.expect_end();
    return scene;
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

namespace {

// Output activation per layer, in serialization order.
constexpr std::uint32_t kActLinear = 0, kActRelu = 1, kActSigmoid = 2;

void write_layer(Writer& w, const DenseLayer& l, std::uint32_t act) {
    w.u32(static_cast<std::uint32_t>(l.in));
    w.u32(static_cast<std::uint32_t>(l.out));
    w.u32(act);
}

void write_layer_data(Writer& w, const DenseLayer& l) {
    for (double v : l.w) w.f32(v);
    for (double v : l.b) w.f32(v);
}

DenseLayer read_layer_data(Reader& r, int in, int out) {
    DenseLayer l;
    l.in = in;
    l.out = out;
    l.w.resize(static_cast<std::size_t>(in) * out);
    l.b.resize(out);
    for (double& v : l.w) v = r.f32();
    for (double& v : l.b) v = r.f32();
    return l;
}

}  // namespace

void save_model(const FieldModel& m, const std::string& path) {
    Writer w(path);
    w.bytes("IRSM", 4);
    w.u32(kModelVersion);
    w.u64(m.seed);
    w.u32(static_cast<std::uint32_t>(m.view_encoding));
    w.u32(static_cast<std::uint32_t>(m.view_degree));
    w.u32(6);  // layer count
    write_layer(w, m.g1, kActRelu);
    write_layer(w, m.g2, kActRelu);
    write_layer(w, m.g3, kActLinear);
    write_layer(w, m.c1, kActRelu);
    write_layer(w, m.c2, kActRelu);
    write_layer(w, m.c3, kActSigmoid);
    write_layer_data(w, m.g1);
    write_layer_data(w, m.g2);
    write_layer_data(w, m.g3);
    write_layer_data(w, m.c1);
    write_layer_data(w, m.c2);
    write_layer_data(w, m.c3);
    w.u32(m.has_grid ? 1u : 0u);
    if (m.has_grid) {
        const HashGridConfig& g = m.grid.config();
        w.u32(static_cast<std::uint32_t>(g.levels));
        w.u32(static_cast<std::uint32_t>(g.n_min));
        w.u32(static_cast<std::uint32_t>(g.n_max));
        w.u32(static_cast<std::uint32_t>(g.features_per_level));
        w.u64(g.table_size);
        for (int l = 0; l < g.levels; ++l) w.u64(m.grid.level_entries(l));
        for (int l = 0; l < g.levels; ++l)
            w.bytes(m.grid.tables()[l].data(), m.grid.tables()[l].size() * sizeof(float));
    }
    w.close(path);
}

FieldModel load_model(const std::string& path) {
    Reader r(path, "IRIS model file");
    char magic[4];
    r.context("header");
    r.bytes(magic, 4);
    if (std::memcmp(magic, "IRSM", 4) != 0)
        throw std::runtime_error("not an IRIS model file: " + path);
    const std::uint32_t version = r.u32();
    if (version != kModelVersion)
        throw std::runtime_error("unsupported IRIS model version " +
                                 std::to_string(version));

    FieldModel m;
    m.seed = r.u64();
    const std::uint32_t enc = r.u32();
    if (enc > 1) throw std::runtime_error("unknown view encoding id");
    m.view_encoding = static_cast<ViewEncoding>(enc);
    m.view_degree = static_cast<int>(r.u32());
    const std::uint32_t layers = r.u32();
    if (layers != 6) throw std::runtime_error("unexpected layer count");

    struct Shape {
        std::uint32_t in, out, act;
    };
    Shape shapes[6];
    for (Shape& s : shapes) {
        s.in = r.u32();
        s.out = r.u32();
        s.act = r.u32();
    }
    const std::uint32_t expected_in[6] = {
        kFeatureDim, 64, 64, static_cast<std::uint32_t>(m.color_in_dim()), 64, 64};
    const std::uint32_t expected_out[6] = {64, 64, 16, 64, 64, 3};
    for (int i = 0; i < 6; ++i)
        if (shapes[i].in != expected_in[i] || shapes[i].out != expected_out[i])
            throw std::runtime_error("model layer " + std::to_string(i) +
                                     " has inconsistent shape");

    r.context("geometry mlp weights");
    m.g1 = read_layer_data(r, shapes[0].in, shapes[0].out);
    m.g2 = read_layer_data(r, shapes[1].in, shapes[1].out);
    m.g3 = read_layer_data(r, shapes[2].in, shapes[2].out);
    r.context("color mlp weights");
    m.c1 = read_layer_data(r, shapes[3].in, shapes[3].out);
    m.c2 = read_layer_data(r, shapes[4].in, shapes[4].out);
    m.c3 = read_layer_data(r, shapes[5].in, shapes[5].out);

    r.context("hash grid");
    m.has_grid = r.u32() != 0;
    if (m.has_grid) {
        HashGridConfig g;
        g.levels = static_cast<int>(r.u32());
        g.n_min = static_cast<int>(r.u32());
        g.n_max = static_cast<int>(r.u32());
        g.features_per_level = static_cast<int>(r.u32());
        g.table_size = r.u64();
        m.grid = HashGrid(g, 0);
        for (int l = 0; l < g.levels; ++l) {
            const std::uint64_t entries = r.u64();
            if (entries != m.grid.level_entries(l))
                throw std::runtime_error("hash grid level " + std::to_string(l) +
                                         " has inconsistent entry count");
        }
        for (int l = 0; l < g.levels; ++l) {
            r.context("hash grid level " + std::to_string(l));
            r.bytes(m.grid.tables()[l].data(), m.grid.tables()[l].size() * sizeof(float));
        }
    }
    r.expect_end();
    return m;
}

// ---------------------------------------------------------------------------
// Cameras
// ---------------------------------------------------------------------------

CameraSet load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cameras manifest: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("cameras manifest parse error: " + std::string(e.what()));
    }
    if (!j.contains("camera_angle_x") || !j.contains("frames"))
        throw std::runtime_error("cameras manifest missing camera_angle_x or frames");

    CameraSet set;
    set.camera_angle_x = j["camera_angle_x"].get<double>();
    for (const auto& f : j["frames"]) {
        const auto& m = f.at("transform_matrix");
        if (m.size() != 4)
            throw std::runtime_error("transform_matrix must be a 4x4 array");
        CameraFrame frame;
        for (int row = 0; row < 3; ++row) {
            for (int col = 0; col < 3; ++col)
                frame.rotation.m[row][col] = m[row][col].get<double>();
            frame.translation[row] = m[row][3].get<double>();
        }
        // Orthonormality of the rotation block, within 1e-4 per entry.
        const Mat3 rrt = frame.rotation * frame.rotation.transposed();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (std::abs(rrt.m[a][b] - (a == b ? 1.0 : 0.0)) > 1e-4)
                    throw std::runtime_error(
                        "camera rotation block is not orthonormal in frame " +
                        std::to_string(set.frames.size()));
        if (f.contains("file_path")) frame.image_path = f["file_path"].get<std::string>();
        set.frames.push_back(std::move(frame));
    }
    return set;
}

void save_cameras(const CameraSet& cameras, const std::string& path) {
    json j;
    j["camera_angle_x"] = cameras.camera_angle_x;
    j["frames"] = json::array();
    for (const CameraFrame& f : cameras.frames) {
        json m = json::array();
        for (int row = 0; row < 3; ++row)
            m.push_back({f.rotation.m[row][0], f.rotation.m[row][1], f.rotation.m[row][2],
                         f.translation[row]});
        m.push_back({0.0, 0.0, 0.0, 1.0});
        j["frames"].push_back({{"file_path", f.image_path}, {"transform_matrix", m}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Deformation files
// ---------------------------------------------------------------------------

DeformationFile load_deformation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open deformation file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("deformation file parse error: " + std::string(e.what()));
    }
    if (!j.is_array()) throw std::runtime_error("deformation file must be a JSON array");

    DeformationFile ops;
    for (const auto& e : j) {
        DeformationOp op;
        if (e.contains("selection") && !e["selection"].is_string()) {
            const auto& sel = e["selection"];
            if (sel.size() != 2)
                throw std::runtime_error("deformation selection must be \"all\" or [begin, end)");
            op.all = false;
            op.begin = sel[0].get<std::uint64_t>();
            op.end = sel[1].get<std::uint64_t>();
        }
        if (e.contains("rotation")) {
            const auto& q = e["rotation"];
            op.rotation = {q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                           q[3].get<double>()};
            if (std::abs(op.rotation.norm() - 1.0) > 1e-6)
                throw std::runtime_error("deformation rotation quaternion is not unit");
        }
        if (e.contains("translation")) {
            const auto& t = e["translation"];
            op.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
        }
        if (e.contains("scale")) {
            op.scale = e["scale"].get<double>();
            if (!(op.scale > 0.0))
                throw std::runtime_error("deformation scale must be positive");
        }
        ops.push_back(op);
    }
    return ops;
}

void apply_deformation(Scene& scene, const DeformationFile& ops) {
    if (!scene.baked)
        throw std::runtime_error("scene must be baked before editing");
    for (const DeformationOp& op : ops) {
        const std::uint64_t begin = op.all ? 0 : op.begin;
        const std::uint64_t end = op.all ? scene.anchors.size() : op.end;
        if (end > scene.anchors.size() || begin > end)
            throw std::runtime_error("deformation selection out of range");
        const Mat3 q = op.rotation.to_matrix();
        for (std::uint64_t i = begin; i < end; ++i) {
            NeuralAnchor& a = scene.anchors[i];
            a.mean = op.scale * (q * a.mean) + op.translation;
            a.rotation = (op.rotation * a.rotation).normalized();
            a.scale *= op.scale;
            a.deform_rotation = (op.rotation * a.deform_rotation).normalized();
        }
    }
}

// ---------------------------------------------------------------------------
// PPM images
// ---------------------------------------------------------------------------

namespace {

int ppm_token(std::istream& in, const std::string& path) {
    int c;
    for (;;) {
        c = in.peek();
        if (c == '#') {
            while (c != '\n' && c != EOF) c = in.get();
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value;
    if (!(in >> value)) throw std::runtime_error("malformed PPM header: " + path);
    return value;
}

}  // namespace

ImageU8 read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    char p, six;
    in.get(p);
    in.get(six);
    if (p != 'P' || six != '6')
        throw std::runtime_error("unsupported image format (expected P6 PPM): " + path);
    ImageU8 img;
    img.width = ppm_token(in, path);
    img.height = ppm_token(in, path);
    const int maxval = ppm_token(in, path);
    if (maxval != 255) throw std::runtime_error("unsupported maxval " +
                                                std::to_string(maxval) + ": " + path);
    in.get();  // single whitespace after maxval
    if (img.width <= 0 || img.height <= 0)
        throw std::runtime_error("malformed PPM header: " + path);
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    in.read(reinterpret_cast<char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.rgb.size())
        throw std::runtime_error("truncated PPM pixel data: " + path);
    return img;
}

void write_ppm(const ImageU8& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()),
              static_cast<std::streamsize>(image.rgb.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

namespace {

Feature random_feature(std::mt19937_64& rng) {
    Feature f;
    for (double& v : f) v = q32(uniform_in(rng, -1.0, 1.0));
    return f;
}

Quat random_unit_quat(std::mt19937_64& rng) {
    for (;;) {
        Quat q{uniform_in(rng, -1.0, 1.0), uniform_in(rng, -1.0, 1.0),
               uniform_in(rng, -1.0, 1.0), uniform_in(rng, -1.0, 1.0)};
        const double n = q.norm();
        if (n < 0.1) continue;
        q = q.normalized();
        return {q32(q.w), q32(q.x), q32(q.y), q32(q.z)};
    }
}

CameraFrame facing_plus_z(const Vec3& position) {
    CameraFrame f;
    // 180 degrees about +y: the camera's local -z looks along world +z.
    f.rotation.m[0][0] = -1.0;
    f.rotation.m[2][2] = -1.0;
    f.translation = position;
    return f;
}

}  // namespace

SynthResult generate_synthetic_scene(const SynthSpec& spec) {
    if (spec.count < 1) throw std::invalid_argument("synthetic scene needs >= 1 anchor");
    std::mt19937_64 rng(spec.seed);
    SynthResult result;
    AnchorList& anchors = result.scene.anchors;
    anchors.reserve(spec.count);

    switch (spec.layout) {
        case SceneLayout::kCollinear: {
            double z = 2.0;
            for (int k = 0; k < spec.count; ++k) {
                NeuralAnchor a;
                a.mean = {0.0, 0.0, q32(z)};
                a.scale = {0.5, 0.5, 0.5};
                a.opacity_logit = 2.0;
                a.feature = random_feature(rng);
                anchors.push_back(a);
                z += 3.0 + k;
            }
            result.cameras.frames.push_back(facing_plus_z({0.0, 0.0, -4.0}));
            break;
        }
        case SceneLayout::kTwoCluster: {
            constexpr double kClusterGap = 5.0;  // > 10x the 0.3 max scale
            for (int k = 0; k < spec.count; ++k) {
                NeuralAnchor a;
                const double cx = (k % 2 == 0) ? 0.0 : kClusterGap;
                a.mean = {q32(cx + uniform_in(rng, -0.5, 0.5)),
                          q32(uniform_in(rng, -0.5, 0.5)), q32(uniform_in(rng, -0.5, 0.5))};
                a.scale = {q32(uniform_in(rng, 0.1, 0.3)), q32(uniform_in(rng, 0.1, 0.3)),
                           q32(uniform_in(rng, 0.1, 0.3))};
                a.rotation = random_unit_quat(rng);
                a.opacity_logit = q32(uniform_in(rng, 0.0, 2.0));
                a.feature = random_feature(rng);
                anchors.push_back(a);
            }
            result.cameras.frames.push_back(facing_plus_z({kClusterGap / 2, 0.0, -8.0}));
            break;
        }
        case SceneLayout::kRandomBox: {
            for (int k = 0; k < spec.count; ++k) {
                NeuralAnchor a;
                a.mean = {q32(uniform_in(rng, -1.0, 1.0)), q32(uniform_in(rng, -1.0, 1.0)),
                          q32(uniform_in(rng, -1.0, 1.0))};
                a.scale = {q32(uniform_in(rng, 0.02, 0.08)),
                           q32(uniform_in(rng, 0.02, 0.08)),
                           q32(uniform_in(rng, 0.02, 0.08))};
                a.rotation = random_unit_quat(rng);
                a.opacity_logit = q32(uniform_in(rng, 0.0, 2.0));
                a.feature = random_feature(rng);
                anchors.push_back(a);
            }
            result.cameras.frames.push_back(facing_plus_z({0.0, 0.0, -4.0}));
            break;
        }
    }

    if (!spec.baked)
        for (NeuralAnchor& a : anchors) a.feature = Feature{};
    result.scene.baked = spec.baked;
    result.scene.norm = compute_normalization(anchors);
    result.cameras.camera_angle_x = 0.8;
    for (std::size_t i = 0; i < result.cameras.frames.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "target_%04zu.ppm", i);
        result.cameras.frames[i].image_path = buf;
    }
    return result;
}

}  // namespace iris
