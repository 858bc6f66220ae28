#include "xmorph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "xmorph/clinical.hpp"
#include "xmorph/error.hpp"
#include "xmorph/io.hpp"
#include "xmorph/rng.hpp"

namespace xmorph {

namespace {

struct PolarShape {
    // r(theta) = R * (1 + sum_h c_h * sin(h*theta + phase_h)), plus an
    // optional anisotropic (elliptic) base term
    double base_radius = 40;
    double ellipse_a = 0, ellipse_b = 0, ellipse_rot = 0; // 0 = circular base
    std::vector<int> harmonics;
    std::vector<double> amps;
    std::vector<double> phases;

    double radius(double theta) const {
        double r;
        if (ellipse_a > 0) {
            const double t = theta - ellipse_rot;
            const double cx = ellipse_b * std::cos(t);
            const double sy = ellipse_a * std::sin(t);
            r = ellipse_a * ellipse_b / std::sqrt(cx * cx + sy * sy);
        } else {
            r = base_radius;
        }
        double pert = 0;
        for (std::size_t i = 0; i < harmonics.size(); ++i)
            pert += amps[i] * std::sin(harmonics[i] * theta + phases[i]);
        return r * (1.0 + pert);
    }
};

PolarShape draw_shape(const ShapeSpec& spec, Rng& rng) {
    PolarShape shape;
    shape.base_radius = spec.size;
    switch (spec.kind) {
        case ShapeKind::ellipse: {
            const double ratio =
                spec.axis_ratio > 0 ? spec.axis_ratio : rng.uniform(1.05, 1.25);
            shape.ellipse_a = spec.size * std::sqrt(ratio);
            shape.ellipse_b = spec.size / std::sqrt(ratio);
            shape.ellipse_rot = rng.uniform(0, M_PI);
            break;
        }
        case ShapeKind::lobulated: {
            const double amp = spec.lobe_amp > 0 ? spec.lobe_amp : rng.uniform(0.10, 0.18);
            const int k = spec.lobe_count > 0
                              ? spec.lobe_count
                              : static_cast<int>(3 + rng.below(3)); // 3..5 lobes
            shape.harmonics = {k};
            shape.amps = {amp};
            shape.phases = {rng.uniform(0, 2 * M_PI)};
            break;
        }
        case ShapeKind::chaotic_star: {
            // six harmonics, at least two of them high-frequency, scaled to a
            // target radial standard deviation
            const int order = std::max(spec.fourier_order, 8);
            std::vector<int> pool;
            for (int h = 2; h <= order; ++h) pool.push_back(h);
            rng.shuffle(pool);
            std::vector<int> chosen(pool.begin(), pool.begin() + 4);
            chosen.push_back(order - static_cast<int>(rng.below(3)));
            chosen.push_back(order - 3 - static_cast<int>(rng.below(3)));
            std::sort(chosen.begin(), chosen.end());
            chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());

            std::vector<double> amps;
            double energy = 0;
            for (std::size_t i = 0; i < chosen.size(); ++i) {
                amps.push_back(rng.uniform(0.6, 1.0));
                energy += amps.back() * amps.back();
            }
            const double target =
                spec.chaos_amp > 0 ? spec.chaos_amp : rng.uniform(0.15, 0.24);
            const double scale = target / std::sqrt(energy / 2.0);
            double total = 0;
            for (auto& a : amps) {
                a *= scale;
                total += a;
            }
            if (total > 0.6)
                for (auto& a : amps) a *= 0.6 / total; // keep min radius positive
            shape.harmonics = chosen;
            shape.amps = amps;
            shape.phases.resize(chosen.size());
            for (auto& p : shape.phases) p = rng.uniform(0, 2 * M_PI);
            break;
        }
    }
    return shape;
}

} // namespace

Phantom generate(const ShapeSpec& spec) {
    if (spec.size < 12) throw PreconditionError("generate: size must be >= 12 px");
    Rng rng(spec.seed);
    const PolarShape shape = draw_shape(spec, rng);

    double r_max = 0, r_min = 1e18;
    for (int i = 0; i < 720; ++i) {
        const double r = shape.radius(i * M_PI / 360.0);
        r_max = std::max(r_max, r);
        r_min = std::min(r_min, r);
    }
    if (r_min <= 2.0)
        throw PreconditionError("generate: boundary folds onto itself (radius <= 2 px)");

    const int tumor_offset =
        spec.profile.kind == IntensityProfile::Kind::shifted_brain ? spec.profile.offset : 0;
    const double brain_radius = r_max + std::max(20.0, 0.6 * spec.size) + std::abs(tumor_offset);
    const int half = static_cast<int>(std::ceil(brain_radius)) + 6;
    const int W = 2 * half + 1;
    const double bcx = half, bcy = half;             // brain center
    const double tcx = half + tumor_offset, tcy = half; // tumor center

    Phantom ph;
    ph.image = GrayImage::create(W, W, 0);
    ph.tumor = BinaryMask::create(W, W);
    ph.brain = BinaryMask::create(W, W);

    for (int y = 0; y < W; ++y)
        for (int x = 0; x < W; ++x) {
            const double bdx = x - bcx, bdy = y - bcy;
            if (bdx * bdx + bdy * bdy <= brain_radius * brain_radius) {
                ph.brain.set(x, y, true);
                ph.image.set(x, y, kBrainIntensity);
            }
            const double dx = x - tcx, dy = y - tcy;
            const double rr = std::sqrt(dx * dx + dy * dy);
            if (rr <= shape.radius(std::atan2(dy, dx))) {
                ph.tumor.set(x, y, true);
                ph.image.set(x, y, kTumorIntensity);
            }
        }

    if (spec.profile.kind == IntensityProfile::Kind::ring_enhanced) {
        // the core/ring split mirrors the REI construction so painted values
        // translate directly into the index
        const double r_eq = std::sqrt(static_cast<double>(ph.tumor.count()) / M_PI);
        int k = std::max(1, static_cast<int>(std::lround(0.3 * r_eq)));
        BinaryMask core = ph.tumor;
        for (int it = 0; it < k && core.count() > 0; ++it) {
            BinaryMask next = erode3x3(core);
            if (next.count() == 0) break;
            core = next;
        }
        const auto clamp255 = [](double v) {
            return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        };
        for (int y = 0; y < W; ++y)
            for (int x = 0; x < W; ++x)
                if (ph.tumor.at(x, y))
                    ph.image.set(x, y, clamp255(core.at(x, y) ? spec.profile.core_val
                                                              : spec.profile.rim_val));
    }
    return ph;
}

ShapeSpec dataset_spec(int class_idx, int sample_idx, int n_per_class,
                       std::uint64_t base_seed) {
    static constexpr ShapeKind kinds[3] = {ShapeKind::ellipse, ShapeKind::lobulated,
                                           ShapeKind::chaotic_star};
    ShapeSpec spec;
    spec.kind = kinds[class_idx];
    spec.size = 36 + (sample_idx % 5) * 3;
    spec.seed = base_seed + static_cast<std::uint64_t>(class_idx * n_per_class + sample_idx);
    switch (spec.kind) {
        case ShapeKind::ellipse:
            spec.axis_ratio = 1.06 + 0.04 * (sample_idx % 5);
            break;
        case ShapeKind::lobulated:
            spec.lobe_amp = 0.10 + 0.02 * (sample_idx % 5);
            spec.lobe_count = 3 + (sample_idx % 3);
            break;
        case ShapeKind::chaotic_star:
            spec.chaos_amp = 0.15 + 0.0225 * (sample_idx % 5);
            break;
    }
    return spec;
}

DatasetInfo generate_dataset(const std::filesystem::path& out_dir, int n_per_class,
                             std::uint64_t seed, bool with_deep, int deep_dim) {
    if (n_per_class < 5) throw PreconditionError("generate_dataset: need >= 5 per class");
    std::filesystem::create_directories(out_dir);

    struct ClassDef {
        ShapeKind kind;
        const char* label;
        const char* prefix;
    };
    const ClassDef classes[] = {
        {ShapeKind::ellipse, "pituitary", "pit"},
        {ShapeKind::lobulated, "meningioma", "men"},
        {ShapeKind::chaotic_star, "glioma", "gli"},
    };

    std::ofstream manifest(out_dir / "manifest.csv", std::ios::binary);
    if (!manifest) throw LoadError("cannot write manifest in " + out_dir.string());
    manifest << "sample_id,image,mask,orientation,label,deep_key\n";

    std::ofstream deep;
    std::vector<std::vector<double>> class_means;
    if (with_deep) {
        deep.open(out_dir / "deep.csv", std::ios::binary);
        if (!deep) throw LoadError("cannot write deep.csv in " + out_dir.string());
        deep << "key";
        for (int c = 0; c < deep_dim; ++c) deep << ",f" << c;
        deep << "\n";
        Rng mean_rng(seed ^ 0x9e3779b97f4a7c15ULL);
        for (int c = 0; c < 3; ++c) {
            std::vector<double> mu(deep_dim);
            for (auto& v : mu) v = mean_rng.uniform(-3.0, 3.0);
            class_means.push_back(std::move(mu));
        }
    }

    int index = 0, written = 0;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n_per_class; ++i, ++index) {
            char id[64];
            std::snprintf(id, sizeof id, "%s_%03d", classes[c].prefix, i);

            const ShapeSpec spec = dataset_spec(c, i, n_per_class, seed);
            const Phantom ph = generate(spec);

            const std::string img_name = std::string(id) + "_img.pgm";
            const std::string mask_name = std::string(id) + "_mask.pgm";
            write_pgm(ph.image, out_dir / img_name);
            write_mask_pgm(ph.tumor, out_dir / mask_name);

            const char* orientation = (index % 7 == 6) ? "sagittal" : "axial";
            manifest << id << "," << img_name << "," << mask_name << "," << orientation
                     << "," << classes[c].label << "," << (with_deep ? id : "") << "\n";

            if (with_deep) {
                Rng row_rng(seed * 1000003ULL + static_cast<std::uint64_t>(index));
                deep << id;
                for (int f = 0; f < deep_dim; ++f)
                    deep << "," << format_g6(class_means[c][f] + 0.8 * row_rng.normal());
                deep << "\n";
            }
            ++written;
        }
    }
    if (!manifest) throw LoadError("manifest write failed");

    DatasetInfo info;
    info.manifest_path = out_dir / "manifest.csv";
    if (with_deep) info.deep_path = out_dir / "deep.csv";
    info.n_samples = written;
    return info;
}

} // namespace xmorph
