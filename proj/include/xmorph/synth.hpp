#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "xmorph/image.hpp"
#include "xmorph/morphology.hpp"

namespace xmorph {

enum class ShapeKind { ellipse, lobulated, chaotic_star };

struct IntensityProfile {
    enum class Kind { uniform, ring_enhanced, shifted_brain };
    Kind kind = Kind::uniform;
    double core_val = 160; // ring_enhanced core intensity
    double rim_val = 160;  // ring_enhanced rim intensity
    int offset = 0;        // shifted_brain: tumor offset from brain center, px
};

struct ShapeSpec {
    ShapeKind kind = ShapeKind::ellipse;
    int size = 40; // base radius in pixels
    std::uint64_t seed = 0;
    // ellipse
    double axis_ratio = 0; // 0 = draw from [1.05, 1.25]
    // lobulated
    double lobe_amp = 0; // 0 = draw from [0.10, 0.18]
    int lobe_count = 0;  // 0 = draw from {3, 4, 5}
    // chaotic_star
    int fourier_order = 16;
    double chaos_amp = 0; // target radial std; 0 = draw from [0.15, 0.24]
    IntensityProfile profile;
};

struct Phantom {
    GrayImage image;
    BinaryMask tumor;
    BinaryMask brain; // enclosing disk
};

/// Seeded polar-Fourier phantom: r(theta) = R * (1 + perturbation), rasterized
/// as a star-convex fill, brain disk around it, intensities painted per the
/// profile. Rejects parameter draws whose boundary folds onto itself.
Phantom generate(const ShapeSpec& spec);

inline constexpr std::uint8_t kBrainIntensity = 90;
inline constexpr std::uint8_t kTumorIntensity = 160;

struct DatasetInfo {
    std::filesystem::path manifest_path;
    std::filesystem::path deep_path; // empty when deep features are disabled
    int n_samples = 0;
};

/// The per-sample parameterization used by generate_dataset: class_idx 0..2
/// maps to {ellipse, lobulated, chaotic_star}; shape parameters are
/// stratified over the sample index to stabilize class means; the seed is
/// base_seed + global sample index.
ShapeSpec dataset_spec(int class_idx, int sample_idx, int n_per_class,
                       std::uint64_t base_seed);

/// Deterministic directory of PGMs, a manifest CSV and (optionally) a
/// pseudo-deep-feature CSV of class-conditioned Gaussians. Classes map
/// ellipse -> pituitary, lobulated -> meningioma, chaotic_star -> glioma.
/// Per-sample seeds derive from base_seed + sample index; every 7th sample is
/// written as sagittal to exercise the MLS orientation gate.
DatasetInfo generate_dataset(const std::filesystem::path& out_dir, int n_per_class,
                             std::uint64_t seed, bool with_deep = false,
                             int deep_dim = 8);

} // namespace xmorph
