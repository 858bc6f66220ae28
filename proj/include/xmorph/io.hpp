#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xmorph/image.hpp"

namespace xmorph {

enum class Orientation { axial, sagittal, coronal, unknown };

/// Case-insensitive parse; throws LoadError on unknown tokens.
Orientation parse_orientation(std::string_view token);
std::string_view orientation_name(Orientation o);

struct SampleManifest {
    std::string sample_id;
    std::string image_path;
    std::string mask_path;
    Orientation orientation = Orientation::unknown;
    std::optional<std::string> label;
    std::optional<std::string> deep_key;
};

/// NetPBM P2/P5 loader, maxval <= 255. Header comments (#) are skipped.
GrayImage load_pgm(const std::filesystem::path& path);

/// Same formats as load_pgm; membership = intensity > 0.
BinaryMask load_mask(const std::filesystem::path& path);

void write_pgm(const GrayImage& img, const std::filesystem::path& path);
void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path);

/// CSV schema: sample_id,image,mask,orientation,label,deep_key.
/// Rows come back in file order; duplicate ids are rejected.
std::vector<SampleManifest> load_manifest(const std::filesystem::path& path);

/// Dense numeric table keyed by the first CSV column.
class DeepFeatureTable {
public:
    std::size_t size() const { return keys_.size(); }
    std::size_t width() const { return width_; }
    bool contains(const std::string& key) const { return index_.count(key) > 0; }
    std::span<const double> row(const std::string& key) const;

    std::vector<std::string> keys_;
    std::size_t width_ = 0;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// CSV header `key,f0,f1,...`; all rows must have equal width.
DeepFeatureTable load_deep_features(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Tumor-specific feature records
// ---------------------------------------------------------------------------

inline constexpr int kTsfCount = 18;

enum TsfFeature : int {
    kIrregularity = 0,
    kRoughness,
    kArea,
    kMeanRadius,
    kMeanLocalEntropy,
    kWeightRange,
    kEnhancementFactor,
    kFractalDimension,
    kApproxEntropy,
    kSampleEntropy,
    kPermEntropy,
    kLyapunov,
    kRei,
    kDSkull,
    kContactRatio,
    kMls,
    kIwIrregularity,
    kIwRoughness,
};

/// Fixed column order shared by the feature CSV and the fused vector tail.
const std::array<std::string, kTsfCount>& tsf_column_names();

struct FeatureRecord {
    std::string sample_id;
    std::array<double, kTsfCount> values{};
    std::array<bool, kTsfCount> present{}; // mls is absent on non-axial samples

    void set(TsfFeature f, double v) {
        values[f] = v;
        present[f] = true;
    }
    std::optional<double> get(TsfFeature f) const {
        if (!present[f]) return std::nullopt;
        return values[f];
    }
};

/// Byte-deterministic: rows sorted by sample_id, values at 6 significant
/// digits, missing values as empty cells.
void write_feature_csv(std::span<const FeatureRecord> records,
                       const std::filesystem::path& path);

std::vector<FeatureRecord> load_feature_csv(const std::filesystem::path& path);

/// Formats a double with 6 significant digits, the feature-CSV convention.
std::string format_g6(double v);

} // namespace xmorph
