#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xmorph/config.hpp"
#include "xmorph/io.hpp"

namespace xmorph {

struct SampleInput {
    std::string sample_id;
    GrayImage image;
    BinaryMask mask;
    Orientation orientation = Orientation::axial;
};

/// Runs contour -> radial signal -> IWBN -> chaotic descriptors -> clinical
/// biomarkers for one sample and assembles the 18-column feature record.
FeatureRecord extract_features(const SampleInput& sample, const RunConfig& cfg);

struct ExtractFailure {
    std::string sample_id;
    std::string reason;
};

/// Batch extraction over a manifest, parallel across samples; failed samples
/// are skipped and reported. Relative manifest paths resolve against
/// base_dir. Records come back sorted by sample_id.
std::vector<FeatureRecord> extract_batch(const std::vector<SampleManifest>& manifest,
                                         const std::filesystem::path& base_dir,
                                         const RunConfig& cfg,
                                         std::vector<ExtractFailure>* failures = nullptr);

} // namespace xmorph
