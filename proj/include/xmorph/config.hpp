#pragma once

#include <filesystem>
#include <string>

#include "xmorph/dynamics.hpp"
#include "xmorph/explain.hpp"
#include "xmorph/gbt.hpp"

namespace xmorph {

/// Every tunable in one place. Defaults follow the published configuration:
/// boundary N=256, IWBN strength 0.5, REI eps 1e-6, entropy m=2 r=0.2*sigma,
/// 300 boosting rounds at depth 8 with learning rate 0.05, PCA at 95%
/// retained variance.
struct RunConfig {
    int boundary_points = 256;

    double iwbn_lambda = 0.5;
    int entropy_window = 15;
    int entropy_bins = 8;
    bool entropy_on_weighted = false; // compute ApEn/SampEn/PermEn on S_iw

    int entropy_m = 2;
    double entropy_r = 0.2; // fraction of the series std
    int permen_order = 3;
    int permen_delay = 1;
    LyapunovParams lyapunov;

    double rei_epsilon = 1e-6;
    double rei_core_frac = 0.3;
    double contact_threshold_px = 2.0;

    double pca_variance = 0.95;
    GbtParams gbt;

    int top_k = 5;
    ExplainConfig explain;
};

/// key = value file, one pair per line, # comments. Unknown keys are
/// rejected; see README for the key list.
RunConfig load_config(const std::filesystem::path& path);

/// Applies a single "key=value" override in place.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

} // namespace xmorph
