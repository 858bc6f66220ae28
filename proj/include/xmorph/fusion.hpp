#pragma once

#include <span>
#include <string>
#include <vector>

#include "xmorph/io.hpp"

namespace xmorph {

struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> stdev; // population
    std::vector<bool> zero_variance;
    std::size_t dim() const { return mean.size(); }
};

StandardizationStats zscore_fit(const std::vector<std::vector<double>>& rows);

/// (x - mean) / std per column; zero-variance columns map to 0.
std::vector<double> zscore_apply(const StandardizationStats& stats,
                                 std::span<const double> row);

struct PcaModel {
    std::size_t input_dim = 0;
    std::size_t k = 0;
    std::vector<double> components; // k x input_dim, row-major, orthonormal
    std::vector<double> explained_variance_ratio;
    std::vector<double> mean; // training mean, subtracted before projection
};

/// Eigendecomposition of the covariance of mean-centered rows; retains the
/// smallest k with cumulative explained variance >= target. Component signs
/// are fixed so each component's largest-|loading| entry is positive.
PcaModel pca_fit(const std::vector<std::vector<double>>& rows, double variance_target);

std::vector<double> pca_apply(const PcaModel& model, std::span<const double> row);

/// Median of the present values per tsf column (empty columns fall back to 0).
std::vector<double> tsf_medians(std::span<const FeatureRecord> records);

/// Impute gated values with the training medians, then standardize. Output
/// order follows tsf_column_names().
std::vector<double> fuse_tsf(const FeatureRecord& record,
                             std::span<const double> medians,
                             const StandardizationStats& tsf_stats);

/// Train-fold-scope preprocessing: z-score + PCA for the deep stream,
/// median-impute + z-score for the tumor-specific stream, concatenated as
/// [deep_pca .. , tsf ..].
struct FusionPipeline {
    bool has_deep = false;
    StandardizationStats deep_stats;
    PcaModel pca;
    std::vector<double> medians;
    StandardizationStats tsf_stats;
    std::vector<int> fitted_row_ids; // instrumentation: rows seen during fit

    static FusionPipeline fit(std::span<const FeatureRecord> records,
                              const std::vector<std::vector<double>>* deep_rows,
                              double variance_target,
                              std::span<const int> row_ids = {});

    std::vector<double> apply(const FeatureRecord& record,
                              std::span<const double> deep_row = {}) const;

    /// Raw-unit counterpart of apply() for reporting: PCA projections for the
    /// deep head, imputed but unstandardized values for the tsf tail.
    std::vector<double> display_values(const FeatureRecord& record,
                                       std::span<const double> deep_row = {}) const;

    std::vector<std::string> column_names() const;
    std::size_t output_dim() const;
};

} // namespace xmorph
