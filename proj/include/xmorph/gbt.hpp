#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xmorph/fusion.hpp"

namespace xmorph {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double leaf_value = 0;
    double cover = 0; // training instances routed through this node

    bool is_leaf() const { return feature < 0; }
};

struct RegTree {
    std::vector<TreeNode> nodes; // node 0 is the root

    double predict(std::span<const double> x) const;
    /// Cover-weighted expected leaf value (used as the SHAP base value).
    double expected_value() const;
};

struct GbtParams {
    int rounds = 300;
    int max_depth = 8;
    double learning_rate = 0.05;
    double lambda_reg = 1.0; // L2 penalty on leaf weights
    double gamma = 0.0;      // per-split gain threshold
};

struct BoostedEnsemble {
    GbtParams params;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
    std::vector<double> base_score;  // per class
    std::vector<RegTree> trees;      // round-major: trees[t * n_classes + c]
    bool has_pipeline = false;
    FusionPipeline pipeline;

    std::size_t n_classes() const { return class_names.size(); }
    std::size_t n_features() const { return feature_names.size(); }

    /// Pre-softmax margins: base_score[c] + eta * sum of class-c tree outputs.
    std::vector<double> margins(std::span<const double> x) const;
    std::vector<double> predict_proba(std::span<const double> x) const;
    int predict_class(std::span<const double> x) const;
};

std::vector<double> softmax(std::span<const double> margins);

/// Multiclass softmax log-loss over margins.
double softmax_log_loss(const std::vector<std::vector<double>>& margins,
                        const std::vector<int>& labels);

/// Second-order boosting with exact greedy splits. Split thresholds sit at
/// midpoints between consecutive distinct feature values; ties break toward
/// the lowest feature index then the lowest threshold; splits with gain <= 0
/// are pruned. Per-round training log-loss is appended to *loss_curve when
/// provided. Throws on single-class input or non-finite features.
BoostedEnsemble train_gbt(const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels,
                          const std::vector<std::string>& class_names,
                          const std::vector<std::string>& feature_names,
                          const GbtParams& params,
                          std::vector<double>* loss_curve = nullptr);

// ---------------------------------------------------------------------------
// Model persistence (versioned JSON)
// ---------------------------------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

void save_model(const BoostedEnsemble& model, const std::filesystem::path& path);
BoostedEnsemble load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct FoldResult {
    double accuracy = 0;
    double sensitivity = 0; // macro one-vs-rest recall
    double specificity = 0; // macro one-vs-rest true-negative rate
    std::vector<std::vector<long long>> confusion;
    std::vector<int> train_ids;
    std::vector<int> test_ids;
};

struct CvReport {
    std::vector<std::string> class_names;
    std::vector<FoldResult> folds;
    double mean_accuracy = 0, std_accuracy = 0;
    double mean_sensitivity = 0, std_sensitivity = 0;
    double mean_specificity = 0, std_specificity = 0;
};

struct ConfusionSummary {
    double accuracy = 0;
    double macro_sensitivity = 0;
    double macro_specificity = 0;
};

ConfusionSummary summarize_confusion(const std::vector<std::vector<long long>>& confusion);

/// Seeded stratified fold assignment; per-class fold sizes differ by at most
/// one. Returns fold index per sample.
std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int k,
                                  std::uint64_t seed);

/// Full leak-free protocol: per fold, the fusion pipeline and the model are
/// fitted on the training split only. deep_rows may be null (tsf-only mode).
CvReport cross_validate(std::span<const FeatureRecord> records,
                        const std::vector<std::vector<double>>* deep_rows,
                        const std::vector<std::string>& labels, int k, std::uint64_t seed,
                        const GbtParams& params, double variance_target);

} // namespace xmorph
