#pragma once

#include <span>
#include <string>
#include <vector>

#include "xmorph/gbt.hpp"

namespace xmorph {

/// Additive decomposition of the pre-softmax margins: for each class,
/// phi0[c] + sum_j phi[j][c] equals the margin at x.
struct Attribution {
    std::vector<double> phi0;             // per class
    std::vector<std::vector<double>> phi; // [feature][class]
    int predicted_class = 0;
    double confidence = 0; // max predicted probability
};

/// Path-dependent TreeSHAP over every tree, summed per class and scaled by
/// the learning rate.
Attribution tree_shap(const BoostedEnsemble& model, std::span<const double> x);

/// Feature indices sorted by |phi| for the predicted class, descending, ties
/// toward the lower index, truncated to k.
std::vector<int> top_k_features(const Attribution& attr, int k);

/// The attribution JSON contract consumed by the explanation stage.
struct AttributionEntry {
    std::string feature;
    double value = 0;
    double phi = 0;
};

struct AttributionRecord {
    std::string sample_id;
    std::string predicted_class;
    double confidence = 0;
    double phi0 = 0; // base value for the predicted class
    std::vector<AttributionEntry> entries; // all features, |phi|-descending
};

AttributionRecord make_attribution_record(const BoostedEnsemble& model,
                                          const Attribution& attr,
                                          std::span<const double> x,
                                          const std::string& sample_id);

std::string attribution_to_json(const AttributionRecord& rec);
AttributionRecord attribution_from_json(const std::string& text);

} // namespace xmorph
