#include "xmorph/shap.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "xmorph/error.hpp"

namespace xmorph {

using json = nlohmann::json;

namespace {

// Decision-path bookkeeping for the polynomial-time SHAP traversal. The
// pweight of element i is the permutation weight of subsets with i ones.
struct PathElement {
    int feature_index = -1;
    double zero_fraction = 0;
    double one_fraction = 0;
    double pweight = 0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature_index) {
    path[depth] = {feature_index, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
    for (int i = depth - 1; i >= 0; --i) {
        path[i + 1].pweight += one_fraction * path[i].pweight * (i + 1) / (depth + 1.0);
        path[i].pweight = zero_fraction * path[i].pweight * (depth - i) / (depth + 1.0);
    }
}

void unwind_path(PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next_one_portion = path[depth].pweight;
    for (int i = depth - 1; i >= 0; --i) {
        if (one_fraction != 0) {
            const double tmp = path[i].pweight;
            path[i].pweight = next_one_portion * (depth + 1.0) / ((i + 1) * one_fraction);
            next_one_portion = tmp - path[i].pweight * zero_fraction * (depth - i) / (depth + 1.0);
        } else {
            path[i].pweight = path[i].pweight * (depth + 1.0) / (zero_fraction * (depth - i));
        }
    }
    for (int i = index; i < depth; ++i) {
        path[i].feature_index = path[i + 1].feature_index;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next_one_portion = path[depth].pweight;
    double total = 0;
    for (int i = depth - 1; i >= 0; --i) {
        if (one_fraction != 0) {
            const double tmp = next_one_portion * (depth + 1.0) / ((i + 1) * one_fraction);
            total += tmp;
            next_one_portion = path[i].pweight - tmp * zero_fraction * (depth - i) / (depth + 1.0);
        } else if (zero_fraction != 0) {
            total += (path[i].pweight / zero_fraction) / ((depth - i) / (depth + 1.0));
        }
    }
    return total;
}

void tree_shap_recurse(const RegTree& tree, std::span<const double> x, double* phi,
                       int node_index, int unique_depth, PathElement* parent_unique_path,
                       double parent_zero_fraction, double parent_one_fraction,
                       int parent_feature_index) {
    // each recursion level owns its own copy of the decision path
    PathElement* unique_path = parent_unique_path + unique_depth + 1;
    std::copy(parent_unique_path, parent_unique_path + unique_depth + 1, unique_path);
    extend_path(unique_path, unique_depth, parent_zero_fraction, parent_one_fraction,
                parent_feature_index);

    const TreeNode& node = tree.nodes[node_index];
    if (node.is_leaf()) {
        for (int i = 1; i <= unique_depth; ++i) {
            const double w = unwound_path_sum(unique_path, unique_depth, i);
            const PathElement& el = unique_path[i];
            phi[el.feature_index] +=
                w * (el.one_fraction - el.zero_fraction) * node.leaf_value;
        }
        return;
    }

    const int hot = x[node.feature] < node.threshold ? node.left : node.right;
    const int cold = hot == node.left ? node.right : node.left;
    const double hot_zero_fraction = tree.nodes[hot].cover / node.cover;
    const double cold_zero_fraction = tree.nodes[cold].cover / node.cover;
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;

    // a split on a feature already on the path undoes the earlier occurrence
    // and re-extends with the combined fractions
    int path_index = 0;
    for (; path_index <= unique_depth; ++path_index)
        if (unique_path[path_index].feature_index == node.feature) break;
    if (path_index != unique_depth + 1) {
        incoming_zero_fraction = unique_path[path_index].zero_fraction;
        incoming_one_fraction = unique_path[path_index].one_fraction;
        unwind_path(unique_path, unique_depth, path_index);
        unique_depth -= 1;
    }

    tree_shap_recurse(tree, x, phi, hot, unique_depth + 1, unique_path,
                      hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction,
                      node.feature);
    tree_shap_recurse(tree, x, phi, cold, unique_depth + 1, unique_path,
                      cold_zero_fraction * incoming_zero_fraction, 0.0, node.feature);
}

int tree_depth(const RegTree& tree, int node = 0) {
    const auto& nd = tree.nodes[node];
    if (nd.is_leaf()) return 0;
    return 1 + std::max(tree_depth(tree, nd.left), tree_depth(tree, nd.right));
}

} // namespace

Attribution tree_shap(const BoostedEnsemble& model, std::span<const double> x) {
    const std::size_t d = model.n_features();
    if (x.size() != d) throw PreconditionError("tree_shap: feature length mismatch");
    const std::size_t C = model.n_classes();

    Attribution attr;
    attr.phi0 = model.base_score;
    attr.phi.assign(d, std::vector<double>(C, 0.0));

    std::vector<double> phi(d);
    const double eta = model.params.learning_rate;
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const std::size_t c = t % C;
        const int maxd = tree_depth(model.trees[t]) + 2;
        std::vector<PathElement> path(((maxd + 1) * (maxd + 2)) / 2 + 2);
        std::fill(phi.begin(), phi.end(), 0.0);
        tree_shap_recurse(model.trees[t], x, phi.data(), 0, 0, path.data(), 1.0, 1.0, -1);
        for (std::size_t f = 0; f < d; ++f) attr.phi[f][c] += eta * phi[f];
        attr.phi0[c] += eta * model.trees[t].expected_value();
    }

    const auto probs = model.predict_proba(x);
    attr.predicted_class =
        static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    attr.confidence = probs[attr.predicted_class];
    return attr;
}

std::vector<int> top_k_features(const Attribution& attr, int k) {
    if (k < 1) throw PreconditionError("top_k_features: k must be >= 1");
    const int c = attr.predicted_class;
    std::vector<int> order(attr.phi.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ma = std::abs(attr.phi[a][c]), mb = std::abs(attr.phi[b][c]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    if (static_cast<int>(order.size()) > k) order.resize(k);
    return order;
}

AttributionRecord make_attribution_record(const BoostedEnsemble& model,
                                          const Attribution& attr,
                                          std::span<const double> x,
                                          const std::string& sample_id) {
    AttributionRecord rec;
    rec.sample_id = sample_id;
    rec.predicted_class = model.class_names[attr.predicted_class];
    rec.confidence = attr.confidence;
    rec.phi0 = attr.phi0[attr.predicted_class];

    const auto order = top_k_features(attr, static_cast<int>(attr.phi.size()));
    for (int f : order)
        rec.entries.push_back({model.feature_names[f], x[f],
                               attr.phi[f][attr.predicted_class]});
    return rec;
}

std::string attribution_to_json(const AttributionRecord& rec) {
    json entries = json::array();
    for (const auto& e : rec.entries)
        entries.push_back(json{{"feature", e.feature}, {"value", e.value}, {"phi", e.phi}});
    const json doc{{"sample_id", rec.sample_id},
                   {"predicted_class", rec.predicted_class},
                   {"confidence", rec.confidence},
                   {"phi0", rec.phi0},
                   {"entries", std::move(entries)}};
    return doc.dump(2);
}

AttributionRecord attribution_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        AttributionRecord rec;
        rec.sample_id = doc.at("sample_id").get<std::string>();
        rec.predicted_class = doc.at("predicted_class").get<std::string>();
        rec.confidence = doc.at("confidence").get<double>();
        rec.phi0 = doc.at("phi0").get<double>();
        for (const auto& je : doc.at("entries"))
            rec.entries.push_back({je.at("feature").get<std::string>(),
                                   je.at("value").get<double>(),
                                   je.at("phi").get<double>()});
        return rec;
    } catch (const json::exception& e) {
        throw LoadError(std::string("attribution parse error: ") + e.what());
    }
}

} // namespace xmorph
