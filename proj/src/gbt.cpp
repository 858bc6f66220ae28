#include "xmorph/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "xmorph/error.hpp"
#include "xmorph/rng.hpp"

namespace xmorph {

using json = nlohmann::json;

double RegTree::predict(std::span<const double> x) const {
    int node = 0;
    while (!nodes[node].is_leaf()) {
        const auto& nd = nodes[node];
        node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return nodes[node].leaf_value;
}

double RegTree::expected_value() const {
    const double root_cover = nodes[0].cover;
    if (root_cover <= 0) return nodes[0].is_leaf() ? nodes[0].leaf_value : 0.0;
    double sum = 0;
    for (const auto& nd : nodes)
        if (nd.is_leaf()) sum += nd.leaf_value * nd.cover;
    return sum / root_cover;
}

std::vector<double> softmax(std::span<const double> margins) {
    double hi = margins[0];
    for (double m : margins) hi = std::max(hi, m);
    std::vector<double> out(margins.size());
    double sum = 0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        out[i] = std::exp(margins[i] - hi);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

std::vector<double> BoostedEnsemble::margins(std::span<const double> x) const {
    if (x.size() != n_features())
        throw PreconditionError("predict: feature length mismatch, got " +
                                std::to_string(x.size()) + ", model expects " +
                                std::to_string(n_features()));
    std::vector<double> m(base_score);
    const std::size_t C = n_classes();
    for (std::size_t t = 0; t < trees.size(); ++t)
        m[t % C] += params.learning_rate * trees[t].predict(x);
    return m;
}

std::vector<double> BoostedEnsemble::predict_proba(std::span<const double> x) const {
    return softmax(margins(x));
}

int BoostedEnsemble::predict_class(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double softmax_log_loss(const std::vector<std::vector<double>>& margins,
                        const std::vector<int>& labels) {
    double loss = 0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const auto p = softmax(margins[i]);
        loss -= std::log(std::max(p[labels[i]], 1e-300));
    }
    return loss / margins.size();
}

// ---------------------------------------------------------------------------
// Exact greedy tree construction on second-order gradients
// ---------------------------------------------------------------------------

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0;
    double gain = 0;
};

struct TreeBuilder {
    const std::vector<std::vector<double>>& rows;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    const GbtParams& params;
    RegTree tree;

    static double score(double g, double h, double lambda) {
        return g * g / (h + lambda);
    }

    // best split for one feature over the node's instances; instances arrive
    // sorted by (feature value, index) so the scan order is reproducible
    SplitChoice scan_feature(int feature, std::vector<int>& idx, double g_total,
                             double h_total) const {
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            const double va = rows[a][feature], vb = rows[b][feature];
            if (va != vb) return va < vb;
            return a < b;
        });
        SplitChoice best;
        best.feature = feature;
        double g_left = 0, h_left = 0;
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            g_left += grad[idx[i]];
            h_left += hess[idx[i]];
            const double v = rows[idx[i]][feature];
            const double v_next = rows[idx[i + 1]][feature];
            if (v == v_next) continue; // thresholds only between distinct values
            const double gain =
                0.5 * (score(g_left, h_left, params.lambda_reg) +
                       score(g_total - g_left, h_total - h_left, params.lambda_reg) -
                       score(g_total, h_total, params.lambda_reg)) -
                params.gamma;
            if (!best.found || gain > best.gain) {
                best.found = true;
                best.gain = gain;
                best.threshold = v + 0.5 * (v_next - v);
            }
        }
        return best;
    }

    int build(std::vector<int> instances, int depth) {
        double g_total = 0, h_total = 0;
        for (int i : instances) {
            g_total += grad[i];
            h_total += hess[i];
        }

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_id].cover = static_cast<double>(instances.size());

        SplitChoice best;
        if (depth < params.max_depth && instances.size() >= 2) {
            const int n_features = static_cast<int>(rows[0].size());
            std::vector<SplitChoice> per_feature(n_features);
#pragma omp parallel for schedule(dynamic)
            for (int f = 0; f < n_features; ++f) {
                std::vector<int> idx = instances;
                per_feature[f] = scan_feature(f, idx, g_total, h_total);
            }
            // fixed feature order resolves ties toward the lowest index
            for (const auto& cand : per_feature) {
                if (!cand.found) continue;
                if (!best.found || cand.gain > best.gain) best = cand;
            }
        }

        if (!best.found || best.gain <= 0) {
            tree.nodes[node_id].leaf_value = -g_total / (h_total + params.lambda_reg);
            return node_id;
        }

        std::vector<int> left, right;
        for (int i : instances) {
            if (rows[i][best.feature] < best.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        instances.clear();
        instances.shrink_to_fit();

        tree.nodes[node_id].feature = best.feature;
        tree.nodes[node_id].threshold = best.threshold;
        const int l = build(std::move(left), depth + 1);
        tree.nodes[node_id].left = l;
        const int r = build(std::move(right), depth + 1);
        tree.nodes[node_id].right = r;
        return node_id;
    }
};

} // namespace

BoostedEnsemble train_gbt(const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels,
                          const std::vector<std::string>& class_names,
                          const std::vector<std::string>& feature_names,
                          const GbtParams& params, std::vector<double>* loss_curve) {
    if (rows.empty() || rows.size() != labels.size())
        throw PreconditionError("train_gbt: rows/labels mismatch");
    if (params.rounds < 1) throw PreconditionError("train_gbt: rounds must be >= 1");
    const std::size_t d = rows[0].size();
    if (d == 0 || d != feature_names.size())
        throw PreconditionError("train_gbt: feature name count mismatch");
    for (const auto& r : rows) {
        if (r.size() != d) throw PreconditionError("train_gbt: ragged rows");
        for (double v : r)
            if (!std::isfinite(v)) throw PreconditionError("train_gbt: non-finite feature");
    }
    const int C = static_cast<int>(class_names.size());
    std::set<int> distinct(labels.begin(), labels.end());
    if (C < 2 || static_cast<int>(distinct.size()) < 2)
        throw PreconditionError("train_gbt: need >= 2 classes present");
    for (int y : labels)
        if (y < 0 || y >= C) throw PreconditionError("train_gbt: label out of range");

    const std::size_t n = rows.size();
    BoostedEnsemble model;
    model.params = params;
    model.class_names = class_names;
    model.feature_names = feature_names;
    model.base_score.assign(C, 0.0);

    std::vector<std::vector<double>> margins(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);

    for (int round = 0; round < params.rounds; ++round) {
        // softmax probabilities at the current margins
        std::vector<std::vector<double>> probs(n);
        for (std::size_t i = 0; i < n; ++i) probs[i] = softmax(margins[i]);

        for (int c = 0; c < C; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs[i][c];
                grad[i] = p - (labels[i] == c ? 1.0 : 0.0);
                hess[i] = std::max(p * (1.0 - p), 1e-16);
            }
            TreeBuilder builder{rows, grad, hess, params, {}};
            builder.build(all, 0);
            RegTree tree = std::move(builder.tree);
            for (std::size_t i = 0; i < n; ++i)
                margins[i][c] += params.learning_rate * tree.predict(rows[i]);
            model.trees.push_back(std::move(tree));
        }
        if (loss_curve) loss_curve->push_back(softmax_log_loss(margins, labels));
    }
    return model;
}

// ---------------------------------------------------------------------------
// JSON persistence
// ---------------------------------------------------------------------------

namespace {

json stats_to_json(const StandardizationStats& s) {
    return json{{"mean", s.mean},
                {"stdev", s.stdev},
                {"zero_variance", std::vector<int>(s.zero_variance.begin(),
                                                   s.zero_variance.end())}};
}

StandardizationStats stats_from_json(const json& j) {
    StandardizationStats s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stdev = j.at("stdev").get<std::vector<double>>();
    for (int v : j.at("zero_variance").get<std::vector<int>>())
        s.zero_variance.push_back(v != 0);
    return s;
}

json pca_to_json(const PcaModel& m) {
    return json{{"input_dim", m.input_dim},
                {"k", m.k},
                {"components", m.components},
                {"explained_variance_ratio", m.explained_variance_ratio},
                {"mean", m.mean}};
}

PcaModel pca_from_json(const json& j) {
    PcaModel m;
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.k = j.at("k").get<std::size_t>();
    m.components = j.at("components").get<std::vector<double>>();
    m.explained_variance_ratio =
        j.at("explained_variance_ratio").get<std::vector<double>>();
    m.mean = j.at("mean").get<std::vector<double>>();
    return m;
}

} // namespace

void save_model(const BoostedEnsemble& model, const std::filesystem::path& path) {
    json trees = json::array();
    for (const auto& tree : model.trees) {
        json nodes = json::array();
        for (const auto& nd : tree.nodes)
            nodes.push_back(json{{"feature", nd.feature},
                                 {"threshold", nd.threshold},
                                 {"left", nd.left},
                                 {"right", nd.right},
                                 {"leaf_value", nd.leaf_value},
                                 {"cover", nd.cover}});
        trees.push_back(std::move(nodes));
    }

    json doc{{"schema_version", kModelSchemaVersion},
             {"hyperparams",
              {{"rounds", model.params.rounds},
               {"max_depth", model.params.max_depth},
               {"learning_rate", model.params.learning_rate},
               {"lambda_reg", model.params.lambda_reg},
               {"gamma", model.params.gamma}}},
             {"class_names", model.class_names},
             {"feature_names", model.feature_names},
             {"base_score", model.base_score},
             {"trees", std::move(trees)},
             {"has_pipeline", model.has_pipeline}};

    if (model.has_pipeline) {
        json pipe{{"has_deep", model.pipeline.has_deep},
                  {"medians", model.pipeline.medians},
                  {"tsf_stats", stats_to_json(model.pipeline.tsf_stats)}};
        if (model.pipeline.has_deep) {
            pipe["deep_stats"] = stats_to_json(model.pipeline.deep_stats);
            pipe["pca"] = pca_to_json(model.pipeline.pca);
        }
        doc["pipeline"] = std::move(pipe);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw LoadError("write failed: " + path.string());
}

BoostedEnsemble load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": model parse error: " + e.what());
    }

    const int version = doc.value("schema_version", -1);
    if (version != kModelSchemaVersion)
        throw SchemaError(path.string() + ": model schema version " +
                          std::to_string(version) + ", reader supports " +
                          std::to_string(kModelSchemaVersion));

    try {
        BoostedEnsemble model;
        const auto& hp = doc.at("hyperparams");
        model.params.rounds = hp.at("rounds").get<int>();
        model.params.max_depth = hp.at("max_depth").get<int>();
        model.params.learning_rate = hp.at("learning_rate").get<double>();
        model.params.lambda_reg = hp.at("lambda_reg").get<double>();
        model.params.gamma = hp.at("gamma").get<double>();
        model.class_names = doc.at("class_names").get<std::vector<std::string>>();
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        model.base_score = doc.at("base_score").get<std::vector<double>>();
        for (const auto& jt : doc.at("trees")) {
            RegTree tree;
            for (const auto& jn : jt) {
                TreeNode nd;
                nd.feature = jn.at("feature").get<int>();
                nd.threshold = jn.at("threshold").get<double>();
                nd.left = jn.at("left").get<int>();
                nd.right = jn.at("right").get<int>();
                nd.leaf_value = jn.at("leaf_value").get<double>();
                nd.cover = jn.at("cover").get<double>();
                tree.nodes.push_back(nd);
            }
            model.trees.push_back(std::move(tree));
        }
        model.has_pipeline = doc.value("has_pipeline", false);
        if (model.has_pipeline) {
            const auto& pipe = doc.at("pipeline");
            model.pipeline.has_deep = pipe.at("has_deep").get<bool>();
            model.pipeline.medians = pipe.at("medians").get<std::vector<double>>();
            model.pipeline.tsf_stats = stats_from_json(pipe.at("tsf_stats"));
            if (model.pipeline.has_deep) {
                model.pipeline.deep_stats = stats_from_json(pipe.at("deep_stats"));
                model.pipeline.pca = pca_from_json(pipe.at("pca"));
            }
        }
        return model;
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": bad model payload: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

ConfusionSummary summarize_confusion(const std::vector<std::vector<long long>>& confusion) {
    const std::size_t C = confusion.size();
    long long total = 0, correct = 0;
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < C; ++j) {
            total += confusion[i][j];
            if (i == j) correct += confusion[i][j];
        }

    ConfusionSummary s;
    s.accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
    double sens = 0, spec = 0;
    for (std::size_t c = 0; c < C; ++c) {
        long long tp = confusion[c][c], fn = 0, fp = 0;
        for (std::size_t j = 0; j < C; ++j)
            if (j != c) {
                fn += confusion[c][j];
                fp += confusion[j][c];
            }
        const long long tn = total - tp - fn - fp;
        sens += tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        spec += tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
    }
    s.macro_sensitivity = sens / C;
    s.macro_specificity = spec / C;
    return s;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int k,
                                  std::uint64_t seed) {
    if (k < 2) throw PreconditionError("stratified_folds: k must be >= 2");
    std::vector<std::vector<int>> by_class(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));
    for (const auto& members : by_class)
        if (static_cast<int>(members.size()) < k)
            throw PreconditionError("stratified_folds: a class has fewer samples than k");

    Rng rng(seed);
    std::vector<int> fold(labels.size(), 0);
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t pos = 0; pos < members.size(); ++pos)
            fold[members[pos]] = static_cast<int>(pos % k);
    }
    return fold;
}

CvReport cross_validate(std::span<const FeatureRecord> records,
                        const std::vector<std::vector<double>>* deep_rows,
                        const std::vector<std::string>& labels, int k, std::uint64_t seed,
                        const GbtParams& params, double variance_target) {
    if (records.size() != labels.size())
        throw PreconditionError("cross_validate: records/labels mismatch");

    CvReport report;
    std::set<std::string> unique(labels.begin(), labels.end());
    report.class_names.assign(unique.begin(), unique.end()); // lexicographic
    const int C = static_cast<int>(report.class_names.size());
    if (C < 2) throw PreconditionError("cross_validate: need >= 2 classes");

    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        y[i] = static_cast<int>(std::lower_bound(report.class_names.begin(),
                                                 report.class_names.end(), labels[i]) -
                                report.class_names.begin());

    const auto fold_of = stratified_folds(y, C, k, seed);

    for (int fold = 0; fold < k; ++fold) {
        FoldResult fr;
        std::vector<FeatureRecord> train_recs;
        std::vector<std::vector<double>> train_deep;
        std::vector<int> train_y;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (fold_of[i] == fold) {
                fr.test_ids.push_back(static_cast<int>(i));
            } else {
                fr.train_ids.push_back(static_cast<int>(i));
                train_recs.push_back(records[i]);
                train_y.push_back(y[i]);
                if (deep_rows) train_deep.push_back((*deep_rows)[i]);
            }
        }

        const FusionPipeline pipeline = FusionPipeline::fit(
            train_recs, deep_rows ? &train_deep : nullptr, variance_target, fr.train_ids);

        std::vector<std::vector<double>> X;
        X.reserve(train_recs.size());
        for (std::size_t i = 0; i < train_recs.size(); ++i)
            X.push_back(pipeline.apply(train_recs[i],
                                       deep_rows ? std::span<const double>(train_deep[i])
                                                 : std::span<const double>()));

        const BoostedEnsemble model = train_gbt(X, train_y, report.class_names,
                                                pipeline.column_names(), params);

        fr.confusion.assign(C, std::vector<long long>(C, 0));
        for (int idx : fr.test_ids) {
            const auto fused = pipeline.apply(
                records[idx], deep_rows ? std::span<const double>((*deep_rows)[idx])
                                        : std::span<const double>());
            const int pred = model.predict_class(fused);
            ++fr.confusion[y[idx]][pred];
        }
        const auto s = summarize_confusion(fr.confusion);
        fr.accuracy = s.accuracy;
        fr.sensitivity = s.macro_sensitivity;
        fr.specificity = s.macro_specificity;
        report.folds.push_back(std::move(fr));
    }

    auto mean_std = [&](auto member, double& mean, double& stdev) {
        mean = 0;
        for (const auto& f : report.folds) mean += f.*member;
        mean /= report.folds.size();
        double var = 0;
        for (const auto& f : report.folds) var += (f.*member - mean) * (f.*member - mean);
        stdev = std::sqrt(var / report.folds.size());
    };
    mean_std(&FoldResult::accuracy, report.mean_accuracy, report.std_accuracy);
    mean_std(&FoldResult::sensitivity, report.mean_sensitivity, report.std_sensitivity);
    mean_std(&FoldResult::specificity, report.mean_specificity, report.std_specificity);
    return report;
}

} // namespace xmorph
