#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xmorph/clinical.hpp"
#include "xmorph/config.hpp"
#include "xmorph/error.hpp"
#include "xmorph/explain.hpp"
#include "xmorph/gbt.hpp"
#include "xmorph/pipeline.hpp"
#include "xmorph/segeval.hpp"
#include "xmorph/shap.hpp"
#include "xmorph/synth.hpp"

using json = nlohmann::json;
using namespace xmorph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides; // key=value
};

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
    for (const auto& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("--set", opts.overrides, "config override, key=value (repeatable)");
}

// Resolves deep-feature rows for records via the manifest's deep_key column
// (falling back to the sample id when no manifest entry names one).
std::vector<std::vector<double>> gather_deep_rows(
    const std::vector<FeatureRecord>& records,
    const std::vector<SampleManifest>& manifest, const DeepFeatureTable& table) {
    std::unordered_map<std::string, std::string> key_of;
    for (const auto& m : manifest)
        if (m.deep_key) key_of[m.sample_id] = *m.deep_key;
    std::vector<std::vector<double>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        const auto it = key_of.find(r.sample_id);
        const std::string key = it != key_of.end() ? it->second : r.sample_id;
        const auto row = table.row(key);
        rows.emplace_back(row.begin(), row.end());
    }
    return rows;
}

std::vector<std::string> gather_labels(const std::vector<FeatureRecord>& records,
                                       const std::vector<SampleManifest>& manifest) {
    std::unordered_map<std::string, std::string> label_of;
    for (const auto& m : manifest)
        if (m.label) label_of[m.sample_id] = *m.label;
    std::vector<std::string> labels;
    std::vector<std::string> missing;
    for (const auto& r : records) {
        const auto it = label_of.find(r.sample_id);
        if (it == label_of.end())
            missing.push_back(r.sample_id);
        else
            labels.push_back(it->second);
    }
    if (!missing.empty()) {
        std::string msg = "missing labels for:";
        for (const auto& id : missing) msg += " " + id;
        throw LoadError(msg);
    }
    return labels;
}

json cv_report_json(const CvReport& report, const std::string& configuration) {
    json folds = json::array();
    for (const auto& f : report.folds) {
        folds.push_back(json{{"accuracy", f.accuracy},
                             {"sensitivity", f.sensitivity},
                             {"specificity", f.specificity},
                             {"confusion", f.confusion},
                             {"train_size", f.train_ids.size()},
                             {"test_size", f.test_ids.size()}});
    }
    return json{{"configuration", configuration},
                {"classes", report.class_names},
                {"folds", std::move(folds)},
                {"accuracy_mean", report.mean_accuracy},
                {"accuracy_std", report.std_accuracy},
                {"sensitivity_mean", report.mean_sensitivity},
                {"sensitivity_std", report.std_sensitivity},
                {"specificity_mean", report.mean_specificity},
                {"specificity_std", report.std_specificity}};
}

void print_cv_row(const std::string& name, const CvReport& r) {
    std::printf("%-28s accuracy %.4f ± %.4f   specificity %.4f ± %.4f   "
                "sensitivity %.4f ± %.4f\n",
                name.c_str(), r.mean_accuracy, r.std_accuracy, r.mean_specificity,
                r.std_specificity, r.mean_sensitivity, r.std_sensitivity);
}

int run_extract(const std::string& manifest_path, const std::string& out_path,
                const std::string& deep_path, const CommonOpts& opts) {
    const RunConfig cfg = resolve_config(opts);
    const auto manifest = load_manifest(manifest_path);
    const auto base_dir = std::filesystem::path(manifest_path).parent_path();

    if (!deep_path.empty()) {
        // validate that every referenced deep key resolves before extracting
        const auto table = load_deep_features(deep_path);
        for (const auto& m : manifest) {
            const std::string key = m.deep_key ? *m.deep_key : m.sample_id;
            if (!table.contains(key))
                throw LoadError("deep table is missing key '" + key + "' for sample " +
                                m.sample_id);
        }
    }

    std::vector<ExtractFailure> failures;
    const auto records = extract_batch(manifest, base_dir, cfg, &failures);
    if (records.empty()) {
        std::cerr << "extract: no sample succeeded\n";
        for (const auto& f : failures)
            std::cerr << "  " << f.sample_id << ": " << f.reason << "\n";
        return kExitFatal;
    }
    write_feature_csv(records, out_path);
    std::cout << "wrote " << records.size() << " rows to " << out_path << "\n";
    if (!failures.empty()) {
        std::cerr << failures.size() << " sample(s) skipped:\n";
        for (const auto& f : failures)
            std::cerr << "  " << f.sample_id << ": " << f.reason << "\n";
        return kExitPartial;
    }
    return kExitOk;
}

int run_crossval(const std::string& features_path, const std::string& manifest_path,
                 const std::string& deep_path, const std::string& out_path,
                 std::uint64_t seed, int k, const CommonOpts& opts) {
    const RunConfig cfg = resolve_config(opts);
    const auto records = load_feature_csv(features_path);
    const auto manifest = load_manifest(manifest_path);
    const auto labels = gather_labels(records, manifest);

    json out{{"seed", seed}, {"folds", k}};
    const CvReport tsf_report =
        cross_validate(records, nullptr, labels, k, seed, cfg.gbt, cfg.pca_variance);
    print_cv_row("tumor-specific features", tsf_report);
    out["reports"] = json::array({cv_report_json(tsf_report, "tsf")});

    if (!deep_path.empty()) {
        const auto table = load_deep_features(deep_path);
        const auto deep_rows = gather_deep_rows(records, manifest, table);
        const CvReport fused_report =
            cross_validate(records, &deep_rows, labels, k, seed, cfg.gbt, cfg.pca_variance);
        print_cv_row("fused deep + tumor-specific", fused_report);
        out["reports"].push_back(cv_report_json(fused_report, "fused"));
    }

    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw LoadError("cannot write " + out_path);
        f << out.dump(2) << "\n";
    }
    return kExitOk;
}

int run_train(const std::string& features_path, const std::string& manifest_path,
              const std::string& deep_path, const std::string& out_path,
              const CommonOpts& opts) {
    const RunConfig cfg = resolve_config(opts);
    const auto records = load_feature_csv(features_path);
    const auto manifest = load_manifest(manifest_path);
    const auto labels = gather_labels(records, manifest);

    std::optional<DeepFeatureTable> table;
    std::vector<std::vector<double>> deep_rows;
    if (!deep_path.empty()) {
        table = load_deep_features(deep_path);
        deep_rows = gather_deep_rows(records, manifest, *table);
    }

    const FusionPipeline pipeline = FusionPipeline::fit(
        records, table ? &deep_rows : nullptr, cfg.pca_variance);

    std::set<std::string> unique(labels.begin(), labels.end());
    const std::vector<std::string> class_names(unique.begin(), unique.end());
    std::vector<int> y;
    for (const auto& l : labels)
        y.push_back(static_cast<int>(std::lower_bound(class_names.begin(),
                                                      class_names.end(), l) -
                                     class_names.begin()));

    std::vector<std::vector<double>> X;
    for (std::size_t i = 0; i < records.size(); ++i)
        X.push_back(pipeline.apply(records[i],
                                   table ? std::span<const double>(deep_rows[i])
                                         : std::span<const double>()));

    std::vector<double> loss_curve;
    BoostedEnsemble model =
        train_gbt(X, y, class_names, pipeline.column_names(), cfg.gbt, &loss_curve);
    model.has_pipeline = true;
    model.pipeline = pipeline;
    save_model(model, out_path);
    std::cout << "trained " << model.trees.size() << " trees on " << records.size()
              << " samples; final train log-loss " << loss_curve.back() << "\n"
              << "model written to " << out_path << "\n";
    return kExitOk;
}

struct FusedSample {
    std::string sample_id;
    std::vector<double> x;       // model-space (standardized) vector
    std::vector<double> display; // raw-unit values for reporting
};

std::vector<FusedSample> fuse_for_model(const BoostedEnsemble& model,
                                        const std::string& features_path,
                                        const std::string& manifest_path,
                                        const std::string& deep_path) {
    if (!model.has_pipeline)
        throw SchemaError("model was saved without its fusion pipeline");
    const auto records = load_feature_csv(features_path);

    std::vector<std::vector<double>> deep_rows;
    bool have_deep = false;
    if (model.pipeline.has_deep) {
        if (deep_path.empty())
            throw ConfigError("model expects deep features; pass --deep");
        const auto table = load_deep_features(deep_path);
        std::vector<SampleManifest> manifest;
        if (!manifest_path.empty()) manifest = load_manifest(manifest_path);
        deep_rows = gather_deep_rows(records, manifest, table);
        have_deep = true;
    }

    std::vector<FusedSample> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        FusedSample s;
        s.sample_id = records[i].sample_id;
        const auto deep = have_deep ? std::span<const double>(deep_rows[i])
                                    : std::span<const double>();
        s.x = model.pipeline.apply(records[i], deep);
        s.display = model.pipeline.display_values(records[i], deep);
        out.push_back(std::move(s));
    }
    return out;
}

int run_predict(const std::string& model_path, const std::string& features_path,
                const std::string& manifest_path, const std::string& deep_path,
                const std::string& out_path) {
    const BoostedEnsemble model = load_model(model_path);
    const auto samples = fuse_for_model(model, features_path, manifest_path, deep_path);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + out_path);
    out << "sample_id,predicted_class";
    for (const auto& c : model.class_names) out << ",p_" << c;
    out << "\n";
    for (const auto& s : samples) {
        const auto probs = model.predict_proba(s.x);
        const int cls = static_cast<int>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        out << s.sample_id << "," << model.class_names[cls];
        for (double p : probs) out << "," << format_g6(p);
        out << "\n";
    }
    std::cout << "wrote predictions for " << samples.size() << " samples to " << out_path
              << "\n";
    return kExitOk;
}

int run_explain(const std::string& model_path, const std::string& features_path,
                const std::string& manifest_path, const std::string& deep_path,
                const std::string& sample_id, const std::string& out_dir,
                const std::string& backend, const CommonOpts& opts) {
    RunConfig cfg = resolve_config(opts);
    if (backend == "http")
        cfg.explain.backend = ExplainConfig::Backend::http;
    else if (backend == "offline")
        cfg.explain.backend = ExplainConfig::Backend::offline;
    else if (!backend.empty())
        throw ConfigError("--backend must be offline or http");

    const BoostedEnsemble model = load_model(model_path);
    const auto samples = fuse_for_model(model, features_path, manifest_path, deep_path);

    std::vector<const FusedSample*> chosen;
    for (const auto& s : samples)
        if (sample_id.empty() || s.sample_id == sample_id) chosen.push_back(&s);
    if (chosen.empty()) throw LoadError("sample '" + sample_id + "' not found");

    std::filesystem::create_directories(out_dir);
    for (const FusedSample* s : chosen) {
        const Attribution attr = tree_shap(model, s->x);
        const AttributionRecord rec =
            make_attribution_record(model, attr, s->display, s->sample_id);
        const PromptBundle bundle = build_prompt(rec, cfg.top_k);

        const auto base = std::filesystem::path(out_dir) / s->sample_id;
        {
            std::ofstream f(base.string() + "_attribution.json", std::ios::binary);
            f << attribution_to_json(rec) << "\n";
        }
        {
            std::ofstream f(base.string() + "_prompt.txt", std::ios::binary);
            f << bundle.system_text << "\n" << bundle.user_text << "\n";
        }
        std::string explanation;
        if (cfg.explain.backend == ExplainConfig::Backend::http)
            explanation = call_llm(bundle, cfg.explain);
        else
            explanation = render_offline(bundle).text;
        {
            std::ofstream f(base.string() + "_explanation.txt", std::ios::binary);
            f << explanation;
            if (!explanation.empty() && explanation.back() != '\n') f << "\n";
        }
        std::cout << s->sample_id << ": " << rec.predicted_class << " ("
                  << format_g6(rec.confidence * 100.0) << "%), artifacts in " << out_dir
                  << "\n";
    }
    return kExitOk;
}

int run_eval_seg(const std::string& manifest_path, const std::string& pred_dir,
                 const std::string& out_path) {
    const auto manifest = load_manifest(manifest_path);
    const auto base_dir = std::filesystem::path(manifest_path).parent_path();

    std::vector<std::pair<std::string, MaskMetrics>> samples;
    int failures = 0;
    for (const auto& m : manifest) {
        try {
            const std::filesystem::path mask_rel(m.mask_path);
            const std::filesystem::path gt_path =
                mask_rel.is_absolute() ? mask_rel : base_dir / mask_rel;
            const auto pred_path =
                std::filesystem::path(pred_dir) /
                std::filesystem::path(m.mask_path).filename();
            const BinaryMask gt = load_mask(gt_path);
            const BinaryMask pred = load_mask(pred_path);
            samples.emplace_back(m.label.value_or("unknown"), mask_metrics(pred, gt));
        } catch (const std::exception& e) {
            std::cerr << m.sample_id << ": " << e.what() << "\n";
            ++failures;
        }
    }
    if (samples.empty()) {
        std::cerr << "eval-seg: no sample pair could be evaluated\n";
        return kExitFatal;
    }
    const auto rows = aggregate_report(samples);
    const std::string csv = seg_report_csv(rows);
    std::cout << csv;
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw LoadError("cannot write " + out_path);
        f << csv;
    }
    return failures ? kExitPartial : kExitOk;
}

int run_synth(const std::string& out_dir, int n_per_class, std::uint64_t seed,
              bool with_deep, int deep_dim) {
    const auto info = generate_dataset(out_dir, n_per_class, seed, with_deep, deep_dim);
    std::cout << "generated " << info.n_samples << " samples under " << out_dir << "\n"
              << "manifest: " << info.manifest_path.string() << "\n";
    if (with_deep) std::cout << "deep features: " << info.deep_path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"XMorph tumor morphometrics pipeline"};
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "manifest -> feature CSV");
    std::string ex_manifest, ex_out, ex_deep;
    CommonOpts ex_opts;
    extract->add_option("--manifest", ex_manifest)->required();
    extract->add_option("--out", ex_out)->required();
    extract->add_option("--deep", ex_deep, "deep-feature CSV (keys validated)");
    add_common(extract, ex_opts);

    // crossval
    auto* crossval = app.add_subcommand("crossval", "stratified k-fold evaluation");
    std::string cv_features, cv_manifest, cv_deep, cv_out;
    std::uint64_t cv_seed = 42;
    int cv_k = 5;
    CommonOpts cv_opts;
    crossval->add_option("--features", cv_features)->required();
    crossval->add_option("--manifest", cv_manifest, "labels come from the manifest")->required();
    crossval->add_option("--deep", cv_deep);
    crossval->add_option("--out", cv_out, "report JSON path");
    crossval->add_option("--seed", cv_seed);
    crossval->add_option("--folds", cv_k);
    add_common(crossval, cv_opts);

    // train
    auto* train = app.add_subcommand("train", "fit pipeline + model, save JSON");
    std::string tr_features, tr_manifest, tr_deep, tr_out;
    CommonOpts tr_opts;
    train->add_option("--features", tr_features)->required();
    train->add_option("--manifest", tr_manifest)->required();
    train->add_option("--deep", tr_deep);
    train->add_option("--out", tr_out)->required();
    add_common(train, tr_opts);

    // predict
    auto* predict = app.add_subcommand("predict", "per-sample class probabilities");
    std::string pr_model, pr_features, pr_manifest, pr_deep, pr_out;
    predict->add_option("--model", pr_model)->required();
    predict->add_option("--features", pr_features)->required();
    predict->add_option("--manifest", pr_manifest, "needed when deep keys differ from ids");
    predict->add_option("--deep", pr_deep);
    predict->add_option("--out", pr_out)->required();

    // explain
    auto* explain = app.add_subcommand("explain", "attribution + prompt + narrative");
    std::string xp_model, xp_features, xp_manifest, xp_deep, xp_sample, xp_out, xp_backend;
    CommonOpts xp_opts;
    explain->add_option("--model", xp_model)->required();
    explain->add_option("--features", xp_features)->required();
    explain->add_option("--manifest", xp_manifest);
    explain->add_option("--deep", xp_deep);
    explain->add_option("--sample", xp_sample, "sample id (default: all)");
    explain->add_option("--out-dir", xp_out)->required();
    explain->add_option("--backend", xp_backend, "offline (default) or http");
    add_common(explain, xp_opts);

    // eval-seg
    auto* evalseg = app.add_subcommand("eval-seg", "mask overlap metrics vs ground truth");
    std::string es_manifest, es_pred, es_out;
    evalseg->add_option("--manifest", es_manifest, "ground-truth masks + labels")->required();
    evalseg->add_option("--pred-dir", es_pred, "predicted masks, matched by file name")
        ->required();
    evalseg->add_option("--out", es_out, "report CSV path");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a phantom dataset");
    std::string sy_out;
    int sy_n = 20, sy_deep_dim = 8;
    std::uint64_t sy_seed = 7;
    bool sy_deep = false;
    synth->add_option("--out-dir", sy_out)->required();
    synth->add_option("--n-per-class", sy_n);
    synth->add_option("--seed", sy_seed);
    synth->add_flag("--deep", sy_deep, "also emit pseudo deep features");
    synth->add_option("--deep-dim", sy_deep_dim);

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) return run_extract(ex_manifest, ex_out, ex_deep, ex_opts);
        if (crossval->parsed())
            return run_crossval(cv_features, cv_manifest, cv_deep, cv_out, cv_seed, cv_k,
                                cv_opts);
        if (train->parsed()) return run_train(tr_features, tr_manifest, tr_deep, tr_out, tr_opts);
        if (predict->parsed())
            return run_predict(pr_model, pr_features, pr_manifest, pr_deep, pr_out);
        if (explain->parsed())
            return run_explain(xp_model, xp_features, xp_manifest, xp_deep, xp_sample,
                               xp_out, xp_backend, xp_opts);
        if (evalseg->parsed()) return run_eval_seg(es_manifest, es_pred, es_out);
        if (synth->parsed()) return run_synth(sy_out, sy_n, sy_seed, sy_deep, sy_deep_dim);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    }
    return kExitFatal;
}
