#include <doctest.h>

#include <cmath>
#include <set>

#include "test_util.hpp"
#include "xmorph/error.hpp"
#include "xmorph/gbt.hpp"
#include "xmorph/rng.hpp"

using namespace xmorph;

namespace {

// 2-class XOR layout in 2D with the given margin between quadrants
void xor_dataset(Rng& rng, int n, double margin, std::vector<std::vector<double>>& X,
                 std::vector<int>& y) {
    for (int i = 0; i < n; ++i) {
        const double qx = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double qy = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double x0 = qx * (margin + rng.uniform());
        const double x1 = qy * (margin + rng.uniform());
        X.push_back({x0, x1});
        y.push_back((qx > 0) != (qy > 0) ? 1 : 0);
    }
}

GbtParams small_params(int rounds, int depth = 3) {
    GbtParams p;
    p.rounds = rounds;
    p.max_depth = depth;
    p.learning_rate = 0.3;
    return p;
}

} // namespace

TEST_SUITE("gbt") {

TEST_CASE("degenerate inputs are rejected") {
    const std::vector<std::vector<double>> X = {{1, 2}, {3, 4}};
    CHECK_THROWS_AS(train_gbt(X, {0, 0}, {"a", "b"}, {"f0", "f1"}, small_params(5)),
                    PreconditionError);
    CHECK_THROWS_AS(
        train_gbt({{1.0, std::nan("")}, {1, 2}}, {0, 1}, {"a", "b"}, {"f0", "f1"},
                  small_params(5)),
        PreconditionError);
}

TEST_CASE("XOR is learned to >= 0.99 training accuracy") {
    Rng rng(2);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    xor_dataset(rng, 200, 0.2, X, y);

    GbtParams p;
    p.rounds = 50;
    p.max_depth = 2; // depth-2 trees represent XOR
    p.learning_rate = 0.3;
    const auto model = train_gbt(X, y, {"neg", "pos"}, {"f0", "f1"}, p);

    int correct = 0;
    for (std::size_t i = 0; i < X.size(); ++i)
        correct += model.predict_class(X[i]) == y[i];
    CHECK(static_cast<double>(correct) / X.size() >= 0.99);
}

TEST_CASE("training log-loss is non-increasing round over round") {
    Rng rng(5);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int i = 0; i < 120; ++i) {
        const int cls = static_cast<int>(rng.below(3));
        X.push_back({cls + 0.6 * rng.normal(), rng.normal(), 0.3 * cls + rng.normal()});
        y.push_back(cls);
    }
    std::vector<double> losses;
    train_gbt(X, y, {"a", "b", "c"}, {"f0", "f1", "f2"}, small_params(40), &losses);
    REQUIRE(losses.size() == 40);
    for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1] + 1e-12);
}

TEST_CASE("leaf weight of a stump equals -G/(H+lambda) by independent summation") {
    // one feature, no useful split (constant feature) -> root is a leaf
    std::vector<std::vector<double>> X(10, std::vector<double>{1.0});
    std::vector<int> y(10, 0);
    y[0] = y[1] = y[2] = 1;

    GbtParams p;
    p.rounds = 1;
    p.max_depth = 3;
    p.lambda_reg = 1.0;
    const auto model = train_gbt(X, y, {"a", "b"}, {"f0"}, p);

    // round 0, class 0: softmax at zero margins gives p = 0.5 for both classes
    double g = 0, h = 0;
    for (int i = 0; i < 10; ++i) {
        const double prob = 0.5;
        g += prob - (y[i] == 0 ? 1.0 : 0.0);
        h += prob * (1 - prob);
    }
    const double expected = -g / (h + p.lambda_reg);
    REQUIRE(model.trees[0].nodes.size() == 1);
    CHECK(model.trees[0].nodes[0].leaf_value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("prediction invariants") {
    Rng rng(7);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int i = 0; i < 90; ++i) {
        const int cls = static_cast<int>(rng.below(3));
        X.push_back({cls * 1.0 + 0.3 * rng.normal(), rng.normal()});
        y.push_back(cls);
    }
    const auto model = train_gbt(X, y, {"a", "b", "c"}, {"f0", "f1"}, small_params(15));

    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> x = {rng.uniform(-2, 4), rng.uniform(-3, 3)};
        const auto probs = model.predict_proba(x);
        double sum = 0;
        for (double v : probs) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-9);

        const auto m = model.margins(x);
        const auto argmax_m =
            std::max_element(m.begin(), m.end()) - m.begin();
        const auto argmax_p =
            std::max_element(probs.begin(), probs.end()) - probs.begin();
        CHECK(argmax_m == argmax_p);
    }

    CHECK_THROWS_AS(model.predict_proba(std::vector<double>{1.0}), PreconditionError);
}

TEST_CASE("monotone feature transforms preserve predictions at the training points") {
    Rng rng(13);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int i = 0; i < 80; ++i) {
        const int cls = static_cast<int>(rng.below(2));
        X.push_back({cls + 0.4 * rng.normal(), rng.normal()});
        y.push_back(cls);
    }
    const auto model = train_gbt(X, y, {"a", "b"}, {"f0", "f1"}, small_params(10));

    // strictly increasing transform of feature 0
    auto warp = [](double v) { return std::exp(0.7 * v) + 0.1 * v; };
    std::vector<std::vector<double>> Xw = X;
    for (auto& row : Xw) row[0] = warp(row[0]);
    const auto model_w = train_gbt(Xw, y, {"a", "b"}, {"f0", "f1"}, small_params(10));

    for (std::size_t i = 0; i < X.size(); ++i)
        CHECK(model.predict_class(X[i]) == model_w.predict_class(Xw[i]));
}

TEST_CASE("zero-round edge: uniform base scores give the uniform distribution") {
    BoostedEnsemble model;
    model.class_names = {"a", "b", "c"};
    model.feature_names = {"f0"};
    model.base_score = {0.0, 0.0, 0.0};
    const auto probs = model.predict_proba(std::vector<double>{0.5});
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("confusion summary matches hand-computed values") {
    // rows = truth, cols = prediction
    const std::vector<std::vector<long long>> confusion = {
        {8, 1, 1}, {2, 6, 2}, {0, 1, 9}};
    const auto s = summarize_confusion(confusion);
    CHECK(s.accuracy == doctest::Approx(23.0 / 30).epsilon(1e-12));
    const double sens = (8.0 / 10 + 6.0 / 10 + 9.0 / 10) / 3;
    CHECK(s.macro_sensitivity == doctest::Approx(sens).epsilon(1e-12));
    const double spec0 = 18.0 / 20, spec1 = 18.0 / 20, spec2 = 17.0 / 20;
    CHECK(s.macro_specificity ==
          doctest::Approx((spec0 + spec1 + spec2) / 3).epsilon(1e-12));
}

TEST_CASE("stratified folds: balanced, deterministic, class-aware") {
    std::vector<int> labels;
    for (int i = 0; i < 23; ++i) labels.push_back(0);
    for (int i = 0; i < 31; ++i) labels.push_back(1);
    for (int i = 0; i < 17; ++i) labels.push_back(2);

    const auto f1 = stratified_folds(labels, 3, 5, 42);
    const auto f2 = stratified_folds(labels, 3, 5, 42);
    CHECK(f1 == f2);
    const auto f3 = stratified_folds(labels, 3, 5, 43);
    CHECK(f1 != f3);

    for (int cls = 0; cls < 3; ++cls) {
        std::vector<int> per_fold(5, 0);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) ++per_fold[f1[i]];
        const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
        CHECK(*hi - *lo <= 1);
    }

    CHECK_THROWS_AS(stratified_folds({0, 0, 1}, 2, 5, 1), PreconditionError);
}

TEST_CASE("model JSON round trip is prediction-exact") {
    Rng rng(29);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        const int cls = static_cast<int>(rng.below(3));
        X.push_back({cls + 0.5 * rng.normal(), rng.normal(), rng.uniform()});
        y.push_back(cls);
    }
    auto model = train_gbt(X, y, {"a", "b", "c"}, {"f0", "f1", "f2"}, small_params(12));

    const auto dir = testutil::scratch_dir("gbt_json");
    save_model(model, dir / "m.json");
    const auto back = load_model(dir / "m.json");

    CHECK(back.class_names == model.class_names);
    CHECK(back.feature_names == model.feature_names);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> x = {rng.uniform(-2, 4), rng.normal(), rng.uniform()};
        const auto a = model.predict_proba(x);
        const auto b = back.predict_proba(x);
        for (std::size_t c = 0; c < a.size(); ++c) CHECK(a[c] == b[c]); // bit-exact
    }
}

TEST_CASE("model JSON failure modes") {
    const auto dir = testutil::scratch_dir("gbt_json_bad");
    testutil::write_file(dir / "trunc.json", "{\"schema_version\": 1, \"hyper");
    CHECK_THROWS_AS(load_model(dir / "trunc.json"), LoadError);

    testutil::write_file(dir / "v2.json", "{\"schema_version\": 2}");
    CHECK_THROWS_WITH_AS(load_model(dir / "v2.json"),
                         doctest::Contains("schema version 2"), SchemaError);
}

TEST_CASE("cross_validate: separable synthetic records reach 0.90") {
    Rng rng(55);
    std::vector<FeatureRecord> recs;
    std::vector<std::string> labels;
    const char* names[3] = {"alpha", "beta", "gamma"};
    for (int i = 0; i < 150; ++i) {
        const int cls = static_cast<int>(rng.below(3));
        FeatureRecord r;
        r.sample_id = "s" + std::to_string(i);
        for (int f = 0; f < kTsfCount; ++f)
            r.set(static_cast<TsfFeature>(f), rng.normal());
        r.values[kIrregularity] = cls * 1.2 + 0.35 * rng.normal(); // separating column
        if (i % 6 == 5) r.present[kMls] = false;                   // exercise imputation
        recs.push_back(r);
        labels.push_back(names[cls]);
    }

    GbtParams p;
    p.rounds = 40;
    p.max_depth = 4;
    p.learning_rate = 0.15;
    const auto report = cross_validate(recs, nullptr, labels, 5, 42, p, 0.95);
    CHECK(report.mean_accuracy >= 0.90);
    CHECK(report.folds.size() == 5);
    CHECK(report.class_names == std::vector<std::string>{"alpha", "beta", "gamma"});

    // no leakage: every pipeline fit saw exactly the train rows of its fold
    for (const auto& fold : report.folds) {
        std::set<int> train(fold.train_ids.begin(), fold.train_ids.end());
        std::set<int> test(fold.test_ids.begin(), fold.test_ids.end());
        CHECK(train.size() + test.size() == recs.size());
        for (int id : test) CHECK(train.count(id) == 0);
    }

    // determinism under the same seed
    const auto again = cross_validate(recs, nullptr, labels, 5, 42, p, 0.95);
    CHECK(again.mean_accuracy == report.mean_accuracy);
    for (std::size_t f = 0; f < again.folds.size(); ++f) {
        CHECK(again.folds[f].test_ids == report.folds[f].test_ids);
        CHECK(again.folds[f].confusion == report.folds[f].confusion);
    }
}

} // TEST_SUITE
