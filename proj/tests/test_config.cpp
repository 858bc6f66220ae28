#include <doctest.h>

#include "test_util.hpp"
#include "xmorph/config.hpp"
#include "xmorph/error.hpp"

using namespace xmorph;

TEST_SUITE("config") {

TEST_CASE("shipped defaults match the published configuration") {
    const RunConfig cfg;
    CHECK(cfg.boundary_points == 256);   // boundary N
    CHECK(cfg.iwbn_lambda == 0.5);       // IWBN strength
    CHECK(cfg.rei_epsilon == 1e-6);      // REI epsilon
    CHECK(cfg.entropy_m == 2);           // entropy template length
    CHECK(cfg.entropy_r == 0.2);         // entropy tolerance, fraction of sigma
    CHECK(cfg.gbt.rounds == 300);        // estimators
    CHECK(cfg.gbt.max_depth == 8);       // max depth
    CHECK(cfg.gbt.learning_rate == 0.05);
    CHECK(cfg.pca_variance == 0.95);     // retained variance

    // remaining defaults pinned so config drift is visible
    CHECK(cfg.entropy_window == 15);
    CHECK(cfg.entropy_bins == 8);
    CHECK_FALSE(cfg.entropy_on_weighted);
    CHECK(cfg.permen_order == 3);
    CHECK(cfg.permen_delay == 1);
    CHECK(cfg.lyapunov.embed_dim == 3);
    CHECK(cfg.lyapunov.delay == 1);
    CHECK(cfg.lyapunov.theiler == 8);
    CHECK(cfg.lyapunov.max_steps == 12);
    CHECK(cfg.lyapunov.fit_begin == 1);
    CHECK(cfg.lyapunov.fit_end == 8);
    CHECK(cfg.rei_core_frac == 0.3);
    CHECK(cfg.contact_threshold_px == 2.0);
    CHECK(cfg.gbt.lambda_reg == 1.0);
    CHECK(cfg.gbt.gamma == 0.0);
    CHECK(cfg.top_k == 5);
    CHECK(cfg.explain.backend == ExplainConfig::Backend::offline);
}

TEST_CASE("config file parsing with comments and overrides") {
    const auto dir = testutil::scratch_dir("config");
    testutil::write_file(dir / "run.cfg",
                         "# tuning\n"
                         "iwbn_lambda = 0.75\n"
                         "gbt_rounds = 40   # fewer rounds\n"
                         "explain_backend = http\n"
                         "explain_endpoint = http://localhost:9/v1/chat/completions\n");
    const RunConfig cfg = load_config(dir / "run.cfg");
    CHECK(cfg.iwbn_lambda == 0.75);
    CHECK(cfg.gbt.rounds == 40);
    CHECK(cfg.explain.backend == ExplainConfig::Backend::http);
    CHECK(cfg.boundary_points == 256); // untouched default

    RunConfig other = cfg;
    apply_config_entry(other, "top_k", "3");
    CHECK(other.top_k == 3);
}

TEST_CASE("unknown keys and malformed values are rejected") {
    RunConfig cfg;
    CHECK_THROWS_WITH_AS(apply_config_entry(cfg, "no_such_key", "1"),
                         doctest::Contains("unknown key"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "gbt_rounds", "many"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "entropy_on_weighted", "maybe"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "explain_backend", "carrier-pigeon"),
                    ConfigError);

    const auto dir = testutil::scratch_dir("config_bad");
    testutil::write_file(dir / "bad.cfg", "gbt_rounds\n");
    CHECK_THROWS_AS(load_config(dir / "bad.cfg"), ConfigError);
}

} // TEST_SUITE
