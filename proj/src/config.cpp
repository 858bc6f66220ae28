#include "xmorph/config.hpp"

#include <fstream>

#include "xmorph/error.hpp"

namespace xmorph {

namespace {

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "boundary_points") cfg.boundary_points = to_int(key, value);
    else if (key == "iwbn_lambda") cfg.iwbn_lambda = to_double(key, value);
    else if (key == "entropy_window") cfg.entropy_window = to_int(key, value);
    else if (key == "entropy_bins") cfg.entropy_bins = to_int(key, value);
    else if (key == "entropy_on_weighted") cfg.entropy_on_weighted = to_bool(key, value);
    else if (key == "entropy_m") cfg.entropy_m = to_int(key, value);
    else if (key == "entropy_r") cfg.entropy_r = to_double(key, value);
    else if (key == "permen_order") cfg.permen_order = to_int(key, value);
    else if (key == "permen_delay") cfg.permen_delay = to_int(key, value);
    else if (key == "lyapunov_embed_dim") cfg.lyapunov.embed_dim = to_int(key, value);
    else if (key == "lyapunov_delay") cfg.lyapunov.delay = to_int(key, value);
    else if (key == "lyapunov_theiler") cfg.lyapunov.theiler = to_int(key, value);
    else if (key == "lyapunov_max_steps") cfg.lyapunov.max_steps = to_int(key, value);
    else if (key == "lyapunov_fit_begin") cfg.lyapunov.fit_begin = to_int(key, value);
    else if (key == "lyapunov_fit_end") cfg.lyapunov.fit_end = to_int(key, value);
    else if (key == "rei_epsilon") cfg.rei_epsilon = to_double(key, value);
    else if (key == "rei_core_frac") cfg.rei_core_frac = to_double(key, value);
    else if (key == "contact_threshold_px") cfg.contact_threshold_px = to_double(key, value);
    else if (key == "pca_variance") cfg.pca_variance = to_double(key, value);
    else if (key == "gbt_rounds") cfg.gbt.rounds = to_int(key, value);
    else if (key == "gbt_max_depth") cfg.gbt.max_depth = to_int(key, value);
    else if (key == "gbt_learning_rate") cfg.gbt.learning_rate = to_double(key, value);
    else if (key == "gbt_lambda_reg") cfg.gbt.lambda_reg = to_double(key, value);
    else if (key == "gbt_gamma") cfg.gbt.gamma = to_double(key, value);
    else if (key == "top_k") cfg.top_k = to_int(key, value);
    else if (key == "explain_backend") {
        if (value == "offline") cfg.explain.backend = ExplainConfig::Backend::offline;
        else if (value == "http") cfg.explain.backend = ExplainConfig::Backend::http;
        else throw ConfigError("config: explain_backend must be offline or http");
    }
    else if (key == "explain_endpoint") cfg.explain.endpoint = value;
    else if (key == "explain_model") cfg.explain.model = value;
    else if (key == "explain_api_key_env") cfg.explain.api_key_env = value;
    else if (key == "explain_timeout_s") cfg.explain.timeout_s = to_double(key, value);
    else if (key == "explain_max_retries") cfg.explain.max_retries = to_int(key, value);
    else if (key == "explain_backoff_ms") cfg.explain.backoff_ms = to_int(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

} // namespace xmorph
