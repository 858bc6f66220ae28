#include "xmorph/explain.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "xmorph/error.hpp"

namespace xmorph {

using json = nlohmann::json;

const std::string& explain_system_prompt() {
    static const std::string text =
        "You are an expert neuro-oncologist. Analyze the provided quantitative features "
        "to explain the tumor classification. Do NOT hallucinate clinical history not "
        "present in the data.";
    return text;
}

namespace {

std::string fixed(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace

PromptBundle build_prompt(const AttributionRecord& record, int k) {
    if (record.entries.empty()) throw PreconditionError("build_prompt: empty attribution");
    if (k < 1) throw PreconditionError("build_prompt: k must be >= 1");

    PromptBundle bundle;
    bundle.system_text = explain_system_prompt();
    bundle.predicted_class = record.predicted_class;
    bundle.confidence = record.confidence;

    std::string user = "Diagnosis: " + record.predicted_class + " (" +
                       fixed(record.confidence * 100.0, "%.1f") + "%). Key Features: ";
    const int count = std::min<int>(k, static_cast<int>(record.entries.size()));
    for (int i = 0; i < count; ++i) {
        const auto& e = record.entries[i];
        user += e.feature + ": " + fixed(e.value, "%.4f") + " (Impact: " +
                fixed(e.phi, "%+.4f") + "); ";
        bundle.triplets.push_back({e.feature, e.value, e.phi});
    }
    bundle.user_text = std::move(user);
    return bundle;
}

namespace {

// Clinical reading per feature; sentences must not mention any other
// feature's column name, so the narrative can only reference features that
// are actually in the bundle.
const std::map<std::string, std::string>& phrase_table() {
    static const std::map<std::string, std::string> table = {
        {"irregularity", "global deviation of the boundary from a regular outline"},
        {"roughness", "fine-scale serration along the contour"},
        {"area", "the cross-sectional size of the lesion"},
        {"mean_radius", "the overall radial extent of the lesion"},
        {"mean_local_entropy",
         "irregular, information-dense boundary segments consistent with infiltrative "
         "growth"},
        {"weight_range", "focal concentration of boundary complexity"},
        {"enhancement_factor",
         "amplification of boundary variability under information weighting"},
        {"fractal_dimension", "self-similar, space-filling boundary complexity"},
        {"approx_entropy", "unpredictability of the radial boundary profile"},
        {"sample_entropy", "low self-similarity of boundary fluctuations"},
        {"perm_entropy", "disordered ordinal structure of the boundary signal"},
        {"lyapunov", "divergent, chaos-like boundary dynamics"},
        {"rei", "peripheral rim uptake relative to the lesion core"},
        {"d_skull", "the gap between the lesion margin and the inner skull surface"},
        {"contact_ratio", "the extent of skull contact along the lesion margin"},
        {"mls", "displacement of midline structures by mass effect"},
        {"iw_irregularity", "boundary fluctuation after information weighting"},
        {"iw_roughness", "fine-scale jaggedness after information weighting"},
    };
    return table;
}

const std::string kDeepPhrase = "a learned texture component from the deep-feature stream";
const std::string kGenericPhrase = "an auxiliary quantitative descriptor";

} // namespace

OfflineExplanation render_offline(const PromptBundle& bundle) {
    OfflineExplanation out;
    std::string text = "Predicted class: " + bundle.predicted_class + " (confidence " +
                       fixed(bundle.confidence * 100.0, "%.1f") + "%).\n";
    for (const auto& t : bundle.triplets) {
        const auto& table = phrase_table();
        const auto it = table.find(t.name);
        std::string phrase;
        if (it != table.end()) {
            phrase = it->second;
        } else if (t.name.rfind("pca_", 0) == 0) {
            phrase = kDeepPhrase;
        } else {
            phrase = kGenericPhrase;
            out.unknown_feature = true;
        }
        if (t.phi >= 0) {
            text += "The " + t.name + " value of " + fixed(t.value, "%.4f") +
                    " reflects " + phrase + ", supporting the " + bundle.predicted_class +
                    " call (impact " + fixed(t.phi, "%+.4f") + ").\n";
        } else {
            text += "The " + t.name + " value of " + fixed(t.value, "%.4f") +
                    " reflects " + phrase + ", which argues against this class (impact " +
                    fixed(t.phi, "%+.4f") + ").\n";
        }
    }
    if (bundle.confidence < 0.85)
        text += "Confidence is limited; correlation with imaging review is advised "
                "before acting on this classification.\n";
    out.text = std::move(text);
    return out;
}

namespace {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint must start with http:// or https://: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

std::string call_llm(const PromptBundle& bundle, const ExplainConfig& config) {
    if (config.backend != ExplainConfig::Backend::http)
        throw ConfigError("call_llm requires the http backend");
    if (config.endpoint.empty()) throw ConfigError("call_llm: endpoint not configured");
    if (config.api_key_env.empty())
        throw LlmError(LlmError::Kind::missing_key, "api key environment variable not named");
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw LlmError(LlmError::Kind::missing_key,
                       "environment variable " + config.api_key_env + " is not set");

    const ParsedUrl url = parse_url(config.endpoint);
    const json body{{"model", config.model},
                    {"messages",
                     json::array({json{{"role", "system"}, {"content", bundle.system_text}},
                                  json{{"role", "user"}, {"content", bundle.user_text}}})},
                    {"temperature", 0}};
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            const int delay = config.backoff_ms * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }

        httplib::Client client(url.base);
        client.set_connection_timeout(std::chrono::duration<double>(config.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(config.timeout_s));
        client.set_write_timeout(std::chrono::duration<double>(config.timeout_s));
        client.set_bearer_token_auth(key);

        auto res = client.Post(url.path, payload, "application/json");
        if (!res) {
            const auto err = res.error();
            const bool timeout = err == httplib::Error::ConnectionTimeout ||
                                 err == httplib::Error::Read || err == httplib::Error::Write;
            last_error = httplib::to_string(err);
            if (attempt == config.max_retries)
                throw LlmError(timeout ? LlmError::Kind::timeout : LlmError::Kind::network,
                               "LLM request failed: " + last_error);
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP " + std::to_string(res->status);
            if (attempt == config.max_retries)
                throw LlmError(LlmError::Kind::http_status,
                               "LLM endpoint returned " + last_error);
            continue;
        }
        try {
            const json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw LlmError(LlmError::Kind::bad_response,
                           std::string("malformed LLM response: ") + e.what());
        }
    }
    throw LlmError(LlmError::Kind::network, "LLM request failed: " + last_error);
}

} // namespace xmorph
