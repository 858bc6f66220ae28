#pragma once

#include <string>
#include <vector>

#include "xmorph/shap.hpp"

namespace xmorph {

struct FeatureTriplet {
    std::string name;
    double value = 0;
    double phi = 0;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::string predicted_class;
    double confidence = 0;
    std::vector<FeatureTriplet> triplets; // top-k provenance, in rank order
};

/// The fixed system instruction placed in front of every request.
const std::string& explain_system_prompt();

/// Formats the structured prompt: "Diagnosis: {class} ({p}%). Key Features: "
/// followed by "{name}: {value:.4f} (Impact: {phi:+.4f}); " per top-k entry.
PromptBundle build_prompt(const AttributionRecord& record, int k);

struct OfflineExplanation {
    std::string text;
    bool unknown_feature = false; // a feature fell back to the generic phrase
};

/// Deterministic template narrative: one sentence per triplet chosen by the
/// sign of phi and a per-feature phrase table, plus a fixed uncertainty
/// sentence when confidence < 0.85.
OfflineExplanation render_offline(const PromptBundle& bundle);

struct ExplainConfig {
    enum class Backend { offline, http };
    Backend backend = Backend::offline;
    std::string endpoint;                  // e.g. http://host:port/v1/chat/completions
    std::string model = "gpt-5";
    std::string api_key_env = "XMORPH_LLM_API_KEY";
    double timeout_s = 30.0;
    int k = 5;
    int max_retries = 2;
    int backoff_ms = 500;
};

/// POSTs {model, messages, temperature:0} to the configured endpoint and
/// returns the first choice's message text. Missing key, network failure,
/// timeout, non-2xx status and malformed responses raise LlmError with
/// distinct kinds; there is no silent offline fallback.
std::string call_llm(const PromptBundle& bundle, const ExplainConfig& config);

} // namespace xmorph
