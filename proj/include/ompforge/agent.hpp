#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ompforge {

enum class StageTemplate {
    analysis,
    offload_data,
    tuning,
    gate_repair,
    baseline_single_pass,
    cuda_mode_overlays,
};

struct PromptTemplate {
    StageTemplate stage;
    std::string body;
};

// Built-in prompt bodies; config may override with files.
PromptTemplate default_template(StageTemplate stage);
std::string stage_template_name(StageTemplate stage);

// Exact single-pass substitution: placeholders are {lower_snake} tokens,
// inserted values are never re-scanned. Unbound placeholders fail loudly.
std::string render_prompt(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings);

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    long long total() const { return prompt_tokens + completion_tokens; }
    TokenUsage& operator+=(const TokenUsage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
};

struct AgentResponse {
    std::string text;
    TokenUsage usage;
};

struct Turn {
    std::string prompt_hash;
    std::string response;
    TokenUsage usage;
};

struct AgentTranscript {
    std::string kernel_id;
    std::vector<Turn> turns;
    TokenUsage totals() const;
};

AgentTranscript load_transcript(const std::filesystem::path& file);
void save_transcript(const AgentTranscript& transcript, const std::filesystem::path& file);

class Transport {
  public:
    virtual ~Transport() = default;
    virtual AgentResponse send(const std::string& prompt_hash, const std::string& prompt_text,
                               const std::string& model) = 0;
};

// Deterministic playback of a recorded transcript; hash mismatches and
// overruns fail loudly so replays cannot silently drift.
class ReplayTransport : public Transport {
  public:
    explicit ReplayTransport(const std::filesystem::path& transcript_file);
    AgentResponse send(const std::string& prompt_hash, const std::string& prompt_text,
                       const std::string& model) override;
    size_t cursor() const { return cursor_; }
    size_t size() const { return records_.size(); }

  private:
    std::vector<Turn> records_;
    size_t cursor_ = 0;
    std::string source_;
};

// Canned responses in order; pair with AgentSession::save_transcript to
// record a replayable transcript.
class ScriptedTransport : public Transport {
  public:
    explicit ScriptedTransport(std::vector<AgentResponse> responses);
    AgentResponse send(const std::string& prompt_hash, const std::string& prompt_text,
                       const std::string& model) override;

  private:
    std::vector<AgentResponse> responses_;
    size_t cursor_ = 0;
};

struct HttpTransportConfig {
    std::string endpoint_url; // e.g. http://host:port/v1/chat/completions
    std::string api_key_env = "OMPFORGE_API_KEY";
    int max_retries = 3;
    int backoff_ms = 250;
    int timeout_sec = 300;
};

// Chat-completion wire shape: messages in, choices out, usage block for
// token counts.
class HttpTransport : public Transport {
  public:
    explicit HttpTransport(HttpTransportConfig cfg);
    AgentResponse send(const std::string& prompt_hash, const std::string& prompt_text,
                       const std::string& model) override;

  private:
    HttpTransportConfig cfg_;
    std::string api_key_;
    std::string host_;
    std::string path_;
    int port_ = 80;
    bool https_ = false;
};

// One conversation with one kernel's agent: renders nothing itself, but
// canonicalizes prompts (working-directory paths replaced with their
// placeholder tokens) before hashing so transcripts replay from any
// checkout location.
class AgentSession {
  public:
    AgentSession(std::shared_ptr<Transport> transport, std::string kernel_id);
    void set_canonical_substitution(const std::string& value, const std::string& token);
    AgentResponse invoke(const std::string& prompt, const std::string& model);
    const AgentTranscript& transcript() const { return transcript_; }
    std::string canonicalize(const std::string& prompt) const;

  private:
    std::shared_ptr<Transport> transport_;
    AgentTranscript transcript_;
    std::vector<std::pair<std::string, std::string>> substitutions_; // value -> token
};

struct TokenReport {
    std::vector<std::pair<std::string, long long>> per_kernel;
    double mean = 0.0;
};

TokenReport account_tokens(const std::vector<AgentTranscript>& transcripts);

// Per-kernel table, means, and the ratio between two configurations,
// rounded the way the accounting is reported (integers; ratio at 2 decimals).
std::string format_token_report(const TokenReport& primary, const std::string& primary_name,
                                const TokenReport* baseline = nullptr,
                                const std::string& baseline_name = "baseline");

} // namespace ompforge
