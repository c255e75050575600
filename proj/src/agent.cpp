#include "ompforge/agent.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace ompforge {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string stage_template_name(StageTemplate stage) {
    switch (stage) {
    case StageTemplate::analysis: return "analysis";
    case StageTemplate::offload_data: return "offload_data";
    case StageTemplate::tuning: return "tuning";
    case StageTemplate::gate_repair: return "gate_repair";
    case StageTemplate::baseline_single_pass: return "baseline_single_pass";
    case StageTemplate::cuda_mode_overlays: return "cuda_mode_overlays";
    }
    return "?";
}

std::string render_prompt(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings) {
    const std::string& body = tmpl.body;
    std::string out;
    out.reserve(body.size());
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{') {
            size_t e = i + 1;
            while (e < body.size() && (std::islower(static_cast<unsigned char>(body[e])) || body[e] == '_')) ++e;
            if (e < body.size() && body[e] == '}' && e > i + 1) {
                std::string name = body.substr(i + 1, e - i - 1);
                auto it = bindings.find(name);
                if (it == bindings.end()) throw UnboundPlaceholder(name);
                out += it->second; // inserted literally, never re-scanned
                i = e + 1;
                continue;
            }
        }
        out += body[i++];
    }
    return out;
}

TokenUsage AgentTranscript::totals() const {
    TokenUsage t;
    for (const auto& turn : turns) t += turn.usage;
    return t;
}

AgentTranscript load_transcript(const fs::path& file) {
    AgentTranscript t;
    t.kernel_id = file.stem().string();
    auto text = util::read_file(file);
    for (const auto& line : util::split_lines(text)) {
        if (util::trim(line).empty()) continue;
        auto j = json::parse(line);
        Turn turn;
        turn.prompt_hash = j.value("prompt_sha256", "");
        turn.response = j.value("response", "");
        turn.usage.prompt_tokens = j.value("prompt_tokens", 0LL);
        turn.usage.completion_tokens = j.value("completion_tokens", 0LL);
        t.turns.push_back(std::move(turn));
    }
    return t;
}

void save_transcript(const AgentTranscript& transcript, const fs::path& file) {
    std::string out;
    for (const auto& turn : transcript.turns) {
        ordered_json j;
        j["prompt_sha256"] = turn.prompt_hash;
        j["response"] = turn.response;
        j["prompt_tokens"] = turn.usage.prompt_tokens;
        j["completion_tokens"] = turn.usage.completion_tokens;
        out += j.dump() + "\n";
    }
    util::write_file(file, out);
}

ReplayTransport::ReplayTransport(const fs::path& transcript_file) : source_(transcript_file.string()) {
    if (!fs::exists(transcript_file)) throw ConfigError("replay transcript not found: " + source_);
    records_ = load_transcript(transcript_file).turns;
}

AgentResponse ReplayTransport::send(const std::string& prompt_hash, const std::string&, const std::string&) {
    if (cursor_ >= records_.size())
        throw ReplayMismatch("transcript " + source_ + " exhausted after " + std::to_string(records_.size()) +
                             " turns");
    const auto& rec = records_[cursor_];
    if (!rec.prompt_hash.empty() && rec.prompt_hash != prompt_hash)
        throw ReplayMismatch("prompt hash mismatch at turn " + std::to_string(cursor_ + 1) + " of " + source_ +
                             ": expected " + rec.prompt_hash.substr(0, 12) + ", got " + prompt_hash.substr(0, 12));
    ++cursor_;
    return {rec.response, rec.usage};
}

ScriptedTransport::ScriptedTransport(std::vector<AgentResponse> responses) : responses_(std::move(responses)) {}

AgentResponse ScriptedTransport::send(const std::string&, const std::string&, const std::string&) {
    if (cursor_ >= responses_.size()) throw TransportError("scripted transport exhausted");
    return responses_[cursor_++];
}

HttpTransport::HttpTransport(HttpTransportConfig cfg) : cfg_(std::move(cfg)) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key)
        throw ConfigError("live transport requires credential in $" + cfg_.api_key_env);
    api_key_ = key;

    std::string url = cfg_.endpoint_url;
    if (util::starts_with(url, "https://")) {
        https_ = true;
        port_ = 443;
        url = url.substr(8);
    } else if (util::starts_with(url, "http://")) {
        url = url.substr(7);
    } else {
        throw ConfigError("endpoint_url must start with http:// or https://");
    }
    size_t slash = url.find('/');
    host_ = slash == std::string::npos ? url : url.substr(0, slash);
    path_ = slash == std::string::npos ? "/v1/chat/completions" : url.substr(slash);
    size_t colon = host_.find(':');
    if (colon != std::string::npos) {
        port_ = std::stoi(host_.substr(colon + 1));
        host_ = host_.substr(0, colon);
    }
}

AgentResponse HttpTransport::send(const std::string&, const std::string& prompt_text, const std::string& model) {
    ordered_json body;
    body["model"] = model;
    body["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", prompt_text}}});
    auto payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < cfg_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));
        httplib::Result res;
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        if (https_) {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
            httplib::SSLClient cli(host_, port_);
            cli.set_read_timeout(cfg_.timeout_sec, 0);
            res = cli.Post(path_, headers, payload, "application/json");
#endif
        } else {
            httplib::Client cli(host_, port_);
            cli.set_read_timeout(cfg_.timeout_sec, 0);
            res = cli.Post(path_, headers, payload, "application/json");
        }
        if (!res) {
            last_error = "connection failure";
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        auto j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
            last_error = "malformed completion payload";
            continue;
        }
        AgentResponse out;
        out.text = j["choices"][0]["message"].value("content", "");
        if (j.contains("usage")) {
            out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
            out.usage.completion_tokens = j["usage"].value("completion_tokens", 0LL);
        }
        return out;
    }
    throw TransportError("live transport failed after " + std::to_string(cfg_.max_retries) +
                         " attempts: " + last_error);
}

AgentSession::AgentSession(std::shared_ptr<Transport> transport, std::string kernel_id)
    : transport_(std::move(transport)) {
    transcript_.kernel_id = std::move(kernel_id);
}

void AgentSession::set_canonical_substitution(const std::string& value, const std::string& token) {
    if (value.empty()) return;
    substitutions_.emplace_back(value, token);
    // longest value first so nested paths reduce deterministically
    std::sort(substitutions_.begin(), substitutions_.end(),
              [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
}

std::string AgentSession::canonicalize(const std::string& prompt) const {
    std::string out = prompt;
    for (const auto& [value, token] : substitutions_) {
        size_t pos = 0;
        while ((pos = out.find(value, pos)) != std::string::npos) {
            out.replace(pos, value.size(), token);
            pos += token.size();
        }
    }
    return out;
}

AgentResponse AgentSession::invoke(const std::string& prompt, const std::string& model) {
    auto hash = util::sha256_hex(canonicalize(prompt));
    auto response = transport_->send(hash, prompt, model);
    transcript_.turns.push_back({hash, response.text, response.usage});
    return response;
}

TokenReport account_tokens(const std::vector<AgentTranscript>& transcripts) {
    if (transcripts.empty()) throw ConfigError("token accounting requires at least one transcript");
    TokenReport report;
    long long sum = 0;
    for (const auto& t : transcripts) {
        long long total = t.totals().total();
        report.per_kernel.emplace_back(t.kernel_id, total);
        sum += total;
    }
    report.mean = static_cast<double>(sum) / static_cast<double>(transcripts.size());
    return report;
}

std::string format_token_report(const TokenReport& primary, const std::string& primary_name,
                                const TokenReport* baseline, const std::string& baseline_name) {
    std::string out;
    char buf[160];
    out += "| kernel | " + primary_name + " tokens |\n|--------|---------------:|\n";
    for (const auto& [kernel, total] : primary.per_kernel) {
        snprintf(buf, sizeof buf, "| %s | %lld |\n", kernel.c_str(), total);
        out += buf;
    }
    snprintf(buf, sizeof buf, "| mean | %lld |\n", std::llround(primary.mean));
    out += buf;
    if (baseline) {
        out += "\n| kernel | " + baseline_name + " tokens |\n|--------|---------------:|\n";
        for (const auto& [kernel, total] : baseline->per_kernel) {
            snprintf(buf, sizeof buf, "| %s | %lld |\n", kernel.c_str(), total);
            out += buf;
        }
        snprintf(buf, sizeof buf, "| mean | %lld |\n", std::llround(baseline->mean));
        out += buf;
        snprintf(buf, sizeof buf, "\nratio (%s / %s): %.2f\n", primary_name.c_str(), baseline_name.c_str(),
                 primary.mean / baseline->mean);
        out += buf;
    }
    return out;
}

} // namespace ompforge
