#include "ompforge/config.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#include <json.hpp>

#include <sys/utsname.h>
#include <thread>

namespace ompforge {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path PipelineConfig::resolve(const std::string& p) const {
    if (p.empty()) return {};
    fs::path path(p);
    if (path.is_absolute() || base_dir.empty()) return path;
    return base_dir / path;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
    PipelineConfig cfg;
    cfg.base_dir = file.parent_path();
    json j;
    try {
        j = json::parse(util::read_file(file));
    } catch (const std::exception& e) {
        throw ConfigError("cannot parse pipeline config " + file.string() + ": " + e.what());
    }

    cfg.stage_graph = j.value("stage_graph", cfg.stage_graph);
    cfg.transport = j.value("transport", cfg.transport);
    cfg.transcript_path = j.value("transcript", cfg.transcript_path);
    cfg.responses_path = j.value("responses", cfg.responses_path);
    cfg.save_transcript_path = j.value("save_transcript", cfg.save_transcript_path);
    cfg.model = j.value("model", cfg.model);
    cfg.escalation_model = j.value("escalation_model", cfg.escalation_model);
    cfg.profile_source = j.value("profile_source", cfg.profile_source);
    cfg.system_info_path = j.value("system_info", cfg.system_info_path);
    cfg.max_repair_iterations = j.value("max_repair_iterations", cfg.max_repair_iterations);
    cfg.max_tuning_actions = j.value("max_tuning_actions", cfg.max_tuning_actions);
    cfg.cuda_mode = j.value("cuda_mode", cfg.cuda_mode);
    cfg.deterministic = j.value("deterministic", cfg.deterministic);
    cfg.suite = j.value("suite", cfg.suite);

    if (j.contains("policy")) {
        const auto& p = j["policy"];
        cfg.policy.early_exit_tolerance = p.value("early_exit_tolerance", cfg.policy.early_exit_tolerance);
        cfg.policy.regression_threshold = p.value("regression_threshold", cfg.policy.regression_threshold);
        cfg.policy.transfer_sanity_factor = p.value("transfer_sanity_factor", cfg.policy.transfer_sanity_factor);
        cfg.policy.bypass_min_device_bytes = p.value("bypass_min_device_bytes", cfg.policy.bypass_min_device_bytes);
        cfg.policy.bypass_min_launches = p.value("bypass_min_launches", cfg.policy.bypass_min_launches);
        cfg.policy.bypass_min_kernel_time_fraction =
            p.value("bypass_min_kernel_time_fraction", cfg.policy.bypass_min_kernel_time_fraction);
        cfg.policy.profiling_runs = p.value("profiling_runs", cfg.policy.profiling_runs);
        std::string mode = p.value("bypass_mode", std::string("evidence_conjunctive"));
        cfg.policy.bypass_mode = mode == "profile_only" ? PolicyConfig::BypassMode::profile_only
                                                        : PolicyConfig::BypassMode::evidence_conjunctive;
    }
    cfg.policy.validate();

    if (j.contains("gate")) {
        const auto& g = j["gate"];
        cfg.gate.build_command = g.value("build_command", cfg.gate.build_command);
        cfg.gate.run_command = g.value("run_command", cfg.gate.run_command);
        cfg.gate.instrumented_run_command =
            g.value("instrumented_run_command", cfg.gate.instrumented_run_command);
        cfg.gate.build_timeout_sec = g.value("build_timeout_sec", cfg.gate.build_timeout_sec);
        cfg.gate.run_timeout_sec = g.value("run_timeout_sec", cfg.gate.run_timeout_sec);
        cfg.gate.float_rel_tol = g.value("float_rel_tol", cfg.gate.float_rel_tol);
        cfg.gate.delegate_check_correctness =
            g.value("delegate_check_correctness", cfg.gate.delegate_check_correctness);
        if (g.contains("normalize_patterns"))
            for (const auto& p : g["normalize_patterns"]) cfg.gate.normalize_patterns.push_back(p);
        if (g.contains("checkpoints"))
            for (const auto& c : g["checkpoints"])
                cfg.gate.checkpoints.push_back(
                    {c.value("label", ""), c.value("array", ""), c.value("length", "")});
    }
    cfg.gate.deterministic_timestamps = cfg.deterministic;

    if (j.contains("analysis")) {
        const auto& a = j["analysis"];
        cfg.analysis.small_trip_threshold = a.value("small_trip_threshold", cfg.analysis.small_trip_threshold);
        cfg.analysis.critical_band = a.value("critical_band", cfg.analysis.critical_band);
        if (a.contains("timer_start_patterns")) {
            cfg.analysis.timer_start_patterns.clear();
            for (const auto& p : a["timer_start_patterns"]) cfg.analysis.timer_start_patterns.push_back(p);
        }
        if (a.contains("timer_stop_patterns")) {
            cfg.analysis.timer_stop_patterns.clear();
            for (const auto& p : a["timer_stop_patterns"]) cfg.analysis.timer_stop_patterns.push_back(p);
        }
        cfg.analysis.rng_name_pattern = a.value("rng_name_pattern", cfg.analysis.rng_name_pattern);
    }

    if (j.contains("http")) {
        const auto& h = j["http"];
        cfg.http.endpoint_url = h.value("endpoint_url", cfg.http.endpoint_url);
        cfg.http.api_key_env = h.value("api_key_env", cfg.http.api_key_env);
        cfg.http.max_retries = h.value("max_retries", cfg.http.max_retries);
        cfg.http.timeout_sec = h.value("timeout_sec", cfg.http.timeout_sec);
    }

    if (j.contains("problem_sizes"))
        for (auto it = j["problem_sizes"].begin(); it != j["problem_sizes"].end(); ++it)
            cfg.problem_sizes[it.key()] = it.value().get<long long>();

    if (cfg.transport == "replay" && cfg.transcript_path.empty())
        throw ConfigError("replay transport requires a transcript path");
    if (cfg.transport == "script" && cfg.responses_path.empty())
        throw ConfigError("script transport requires a responses path");
    if (cfg.transport == "live" && cfg.http.endpoint_url.empty())
        throw ConfigError("live transport requires http.endpoint_url");
    if (cfg.transport != "replay" && cfg.transport != "script" && cfg.transport != "live")
        throw ConfigError("unknown transport: " + cfg.transport);
    return cfg;
}

std::string collect_system_info() {
    struct utsname un{};
    uname(&un);
    std::string out;
    out += "os: " + std::string(un.sysname) + " " + un.release + "\n";
    out += "arch: " + std::string(un.machine) + "\n";
    out += "hardware_threads: " + std::to_string(std::thread::hardware_concurrency()) + "\n";
    return out;
}

} // namespace ompforge
