#include "ompforge/orchestrator.hpp"
#include "ompforge/cuda_analysis.hpp"
#include "ompforge/data_plan.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/patch.hpp"
#include "ompforge/profile.hpp"
#include "ompforge/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>

namespace ompforge {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

StageGraph StageGraph::consolidated3() {
    StageGraph g;
    g.name = "consolidated3";
    g.stages = {
        {"analysis", StageTemplate::analysis, {}, {"analysis.md", "analysis.json"}, false, false, ""},
        {"offload_data", StageTemplate::offload_data, {"analysis.md", "analysis.json"},
         {"data_plan.md", "data_plan.json"}, true, false, ""},
        {"tuning", StageTemplate::tuning, {"analysis.json", "data_plan.md", "data_plan.json"},
         {"optimization_plan.md"}, true, true, ""},
    };
    return g;
}

StageGraph StageGraph::legacy4() {
    StageGraph g;
    g.name = "legacy4";
    g.stages = {
        {"analysis", StageTemplate::analysis, {}, {"analysis.md", "analysis.json"}, false, false, ""},
        {"offload", StageTemplate::offload_data, {"analysis.md", "analysis.json"},
         {"data_plan.md", "data_plan.json"}, true, false, ""},
        {"concurrency", StageTemplate::tuning, {"analysis.json", "data_plan.json"}, {"optimization_plan.md"},
         true, true, "concurrency tuning only: collapse directives and thread mapping"},
        {"memory_locality", StageTemplate::tuning, {"analysis.json", "data_plan.json"},
         {"optimization_plan.md"}, true, true, "memory and locality tuning only: data movement, transfer reduction"},
    };
    return g;
}

StageGraph StageGraph::baseline1() {
    StageGraph g;
    g.name = "baseline1";
    g.stages = {
        {"single_pass", StageTemplate::baseline_single_pass, {}, {}, true, false, ""},
    };
    return g;
}

StageGraph StageGraph::by_name(const std::string& name) {
    if (name == "consolidated3") return consolidated3();
    if (name == "legacy4") return legacy4();
    if (name == "baseline1") return baseline1();
    throw ConfigError("unknown stage graph: " + name);
}

namespace {

void copy_sources(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    for (const auto& rel : util::list_files_recursive(from))
        util::write_file(to / rel, util::read_file(from / rel));
}

std::vector<fs::path> kernel_source_files(const fs::path& kernel_dir) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(kernel_dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        auto name = entry.path().filename().string();
        if (name == "gate.h") continue;
        if (ext == ".c" || ext == ".cc" || ext == ".cpp" || ext == ".cu") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string file_listing(const fs::path& kernel_dir) {
    std::string out;
    for (const auto& rel : util::list_files_recursive(kernel_dir)) {
        auto s = rel.generic_string();
        if (util::starts_with(s, "baseline/")) continue;
        out += s + "\n";
    }
    return out;
}

std::string read_or(const fs::path& p, const std::string& fallback) {
    return fs::exists(p) ? util::read_file(p) : fallback;
}

struct ParsedResponse {
    std::string action;
    bool no_further = false;
    std::string insight;
    std::string bottlenecks;
    std::optional<bool> host_dominant;
};

ParsedResponse parse_markers(const std::string& response) {
    ParsedResponse out;
    for (const auto& line : util::split_lines(response)) {
        auto t = util::trim(line);
        if (util::starts_with(t, "ACTION:")) out.action = util::trim(t.substr(7));
        if (t == "NO_FURTHER_ACTIONS") out.no_further = true;
        if (util::starts_with(t, "PRIMARY_INSIGHT:")) out.insight = util::trim(t.substr(16));
        if (util::starts_with(t, "REMAINING_BOTTLENECKS:")) out.bottlenecks = util::trim(t.substr(22));
        if (util::starts_with(t, "HOST_EXECUTION_DOMINANT:"))
            out.host_dominant = util::trim(util::to_lower(t.substr(24))) == "yes";
    }
    return out;
}

std::string describe_profile(const ProfileAggregate& agg) {
    char buf[512];
    snprintf(buf, sizeof buf,
             "gpu time %lld us (kernel %lld us, transfers %lld us, api %lld us); %lld launches; %lld transfer "
             "bytes; dominant kernel %s (%lld us)",
             std::llround(agg.mean_gpu_time_ns / 1000.0), std::llround(agg.mean_kernel_time_ns / 1000.0),
             std::llround(agg.mean_mem_time_ns / 1000.0), std::llround(agg.mean_api_time_ns / 1000.0),
             std::llround(agg.mean_launches), std::llround(agg.mean_transfer_bytes),
             agg.dominant_kernel.empty() ? "(none)" : agg.dominant_kernel.c_str(), agg.dominant_kernel_time_ns / 1000);
    return buf;
}

// Ordered profiling-step directories for one kernel.
class ProfileCursor {
  public:
    ProfileCursor(const PipelineConfig& cfg, const std::string& kernel_id) {
        if (cfg.profile_source.empty()) return;
        fs::path base = cfg.resolve(cfg.profile_source);
        if (fs::exists(base / kernel_id)) base = base / kernel_id;
        if (!fs::exists(base)) return;
        for (const auto& entry : fs::directory_iterator(base))
            if (entry.is_directory()) steps_.push_back(entry.path());
        std::sort(steps_.begin(), steps_.end());
    }
    bool available() const { return cursor_ < steps_.size(); }
    std::optional<ProfileAggregate> next() {
        if (!available()) return std::nullopt;
        return load_profile_dir(steps_[cursor_++]);
    }

  private:
    std::vector<fs::path> steps_;
    size_t cursor_ = 0;
};

std::shared_ptr<Transport> make_transport(const PipelineConfig& cfg, const std::string& kernel_id) {
    auto per_kernel = [&](const std::string& p) -> fs::path {
        fs::path path = cfg.resolve(p);
        if (fs::is_directory(path)) return path / (kernel_id + ".jsonl");
        return path;
    };
    if (cfg.transport == "replay") return std::make_shared<ReplayTransport>(per_kernel(cfg.transcript_path));
    if (cfg.transport == "script") {
        std::vector<AgentResponse> responses;
        auto t = load_transcript(per_kernel(cfg.responses_path));
        responses.reserve(t.turns.size());
        for (const auto& turn : t.turns) responses.push_back({turn.response, turn.usage});
        return std::make_shared<ScriptedTransport>(std::move(responses));
    }
    return std::make_shared<HttpTransport>(cfg.http);
}

std::string system_info_text(const PipelineConfig& cfg) {
    if (!cfg.system_info_path.empty()) return util::read_file(cfg.resolve(cfg.system_info_path));
    return collect_system_info();
}

void emit_optimization_plan(const fs::path& kernel_dir, const ProfileAggregate& agg, long long optimum_ns,
                            TuningDecision decision, const TransferVerdict& transfer,
                            std::optional<long long> expected_bytes,
                            const std::vector<BottleneckAction>& actions) {
    std::ostringstream md;
    md << "# Optimization Plan\n\n";
    md << "## Runtime Metrics\n\n";
    md << "- " << describe_profile(agg) << "\n";
    md << "\n## Early Exit\n\n";
    md << "- estimated optimum: " << optimum_ns / 1000 << " us\n";
    md << "- decision: " << (decision == TuningDecision::micro_opts_only ? "micro_opts_only" : "full_tuning")
       << "\n";
    md << "\n## Transfer Sanity\n\n";
    if (expected_bytes)
        md << "- expected " << *expected_bytes << " bytes, measured "
           << static_cast<long long>(std::llround(agg.mean_transfer_bytes)) << " bytes: "
           << (transfer.flag == TransferFlag::red_flag ? "RED FLAG" : "ok") << "\n";
    else
        md << "- expected volume unknown: " << transfer.warning << "\n";
    md << "\n## Prioritized Actions\n\n";
    for (const auto& a : actions)
        md << a.rank + 1 << ". [" << bottleneck_category_name(a.category) << "] " << a.description << "\n";
    util::write_file(kernel_dir / "optimization_plan.md", md.str());
}

struct MergedAnalysis {
    SourceUnit primary_unit;
    AnalysisArtifact artifact; // primary records unprefixed, others prefixed
};

MergedAnalysis analyze_kernel(const fs::path& kernel_dir, const PipelineConfig& cfg, const std::string& kernel_id) {
    auto files = kernel_source_files(kernel_dir);
    if (files.empty()) throw UnreadableSource("no C-family sources in " + kernel_dir.string());

    std::vector<SourceUnit> units;
    std::vector<AnalysisArtifact> artifacts;
    for (const auto& f : files) {
        auto unit = enumerate_loops(util::read_file(f), f.filename().string());
        artifacts.push_back(analyze_unit(unit, kernel_id, cfg.analysis));
        units.push_back(std::move(unit));
    }
    // primary file: the one with the most timed-region records
    size_t best = 0;
    int best_score = -1;
    for (size_t i = 0; i < artifacts.size(); ++i) {
        int score = 0;
        for (const auto& rec : artifacts[i].records)
            if (rec.in_timed_region) ++score;
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    MergedAnalysis merged;
    merged.primary_unit = units[best];
    merged.artifact = artifacts[best];
    for (size_t i = 0; i < artifacts.size(); ++i) {
        if (i == best) continue;
        std::string prefix = files[i].stem().string() + ":";
        for (auto rec : artifacts[i].records) {
            rec.loop_id = prefix + rec.loop_id;
            merged.artifact.records.push_back(std::move(rec));
        }
        for (const auto& w : artifacts[i].warnings) merged.artifact.warnings.push_back(prefix + " " + w);
    }
    if (cfg.cuda_mode) {
        auto kernels = detect_kernels(merged.primary_unit);
        auto mem = inventory_cuda_memory(merged.primary_unit);
        merged.artifact.cuda_section = cuda_analysis_section(kernels, mem);
    }
    return merged;
}

} // namespace

std::optional<std::string> escalate_model(const RunLedger& ledger, const PipelineConfig& config) {
    if (config.escalation_model.empty() || ledger.escalation_used) return std::nullopt;
    return config.escalation_model;
}

RunLedger run_pipeline(const fs::path& source_dir, const fs::path& work_dir, const StageGraph& graph,
                       const PipelineConfig& config, const RunHooks& hooks) {
    RunLedger ledger;
    ledger.kernel_id = source_dir.filename().string();
    ledger.suite = config.suite;
    ledger.graph = graph.name;

    fs::path kernel_dir = work_dir / ledger.kernel_id;
    fs::remove_all(kernel_dir);
    copy_sources(source_dir, kernel_dir);

    auto session = AgentSession(make_transport(config, ledger.kernel_id), ledger.kernel_id);
    session.set_canonical_substitution(kernel_dir.string(), "{kernel_dir}");
    session.set_canonical_substitution(fs::absolute(kernel_dir).string(), "{kernel_dir}");

    ProfileCursor profiles(config, ledger.kernel_id);
    std::optional<ProfileAggregate> current_profile;
    std::optional<bool> host_marker;
    std::string prior_actions = "(none)\n";
    std::string sysinfo = system_info_text(config);
    std::optional<DataPlan> plan;
    std::optional<MergedAnalysis> analysis;
    std::string active_model = config.model;

    auto fail = [&](const std::string& stage, const std::string& error) {
        ledger.status = KernelStatus::failed;
        ledger.failed_stage = stage;
        ledger.error = error;
    };

    for (const auto& stage : graph.stages) {
        StageRun run;
        run.stage = stage.name;
        TokenUsage tokens_before = session.transcript().totals();
        if (current_profile) run.gpu_time_before_ns = std::llround(current_profile->mean_gpu_time_ns);

        // artifact-existence enforcement: the stage may not start otherwise
        bool missing_input = false;
        for (const auto& artifact : stage.required_artifacts) {
            if (!fs::exists(kernel_dir / artifact)) {
                fail(stage.name, "required artifact missing: " + artifact);
                run.error = ledger.error;
                ledger.stage_runs.push_back(run);
                missing_input = true;
                break;
            }
        }
        if (missing_input) break;

        bool stage_failed = false;
        try {
            if (stage.tmpl == StageTemplate::analysis) {
                analysis = analyze_kernel(kernel_dir, config, ledger.kernel_id);
                emit_analysis_artifact(analysis->artifact, kernel_dir);
                if (hooks.after_artifacts) hooks.after_artifacts(stage.name, kernel_dir);
            } else if (stage.tmpl == StageTemplate::offload_data ||
                       stage.tmpl == StageTemplate::baseline_single_pass) {
                capture_baseline(kernel_dir, config.gate);

                if (stage.tmpl == StageTemplate::offload_data) {
                    if (!analysis) analysis = analyze_kernel(kernel_dir, config, ledger.kernel_id);
                    auto strategy = select_strategy(analysis->artifact, analysis->primary_unit);
                    PlanInputs inputs;
                    inputs.unit = &analysis->primary_unit;
                    inputs.analysis = &analysis->artifact;
                    inputs.array_bytes = config.problem_sizes;
                    plan = build_data_plan(inputs, strategy);
                    emit_data_plan(*plan, kernel_dir);
                }
                if (hooks.after_artifacts) hooks.after_artifacts(stage.name, kernel_dir);

                // the code-editing step may not begin until the plan exists
                if (stage.tmpl == StageTemplate::offload_data) {
                    for (const char* artifact : {"data_plan.md", "data_plan.json"})
                        if (!fs::exists(kernel_dir / artifact))
                            throw MissingArtifact(std::string(artifact) +
                                                  " missing; refusing to start the code-editing step");
                }

                std::map<std::string, std::string> bindings = {
                    {"kernel_dir", kernel_dir.string()},
                    {"file_listing", file_listing(kernel_dir)},
                    {"system_info", sysinfo},
                    {"prior_actions", prior_actions},
                    {"profiler_output", current_profile ? describe_profile(*current_profile)
                                                        : "(not yet profiled)"},
                    {"analysis_report", read_or(kernel_dir / "analysis.md", "(no analysis)")},
                    {"data_plan", read_or(kernel_dir / "data_plan.md", "(no plan)")},
                };
                auto body = default_template(stage.tmpl);
                if (config.cuda_mode && stage.tmpl == StageTemplate::offload_data)
                    body.body += "\n" + default_template(StageTemplate::cuda_mode_overlays).body;
                auto response = session.invoke(render_prompt(body, bindings), active_model);
                auto markers = parse_markers(response.text);
                if (!markers.insight.empty()) ledger.primary_insight = markers.insight;
                if (markers.host_dominant) host_marker = markers.host_dominant;
                for (const auto& block : extract_diff_blocks(response.text))
                    apply_patch(kernel_dir, parse_unified_diff(block));
                prior_actions += "offload: applied " +
                                 std::to_string(extract_diff_blocks(response.text).size()) + " patch(es)\n";
            } else if (stage.tmpl == StageTemplate::tuning) {
                if (!profiles.available()) {
                    run.error = "no profile source configured; tuning skipped";
                } else {
                    if (!current_profile) current_profile = profiles.next();
                    run.gpu_time_before_ns = std::llround(current_profile->mean_gpu_time_ns);

                    long long optimum = estimate_optimum(*current_profile, config.policy);
                    auto decision = check_early_exit(std::llround(current_profile->mean_gpu_time_ns),
                                                     optimum, config.policy);
                    std::optional<long long> expected;
                    if (plan) expected = plan->expected_transfer_bytes;
                    auto transfer = check_transfer_sanity(
                        expected, std::llround(current_profile->mean_transfer_bytes), config.policy);
                    auto actions = rank_bottlenecks(*current_profile, plan ? &*plan : nullptr,
                                                    analysis ? &analysis->artifact : nullptr, transfer,
                                                    config.policy);
                    emit_optimization_plan(kernel_dir, *current_profile, optimum, decision, transfer, expected,
                                           actions);
                    if (hooks.after_artifacts) hooks.after_artifacts(stage.name, kernel_dir);

                    std::string focus_note =
                        stage.focus.empty() ? "" : "\nStage focus: " + stage.focus + "\n";
                    if (decision == TuningDecision::micro_opts_only)
                        focus_note += "\nEarly exit: current time is within tolerance of the estimated "
                                      "optimum. Restrict changes to low-risk micro-optimizations.\n";

                    for (int action_count = 0; action_count < config.max_tuning_actions; ++action_count) {
                        std::map<std::string, std::string> bindings = {
                            {"kernel_dir", kernel_dir.string()},
                            {"file_listing", file_listing(kernel_dir)},
                            {"system_info", sysinfo},
                            {"prior_actions", prior_actions},
                            {"profiler_output", describe_profile(*current_profile)},
                            {"optimization_plan",
                             read_or(kernel_dir / "optimization_plan.md", "(no plan)") + focus_note},
                        };
                        auto response =
                            session.invoke(render_prompt(default_template(stage.tmpl), bindings), active_model);
                        auto markers = parse_markers(response.text);
                        if (markers.host_dominant) host_marker = markers.host_dominant;
                        if (!markers.insight.empty()) ledger.primary_insight = markers.insight;
                        if (!markers.bottlenecks.empty()) ledger.remaining_bottlenecks = markers.bottlenecks;
                        if (markers.no_further) break;

                        auto blocks = extract_diff_blocks(response.text);
                        if (blocks.empty()) break;

                        AppliedAction action;
                        action.description = markers.action.empty() ? "(unnamed action)" : markers.action;
                        std::string patch_concat;
                        for (const auto& b : blocks) patch_concat += b;
                        action.patch_sha = util::sha256_hex(patch_concat);
                        action.gpu_before_ns = std::llround(current_profile->mean_gpu_time_ns);

                        auto snapshot = util::snapshot_tree(kernel_dir);
                        for (const auto& b : blocks) apply_patch(kernel_dir, parse_unified_diff(b));

                        auto gate_verdict = run_gate(kernel_dir, config.gate);
                        if (!gate_verdict.passed) {
                            util::restore_tree(kernel_dir, snapshot);
                            if (util::tree_hash(kernel_dir) != snapshot.hash)
                                throw ForgeError("revert failed to restore the pre-action tree");
                            action.revert_reason = "gate failed at " + gate_phase_name(gate_verdict.phase) +
                                                   ": " + gate_verdict.detail;
                            run.actions_reverted.push_back(action);
                            prior_actions += "reverted (gate): " + action.description + "\n";
                            continue;
                        }

                        auto measured = profiles.next();
                        if (!measured) {
                            util::restore_tree(kernel_dir, snapshot);
                            action.revert_reason = "no profile available to evaluate the action";
                            run.actions_reverted.push_back(action);
                            break;
                        }
                        action.gpu_after_ns = std::llround(measured->mean_gpu_time_ns);
                        auto verdict = check_regression(action.gpu_before_ns, action.gpu_after_ns, config.policy);
                        if (verdict == RegressionDecision::revert) {
                            util::restore_tree(kernel_dir, snapshot);
                            if (util::tree_hash(kernel_dir) != snapshot.hash)
                                throw ForgeError("revert failed to restore the pre-action tree");
                            char why[128];
                            snprintf(why, sizeof why, "regression: %lld -> %lld ns gpu time",
                                     action.gpu_before_ns, action.gpu_after_ns);
                            action.revert_reason = why;
                            run.actions_reverted.push_back(action);
                            prior_actions += "reverted (regression): " + action.description + "\n";
                        } else {
                            current_profile = measured;
                            run.actions_applied.push_back(action);
                            prior_actions += "applied: " + action.description + "\n";
                        }
                    }
                }
            }

            // correctness gate between stages
            if (stage.gate_after) {
                run.gated = true;
                auto verdict = run_gate(kernel_dir, config.gate);
                if (!verdict.passed) {
                    try {
                        verdict = supervise_repair(kernel_dir, session, active_model,
                                                   config.max_repair_iterations, config.gate);
                    } catch (const RepairExhausted&) {
                        if (auto esc = escalate_model(ledger, config)) {
                            ledger.escalation_used = true;
                            active_model = *esc;
                            verdict = supervise_repair(kernel_dir, session, active_model,
                                                       config.max_repair_iterations, config.gate);
                        } else {
                            throw;
                        }
                    }
                }
                run.gate_passed = verdict.passed;
                run.gate_phase = gate_phase_name(verdict.phase);
                run.gate_detail = verdict.detail;
                if (!verdict.passed) {
                    fail(stage.name, "gate failed: " + verdict.detail);
                    stage_failed = true;
                }
            }
        } catch (const ForgeError& e) {
            fail(stage.name, e.what());
            run.error = e.what();
            stage_failed = true;
        }

        for (const auto& artifact : stage.produced_artifacts)
            if (fs::exists(kernel_dir / artifact)) run.artifacts.push_back(artifact);
        if (current_profile) run.gpu_time_after_ns = std::llround(current_profile->mean_gpu_time_ns);
        TokenUsage totals = session.transcript().totals();
        run.tokens.prompt_tokens = totals.prompt_tokens - tokens_before.prompt_tokens;
        run.tokens.completion_tokens = totals.completion_tokens - tokens_before.completion_tokens;
        ledger.stage_runs.push_back(run);
        if (stage_failed) break;
    }

    ledger.token_totals = session.transcript().totals();
    if (current_profile) ledger.final_gpu_time_ns = std::llround(current_profile->mean_gpu_time_ns);
    for (const auto& run : ledger.stage_runs)
        if (run.gpu_time_before_ns >= 0 && ledger.baseline_gpu_time_ns < 0)
            ledger.baseline_gpu_time_ns = run.gpu_time_before_ns;

    if (ledger.failed_stage.empty()) {
        // bypass verdict on the final profile decides valid vs excluded
        if (current_profile) {
            auto verdict = detect_bypass(*current_profile, config.policy, host_marker);
            if (verdict.bypass) {
                ledger.status = KernelStatus::bypass_excluded;
                for (auto r : verdict.reasons) ledger.bypass_reasons.push_back(bypass_reason_name(r));
            } else {
                ledger.status = KernelStatus::valid;
            }
        } else {
            ledger.status = KernelStatus::valid;
            ledger.note = "no profile source; bypass detection skipped";
        }
    }

    write_summary(ledger, kernel_dir);
    write_ledger(ledger, kernel_dir);

    if (!config.save_transcript_path.empty()) {
        fs::path out = config.resolve(config.save_transcript_path);
        if (fs::is_directory(out) || out.extension().empty()) {
            fs::create_directories(out);
            out /= ledger.kernel_id + ".jsonl";
        }
        save_transcript(session.transcript(), out);
    }
    return ledger;
}

namespace {

ordered_json action_to_json(const AppliedAction& a) {
    ordered_json j;
    j["description"] = a.description;
    j["patch_sha"] = a.patch_sha;
    j["gpu_before_ns"] = a.gpu_before_ns;
    j["gpu_after_ns"] = a.gpu_after_ns;
    j["revert_reason"] = a.revert_reason;
    return j;
}

AppliedAction action_from_json(const nlohmann::json& j) {
    AppliedAction a;
    a.description = j.value("description", "");
    a.patch_sha = j.value("patch_sha", "");
    a.gpu_before_ns = j.value("gpu_before_ns", 0LL);
    a.gpu_after_ns = j.value("gpu_after_ns", 0LL);
    a.revert_reason = j.value("revert_reason", "");
    return a;
}

} // namespace

void write_ledger(const RunLedger& ledger, const fs::path& kernel_dir) {
    ordered_json j;
    j["kernel_id"] = ledger.kernel_id;
    j["suite"] = ledger.suite;
    j["graph"] = ledger.graph;
    j["status"] = kernel_status_name(ledger.status);
    j["failed_stage"] = ledger.failed_stage;
    j["error"] = ledger.error;
    j["baseline_gpu_time_ns"] = ledger.baseline_gpu_time_ns;
    j["final_gpu_time_ns"] = ledger.final_gpu_time_ns;
    j["primary_insight"] = ledger.primary_insight;
    j["remaining_bottlenecks"] = ledger.remaining_bottlenecks;
    j["prompt_tokens"] = ledger.token_totals.prompt_tokens;
    j["completion_tokens"] = ledger.token_totals.completion_tokens;
    j["escalation_used"] = ledger.escalation_used;
    j["bypass_reasons"] = ledger.bypass_reasons;
    j["note"] = ledger.note;
    auto runs = ordered_json::array();
    for (const auto& run : ledger.stage_runs) {
        ordered_json r;
        r["stage"] = run.stage;
        r["artifacts"] = run.artifacts;
        r["gated"] = run.gated;
        r["gate_passed"] = run.gate_passed;
        r["gate_phase"] = run.gate_phase;
        r["gate_detail"] = run.gate_detail;
        r["gpu_time_before_ns"] = run.gpu_time_before_ns;
        r["gpu_time_after_ns"] = run.gpu_time_after_ns;
        auto applied = ordered_json::array();
        for (const auto& a : run.actions_applied) applied.push_back(action_to_json(a));
        r["actions_applied"] = applied;
        auto reverted = ordered_json::array();
        for (const auto& a : run.actions_reverted) reverted.push_back(action_to_json(a));
        r["actions_reverted"] = reverted;
        r["prompt_tokens"] = run.tokens.prompt_tokens;
        r["completion_tokens"] = run.tokens.completion_tokens;
        r["error"] = run.error;
        runs.push_back(r);
    }
    j["stage_runs"] = runs;
    util::write_file(kernel_dir / "ledger.json", j.dump(2) + "\n");
}

RunLedger load_ledger(const fs::path& ledger_file) {
    auto j = nlohmann::json::parse(util::read_file(ledger_file));
    RunLedger ledger;
    ledger.kernel_id = j.value("kernel_id", "");
    ledger.suite = j.value("suite", "");
    ledger.graph = j.value("graph", "");
    ledger.status = kernel_status_from_name(j.value("status", "failed")).value_or(KernelStatus::failed);
    ledger.failed_stage = j.value("failed_stage", "");
    ledger.error = j.value("error", "");
    ledger.baseline_gpu_time_ns = j.value("baseline_gpu_time_ns", -1LL);
    ledger.final_gpu_time_ns = j.value("final_gpu_time_ns", -1LL);
    ledger.primary_insight = j.value("primary_insight", "");
    ledger.remaining_bottlenecks = j.value("remaining_bottlenecks", "");
    ledger.token_totals.prompt_tokens = j.value("prompt_tokens", 0LL);
    ledger.token_totals.completion_tokens = j.value("completion_tokens", 0LL);
    ledger.escalation_used = j.value("escalation_used", false);
    for (const auto& r : j.value("bypass_reasons", std::vector<std::string>{})) ledger.bypass_reasons.push_back(r);
    ledger.note = j.value("note", "");
    for (const auto& rj : j.value("stage_runs", nlohmann::json::array())) {
        StageRun run;
        run.stage = rj.value("stage", "");
        for (const auto& a : rj.value("artifacts", std::vector<std::string>{})) run.artifacts.push_back(a);
        run.gated = rj.value("gated", false);
        run.gate_passed = rj.value("gate_passed", false);
        run.gate_phase = rj.value("gate_phase", "");
        run.gate_detail = rj.value("gate_detail", "");
        run.gpu_time_before_ns = rj.value("gpu_time_before_ns", -1LL);
        run.gpu_time_after_ns = rj.value("gpu_time_after_ns", -1LL);
        for (const auto& a : rj.value("actions_applied", nlohmann::json::array()))
            run.actions_applied.push_back(action_from_json(a));
        for (const auto& a : rj.value("actions_reverted", nlohmann::json::array()))
            run.actions_reverted.push_back(action_from_json(a));
        run.tokens.prompt_tokens = rj.value("prompt_tokens", 0LL);
        run.tokens.completion_tokens = rj.value("completion_tokens", 0LL);
        run.error = rj.value("error", "");
        ledger.stage_runs.push_back(std::move(run));
    }
    return ledger;
}

void write_summary(const RunLedger& ledger, const fs::path& kernel_dir) {
    std::ostringstream md;
    md << "# Run Summary: " << ledger.kernel_id << "\n\n";
    md << "- status: " << kernel_status_name(ledger.status) << "\n";
    if (!ledger.failed_stage.empty()) md << "- failed stage: " << ledger.failed_stage << "\n";
    md << "\n## Baseline Metrics\n\n";
    if (ledger.baseline_gpu_time_ns >= 0)
        md << "- gpu time: " << ledger.baseline_gpu_time_ns / 1000 << " us\n";
    else
        md << "- (not profiled)\n";
    md << "\n## Final Metrics\n\n";
    if (ledger.final_gpu_time_ns >= 0)
        md << "- gpu time: " << ledger.final_gpu_time_ns / 1000 << " us\n";
    else
        md << "- (not profiled)\n";
    md << "\n## Applied Optimizations\n\n";
    bool any = false;
    for (const auto& run : ledger.stage_runs)
        for (const auto& a : run.actions_applied) {
            md << "- " << a.description << " (" << a.gpu_before_ns / 1000 << " -> " << a.gpu_after_ns / 1000
               << " us)\n";
            any = true;
        }
    if (!any) md << "- (none)\n";
    md << "\n## Reverted Optimizations\n\n";
    any = false;
    for (const auto& run : ledger.stage_runs)
        for (const auto& a : run.actions_reverted) {
            md << "- " << a.description << ": " << a.revert_reason << "\n";
            any = true;
        }
    if (!any) md << "- (none)\n";
    md << "\n## Primary Insight\n\n- " << (ledger.primary_insight.empty() ? "(none)" : ledger.primary_insight)
       << "\n";
    md << "\n## Remaining Bottlenecks\n\n- "
       << (ledger.remaining_bottlenecks.empty() ? "(none)" : ledger.remaining_bottlenecks) << "\n";
    md << "\n## Tokens\n\n- prompt: " << ledger.token_totals.prompt_tokens
       << "\n- completion: " << ledger.token_totals.completion_tokens << "\n";
    util::write_file(kernel_dir / "summary.md", md.str());

    ordered_json j;
    j["kernel_id"] = ledger.kernel_id;
    j["status"] = kernel_status_name(ledger.status);
    j["failed_stage"] = ledger.failed_stage;
    j["baseline_gpu_time_ns"] = ledger.baseline_gpu_time_ns;
    j["final_gpu_time_ns"] = ledger.final_gpu_time_ns;
    j["primary_insight"] = ledger.primary_insight;
    j["remaining_bottlenecks"] = ledger.remaining_bottlenecks;
    j["prompt_tokens"] = ledger.token_totals.prompt_tokens;
    j["completion_tokens"] = ledger.token_totals.completion_tokens;
    util::write_file(kernel_dir / "summary.json", j.dump(2) + "\n");
}

std::vector<SuiteEntry> load_suite_manifest(const fs::path& manifest) {
    std::vector<SuiteEntry> out;
    for (const auto& raw : util::split_lines(util::read_file(manifest))) {
        auto line = util::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        SuiteEntry entry;
        std::string exclusion;
        ss >> entry.suite >> entry.kernel_dir >> exclusion;
        if (!exclusion.empty()) {
            auto status = kernel_status_from_name(exclusion);
            if (!status || *status == KernelStatus::valid)
                throw ConfigError("manifest exclusion must be a non-valid status: " + line);
            entry.declared_exclusion = status;
            std::string note;
            std::getline(ss, note);
            entry.note = util::trim(note);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<RunLedger> run_suite(const fs::path& manifest, const fs::path& work_dir, const StageGraph& graph,
                                 const PipelineConfig& config, const RunHooks& hooks) {
    auto entries = load_suite_manifest(manifest);
    std::vector<RunLedger> ledgers;
    for (const auto& entry : entries) {
        if (entry.declared_exclusion) {
            RunLedger ledger;
            ledger.kernel_id = fs::path(entry.kernel_dir).filename().string();
            ledger.suite = entry.suite;
            ledger.graph = graph.name;
            ledger.status = *entry.declared_exclusion;
            ledger.note = entry.note.empty() ? "operator-declared exclusion" : entry.note;
            fs::create_directories(work_dir / ledger.kernel_id);
            write_ledger(ledger, work_dir / ledger.kernel_id);
            ledgers.push_back(std::move(ledger));
            continue;
        }
        PipelineConfig kernel_cfg = config;
        kernel_cfg.suite = entry.suite;
        auto ledger = run_pipeline(manifest.parent_path() / entry.kernel_dir, work_dir, graph, kernel_cfg, hooks);
        ledgers.push_back(std::move(ledger));
    }
    // suite roll-up
    ordered_json roll;
    auto arr = ordered_json::array();
    for (const auto& l : ledgers)
        arr.push_back({{"kernel", l.kernel_id},
                       {"suite", l.suite},
                       {"status", kernel_status_name(l.status)},
                       {"final_gpu_time_ns", l.final_gpu_time_ns}});
    roll["kernels"] = arr;
    util::write_file(work_dir / "rollup.json", roll.dump(2) + "\n");
    return ledgers;
}

} // namespace ompforge
