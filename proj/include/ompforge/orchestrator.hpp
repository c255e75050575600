#pragma once

#include "ompforge/agent.hpp"
#include "ompforge/config.hpp"
#include "ompforge/evalkit.hpp"
#include "ompforge/gate.hpp"
#include "ompforge/policy.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ompforge {

struct StageSpec {
    std::string name;
    StageTemplate tmpl = StageTemplate::analysis;
    std::vector<std::string> required_artifacts;
    std::vector<std::string> produced_artifacts;
    bool gate_after = false;
    bool tune_loop = false;
    std::string focus; // legacy4 narrow-pass hint injected into the prompt
};

// Stage graphs are data: the consolidated three-stage flow, the legacy
// four-stage flow, and the zero-shot single-pass configuration share one
// engine.
struct StageGraph {
    std::string name;
    std::vector<StageSpec> stages;

    static StageGraph consolidated3();
    static StageGraph legacy4();
    static StageGraph baseline1();
    static StageGraph by_name(const std::string& name); // ConfigError on unknown
};

struct AppliedAction {
    std::string description;
    std::string patch_sha;
    long long gpu_before_ns = 0;
    long long gpu_after_ns = 0;
    std::string revert_reason; // empty for kept actions
};

struct StageRun {
    std::string stage;
    std::vector<std::string> artifacts;
    bool gated = false;
    bool gate_passed = false;
    std::string gate_phase;
    std::string gate_detail;
    long long gpu_time_before_ns = -1;
    long long gpu_time_after_ns = -1;
    std::vector<AppliedAction> actions_applied;
    std::vector<AppliedAction> actions_reverted;
    TokenUsage tokens;
    std::string error;
};

struct RunLedger {
    std::string kernel_id;
    std::string suite;
    std::string graph;
    KernelStatus status = KernelStatus::failed;
    std::string failed_stage;
    std::string error;
    std::vector<StageRun> stage_runs;
    long long baseline_gpu_time_ns = -1;
    long long final_gpu_time_ns = -1;
    std::string primary_insight;
    std::string remaining_bottlenecks;
    TokenUsage token_totals;
    bool escalation_used = false;
    std::vector<std::string> bypass_reasons;
    std::string note;
};

// Test/injection hook invoked after a stage's artifacts are emitted and
// before the code-editing step begins.
struct RunHooks {
    std::function<void(const std::string& stage, const std::filesystem::path& kernel_dir)> after_artifacts;
};

// Copies sources into work_dir/<kernel_id>/ and executes the stage graph.
RunLedger run_pipeline(const std::filesystem::path& source_dir, const std::filesystem::path& work_dir,
                       const StageGraph& graph, const PipelineConfig& config, const RunHooks& hooks = {});

// Returns the configured escalation model exactly once per kernel.
std::optional<std::string> escalate_model(const RunLedger& ledger, const PipelineConfig& config);

void write_ledger(const RunLedger& ledger, const std::filesystem::path& kernel_dir);
RunLedger load_ledger(const std::filesystem::path& ledger_file);

// End-of-step summary: baseline and final metrics, applied and reverted
// optimizations, insight text, token totals.
void write_summary(const RunLedger& ledger, const std::filesystem::path& kernel_dir);

struct SuiteEntry {
    std::string suite;
    std::string kernel_dir; // relative to the manifest
    std::optional<KernelStatus> declared_exclusion;
    std::string note;
};
std::vector<SuiteEntry> load_suite_manifest(const std::filesystem::path& manifest);

// Runs every kernel in the manifest (declared exclusions short-circuit) and
// persists per-kernel ledgers plus a suite roll-up under work_dir.
std::vector<RunLedger> run_suite(const std::filesystem::path& manifest, const std::filesystem::path& work_dir,
                                 const StageGraph& graph, const PipelineConfig& config,
                                 const RunHooks& hooks = {});

} // namespace ompforge
