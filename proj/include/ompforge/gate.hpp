#pragma once

#include "ompforge/agent.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ompforge {

struct GateCheckpointSpec {
    std::string label;
    std::string array_expr;
    std::string length_expr;
};

struct GateConfig {
    // silent make keeps command echo out of the compared output
    std::string build_command = "make -s all";
    std::string run_command = "make -s run";
    // unconditional remake so the GATES flag actually takes effect
    std::string instrumented_run_command = "make -B -s run GATES=1";
    std::string check_correctness_command = "make -s check-correctness";
    bool delegate_check_correctness = true; // when the Makefile has the target
    int build_timeout_sec = 600;
    int run_timeout_sec = 1800;
    double float_rel_tol = 1e-6;
    bool deterministic_timestamps = false;
    std::vector<std::string> normalize_patterns = {
        R"([Ee]lapsed)", R"([Tt]ime in seconds)", R"(Mop/s)", R"([Ww]all.?clock)", R"(^GATE )",
    };
    std::vector<GateCheckpointSpec> checkpoints;
};

// Drops timing/noise lines so runs compare on their verification markers.
std::string normalize_output(const std::string& text, const GateConfig& cfg);

struct BaselineRecord {
    std::string output_text; // normalized
    std::string output_hash;
    std::string command;
    std::string timestamp;
};

// Builds and runs the unmodified kernel, snapshots sources under
// baseline/src/ and the normalized output under baseline/.
BaselineRecord capture_baseline(const std::filesystem::path& kernel_dir, const GateConfig& cfg = {});
BaselineRecord load_baseline(const std::filesystem::path& kernel_dir);

struct Checkpoint {
    std::string label;
    double sum = 0.0;
    double l2 = 0.0;
};
std::vector<Checkpoint> parse_gate_lines(const std::string& output);

enum class GatePhase { build, run, diff };
struct GateVerdict {
    bool passed = false;
    GatePhase phase = GatePhase::build;
    std::string detail; // compiler/runtime excerpt or first diverging line
    std::vector<Checkpoint> checkpoints;
};
std::string gate_phase_name(GatePhase p);

GateVerdict run_gate(const std::filesystem::path& kernel_dir, const GateConfig& cfg = {});

// First diverging line between two normalized outputs; floats compare with
// relative tolerance, everything else exactly.
std::optional<std::string> diff_normalized(const std::string& baseline, const std::string& candidate,
                                           double rel_tol);

// Self-contained C header: GATE_CHECK(label, array, n) prints
// `GATE <label> sum=... l2=...` in %.6e, compiled out unless GATE_ENABLE.
std::string generate_gate_header(const std::vector<GateCheckpointSpec>& checkpoints);

// Instruments baseline and candidate, runs both, and names the first
// checkpoint where they disagree (or the output diff when no checkpoints).
std::string locate_divergence(const std::filesystem::path& kernel_dir, const GateConfig& cfg = {});

// Repair loop: instrument, localize, prompt, patch, re-gate. Throws
// RepairExhausted after max_iterations failed attempts. A bypass probe may
// veto an otherwise-passing repair.
using BypassProbe = std::function<std::optional<std::string>()>;
GateVerdict supervise_repair(const std::filesystem::path& kernel_dir, AgentSession& session,
                             const std::string& model, int max_iterations, const GateConfig& cfg = {},
                             const BypassProbe& bypass_probe = {});

} // namespace ompforge
