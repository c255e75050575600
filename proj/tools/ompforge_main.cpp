// Operator surface: every subcommand is a thin delegate to one library
// operation. Exit codes are stable for CI use: 0 success, 1 domain failure
// (gate failed, bypass, regression), 2 configuration error.

#include "ompforge/config.hpp"
#include "ompforge/cuda_analysis.hpp"
#include "ompforge/data_plan.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/evalkit.hpp"
#include "ompforge/gate.hpp"
#include "ompforge/orchestrator.hpp"
#include "ompforge/profile.hpp"
#include "ompforge/util.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace ompforge;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kConfigError = 2;

PipelineConfig load_config_or_default(const std::string& config_path) {
    if (config_path.empty()) return {};
    return load_pipeline_config(config_path);
}

std::vector<fs::path> find_sources(const fs::path& dir) {
    std::vector<fs::path> sources;
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto ext = entry.path().extension().string();
        if (entry.path().filename() == "gate.h") continue;
        if (ext == ".c" || ext == ".cc" || ext == ".cpp" || ext == ".cu") sources.push_back(entry.path());
    }
    std::sort(sources.begin(), sources.end());
    return sources;
}

int cmd_analyze(const std::string& kernel_dir, const std::string& config_path, bool cuda) {
    auto cfg = load_config_or_default(config_path);
    cfg.cuda_mode = cfg.cuda_mode || cuda;
    fs::path dir(kernel_dir);
    auto sources = find_sources(dir);
    if (sources.empty()) {
        std::cerr << "no C-family sources in " << kernel_dir << "\n";
        return kConfigError;
    }
    auto unit = enumerate_loops(util::read_file(sources.front()), sources.front().filename().string());
    auto artifact = analyze_unit(unit, dir.filename().string(), cfg.analysis);
    if (cfg.cuda_mode)
        artifact.cuda_section = cuda_analysis_section(detect_kernels(unit), inventory_cuda_memory(unit));
    emit_analysis_artifact(artifact, dir);
    std::cout << "wrote " << (dir / "analysis.md").string() << " (" << artifact.records.size() << " loops)\n";
    return kOk;
}

int cmd_plan(const std::string& kernel_dir, const std::string& config_path) {
    auto cfg = load_config_or_default(config_path);
    fs::path dir(kernel_dir);
    auto sources = find_sources(dir);
    if (sources.empty()) {
        std::cerr << "no C-family sources in " << kernel_dir << "\n";
        return kConfigError;
    }
    auto unit = enumerate_loops(util::read_file(sources.front()), sources.front().filename().string());
    auto analysis = analyze_unit(unit, dir.filename().string(), cfg.analysis);
    auto strategy = select_strategy(analysis, unit);
    PlanInputs inputs;
    inputs.unit = &unit;
    inputs.analysis = &analysis;
    inputs.array_bytes = cfg.problem_sizes;
    auto plan = build_data_plan(inputs, strategy);
    emit_data_plan(plan, dir);
    std::cout << "strategy " << strategy_name(strategy) << "; wrote " << (dir / "data_plan.md").string() << "\n";
    return plan.checklist_clean() ? kOk : kDomainFailure;
}

int cmd_gate(const std::string& kernel_dir, const std::string& config_path, bool capture) {
    auto cfg = load_config_or_default(config_path);
    fs::path dir(kernel_dir);
    if (capture) {
        auto rec = capture_baseline(dir, cfg.gate);
        std::cout << "baseline captured: " << rec.output_hash.substr(0, 12) << "\n";
        return kOk;
    }
    auto verdict = run_gate(dir, cfg.gate);
    std::cout << (verdict.passed ? "PASS" : "FAIL") << " at " << gate_phase_name(verdict.phase) << "\n";
    if (!verdict.passed) std::cout << verdict.detail << "\n";
    return verdict.passed ? kOk : kDomainFailure;
}

int cmd_profile(const std::string& report_dir, const std::string& out_dir) {
    auto agg = load_profile_dir(report_dir);
    fs::path out = out_dir.empty() ? fs::path(report_dir) : fs::path(out_dir);
    for (size_t i = 0; i < agg.runs.size(); ++i)
        emit_profile_summary(agg.runs[i], out / ("profile_summary_" + std::to_string(i + 1) + ".json"));
    emit_profile_aggregate(agg, out / "profile_aggregate.json");
    std::cout << "mean gpu time " << static_cast<long long>(agg.mean_gpu_time_ns / 1000) << " us over "
              << agg.runs.size() << " run(s)\n";
    return kOk;
}

int cmd_run(const std::string& kernel_dir, const std::string& suite_manifest, const std::string& work_dir,
            const std::string& config_path, const std::string& graph_name) {
    auto cfg = load_config_or_default(config_path);
    auto graph = StageGraph::by_name(graph_name.empty() ? cfg.stage_graph : graph_name);
    fs::path work = work_dir.empty() ? fs::path("runs") : fs::path(work_dir);

    std::vector<RunLedger> ledgers;
    if (!suite_manifest.empty()) {
        ledgers = run_suite(suite_manifest, work, graph, cfg);
    } else {
        ledgers.push_back(run_pipeline(kernel_dir, work, graph, cfg));
    }
    bool all_valid = true;
    for (const auto& ledger : ledgers) {
        std::cout << ledger.kernel_id << ": " << kernel_status_name(ledger.status);
        if (!ledger.failed_stage.empty()) std::cout << " (stage " << ledger.failed_stage << ")";
        std::cout << "\n";
        if (ledger.status != KernelStatus::valid && ledger.status != KernelStatus::excluded_other)
            all_valid = false;
    }
    return all_valid ? kOk : kDomainFailure;
}

int cmd_report(const std::string& ledgers_dir, const std::string& records_csv, const std::string& references_csv,
               const std::string& out_dir) {
    std::vector<EvalRecord> records;
    if (!records_csv.empty()) {
        records = load_eval_records(records_csv);
    } else {
        std::map<std::string, double> refs;
        if (!references_csv.empty()) {
            for (const auto& line : util::split_lines(util::read_file(references_csv))) {
                auto t = util::trim(line);
                if (t.empty() || t[0] == '#' || t.find("t_ref") != std::string::npos) continue;
                auto comma = t.find(',');
                if (comma == std::string::npos) continue;
                refs[t.substr(0, comma)] = std::stod(t.substr(comma + 1));
            }
        }
        for (const auto& entry : fs::recursive_directory_iterator(ledgers_dir)) {
            if (!entry.is_regular_file() || entry.path().filename() != "ledger.json") continue;
            auto ledger = load_ledger(entry.path());
            EvalRecord rec;
            rec.suite = ledger.suite;
            rec.kernel_id = ledger.kernel_id;
            rec.status = ledger.status;
            rec.t_sys = static_cast<double>(ledger.final_gpu_time_ns);
            auto it = refs.find(ledger.kernel_id);
            if (it != refs.end()) rec.t_ref = it->second;
            if (rec.status == KernelStatus::valid && (rec.t_ref <= 0 || rec.t_sys <= 0))
                rec.status = KernelStatus::excluded_other; // no time pair to evaluate
            records.push_back(std::move(rec));
        }
        std::sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
            return std::tie(a.suite, a.kernel_id) < std::tie(b.suite, b.kernel_id);
        });
    }
    emit_report(records, out_dir.empty() ? fs::path("report") : fs::path(out_dir));
    std::cout << "report written (" << records.size() << " kernels)\n";
    return kOk;
}

int cmd_replay_verify(const std::string& transcript) {
    auto t = load_transcript(transcript);
    TokenUsage sum;
    for (const auto& turn : t.turns) {
        if (turn.prompt_hash.size() != 64) {
            std::cerr << "turn " << (&turn - t.turns.data()) + 1 << " lacks a full prompt hash\n";
            return kDomainFailure;
        }
        sum += turn.usage;
    }
    std::cout << t.turns.size() << " turns, " << sum.total() << " tokens total\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"staged, correctness-gated pipeline for serial-to-OpenMP GPU offload translation"};
    app.require_subcommand(1);

    std::string kernel_dir, config_path, report_dir, out_dir, suite_manifest, work_dir, graph_name;
    std::string records_csv, references_csv, transcript, ledgers_dir;
    bool cuda = false, capture = false;

    auto* analyze = app.add_subcommand("analyze", "classify loops and emit analysis artifacts");
    analyze->add_option("kernel_dir", kernel_dir)->required();
    analyze->add_option("--config", config_path);
    analyze->add_flag("--cuda", cuda, "include the CUDA execution structure section");

    auto* plan = app.add_subcommand("plan", "select a data strategy and emit the data plan");
    plan->add_option("kernel_dir", kernel_dir)->required();
    plan->add_option("--config", config_path);

    auto* gate = app.add_subcommand("gate", "run the correctness gate against the captured baseline");
    gate->add_option("kernel_dir", kernel_dir)->required();
    gate->add_option("--config", config_path);
    gate->add_flag("--capture-baseline", capture, "capture the golden baseline instead of gating");

    auto* profile = app.add_subcommand("profile", "parse profiler stats exports and aggregate runs");
    profile->add_option("report_dir", report_dir)->required();
    profile->add_option("--out", out_dir);

    auto* run = app.add_subcommand("run", "execute the staged pipeline on a kernel or a suite");
    run->add_option("kernel_dir", kernel_dir);
    run->add_option("--suite", suite_manifest, "suite manifest instead of a single kernel");
    run->add_option("--work-dir", work_dir);
    run->add_option("--config", config_path);
    run->add_option("--graph", graph_name, "consolidated3 | legacy4 | baseline1");

    auto* report = app.add_subcommand("report", "emit accounting tables, per-kernel CSV and plot data");
    report->add_option("--ledgers", ledgers_dir);
    report->add_option("--records", records_csv, "records CSV instead of a ledgers directory");
    report->add_option("--references", references_csv, "kernel,t_ref reference times for ledger mode");
    report->add_option("--out", out_dir);

    auto* verify = app.add_subcommand("replay-verify", "validate a transcript file for replay use");
    verify->add_option("transcript", transcript)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(kernel_dir, config_path, cuda);
        if (plan->parsed()) return cmd_plan(kernel_dir, config_path);
        if (gate->parsed()) return cmd_gate(kernel_dir, config_path, capture);
        if (profile->parsed()) return cmd_profile(report_dir, out_dir);
        if (run->parsed()) {
            if (kernel_dir.empty() && suite_manifest.empty()) {
                std::cerr << "run needs a kernel_dir or --suite manifest\n";
                return kConfigError;
            }
            return cmd_run(kernel_dir, suite_manifest, work_dir, config_path, graph_name);
        }
        if (report->parsed()) {
            if (ledgers_dir.empty() && records_csv.empty()) {
                std::cerr << "report needs --ledgers or --records\n";
                return kConfigError;
            }
            return cmd_report(ledgers_dir, records_csv, references_csv, out_dir);
        }
        if (verify->parsed()) return cmd_replay_verify(transcript);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ForgeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainFailure;
    }
    return kConfigError;
}
