#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ompforge {

// Final pipeline status per kernel; mirrors the suite accounting categories.
enum class KernelStatus { valid, bypass_excluded, failed, excluded_other };
std::string kernel_status_name(KernelStatus s);
std::optional<KernelStatus> kernel_status_from_name(const std::string& s);

struct EvalRecord {
    std::string suite;
    std::string kernel_id;
    KernelStatus status = KernelStatus::valid;
    double t_ref = 0;                  // reference gpu time
    double t_sys = 0;                  // system-under-test gpu time
    std::optional<double> t_baseline;  // single-pass comparison, when present
    std::string note;

    double speedup_value() const; // t_ref / t_sys, valid records only
};

// T_ref / T_sys; > 1 means the system is faster.
double speedup(double t_ref, double t_sys);

// Identical arithmetic under the comparison-table name.
double ratio_metric(double t_ref_same_hw, double t_translated_same_hw);

struct SuiteSummary {
    std::string suite;
    int n_attempted = 0;
    int n_valid = 0;
    int n_improved = 0; // speedup > 1 among valid
    int n_bypass_excluded = 0;
    int n_failed = 0;
    int n_excluded_other = 0;
    double geomean_speedup = 0;
    double median_speedup = 0;
};

SuiteSummary suite_summary(const std::string& suite, const std::vector<EvalRecord>& records);

// records.csv loader: suite,kernel,status,t_ref,t_sys[,t_baseline]
std::vector<EvalRecord> load_eval_records(const std::filesystem::path& csv);

// figure-values loader: kernel,t_ref,t_sys[,t_baseline]; all rows valid
std::vector<EvalRecord> load_figure_records(const std::filesystem::path& csv, const std::string& suite);

// Writes accounting.md (suite accounting table), per_kernel.csv, and one
// plot_<suite>.csv per suite (kernel, reference, system, baseline columns).
// Refuses to emit when the accounting identity does not hold.
void emit_report(const std::vector<EvalRecord>& records, const std::filesystem::path& out_dir);

// Percent label for the accounting table. Published accounting rounds up
// from two-thirds, so 18/21 -> 86 and 25/31 -> 80.
int accounting_percent(int improved, int valid);

} // namespace ompforge
