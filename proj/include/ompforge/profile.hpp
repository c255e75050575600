#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ompforge {

struct PerKernelStat {
    std::string name;
    long long time_ns = 0;
    long long launches = 0;
};

struct ProfileSummary {
    long long kernel_time_ns = 0;
    long long mem_time_ns = 0;
    long long api_time_ns = 0;
    long long launches = 0;
    long long transfer_bytes = 0;
    std::vector<PerKernelStat> per_kernel;
    int run_index = 0;
    int malformed_rows = 0;
    std::vector<std::string> warnings;
};

// Device kernel time plus device transfer time; host API time never counts.
long long gpu_time(const ProfileSummary& summary);

struct ProfileAggregate {
    std::vector<ProfileSummary> runs;
    double mean_gpu_time_ns = 0;
    double mean_kernel_time_ns = 0;
    double mean_mem_time_ns = 0;
    double mean_api_time_ns = 0;
    double mean_launches = 0;
    double mean_transfer_bytes = 0;
    // Largest per-kernel mean time across runs; the profiler-implied floor.
    long long dominant_kernel_time_ns = 0;
    std::string dominant_kernel;
};

// One run directory holding the per-section stats exports:
//   cuda_gpu_kern_sum.csv       (required)
//   cuda_gpu_mem_time_sum.csv   (optional; bytes column optional)
//   cuda_api_sum.csv            (optional)
// Column order is free; recognized headers are matched case-insensitively.
ProfileSummary parse_stats_export(const std::filesystem::path& report_dir);

ProfileAggregate aggregate_runs(const std::vector<ProfileSummary>& runs);

// Parses every run*/ subdirectory (sorted) of config_dir and aggregates.
ProfileAggregate load_profile_dir(const std::filesystem::path& config_dir);

void emit_profile_summary(const ProfileSummary& summary, const std::filesystem::path& out_file);
void emit_profile_aggregate(const ProfileAggregate& agg, const std::filesystem::path& out_file);

} // namespace ompforge
