#pragma once

#include "ompforge/data_plan.hpp"
#include "ompforge/hotspot.hpp"
#include "ompforge/profile.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ompforge {

struct PolicyConfig {
    double early_exit_tolerance = 0.05;
    double regression_threshold = 0.10;
    double transfer_sanity_factor = 2.0;
    long long bypass_min_device_bytes = 1048576; // >1 MB required
    long long bypass_min_launches = 10;          // >10 required
    double bypass_min_kernel_time_fraction = 0.50;
    int profiling_runs = 3;

    // The published definition combines profile evidence with a
    // code-inspection marker; profile_only is the strict harness mode.
    enum class BypassMode { evidence_conjunctive, profile_only };
    BypassMode bypass_mode = BypassMode::evidence_conjunctive;

    enum class OptimumEstimator { dominant_plus_transfers, kernel_time_total };
    OptimumEstimator optimum_estimator = OptimumEstimator::dominant_plus_transfers;

    // bottleneck inclusion thresholds
    double data_action_mem_fraction = 0.30;
    long long launch_overhead_min_launches = 1000;

    void validate() const; // throws ConfigError on out-of-range values
};

enum class TuningDecision { full_tuning, micro_opts_only };
TuningDecision check_early_exit(long long current_gpu_time_ns, long long estimated_optimum_ns,
                                const PolicyConfig& cfg = {});

enum class RegressionDecision { keep, revert };
RegressionDecision check_regression(long long previous_gpu_time_ns, long long candidate_gpu_time_ns,
                                    const PolicyConfig& cfg = {});

enum class TransferFlag { ok, red_flag };
struct TransferVerdict {
    TransferFlag flag = TransferFlag::ok;
    std::string warning; // set when expected volume was unknown
};
TransferVerdict check_transfer_sanity(std::optional<long long> expected_bytes, long long measured_bytes,
                                      const PolicyConfig& cfg = {});

enum class BypassReason { no_launches, few_launches, small_device_memory, low_kernel_time_fraction };
struct BypassVerdict {
    bool bypass = false;
    std::vector<BypassReason> reasons;
    std::string note;
};
BypassVerdict detect_bypass(const ProfileAggregate& profile, const PolicyConfig& cfg = {},
                            std::optional<bool> host_dominance_marker = std::nullopt);

enum class BottleneckCategory {
    data_management,
    launch_overhead,
    hot_kernel,
    sparse_inner_loop,
    stage_dependent,
    over_parallelization,
    micro_opt,
};
struct BottleneckAction {
    BottleneckCategory category;
    std::string description;
    int rank = 0; // lower = higher priority
};
std::vector<BottleneckAction> rank_bottlenecks(const ProfileAggregate& profile, const DataPlan* plan,
                                               const AnalysisArtifact* analysis, TransferVerdict transfer,
                                               const PolicyConfig& cfg = {});

long long estimate_optimum(const ProfileAggregate& profile, const PolicyConfig& cfg = {});

std::string bypass_reason_name(BypassReason r);
std::string bottleneck_category_name(BottleneckCategory c);

} // namespace ompforge
