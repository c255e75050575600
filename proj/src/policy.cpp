#include "ompforge/policy.hpp"
#include "ompforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ompforge {

void PolicyConfig::validate() const {
    auto fraction = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!fraction(early_exit_tolerance)) throw ConfigError("early_exit_tolerance must be in (0,1]");
    if (!fraction(regression_threshold)) throw ConfigError("regression_threshold must be in (0,1]");
    if (!fraction(bypass_min_kernel_time_fraction))
        throw ConfigError("bypass_min_kernel_time_fraction must be in (0,1]");
    if (transfer_sanity_factor <= 1.0) throw ConfigError("transfer_sanity_factor must exceed 1");
    if (bypass_min_launches < 1 || bypass_min_device_bytes < 1 || profiling_runs < 1)
        throw ConfigError("bypass thresholds and profiling_runs must be >= 1");
}

TuningDecision check_early_exit(long long current_gpu_time_ns, long long estimated_optimum_ns,
                                const PolicyConfig& cfg) {
    if (estimated_optimum_ns <= 0) throw InvalidOptimum("estimated optimum must be positive");
    if (current_gpu_time_ns <= 0) throw InvalidOptimum("current gpu time must be positive");
    double ceiling = static_cast<double>(estimated_optimum_ns) * (1.0 + cfg.early_exit_tolerance);
    return static_cast<double>(current_gpu_time_ns) <= ceiling ? TuningDecision::micro_opts_only
                                                               : TuningDecision::full_tuning;
}

RegressionDecision check_regression(long long previous_gpu_time_ns, long long candidate_gpu_time_ns,
                                    const PolicyConfig& cfg) {
    // strictly "more than": exactly +threshold keeps
    double limit = static_cast<double>(previous_gpu_time_ns) * (1.0 + cfg.regression_threshold);
    return static_cast<double>(candidate_gpu_time_ns) > limit ? RegressionDecision::revert
                                                              : RegressionDecision::keep;
}

TransferVerdict check_transfer_sanity(std::optional<long long> expected_bytes, long long measured_bytes,
                                      const PolicyConfig& cfg) {
    TransferVerdict v;
    if (!expected_bytes || *expected_bytes <= 0) {
        v.warning = "expected transfer volume unknown; sanity check degraded to launch-count evidence";
        return v;
    }
    double limit = static_cast<double>(*expected_bytes) * cfg.transfer_sanity_factor;
    if (static_cast<double>(measured_bytes) > limit) v.flag = TransferFlag::red_flag;
    return v;
}

BypassVerdict detect_bypass(const ProfileAggregate& profile, const PolicyConfig& cfg,
                            std::optional<bool> host_dominance_marker) {
    BypassVerdict v;
    long long launches = static_cast<long long>(std::llround(profile.mean_launches));
    long long bytes = static_cast<long long>(std::llround(profile.mean_transfer_bytes));
    double gpu = profile.mean_gpu_time_ns;
    double kern_fraction = gpu > 0 ? profile.mean_kernel_time_ns / gpu : 0.0;

    if (launches == 0) {
        // no kernel launches at all: bypass regardless of mode
        v.bypass = true;
        v.reasons = {BypassReason::no_launches};
        v.note = "no kernel launches recorded";
        return v;
    }

    std::vector<BypassReason> failing;
    if (launches <= cfg.bypass_min_launches) failing.push_back(BypassReason::few_launches);
    if (bytes <= cfg.bypass_min_device_bytes) failing.push_back(BypassReason::small_device_memory);
    if (kern_fraction <= cfg.bypass_min_kernel_time_fraction)
        failing.push_back(BypassReason::low_kernel_time_fraction);

    if (failing.empty()) return v;

    if (cfg.bypass_mode == PolicyConfig::BypassMode::profile_only) {
        v.bypass = true;
        v.reasons = std::move(failing);
        return v;
    }
    // evidence-conjunctive: profile thresholds plus the code-inspection marker
    if (host_dominance_marker.value_or(false)) {
        v.bypass = true;
        v.reasons = std::move(failing);
    } else {
        std::ostringstream note;
        note << failing.size() << " profile check(s) below threshold but host-dominance evidence "
             << (host_dominance_marker.has_value() ? "negative" : "absent");
        v.note = note.str();
    }
    return v;
}

long long estimate_optimum(const ProfileAggregate& profile, const PolicyConfig& cfg) {
    if (cfg.optimum_estimator == PolicyConfig::OptimumEstimator::kernel_time_total)
        return static_cast<long long>(std::llround(profile.mean_kernel_time_ns));
    return profile.dominant_kernel_time_ns + static_cast<long long>(std::llround(profile.mean_mem_time_ns));
}

std::vector<BottleneckAction> rank_bottlenecks(const ProfileAggregate& profile, const DataPlan* plan,
                                               const AnalysisArtifact* analysis, TransferVerdict transfer,
                                               const PolicyConfig& cfg) {
    std::vector<BottleneckAction> actions;
    double gpu = profile.mean_gpu_time_ns;
    double mem_fraction = gpu > 0 ? profile.mean_mem_time_ns / gpu : 0.0;
    bool red = transfer.flag == TransferFlag::red_flag;

    if (red || (plan && plan->in_loop_transfers) || mem_fraction > cfg.data_action_mem_fraction) {
        std::string desc = red ? "measured transfers exceed the plan; fix data lifetime before kernel tuning"
                               : "hoist data regions, move scratch to device, keep timed-region helpers on device";
        actions.push_back({BottleneckCategory::data_management, desc, 0});
    }
    bool api_dominant = profile.mean_api_time_ns > gpu;
    if (profile.mean_launches >= static_cast<double>(cfg.launch_overhead_min_launches) || api_dominant) {
        std::ostringstream desc;
        desc << "reduce " << static_cast<long long>(std::llround(profile.mean_launches))
             << " launches: inline helpers called per iteration, fuse adjacent same-bounds loops";
        actions.push_back({BottleneckCategory::launch_overhead, desc.str(), 0});
    }
    {
        std::string dom = profile.dominant_kernel.empty() ? "dominant kernel" : profile.dominant_kernel;
        actions.push_back({BottleneckCategory::hot_kernel,
                           "tune " + dom + ": collapse depth, simd on innermost loops, cache reused loads", 0});
    }
    if (analysis && analysis->has_type(LoopType::B)) {
        actions.push_back({BottleneckCategory::sparse_inner_loop,
                           "keep CSR inner loops serial while average nonzeros per row is small; add inner "
                           "reduction only when rows are long enough to amortize it",
                           0});
    }
    if (analysis && (analysis->has_type(LoopType::C1) || analysis->has_type(LoopType::C2))) {
        actions.push_back({BottleneckCategory::stage_dependent,
                           "enforce serial stage loops; parallelize outer dimensions only", 0});
    }
    if (analysis) {
        bool nested_parallel = false;
        for (const auto& rec : analysis->records) {
            if (rec.type == LoopType::E) continue;
            if (rec.priority != Priority::CRITICAL && rec.priority != Priority::IMPORTANT) continue;
            for (const auto& other : analysis->records) {
                if (&other == &rec || other.type == LoopType::E) continue;
                if (other.priority == Priority::AVOID) continue;
                // sibling CRITICAL records suggest enough outer parallelism already
                nested_parallel = nested_parallel || (rec.priority == Priority::CRITICAL &&
                                                      other.priority == Priority::CRITICAL);
            }
        }
        if (nested_parallel && profile.mean_launches > 0)
            actions.push_back({BottleneckCategory::over_parallelization,
                               "drop inner parallelism where outer loops already saturate the device", 0});
    }
    actions.push_back({BottleneckCategory::micro_opt,
                       "low-risk micro-optimizations: const/restrict qualifiers, cache index loads in locals", 0});

    std::stable_sort(actions.begin(), actions.end(), [](const BottleneckAction& a, const BottleneckAction& b) {
        return static_cast<int>(a.category) < static_cast<int>(b.category);
    });
    for (size_t i = 0; i < actions.size(); ++i) actions[i].rank = static_cast<int>(i);
    return actions;
}

std::string bypass_reason_name(BypassReason r) {
    switch (r) {
    case BypassReason::no_launches: return "no_launches";
    case BypassReason::few_launches: return "few_launches";
    case BypassReason::small_device_memory: return "small_device_memory";
    case BypassReason::low_kernel_time_fraction: return "low_kernel_time_fraction";
    }
    return "?";
}

std::string bottleneck_category_name(BottleneckCategory c) {
    switch (c) {
    case BottleneckCategory::data_management: return "data_management";
    case BottleneckCategory::launch_overhead: return "launch_overhead";
    case BottleneckCategory::hot_kernel: return "hot_kernel";
    case BottleneckCategory::sparse_inner_loop: return "sparse_inner_loop";
    case BottleneckCategory::stage_dependent: return "stage_dependent";
    case BottleneckCategory::over_parallelization: return "over_parallelization";
    case BottleneckCategory::micro_opt: return "micro_opt";
    }
    return "?";
}

} // namespace ompforge
