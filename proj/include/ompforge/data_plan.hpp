#pragma once

#include "ompforge/hotspot.hpp"
#include "ompforge/source_model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ompforge {

// Data-management strategy for the offload step:
//   A  scoped target-data regions with explicit map clauses
//   B  asynchronous overlap of independent transfers and kernels
//   C  persistent device allocations for iterative/multi-stage solvers
enum class DataStrategy { A, B, C };

enum class ArrayClass { working, scratch, konst, index };
enum class Residency { device_persistent, mapped_region, host_only };
enum class TransferTiming { entry, exit, per_iteration, never };

struct TransferSpec {
    TransferTiming timing = TransferTiming::never;
    std::optional<long long> bytes; // per crossing
    std::string bytes_text;         // symbolic when unknown
    std::optional<long long> crossings = 1;
    std::string crossings_text;
};

struct ArrayPlanEntry {
    std::string name;
    ArrayClass classification = ArrayClass::working;
    std::optional<long long> bytes;
    std::string bytes_text;
    Residency residency = Residency::mapped_region;
    TransferSpec h2d;
    TransferSpec d2h;
};

struct ChecklistResult {
    std::string check;
    bool pass = true;
    std::string note;
};

struct DataPlan {
    DataStrategy strategy = DataStrategy::A;
    std::vector<ArrayPlanEntry> arrays;
    std::vector<std::string> device_functions;
    std::vector<std::string> host_functions;
    std::optional<long long> expected_transfer_bytes;
    std::string expected_transfer_text;
    bool in_loop_transfers = false;
    std::vector<ChecklistResult> checklist;
    std::vector<std::string> warnings;

    bool checklist_clean() const;
};

struct PlanInputs {
    const SourceUnit* unit = nullptr;
    const AnalysisArtifact* analysis = nullptr;
    // problem-size config: array name -> total bytes
    std::map<std::string, long long> array_bytes;
    // test/operator overrides for checklist exercise
    std::map<std::string, Residency> residency_overrides;
    std::vector<std::string> host_function_overrides;
    std::optional<long long> iteration_bound; // serial wrapper trips when known
};

DataStrategy select_strategy(const AnalysisArtifact& analysis, const SourceUnit& unit);

DataPlan build_data_plan(const PlanInputs& in, DataStrategy strategy);

// Writes data_plan.md plus data_plan.json into kernel_dir.
void emit_data_plan(const DataPlan& plan, const std::filesystem::path& kernel_dir);

DataPlan load_data_plan(const std::filesystem::path& kernel_dir);

std::string strategy_name(DataStrategy s);
std::string array_class_name(ArrayClass c);
std::string residency_name(Residency r);
std::string timing_name(TransferTiming t);

} // namespace ompforge
