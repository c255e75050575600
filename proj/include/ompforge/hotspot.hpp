#pragma once

#include "ompforge/source_model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ompforge {

// Loop taxonomy. Each type encodes a parallelization constraint:
//   A  dense, loop-invariant bounds
//   B  sparse/CSR: a nested loop's bounds come from an array indexed by this
//      loop's induction variable
//   C1 multi-stage/butterfly: stride or offset expressions driven by an
//      enclosing stage loop
//   C2 hierarchical/multigrid: own bounds drawn from a level-size table
//   D  histogram/indirect writes
//   E  recurrence / loop-carried dependence; not parallelizable as-is
//   F  scalar reduction
//   G  stencil: constant-offset neighbor reads
enum class LoopType { A, B, C1, C2, D, E, F, G };

enum class Priority { CRITICAL, IMPORTANT, SECONDARY, AVOID };

enum class HazardKind {
    variable_bounds,
    reduction_needed,
    atomic_needed,
    stage_dependency,
    rng_in_timed_region,
    small_trip_count,
    loop_carried_recurrence,
};

struct Hazard {
    HazardKind kind;
    std::string note;
};

struct WorkEstimate {
    std::optional<long long> trip_count; // numeric when the bound folds
    std::string trip_symbol;             // bound text when symbolic
    long long ops_per_iter = 1;
    std::optional<long long> work; // trip_count * ops_per_iter when numeric

    bool symbolic() const { return !trip_count.has_value(); }
    std::string trip_text() const;
    std::string work_text() const;
};

struct LoopRecord {
    std::string loop_id;
    LoopType type = LoopType::E;
    Priority priority = Priority::AVOID;
    WorkEstimate work;
    std::vector<Hazard> hazards;
    bool rng_special_case = false;
    bool in_timed_region = false;
    std::string note; // classifier remark (default-E warnings etc.)

    bool has_hazard(HazardKind k) const;
};

struct AnalysisConfig {
    long long small_trip_threshold = 64;
    double critical_band = 10.0; // CRITICAL when work >= max_work / band
    // Timed region defaults cover the common benchmark timer idioms.
    std::vector<std::string> timer_start_patterns = {"timer_start", "gettimeofday", "clock_gettime",
                                                     "omp_get_wtime"};
    std::vector<std::string> timer_stop_patterns = {"timer_stop", "gettimeofday", "clock_gettime",
                                                    "omp_get_wtime"};
    std::string rng_name_pattern = "(rand|rng|seed|lcg|prng|urand)";
};

struct ByteRange {
    size_t begin = 0, end = 0;
    bool contains(size_t off) const { return off >= begin && off < end; }
};

struct AnalysisArtifact {
    std::string kernel_id;
    std::vector<LoopRecord> records;
    std::vector<std::string> data_notes;
    std::vector<std::string> warnings;
    std::string cuda_section; // filled in CUDA mode, empty otherwise

    const LoopRecord* find(const std::string& loop_id) const;
    bool has_type(LoopType t) const;
};

// Timed region between the first timer-start and last timer-stop call site;
// whole file when no timer is recognized.
std::vector<ByteRange> find_timed_region(const SourceUnit& unit, const AnalysisConfig& cfg);

LoopType classify_loop(const LoopSpan& loop, const std::vector<ArrayAccess>& accesses, const SourceUnit& unit,
                       std::vector<Hazard>* hazards_out = nullptr, std::string* note_out = nullptr);

bool detect_rng_special_case(const LoopSpan& outer, const LoopSpan& inner, const SourceUnit& unit,
                             const AnalysisConfig& cfg = {});

WorkEstimate estimate_work(const LoopSpan& loop, const std::vector<ArrayAccess>& accesses, const SourceUnit& unit);

// Priority for one record given the whole timed-region population.
Priority assign_priority(const LoopRecord& record, const LoopSpan& loop, const SourceUnit& unit,
                         const std::vector<LoopRecord>& all_records, const std::vector<ByteRange>& timed_region,
                         const AnalysisConfig& cfg);

// Full analysis of one source unit.
AnalysisArtifact analyze_unit(const SourceUnit& unit, const std::string& kernel_id, const AnalysisConfig& cfg = {});

// Writes analysis.md plus the analysis.json sidecar into kernel_dir.
// Never touches anything else in the directory.
void emit_analysis_artifact(const AnalysisArtifact& artifact, const std::filesystem::path& kernel_dir);

AnalysisArtifact load_analysis_artifact(const std::filesystem::path& kernel_dir);

std::string loop_type_name(LoopType t);
std::string priority_name(Priority p);
std::string hazard_name(HazardKind k);
std::optional<LoopType> loop_type_from_name(const std::string& s);

// Integer constant folding over + - * / % << >> and parentheses; nullopt
// when any identifier survives.
std::optional<long long> fold_int_expr(std::string_view expr);

} // namespace ompforge
