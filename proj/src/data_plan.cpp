#include "ompforge/data_plan.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace ompforge {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

const LoopSpan* loop_by_id(const SourceUnit& unit, const std::string& id) {
    for (const auto& loop : unit.loops)
        if (loop.id == id) return &loop;
    return nullptr;
}

bool is_ancestor(const SourceUnit& unit, const LoopSpan& candidate, const LoopSpan& of) {
    auto p = of.parent;
    while (p) {
        if (&unit.loops[*p] == &candidate) return true;
        p = unit.loops[*p].parent;
    }
    return false;
}

// function-ish calls inside a byte range, minus math/stdio builtins
std::set<std::string> calls_in_range(const SourceUnit& unit, size_t begin, size_t end) {
    static const std::set<std::string> skip = {
        "if",    "for",   "while", "switch", "return", "sizeof", "sqrt",  "sqrtf", "fabs",  "fabsf",
        "fmax",  "fmin",  "fmaxf", "fminf",  "fmod",   "exp",    "log",   "pow",   "abs",   "min",
        "max",   "printf", "fprintf", "puts", "ceil",  "floor",  "cos",   "sin",   "int",   "double",
        "float", "long",  "unsigned"};
    std::set<std::string> out;
    const std::string& m = unit.masked;
    end = std::min(end, m.size());
    for (size_t i = begin; i < end; ++i) {
        if (!ident_char(m[i]) || (i > 0 && ident_char(m[i - 1]))) continue;
        if (std::isdigit(static_cast<unsigned char>(m[i]))) continue;
        size_t e = i;
        while (e < end && ident_char(m[e])) ++e;
        size_t p = e;
        while (p < end && std::isspace(static_cast<unsigned char>(m[p]))) ++p;
        if (p < end && m[p] == '(') {
            std::string name = unit.text.substr(i, e - i);
            if (!skip.count(name)) out.insert(name);
        }
        i = e - 1;
    }
    return out;
}

} // namespace

bool DataPlan::checklist_clean() const {
    return std::all_of(checklist.begin(), checklist.end(), [](const ChecklistResult& c) { return c.pass; });
}

DataStrategy select_strategy(const AnalysisArtifact& analysis, const SourceUnit& unit) {
    bool any_candidate = false;
    for (const auto& rec : analysis.records) {
        if (rec.type == LoopType::E) continue;
        if (rec.priority == Priority::CRITICAL || rec.priority == Priority::IMPORTANT) any_candidate = true;
    }
    if (!any_candidate)
        throw NoOffloadCandidates("no CRITICAL or IMPORTANT loop outside the serial class; nothing to offload");

    // Strategy C: iterative solvers and multi-stage kernels.
    for (const auto& rec : analysis.records) {
        if (rec.priority != Priority::CRITICAL) continue;
        if (rec.type == LoopType::C1 || rec.type == LoopType::C2) return DataStrategy::C;
        const auto* loop = loop_by_id(unit, rec.loop_id);
        if (!loop) continue;
        for (const auto& anc_rec : analysis.records) {
            if (anc_rec.type != LoopType::E) continue;
            const auto* anc = loop_by_id(unit, anc_rec.loop_id);
            if (!anc || !is_ancestor(unit, *anc, *loop)) continue;
            bool repeats = anc_rec.work.symbolic() ||
                           (anc_rec.work.trip_count && *anc_rec.work.trip_count >= 2);
            if (repeats) return DataStrategy::C; // device data re-touched every solver iteration
        }
    }

    // Strategy B: at least two independent CRITICAL kernels (disjoint footprints).
    std::vector<std::set<std::string>> footprints;
    for (const auto& rec : analysis.records) {
        if (rec.priority != Priority::CRITICAL || rec.type == LoopType::E) continue;
        const auto* loop = loop_by_id(unit, rec.loop_id);
        if (!loop) continue;
        std::set<std::string> fp;
        for (const auto& acc : extract_array_accesses(*loop, unit)) fp.insert(acc.array);
        if (!fp.empty()) footprints.push_back(std::move(fp));
    }
    for (size_t i = 0; i < footprints.size(); ++i)
        for (size_t j = i + 1; j < footprints.size(); ++j) {
            bool disjoint = std::none_of(footprints[i].begin(), footprints[i].end(),
                                         [&](const std::string& a) { return footprints[j].count(a) > 0; });
            if (disjoint) return DataStrategy::B;
        }

    return DataStrategy::A;
}

DataPlan build_data_plan(const PlanInputs& in, DataStrategy strategy) {
    if (!in.unit || !in.analysis) throw PlanIncomplete("plan inputs missing source unit or analysis");
    const SourceUnit& unit = *in.unit;
    const AnalysisArtifact& analysis = *in.analysis;

    DataPlan plan;
    plan.strategy = strategy;

    struct ArrayInfo {
        bool read_in = false, written_in = false;
        bool touched_outside = false;
        bool feeds_subscripts = false;
    };
    std::map<std::string, ArrayInfo> arrays;

    for (size_t i = 0; i < unit.loops.size(); ++i) {
        const auto& loop = unit.loops[i];
        const auto* rec = analysis.find(loop.id);
        bool timed = rec && rec->in_timed_region;
        for (const auto& acc : extract_array_accesses(loop, unit)) {
            auto& info = arrays[acc.array];
            if (timed)
                (acc.is_write ? info.written_in : info.read_in) = true;
            else
                info.touched_outside = true;
        }
    }
    // second pass: which arrays feed subscripts or loop bounds (index tables)
    for (size_t i = 0; i < unit.loops.size(); ++i) {
        const auto& loop = unit.loops[i];
        const auto* rec = analysis.find(loop.id);
        if (!rec || !rec->in_timed_region) continue;
        for (const auto& acc : extract_array_accesses(loop, unit))
            for (const auto& sub : acc.subscripts)
                for (auto& [name, info] : arrays) {
                    size_t pos = sub.find(name);
                    while (pos != std::string::npos) {
                        bool lb = pos == 0 || !ident_char(sub[pos - 1]);
                        size_t e = pos + name.size();
                        while (e < sub.size() && std::isspace(static_cast<unsigned char>(sub[e]))) ++e;
                        if (lb && e < sub.size() && sub[e] == '[') info.feeds_subscripts = true;
                        pos = sub.find(name, pos + 1);
                    }
                }
        for (const std::string* expr : {&loop.init_expr, &loop.bound_expr})
            for (auto& [name, info] : arrays) {
                size_t pos = expr->find(name + "[");
                if (pos != std::string::npos && (pos == 0 || !ident_char((*expr)[pos - 1])))
                    info.feeds_subscripts = true;
            }
    }

    // drop arrays never touched inside the timed region
    for (auto it = arrays.begin(); it != arrays.end();) {
        if (!it->second.read_in && !it->second.written_in)
            it = arrays.erase(it);
        else
            ++it;
    }

    bool all_numeric = true;
    long long total = 0;
    for (const auto& [name, info] : arrays) {
        ArrayPlanEntry entry;
        entry.name = name;
        if (info.feeds_subscripts && !info.written_in)
            entry.classification = ArrayClass::index;
        else if (!info.written_in)
            entry.classification = ArrayClass::konst;
        else if (!info.touched_outside && info.written_in)
            entry.classification = ArrayClass::scratch;
        else
            entry.classification = ArrayClass::working;

        auto sz = in.array_bytes.find(name);
        if (sz != in.array_bytes.end()) {
            entry.bytes = sz->second;
            entry.bytes_text = std::to_string(sz->second);
        } else {
            entry.bytes_text = "bytes(" + name + ")";
            plan.warnings.push_back("size of " + name + " unknown; carried symbolically");
        }

        entry.residency = strategy == DataStrategy::C ? Residency::device_persistent : Residency::mapped_region;
        auto ov = in.residency_overrides.find(name);
        if (ov != in.residency_overrides.end()) entry.residency = ov->second;

        switch (entry.classification) {
        case ArrayClass::index:
        case ArrayClass::konst:
            entry.h2d.timing = TransferTiming::entry;
            entry.h2d.bytes = entry.bytes;
            entry.h2d.bytes_text = entry.bytes_text;
            entry.d2h.timing = TransferTiming::never;
            break;
        case ArrayClass::scratch:
            entry.h2d.timing = TransferTiming::never; // device alloc only
            entry.d2h.timing = TransferTiming::never;
            break;
        case ArrayClass::working:
            if (info.read_in) {
                entry.h2d.timing = TransferTiming::entry;
                entry.h2d.bytes = entry.bytes;
                entry.h2d.bytes_text = entry.bytes_text;
            }
            if (info.written_in) {
                entry.d2h.timing = TransferTiming::exit;
                entry.d2h.bytes = entry.bytes;
                entry.d2h.bytes_text = entry.bytes_text;
            }
            break;
        }

        for (const TransferSpec* t : {&entry.h2d, &entry.d2h}) {
            if (t->timing == TransferTiming::never) continue;
            long long crossings = t->crossings.value_or(1);
            if (t->timing == TransferTiming::per_iteration) {
                if (in.iteration_bound)
                    crossings = *in.iteration_bound;
                else
                    all_numeric = false;
            }
            if (t->bytes)
                total += *t->bytes * crossings;
            else
                all_numeric = false;
        }
        if (entry.h2d.timing == TransferTiming::per_iteration || entry.d2h.timing == TransferTiming::per_iteration)
            plan.in_loop_transfers = true;
        plan.arrays.push_back(std::move(entry));
    }

    if (all_numeric) {
        plan.expected_transfer_bytes = total;
        plan.expected_transfer_text = std::to_string(total);
    } else {
        plan.expected_transfer_text = "partial(" + std::to_string(total) + ")+symbolic";
        plan.warnings.push_back("expected transfer volume partially symbolic; sanity check degrades to "
                                "launch-count-only mode");
    }

    // function placement: everything called inside the timed region must run
    // on the device; overrides force a host placement (and fail the checklist)
    std::set<std::string> region_calls;
    for (size_t i = 0; i < unit.loops.size(); ++i) {
        const auto* rec = analysis.find(unit.loops[i].id);
        if (!rec || !rec->in_timed_region) continue;
        auto calls = calls_in_range(unit, unit.loops[i].body_begin, unit.loops[i].body_end);
        region_calls.insert(calls.begin(), calls.end());
    }
    for (const auto& fn : region_calls) {
        bool forced_host = std::find(in.host_function_overrides.begin(), in.host_function_overrides.end(), fn) !=
                           in.host_function_overrides.end();
        (forced_host ? plan.host_functions : plan.device_functions).push_back(fn);
    }
    for (const auto& f : unit.functions)
        if (!region_calls.count(f.name)) plan.host_functions.push_back(f.name);
    std::sort(plan.device_functions.begin(), plan.device_functions.end());
    std::sort(plan.host_functions.begin(), plan.host_functions.end());
    plan.host_functions.erase(std::unique(plan.host_functions.begin(), plan.host_functions.end()),
                              plan.host_functions.end());

    // strategy checklist
    {
        std::string missing;
        for (const auto& fn : region_calls)
            if (std::find(plan.device_functions.begin(), plan.device_functions.end(), fn) ==
                plan.device_functions.end())
                missing += (missing.empty() ? "" : ", ") + fn;
        plan.checklist.push_back({"device versions of helper functions", missing.empty(),
                                  missing.empty() ? "all timed-region calls placed on device"
                                                  : "host placement would trigger implicit copies: " + missing});
    }
    if (strategy == DataStrategy::C) {
        std::string host_scratch;
        for (const auto& e : plan.arrays)
            if (e.classification == ArrayClass::scratch && e.residency != Residency::device_persistent)
                host_scratch += (host_scratch.empty() ? "" : ", ") + e.name;
        plan.checklist.push_back({"scratch buffers on device", host_scratch.empty(),
                                  host_scratch.empty() ? "" : "scratch remaining on host: " + host_scratch});
        plan.checklist.push_back({"no map clauses in the hot path", !plan.in_loop_transfers,
                                  plan.in_loop_transfers ? "per-iteration transfers planned in the hot path" : ""});
    } else {
        plan.checklist.push_back({"no transfers inside the iteration loop", !plan.in_loop_transfers,
                                  plan.in_loop_transfers ? "per-iteration transfers planned" : ""});
    }
    return plan;
}

std::string strategy_name(DataStrategy s) {
    switch (s) {
    case DataStrategy::A: return "A";
    case DataStrategy::B: return "B";
    case DataStrategy::C: return "C";
    }
    return "?";
}

std::string array_class_name(ArrayClass c) {
    switch (c) {
    case ArrayClass::working: return "working";
    case ArrayClass::scratch: return "scratch";
    case ArrayClass::konst: return "const";
    case ArrayClass::index: return "index";
    }
    return "?";
}

std::string residency_name(Residency r) {
    switch (r) {
    case Residency::device_persistent: return "device_persistent";
    case Residency::mapped_region: return "mapped_region";
    case Residency::host_only: return "host_only";
    }
    return "?";
}

std::string timing_name(TransferTiming t) {
    switch (t) {
    case TransferTiming::entry: return "entry";
    case TransferTiming::exit: return "exit";
    case TransferTiming::per_iteration: return "per_iteration";
    case TransferTiming::never: return "never";
    }
    return "?";
}

namespace {

ordered_json transfer_to_json(const TransferSpec& t) {
    ordered_json j;
    j["timing"] = timing_name(t.timing);
    if (t.bytes)
        j["bytes"] = *t.bytes;
    else
        j["bytes"] = t.bytes_text;
    return j;
}

TransferSpec transfer_from_json(const nlohmann::json& j) {
    TransferSpec t;
    std::string timing = j.value("timing", "never");
    t.timing = timing == "entry"           ? TransferTiming::entry
               : timing == "exit"          ? TransferTiming::exit
               : timing == "per_iteration" ? TransferTiming::per_iteration
                                           : TransferTiming::never;
    if (j.contains("bytes") && j["bytes"].is_number())
        t.bytes = j["bytes"].get<long long>();
    else if (j.contains("bytes"))
        t.bytes_text = j["bytes"].get<std::string>();
    return t;
}

} // namespace

void emit_data_plan(const DataPlan& plan, const fs::path& kernel_dir) {
    std::ostringstream md;
    md << "# Data Plan\n\n";
    bool red = !plan.checklist_clean() || (plan.strategy == DataStrategy::C && plan.in_loop_transfers);
    if (red) {
        md << "## RED FLAGS\n\n";
        for (const auto& c : plan.checklist)
            if (!c.pass) md << "- " << c.check << ": " << c.note << "\n";
        if (plan.strategy == DataStrategy::C && plan.in_loop_transfers)
            md << "- per-iteration transfers planned under a persistent device-state strategy\n";
        md << "\n";
    }
    md << "## Strategy\n\n" << strategy_name(plan.strategy) << "\n\n";
    md << "## Array Inventory\n\n";
    md << "| name | class | bytes | residency | h2d | d2h |\n";
    md << "|------|-------|-------|-----------|-----|-----|\n";
    for (const auto& e : plan.arrays) {
        auto ttext = [](const TransferSpec& t) {
            if (t.timing == TransferTiming::never) return std::string("never");
            return timing_name(t.timing) + " (" + (t.bytes ? std::to_string(*t.bytes) : t.bytes_text) + " B)";
        };
        md << "| " << e.name << " | " << array_class_name(e.classification) << " | "
           << (e.bytes ? std::to_string(*e.bytes) : e.bytes_text) << " | " << residency_name(e.residency) << " | "
           << ttext(e.h2d) << " | " << ttext(e.d2h) << " |\n";
    }
    md << "\n## Function Placement\n\n";
    md << "- device: ";
    for (size_t i = 0; i < plan.device_functions.size(); ++i) md << (i ? ", " : "") << plan.device_functions[i];
    if (plan.device_functions.empty()) md << "(none)";
    md << "\n- host: ";
    for (size_t i = 0; i < plan.host_functions.size(); ++i) md << (i ? ", " : "") << plan.host_functions[i];
    if (plan.host_functions.empty()) md << "(none)";
    md << "\n\n## Expected Transfer Volume\n\n";
    md << plan.expected_transfer_text << " bytes\n";
    md << "\n## Checklist\n\n";
    for (const auto& c : plan.checklist)
        md << "- [" << (c.pass ? "pass" : "FAIL") << "] " << c.check << (c.note.empty() ? "" : ": " + c.note)
           << "\n";
    if (!plan.warnings.empty()) {
        md << "\n## Warnings\n\n";
        for (const auto& w : plan.warnings) md << "- " << w << "\n";
    }
    util::write_file(kernel_dir / "data_plan.md", md.str());

    ordered_json j;
    j["strategy"] = strategy_name(plan.strategy);
    auto arr = ordered_json::array();
    for (const auto& e : plan.arrays) {
        ordered_json ej;
        ej["name"] = e.name;
        ej["classification"] = array_class_name(e.classification);
        if (e.bytes)
            ej["bytes"] = *e.bytes;
        else
            ej["bytes"] = e.bytes_text;
        ej["residency"] = residency_name(e.residency);
        ej["h2d"] = transfer_to_json(e.h2d);
        ej["d2h"] = transfer_to_json(e.d2h);
        arr.push_back(ej);
    }
    j["arrays"] = arr;
    j["device_functions"] = plan.device_functions;
    j["host_functions"] = plan.host_functions;
    if (plan.expected_transfer_bytes)
        j["expected_transfer_bytes"] = *plan.expected_transfer_bytes;
    else
        j["expected_transfer_bytes"] = plan.expected_transfer_text;
    j["in_loop_transfers"] = plan.in_loop_transfers;
    auto cl = ordered_json::array();
    for (const auto& c : plan.checklist) cl.push_back({{"check", c.check}, {"pass", c.pass}, {"note", c.note}});
    j["checklist"] = cl;
    j["warnings"] = plan.warnings;
    util::write_file(kernel_dir / "data_plan.json", j.dump(2) + "\n");
}

DataPlan load_data_plan(const fs::path& kernel_dir) {
    auto path = kernel_dir / "data_plan.json";
    if (!fs::exists(path)) throw MissingArtifact("data_plan.json not found in " + kernel_dir.string());
    auto j = nlohmann::json::parse(util::read_file(path));
    DataPlan plan;
    std::string s = j.value("strategy", "A");
    plan.strategy = s == "C" ? DataStrategy::C : s == "B" ? DataStrategy::B : DataStrategy::A;
    for (const auto& ej : j["arrays"]) {
        ArrayPlanEntry e;
        e.name = ej.value("name", "");
        std::string cls = ej.value("classification", "working");
        e.classification = cls == "scratch" ? ArrayClass::scratch
                           : cls == "const" ? ArrayClass::konst
                           : cls == "index" ? ArrayClass::index
                                            : ArrayClass::working;
        if (ej.contains("bytes") && ej["bytes"].is_number())
            e.bytes = ej["bytes"].get<long long>();
        else if (ej.contains("bytes"))
            e.bytes_text = ej["bytes"].get<std::string>();
        std::string res = ej.value("residency", "mapped_region");
        e.residency = res == "device_persistent" ? Residency::device_persistent
                      : res == "host_only"       ? Residency::host_only
                                                 : Residency::mapped_region;
        e.h2d = transfer_from_json(ej["h2d"]);
        e.d2h = transfer_from_json(ej["d2h"]);
        plan.arrays.push_back(std::move(e));
    }
    for (const auto& f : j.value("device_functions", std::vector<std::string>{})) plan.device_functions.push_back(f);
    for (const auto& f : j.value("host_functions", std::vector<std::string>{})) plan.host_functions.push_back(f);
    if (j.contains("expected_transfer_bytes") && j["expected_transfer_bytes"].is_number())
        plan.expected_transfer_bytes = j["expected_transfer_bytes"].get<long long>();
    plan.expected_transfer_text = plan.expected_transfer_bytes ? std::to_string(*plan.expected_transfer_bytes)
                                                               : j.value("expected_transfer_bytes", std::string());
    plan.in_loop_transfers = j.value("in_loop_transfers", false);
    for (const auto& cj : j.value("checklist", nlohmann::json::array()))
        plan.checklist.push_back({cj.value("check", ""), cj.value("pass", true), cj.value("note", "")});
    for (const auto& w : j.value("warnings", std::vector<std::string>{})) plan.warnings.push_back(w);
    return plan;
}

} // namespace ompforge
