#include "ompforge/gate.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/patch.hpp"
#include "ompforge/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iterator>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace ompforge {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string tail_excerpt(const std::string& output, size_t max_lines = 20) {
    auto lines = util::split_lines(output);
    std::string out;
    size_t start = lines.size() > max_lines ? lines.size() - max_lines : 0;
    for (size_t i = start; i < lines.size(); ++i) out += lines[i] + "\n";
    return out;
}

std::string now_timestamp(bool deterministic) {
    if (deterministic) return "1970-01-01T00:00:00Z";
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

bool makefile_has_target(const fs::path& kernel_dir, const std::string& target) {
    auto mk = kernel_dir / "Makefile";
    if (!fs::exists(mk)) return false;
    auto text = util::read_file(mk);
    return text.find("\n" + target + ":") != std::string::npos ||
           util::starts_with(text, target + ":");
}

std::string file_listing(const fs::path& kernel_dir) {
    std::string out;
    for (const auto& rel : util::list_files_recursive(kernel_dir)) {
        auto s = rel.generic_string();
        if (util::starts_with(s, "baseline/")) continue;
        out += s + "\n";
    }
    return out;
}

} // namespace

std::string normalize_output(const std::string& text, const GateConfig& cfg) {
    std::vector<std::regex> patterns;
    patterns.reserve(cfg.normalize_patterns.size());
    for (const auto& p : cfg.normalize_patterns) patterns.emplace_back(p);
    std::string out;
    for (const auto& line : util::split_lines(text)) {
        bool drop = false;
        for (const auto& re : patterns)
            if (std::regex_search(line, re)) {
                drop = true;
                break;
            }
        if (!drop) out += line + "\n";
    }
    return out;
}

std::string gate_phase_name(GatePhase p) {
    switch (p) {
    case GatePhase::build: return "build";
    case GatePhase::run: return "run";
    case GatePhase::diff: return "diff";
    }
    return "?";
}

BaselineRecord capture_baseline(const fs::path& kernel_dir, const GateConfig& cfg) {
    auto build = util::run_command(cfg.build_command, kernel_dir, cfg.build_timeout_sec);
    if (!build.ok())
        throw BaselineBuildFailure("baseline build failed in " + kernel_dir.string() + ":\n" +
                                   tail_excerpt(build.output));
    auto run = util::run_command(cfg.run_command, kernel_dir, cfg.run_timeout_sec);
    if (!run.ok())
        throw BaselineRunFailure("baseline run failed in " + kernel_dir.string() + ":\n" +
                                 tail_excerpt(run.output));

    BaselineRecord rec;
    rec.output_text = normalize_output(run.output, cfg);
    rec.output_hash = util::sha256_hex(rec.output_text);
    rec.command = cfg.run_command;
    rec.timestamp = now_timestamp(cfg.deterministic_timestamps);

    auto bdir = kernel_dir / "baseline";
    fs::create_directories(bdir / "src");
    util::write_file(bdir / "output.txt", rec.output_text);
    ordered_json j;
    j["output_hash"] = rec.output_hash;
    j["command"] = rec.command;
    j["timestamp"] = rec.timestamp;
    util::write_file(bdir / "record.json", j.dump(2) + "\n");

    // pristine source snapshot for instrumented baseline builds later
    auto snap = util::snapshot_tree(kernel_dir);
    for (const auto& [rel, content] : snap.files) util::write_file(bdir / "src" / rel, content);
    return rec;
}

BaselineRecord load_baseline(const fs::path& kernel_dir) {
    auto bdir = kernel_dir / "baseline";
    if (!fs::exists(bdir / "output.txt") || !fs::exists(bdir / "record.json"))
        throw MissingArtifact("no baseline captured in " + kernel_dir.string());
    BaselineRecord rec;
    rec.output_text = util::read_file(bdir / "output.txt");
    auto j = nlohmann::json::parse(util::read_file(bdir / "record.json"));
    rec.output_hash = j.value("output_hash", "");
    rec.command = j.value("command", "");
    rec.timestamp = j.value("timestamp", "");
    return rec;
}

std::vector<Checkpoint> parse_gate_lines(const std::string& output) {
    std::vector<Checkpoint> out;
    static const std::regex re(R"(^GATE (\S+) sum=(\S+) l2=(\S+)\s*$)");
    for (const auto& line : util::split_lines(output)) {
        std::smatch m;
        if (std::regex_match(line, m, re))
            out.push_back({m[1].str(), std::atof(m[2].str().c_str()), std::atof(m[3].str().c_str())});
    }
    return out;
}

std::optional<std::string> diff_normalized(const std::string& baseline, const std::string& candidate,
                                           double rel_tol) {
    auto base_lines = util::split_lines(baseline);
    auto cand_lines = util::split_lines(candidate);
    auto float_like = [](const std::string& tok, double& value) {
        char* end = nullptr;
        value = std::strtod(tok.c_str(), &end);
        return end && *end == '\0' && end != tok.c_str();
    };
    size_t n = std::max(base_lines.size(), cand_lines.size());
    for (size_t i = 0; i < n; ++i) {
        if (i >= base_lines.size())
            return "line " + std::to_string(i + 1) + ": unexpected extra output `" + cand_lines[i] + "`";
        if (i >= cand_lines.size())
            return "line " + std::to_string(i + 1) + ": missing expected output `" + base_lines[i] + "`";
        std::istringstream bs(base_lines[i]), cs(cand_lines[i]);
        std::vector<std::string> btok{std::istream_iterator<std::string>(bs), {}};
        std::vector<std::string> ctok{std::istream_iterator<std::string>(cs), {}};
        bool diverged = btok.size() != ctok.size();
        for (size_t t = 0; !diverged && t < btok.size(); ++t) {
            double bv, cv;
            if (float_like(btok[t], bv) && float_like(ctok[t], cv)) {
                double scale = std::max(std::fabs(bv), std::fabs(cv));
                double tol = scale > 0 ? rel_tol * scale : rel_tol;
                if (std::fabs(bv - cv) > tol) diverged = true;
            } else if (btok[t] != ctok[t]) {
                diverged = true;
            }
        }
        if (diverged)
            return "line " + std::to_string(i + 1) + ": expected `" + base_lines[i] + "` got `" + cand_lines[i] +
                   "`";
    }
    return std::nullopt;
}

GateVerdict run_gate(const fs::path& kernel_dir, const GateConfig& cfg) {
    GateVerdict verdict;

    if (cfg.delegate_check_correctness && makefile_has_target(kernel_dir, "check-correctness")) {
        auto res = util::run_command(cfg.check_correctness_command, kernel_dir, cfg.run_timeout_sec);
        verdict.phase = GatePhase::diff;
        verdict.passed = res.ok();
        if (!verdict.passed) verdict.detail = tail_excerpt(res.output);
        verdict.checkpoints = parse_gate_lines(res.output);
        return verdict;
    }

    auto build = util::run_command(cfg.build_command, kernel_dir, cfg.build_timeout_sec);
    if (!build.ok()) {
        verdict.phase = GatePhase::build;
        verdict.detail = tail_excerpt(build.output);
        return verdict;
    }
    auto run = util::run_command(cfg.run_command, kernel_dir, cfg.run_timeout_sec);
    verdict.checkpoints = parse_gate_lines(run.output);
    if (!run.ok()) {
        verdict.phase = GatePhase::run;
        verdict.detail = run.timed_out ? "run timed out" : "exit code " + std::to_string(run.exit_code) + "\n" +
                                                               tail_excerpt(run.output);
        return verdict;
    }
    verdict.phase = GatePhase::diff;
    auto baseline = load_baseline(kernel_dir);
    auto divergence = diff_normalized(baseline.output_text, normalize_output(run.output, cfg), cfg.float_rel_tol);
    if (divergence) {
        verdict.detail = *divergence;
        return verdict;
    }
    verdict.passed = true;
    return verdict;
}

std::string generate_gate_header(const std::vector<GateCheckpointSpec>& checkpoints) {
    std::set<std::string> seen;
    for (const auto& cp : checkpoints)
        if (!seen.insert(cp.label).second) throw DuplicateLabel("duplicate gate label: " + cp.label);

    std::ostringstream h;
    h << "#ifndef GATE_H\n#define GATE_H\n\n";
    h << "/* Checksum/norm checkpoints for correctness gating. Compiled out\n"
         " * entirely unless GATE_ENABLE is defined, so instrumented sources\n"
         " * behave identically to uninstrumented ones in normal builds. */\n\n";
    h << "#if defined(GATE_ENABLE)\n";
    h << "#include <math.h>\n#include <stdio.h>\n\n";
    h << "static void gate_checkpoint(const char *label, const double *values, long n) {\n";
    h << "    double sum = 0.0;\n    double sq = 0.0;\n    long i;\n";
    h << "    for (i = 0; i < n; i++) {\n        sum += values[i];\n        sq += values[i] * values[i];\n    }\n";
    h << "    printf(\"GATE %s sum=%.6e l2=%.6e\\n\", label, sum, sqrt(sq));\n";
    h << "}\n";
    h << "#define GATE_CHECK(label, arr, n) gate_checkpoint((label), (arr), (long)(n))\n";
    h << "#else\n";
    h << "#define GATE_CHECK(label, arr, n) ((void)0)\n";
    h << "#endif\n";
    for (const auto& cp : checkpoints) {
        std::string macro = cp.label;
        std::transform(macro.begin(), macro.end(), macro.begin(),
                       [](unsigned char c) { return std::isalnum(c) ? std::toupper(c) : '_'; });
        h << "#define GATE_CP_" << macro << "(arr, n) GATE_CHECK(\"" << cp.label << "\", (arr), (n))\n";
    }
    h << "\n#endif /* GATE_H */\n";
    return h.str();
}

namespace {

std::vector<Checkpoint> instrumented_checkpoints(const fs::path& dir, const GateConfig& cfg, std::string* err) {
    auto res = util::run_command(cfg.instrumented_run_command, dir, cfg.run_timeout_sec);
    if (!res.ok() && err) *err = tail_excerpt(res.output);
    return parse_gate_lines(res.output);
}

} // namespace

std::string locate_divergence(const fs::path& kernel_dir, const GateConfig& cfg) {
    auto header = generate_gate_header(cfg.checkpoints);
    util::write_file(kernel_dir / "gate.h", header);
    util::write_file(kernel_dir / "baseline" / "src" / "gate.h", header);

    std::string base_err, cand_err;
    auto base_cp = instrumented_checkpoints(kernel_dir / "baseline" / "src", cfg, &base_err);
    auto cand_cp = instrumented_checkpoints(kernel_dir, cfg, &cand_err);
    if (!cand_err.empty()) return "instrumented candidate failed:\n" + cand_err;
    if (!base_err.empty()) return "instrumented baseline failed:\n" + base_err;

    size_t n = std::max(base_cp.size(), cand_cp.size());
    for (size_t i = 0; i < n; ++i) {
        if (i >= base_cp.size()) return "checkpoint " + cand_cp[i].label + ": absent from baseline trace";
        if (i >= cand_cp.size()) return "checkpoint " + base_cp[i].label + ": missing from candidate trace";
        const auto& b = base_cp[i];
        const auto& c = cand_cp[i];
        auto differs = [&](double x, double y) {
            double scale = std::max(std::fabs(x), std::fabs(y));
            return std::fabs(x - y) > (scale > 0 ? cfg.float_rel_tol * scale : cfg.float_rel_tol);
        };
        if (b.label != c.label || differs(b.sum, c.sum) || differs(b.l2, c.l2)) {
            char buf[256];
            snprintf(buf, sizeof buf, "checkpoint %s: baseline sum=%.6e l2=%.6e, candidate sum=%.6e l2=%.6e",
                     b.label.c_str(), b.sum, b.l2, c.sum, c.l2);
            return buf;
        }
    }
    // checkpoints agree; fall back to the plain output diff
    auto baseline = load_baseline(kernel_dir);
    auto run = util::run_command(cfg.run_command, kernel_dir, cfg.run_timeout_sec);
    auto divergence = diff_normalized(baseline.output_text, normalize_output(run.output, cfg), cfg.float_rel_tol);
    return divergence.value_or("no divergence found at any checkpoint");
}

GateVerdict supervise_repair(const fs::path& kernel_dir, AgentSession& session, const std::string& model,
                             int max_iterations, const GateConfig& cfg, const BypassProbe& bypass_probe) {
    auto tmpl = default_template(StageTemplate::gate_repair);
    for (int iter = 1; iter <= max_iterations; ++iter) {
        auto divergence = locate_divergence(kernel_dir, cfg);

        std::map<std::string, std::string> bindings = {
            {"kernel_dir", kernel_dir.string()},
            {"file_listing", file_listing(kernel_dir)},
            {"divergence", divergence},
        };
        auto response = session.invoke(render_prompt(tmpl, bindings), model);
        for (const auto& block : extract_diff_blocks(response.text))
            apply_patch(kernel_dir, parse_unified_diff(block));

        auto verdict = run_gate(kernel_dir, cfg);
        if (verdict.passed) {
            if (bypass_probe) {
                if (auto reason = bypass_probe()) {
                    verdict.passed = false;
                    verdict.phase = GatePhase::diff;
                    verdict.detail = "bypass: " + *reason;
                    return verdict;
                }
            }
            return verdict;
        }
    }
    throw RepairExhausted("gate repair did not converge within " + std::to_string(max_iterations) +
                          " iterations in " + kernel_dir.string());
}

} // namespace ompforge
