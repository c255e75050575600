#include "ompforge/evalkit.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace ompforge {

namespace fs = std::filesystem;

std::string kernel_status_name(KernelStatus s) {
    switch (s) {
    case KernelStatus::valid: return "valid";
    case KernelStatus::bypass_excluded: return "bypass_excluded";
    case KernelStatus::failed: return "failed";
    case KernelStatus::excluded_other: return "excluded_other";
    }
    return "?";
}

std::optional<KernelStatus> kernel_status_from_name(const std::string& s) {
    if (s == "valid") return KernelStatus::valid;
    if (s == "bypass_excluded") return KernelStatus::bypass_excluded;
    if (s == "failed") return KernelStatus::failed;
    if (s == "excluded_other") return KernelStatus::excluded_other;
    return std::nullopt;
}

double speedup(double t_ref, double t_sys) {
    if (t_ref <= 0 || t_sys <= 0) throw NonPositiveTime("speedup requires positive times");
    return t_ref / t_sys;
}

double ratio_metric(double t_ref_same_hw, double t_translated_same_hw) {
    return speedup(t_ref_same_hw, t_translated_same_hw);
}

double EvalRecord::speedup_value() const {
    return speedup(t_ref, t_sys);
}

SuiteSummary suite_summary(const std::string& suite, const std::vector<EvalRecord>& records) {
    SuiteSummary s;
    s.suite = suite;
    std::vector<double> speedups;
    for (const auto& rec : records) {
        if (rec.suite != suite) continue;
        ++s.n_attempted;
        switch (rec.status) {
        case KernelStatus::valid: {
            ++s.n_valid;
            double sp = rec.speedup_value();
            speedups.push_back(sp);
            if (sp > 1.0) ++s.n_improved;
            break;
        }
        case KernelStatus::bypass_excluded: ++s.n_bypass_excluded; break;
        case KernelStatus::failed: ++s.n_failed; break;
        case KernelStatus::excluded_other: ++s.n_excluded_other; break;
        }
    }
    if (!speedups.empty()) {
        double log_sum = 0;
        for (double sp : speedups) log_sum += std::log(sp);
        s.geomean_speedup = std::exp(log_sum / static_cast<double>(speedups.size()));
        std::sort(speedups.begin(), speedups.end());
        size_t n = speedups.size();
        s.median_speedup = n % 2 ? speedups[n / 2] : 0.5 * (speedups[n / 2 - 1] + speedups[n / 2]);
    }
    return s;
}

std::vector<EvalRecord> load_eval_records(const fs::path& csv) {
    std::vector<EvalRecord> out;
    auto lines = util::split_lines(util::read_file(csv));
    for (size_t i = 0; i < lines.size(); ++i) {
        auto line = util::trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        if (i == 0 && line.find("t_ref") != std::string::npos) continue; // header
        std::vector<std::string> cols;
        std::istringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(util::trim(col));
        if (cols.size() < 3) throw ConfigError("records csv row needs at least suite,kernel,status: " + line);
        EvalRecord rec;
        rec.suite = cols[0];
        rec.kernel_id = cols[1];
        auto status = kernel_status_from_name(cols[2]);
        if (!status) throw ConfigError("unknown status `" + cols[2] + "` in " + csv.string());
        rec.status = *status;
        if (cols.size() > 3 && !cols[3].empty()) rec.t_ref = std::stod(cols[3]);
        if (cols.size() > 4 && !cols[4].empty()) rec.t_sys = std::stod(cols[4]);
        if (cols.size() > 5 && !cols[5].empty()) rec.t_baseline = std::stod(cols[5]);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<EvalRecord> load_figure_records(const fs::path& csv, const std::string& suite) {
    std::vector<EvalRecord> out;
    auto lines = util::split_lines(util::read_file(csv));
    for (size_t i = 0; i < lines.size(); ++i) {
        auto line = util::trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        if (i == 0 && line.find("t_ref") != std::string::npos) continue;
        std::vector<std::string> cols;
        std::istringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(util::trim(col));
        if (cols.size() < 3) throw ConfigError("figure csv row needs kernel,t_ref,t_sys: " + line);
        EvalRecord rec;
        rec.suite = suite;
        rec.kernel_id = cols[0];
        rec.status = KernelStatus::valid;
        rec.t_ref = std::stod(cols[1]);
        rec.t_sys = std::stod(cols[2]);
        if (cols.size() > 3 && !cols[3].empty()) rec.t_baseline = std::stod(cols[3]);
        out.push_back(std::move(rec));
    }
    return out;
}

int accounting_percent(int improved, int valid) {
    if (valid <= 0) return 0;
    double p = 100.0 * static_cast<double>(improved) / static_cast<double>(valid);
    return static_cast<int>(std::floor(p + 1.0 / 3.0));
}

void emit_report(const std::vector<EvalRecord>& records, const fs::path& out_dir) {
    std::vector<std::string> suites;
    for (const auto& rec : records)
        if (std::find(suites.begin(), suites.end(), rec.suite) == suites.end()) suites.push_back(rec.suite);

    std::vector<SuiteSummary> summaries;
    for (const auto& suite : suites) {
        auto s = suite_summary(suite, records);
        int accounted = s.n_valid + s.n_bypass_excluded + s.n_failed + s.n_excluded_other;
        if (accounted != s.n_attempted) {
            std::ostringstream err;
            err << "accounting identity violated for suite " << suite << ": attempted " << s.n_attempted
                << " != valid " << s.n_valid << " + bypass " << s.n_bypass_excluded << " + failed " << s.n_failed
                << " + excluded " << s.n_excluded_other;
            throw AccountingMismatch(err.str());
        }
        summaries.push_back(std::move(s));
    }

    fs::create_directories(out_dir);

    // suite accounting table
    std::ostringstream md;
    md << "# Suite Accounting\n\n";
    md << "| Suite | Attempted | Valid | Improved |\n";
    md << "|-------|-----------|-------|----------|\n";
    int ta = 0, tv = 0, ti = 0;
    for (const auto& s : summaries) {
        md << "| " << s.suite << " | " << s.n_attempted << " | " << s.n_valid << " | " << s.n_improved << "/"
           << s.n_valid << " (" << accounting_percent(s.n_improved, s.n_valid) << "%) |\n";
        ta += s.n_attempted;
        tv += s.n_valid;
        ti += s.n_improved;
    }
    md << "| total | " << ta << " | " << tv << " | " << ti << "/" << tv << " ("
       << accounting_percent(ti, tv) << "%) |\n";
    md << "\n| Suite | Geomean speedup | Median speedup |\n";
    md << "|-------|-----------------|----------------|\n";
    char buf[128];
    for (const auto& s : summaries) {
        snprintf(buf, sizeof buf, "| %s | %.3f | %.3f |\n", s.suite.c_str(), s.geomean_speedup, s.median_speedup);
        md << buf;
    }
    util::write_file(out_dir / "accounting.md", md.str());

    // per-kernel csv
    std::ostringstream csv;
    csv << "suite,kernel,status,t_ref,t_sys,speedup\n";
    for (const auto& rec : records) {
        csv << rec.suite << "," << rec.kernel_id << "," << kernel_status_name(rec.status) << ",";
        if (rec.status == KernelStatus::valid) {
            snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g", rec.t_ref, rec.t_sys, rec.speedup_value());
            csv << buf;
        } else {
            csv << ",,";
        }
        csv << "\n";
    }
    util::write_file(out_dir / "per_kernel.csv", csv.str());

    // plot data per suite: kernel, reference, system, baseline
    for (const auto& suite : suites) {
        std::ostringstream plot;
        plot << "kernel,reference,system,baseline\n";
        for (const auto& rec : records) {
            if (rec.suite != suite || rec.status != KernelStatus::valid) continue;
            snprintf(buf, sizeof buf, "%s,%.6g,%.6g,", rec.kernel_id.c_str(), rec.t_ref, rec.t_sys);
            plot << buf;
            if (rec.t_baseline) {
                snprintf(buf, sizeof buf, "%.6g", *rec.t_baseline);
                plot << buf;
            }
            plot << "\n";
        }
        util::write_file(out_dir / ("plot_" + suite + ".csv"), plot.str());
    }
}

} // namespace ompforge
