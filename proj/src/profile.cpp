#include "ompforge/profile.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace ompforge {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// RFC-ish CSV row split: quoted fields may hold commas and thousands
// separators, as the Nsight stats exports do.
std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(util::trim(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(util::trim(field));
    return out;
}

std::optional<double> parse_number(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ','), s.end());
    s = util::trim(s);
    if (s.empty()) return std::nullopt;
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

struct SectionTotals {
    long long time_ns = 0;
    long long count = 0;
    long long bytes = 0;
    bool has_bytes = false;
    std::vector<PerKernelStat> rows;
    int malformed = 0;
};

// Header match rules: the time column is the one naming a total time in ns;
// instances/count for launches; name/operation for the label; any header
// containing "byte" feeds transfer volume.
SectionTotals parse_section(const fs::path& file, std::vector<std::string>& warnings) {
    SectionTotals totals;
    auto text = util::read_file(file);
    auto lines = util::split_lines(text);
    if (lines.empty()) return totals;

    auto headers = split_csv_row(lines[0]);
    int time_col = -1, count_col = -1, name_col = -1, bytes_col = -1;
    for (int i = 0; i < static_cast<int>(headers.size()); ++i) {
        auto h = util::to_lower(headers[i]);
        if (time_col < 0 && h.find("total time") != std::string::npos) time_col = i;
        if (count_col < 0 && (h.find("instances") != std::string::npos || h == "count")) count_col = i;
        if (name_col < 0 && (h == "name" || h == "operation")) name_col = i;
        if (bytes_col < 0 && h.find("byte") != std::string::npos) bytes_col = i;
    }
    // fall back on a bare "time (ns)" style header
    if (time_col < 0)
        for (int i = 0; i < static_cast<int>(headers.size()); ++i) {
            auto h = util::to_lower(headers[i]);
            if (h.find("time") != std::string::npos && h.find('%') == std::string::npos) {
                time_col = i;
                break;
            }
        }
    if (time_col < 0) {
        warnings.push_back(file.filename().string() + ": no time column; section ignored");
        return totals;
    }
    totals.has_bytes = bytes_col >= 0;

    for (size_t li = 1; li < lines.size(); ++li) {
        if (util::trim(lines[li]).empty()) continue;
        auto row = split_csv_row(lines[li]);
        if (static_cast<int>(row.size()) <= time_col) {
            ++totals.malformed;
            warnings.push_back(file.filename().string() + ": malformed row " + std::to_string(li + 1) + " skipped");
            continue;
        }
        auto t = parse_number(row[time_col]);
        if (!t) {
            ++totals.malformed;
            warnings.push_back(file.filename().string() + ": malformed row " + std::to_string(li + 1) + " skipped");
            continue;
        }
        PerKernelStat stat;
        stat.time_ns = static_cast<long long>(std::llround(*t));
        if (count_col >= 0 && count_col < static_cast<int>(row.size()))
            if (auto c = parse_number(row[count_col])) stat.launches = static_cast<long long>(std::llround(*c));
        if (name_col >= 0 && name_col < static_cast<int>(row.size())) stat.name = row[name_col];
        if (bytes_col >= 0 && bytes_col < static_cast<int>(row.size()))
            if (auto b = parse_number(row[bytes_col])) totals.bytes += static_cast<long long>(std::llround(*b));
        totals.time_ns += stat.time_ns;
        totals.count += stat.launches;
        totals.rows.push_back(std::move(stat));
    }
    return totals;
}

} // namespace

long long gpu_time(const ProfileSummary& summary) {
    return summary.kernel_time_ns + summary.mem_time_ns;
}

ProfileSummary parse_stats_export(const fs::path& report_dir) {
    ProfileSummary summary;
    auto kern_file = report_dir / "cuda_gpu_kern_sum.csv";
    if (!fs::exists(kern_file))
        throw MissingSection("kernel section missing: " + kern_file.string());

    auto kern = parse_section(kern_file, summary.warnings);
    summary.kernel_time_ns = kern.time_ns;
    summary.launches = kern.count;
    summary.per_kernel = kern.rows;
    summary.malformed_rows += kern.malformed;

    auto mem_file = report_dir / "cuda_gpu_mem_time_sum.csv";
    if (fs::exists(mem_file)) {
        auto mem = parse_section(mem_file, summary.warnings);
        summary.mem_time_ns = mem.time_ns;
        summary.malformed_rows += mem.malformed;
        if (mem.has_bytes) {
            summary.transfer_bytes = mem.bytes;
        } else if (!mem.rows.empty()) {
            summary.transfer_bytes = 0;
            summary.warnings.push_back("mem section has no bytes column; transfer volume set to 0");
        }
    } else {
        summary.warnings.push_back("mem section missing; transfer time set to 0");
    }

    auto api_file = report_dir / "cuda_api_sum.csv";
    if (fs::exists(api_file)) {
        auto api = parse_section(api_file, summary.warnings);
        summary.api_time_ns = api.time_ns;
        summary.malformed_rows += api.malformed;
    }

    // trailing digits of the directory name give the run index
    auto name = report_dir.filename().string();
    size_t d = name.find_last_not_of("0123456789");
    if (d + 1 < name.size()) summary.run_index = std::stoi(name.substr(d + 1));
    return summary;
}

ProfileAggregate aggregate_runs(const std::vector<ProfileSummary>& runs) {
    ProfileAggregate agg;
    agg.runs = runs;
    if (runs.empty()) return agg;
    double n = static_cast<double>(runs.size());
    std::map<std::string, std::pair<long long, int>> per_kernel_sum;
    for (const auto& r : runs) {
        agg.mean_gpu_time_ns += static_cast<double>(gpu_time(r));
        agg.mean_kernel_time_ns += static_cast<double>(r.kernel_time_ns);
        agg.mean_mem_time_ns += static_cast<double>(r.mem_time_ns);
        agg.mean_api_time_ns += static_cast<double>(r.api_time_ns);
        agg.mean_launches += static_cast<double>(r.launches);
        agg.mean_transfer_bytes += static_cast<double>(r.transfer_bytes);
        for (const auto& k : r.per_kernel) {
            per_kernel_sum[k.name].first += k.time_ns;
            per_kernel_sum[k.name].second += 1;
        }
    }
    agg.mean_gpu_time_ns /= n;
    agg.mean_kernel_time_ns /= n;
    agg.mean_mem_time_ns /= n;
    agg.mean_api_time_ns /= n;
    agg.mean_launches /= n;
    agg.mean_transfer_bytes /= n;
    for (const auto& [name, sum] : per_kernel_sum) {
        long long mean = static_cast<long long>(std::llround(static_cast<double>(sum.first) / n));
        if (mean > agg.dominant_kernel_time_ns) {
            agg.dominant_kernel_time_ns = mean;
            agg.dominant_kernel = name;
        }
    }
    return agg;
}

ProfileAggregate load_profile_dir(const fs::path& config_dir) {
    std::vector<fs::path> run_dirs;
    if (!fs::exists(config_dir)) throw MissingSection("profile directory missing: " + config_dir.string());
    for (const auto& entry : fs::directory_iterator(config_dir))
        if (entry.is_directory()) run_dirs.push_back(entry.path());
    std::sort(run_dirs.begin(), run_dirs.end());
    if (run_dirs.empty()) {
        // a single flat report directory is also accepted
        return aggregate_runs({parse_stats_export(config_dir)});
    }
    std::vector<ProfileSummary> runs;
    for (const auto& d : run_dirs) runs.push_back(parse_stats_export(d));
    return aggregate_runs(runs);
}

void emit_profile_summary(const ProfileSummary& summary, const fs::path& out_file) {
    ordered_json j;
    j["run_index"] = summary.run_index;
    j["kernel_time_ns"] = summary.kernel_time_ns;
    j["mem_time_ns"] = summary.mem_time_ns;
    j["api_time_ns"] = summary.api_time_ns;
    j["gpu_time_ns"] = gpu_time(summary);
    j["launches"] = summary.launches;
    j["transfer_bytes"] = summary.transfer_bytes;
    auto pk = ordered_json::array();
    for (const auto& k : summary.per_kernel)
        pk.push_back({{"name", k.name}, {"time_ns", k.time_ns}, {"launches", k.launches}});
    j["per_kernel"] = pk;
    j["warnings"] = summary.warnings;
    util::write_file(out_file, j.dump(2) + "\n");
}

void emit_profile_aggregate(const ProfileAggregate& agg, const fs::path& out_file) {
    ordered_json j;
    j["runs"] = agg.runs.size();
    j["mean_gpu_time_ns"] = agg.mean_gpu_time_ns;
    j["mean_kernel_time_ns"] = agg.mean_kernel_time_ns;
    j["mean_mem_time_ns"] = agg.mean_mem_time_ns;
    j["mean_api_time_ns"] = agg.mean_api_time_ns;
    j["mean_launches"] = agg.mean_launches;
    j["mean_transfer_bytes"] = agg.mean_transfer_bytes;
    j["dominant_kernel"] = agg.dominant_kernel;
    j["dominant_kernel_time_ns"] = agg.dominant_kernel_time_ns;
    util::write_file(out_file, j.dump(2) + "\n");
}

} // namespace ompforge
