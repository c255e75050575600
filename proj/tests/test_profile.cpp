#include <doctest.h>

#include "ompforge/errors.hpp"
#include "ompforge/profile.hpp"
#include "ompforge/util.hpp"

#include <filesystem>

using namespace ompforge;
namespace fs = std::filesystem;

namespace {
const fs::path kProfiles = fs::path(OMPFORGE_FIXTURE_DIR) / "profiles";
}

TEST_CASE("gpu_time is kernel plus transfer time, never API") {
    ProfileSummary s;
    s.kernel_time_ns = 3;
    s.mem_time_ns = 2;
    s.api_time_ns = 100;
    CHECK(gpu_time(s) == 5);

    s.kernel_time_ns = 0;
    s.mem_time_ns = 0;
    s.api_time_ns = 50;
    CHECK(gpu_time(s) == 0);
}

TEST_CASE("API-exclusion property: perturbing api time never changes gpu_time") {
    ProfileSummary s;
    s.kernel_time_ns = 123456;
    s.mem_time_ns = 789;
    auto base = gpu_time(s);
    for (long long api : {0LL, 1LL, 1000000LL, 99999999999LL}) {
        s.api_time_ns = api;
        CHECK(gpu_time(s) == base);
    }
}

TEST_CASE("jacobi reference fixture reproduces the published total") {
    auto agg = load_profile_dir(kProfiles / "jacobi_ref");
    REQUIRE(agg.runs.size() == 3);
    CHECK(agg.mean_gpu_time_ns == doctest::Approx(4181300000.0));
    CHECK(gpu_time(agg.runs[1]) == 4181300000LL);
    CHECK(agg.runs[0].launches == 3000);
    CHECK(agg.runs[0].transfer_bytes == 3211400000LL);
}

TEST_CASE("jacobi system fixture reproduces the published total") {
    auto agg = load_profile_dir(kProfiles / "jacobi_pc");
    REQUIRE(agg.runs.size() == 3);
    CHECK(agg.mean_gpu_time_ns == doctest::Approx(8540000.0));
}

TEST_CASE("mg fixture: kernel total 4569 ms, empty mem section contributes zero") {
    auto s = parse_stats_export(kProfiles / "mg_pc" / "run1");
    CHECK(s.kernel_time_ns == 4569000000LL);
    CHECK(s.mem_time_ns == 0);
    CHECK(gpu_time(s) == 4569000000LL);
    CHECK(s.launches == 316);
}

TEST_CASE("column order and extra columns do not change totals") {
    auto canonical = parse_stats_export(kProfiles / "jacobi_ref" / "run2");
    auto shuffled = parse_stats_export(kProfiles / "shuffled" / "run1");
    CHECK(shuffled.kernel_time_ns == canonical.kernel_time_ns);
    CHECK(shuffled.mem_time_ns == canonical.mem_time_ns);
    CHECK(shuffled.launches == canonical.launches);
    CHECK(shuffled.transfer_bytes == canonical.transfer_bytes);
    CHECK(gpu_time(shuffled) == gpu_time(canonical));
}

TEST_CASE("missing kernel section is fatal, malformed rows are skipped with warnings") {
    CHECK_THROWS_AS(parse_stats_export(kProfiles), MissingSection);

    auto s = parse_stats_export(kProfiles / "malformed" / "run1");
    CHECK(s.kernel_time_ns == 1000000);
    CHECK(s.launches == 14);
    CHECK(s.malformed_rows == 2);
    CHECK(!s.warnings.empty());
}

TEST_CASE("aggregate_runs: arithmetic mean, single run degenerate") {
    ProfileSummary a, b, c;
    a.kernel_time_ns = 10'000'000;
    b.kernel_time_ns = 20'000'000;
    c.kernel_time_ns = 30'000'000;
    auto agg = aggregate_runs({a, b, c});
    CHECK(agg.mean_gpu_time_ns == doctest::Approx(20'000'000.0));

    auto one = aggregate_runs({b});
    CHECK(one.mean_gpu_time_ns == doctest::Approx(20'000'000.0));
}

TEST_CASE("three-run mean matches hand-computed mean of the fixtures") {
    auto agg = load_profile_dir(kProfiles / "jacobi_ref");
    double hand = (4181100000.0 + 4181300000.0 + 4181500000.0) / 3.0;
    CHECK(agg.mean_gpu_time_ns == doctest::Approx(hand));
}

TEST_CASE("additivity: concatenated sections sum to the parts") {
    auto dir = fs::temp_directory_path() / "ofg_prof_add";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto k1 = util::read_file(kProfiles / "jacobi_ref" / "run1" / "cuda_gpu_kern_sum.csv");
    auto k2 = util::read_file(kProfiles / "jacobi_ref" / "run2" / "cuda_gpu_kern_sum.csv");
    auto lines2 = util::split_lines(k2);
    std::string merged = k1;
    for (size_t i = 1; i < lines2.size(); ++i) merged += lines2[i] + "\n";
    util::write_file(dir / "cuda_gpu_kern_sum.csv", merged);

    auto p1 = parse_stats_export(kProfiles / "jacobi_ref" / "run1");
    auto p2 = parse_stats_export(kProfiles / "jacobi_ref" / "run2");
    auto pm = parse_stats_export(dir);
    CHECK(pm.kernel_time_ns == p1.kernel_time_ns + p2.kernel_time_ns);
    CHECK(pm.launches == p1.launches + p2.launches);
    fs::remove_all(dir);
}

TEST_CASE("dominant kernel tracked for the optimum estimator") {
    auto agg = load_profile_dir(kProfiles / "jacobi_pc");
    CHECK(agg.dominant_kernel.find("jacobi_fused") != std::string::npos);
    CHECK(agg.dominant_kernel_time_ns == 7103000LL);
}

TEST_CASE("summary and aggregate json emission round out the run") {
    auto dir = fs::temp_directory_path() / "ofg_prof_emit";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto agg = load_profile_dir(kProfiles / "jacobi_pc");
    emit_profile_summary(agg.runs[0], dir / "profile_summary_1.json");
    emit_profile_aggregate(agg, dir / "profile_aggregate.json");
    auto txt = util::read_file(dir / "profile_aggregate.json");
    CHECK(txt.find("mean_gpu_time_ns") != std::string::npos);
    CHECK(txt.find("8540000") != std::string::npos);
    fs::remove_all(dir);
}
