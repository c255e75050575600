#include <doctest.h>

#include "ompforge/cuda_analysis.hpp"
#include "ompforge/util.hpp"

#include <filesystem>

using namespace ompforge;
namespace fs = std::filesystem;

namespace {

const fs::path kCuda = fs::path(OMPFORGE_FIXTURE_DIR) / "cuda";

std::vector<CudaKernelRecord> analyze(const std::string& file) {
    auto src = util::read_file(kCuda / file);
    return detect_kernels(enumerate_loops(src, file));
}

} // namespace

TEST_CASE("corpus flags match hand labels") {
    struct Expect {
        const char* file;
        const char* kernel;
        bool shared, sync, atomics, stride;
        size_t launches;
    };
    const Expect expects[] = {
        {"cuda_map.cu", "scale", false, false, false, false, 1},
        {"cuda_grid_stride.cu", "saxpy_gs", false, false, false, true, 1},
        {"cuda_shared_reduce.cu", "block_reduce", true, true, false, false, 1},
        {"cuda_atomic_hist.cu", "hist_kernel", false, false, true, false, 1},
        {"cuda_multi_launch.cu", "step_kernel", false, false, false, false, 1},
        {"cuda_sync_stages.cu", "stage_sweep", true, true, false, true, 1},
    };
    for (const auto& e : expects) {
        CAPTURE(e.file);
        auto kernels = analyze(e.file);
        REQUIRE(kernels.size() == 1);
        const auto& k = kernels[0];
        CHECK(k.name == e.kernel);
        CHECK(k.uses_shared_memory == e.shared);
        CHECK(k.uses_syncthreads == e.sync);
        CHECK(k.uses_atomics == e.atomics);
        CHECK(k.grid_stride == e.stride);
        CHECK(k.launch_sites.size() == e.launches);
        CHECK(!k.unresolved);
    }
}

TEST_CASE("launch geometry captured verbatim") {
    auto kernels = analyze("cuda_map.cu");
    REQUIRE(kernels.size() == 1);
    REQUIRE(kernels[0].launch_sites.size() == 1);
    CHECK(kernels[0].launch_sites[0].grid_expr == "(n + 255) / 256");
    CHECK(kernels[0].launch_sites[0].block_expr == "256");
}

TEST_CASE("device work multiplies grid, block and host-loop iterations") {
    auto kernels = analyze("cuda_multi_launch.cu");
    REQUIRE(kernels.size() == 1);
    REQUIRE(kernels[0].device_work.has_value());
    CHECK(*kernels[0].device_work == 32LL * 64 * 100);
}

TEST_CASE("device work stays symbolic when geometry does not fold") {
    auto kernels = analyze("cuda_grid_stride.cu");
    REQUIRE(kernels.size() == 1);
    REQUIRE(kernels[0].device_work.has_value()); // 128*256*1
    CHECK(*kernels[0].device_work == 128LL * 256);

    auto unresolved = analyze("cuda_unresolved.cu");
    REQUIRE(unresolved.size() == 1);
    CHECK(unresolved[0].device_work_text.find("n / 64") != std::string::npos);
}

TEST_CASE("device work is monotone in each numeric factor") {
    long long prev = 0;
    for (int block : {32, 64, 128, 256}) {
        std::string src = "__global__ void k(float *x) { x[0] = 1; }\n"
                          "void go(float *x) { k<<<16, " + std::to_string(block) + ">>>(x); }\n";
        auto kernels = detect_kernels(enumerate_loops(src, "t.cu"));
        REQUIRE(kernels.size() == 1);
        REQUIRE(kernels[0].device_work.has_value());
        CHECK(*kernels[0].device_work > prev);
        prev = *kernels[0].device_work;
    }
}

TEST_CASE("launch without definition is flagged unresolved, never dropped") {
    auto kernels = analyze("cuda_unresolved.cu");
    REQUIRE(kernels.size() == 1);
    CHECK(kernels[0].name == "mystery_kernel");
    CHECK(kernels[0].unresolved);
    CHECK(kernels[0].launch_sites.size() == 1);
}

TEST_CASE("memory inventory: allocations, directions, tolerant frees") {
    auto src = util::read_file(kCuda / "cuda_memory.cu");
    auto inv = inventory_cuda_memory(enumerate_loops(src, "m.cu"));

    REQUIRE(inv.allocations.size() == 2);
    CHECK(inv.allocations[0].pointer == "d_a");
    CHECK(inv.allocations[0].size_expr == "n * sizeof(double)");
    CHECK(inv.allocations[1].pointer == "d_b");

    REQUIRE(inv.transfers.size() == 3);
    CHECK(inv.transfers[0].direction == TransferDirection::H2D);
    CHECK(inv.transfers[1].direction == TransferDirection::D2D);
    CHECK(inv.transfers[2].direction == TransferDirection::D2H);

    REQUIRE(inv.frees.size() == 3);
    REQUIRE(inv.warnings.size() == 1); // d_stale freed without malloc
    CHECK(inv.warnings[0].find("d_stale") != std::string::npos);
}

TEST_CASE("cuda section renders kernels and memory model") {
    auto src = util::read_file(kCuda / "cuda_shared_reduce.cu");
    auto unit = enumerate_loops(src, "r.cu");
    auto section = cuda_analysis_section(detect_kernels(unit), inventory_cuda_memory(unit));
    CHECK(section.find("CUDA Execution Structure") != std::string::npos);
    CHECK(section.find("block_reduce") != std::string::npos);
    CHECK(section.find("Memory Model Inventory") != std::string::npos);
}
