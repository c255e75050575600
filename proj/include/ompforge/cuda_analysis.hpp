#pragma once

#include "ompforge/source_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ompforge {

struct CudaLaunchSite {
    size_t offset = 0;
    std::string grid_expr;
    std::string block_expr;
    bool malformed = false;
};

struct CudaKernelRecord {
    std::string name;
    size_t definition_begin = 0;
    size_t definition_end = 0;
    std::vector<CudaLaunchSite> launch_sites;
    bool uses_shared_memory = false;
    bool uses_syncthreads = false;
    bool uses_atomics = false;
    bool grid_stride = false;
    bool unresolved = false; // launch seen, no __global__ definition in this unit
    // grid x block x enclosing-iteration product; empty string factors stay symbolic
    std::optional<long long> device_work;
    std::string device_work_text;
};

struct CudaAllocation {
    std::string pointer;
    std::string size_expr;
};

enum class TransferDirection { H2D, D2H, D2D, unknown };

struct CudaTransfer {
    TransferDirection direction = TransferDirection::unknown;
    std::string dst, src, size_expr;
};

struct CudaMemoryInventory {
    std::vector<CudaAllocation> allocations;
    std::vector<CudaTransfer> transfers;
    std::vector<std::string> frees;
    std::vector<std::string> warnings; // e.g. free without matching alloc
};

std::vector<CudaKernelRecord> detect_kernels(const SourceUnit& unit);
CudaMemoryInventory inventory_cuda_memory(const SourceUnit& unit);

// "CUDA Execution Structure" markdown section for analysis.md (CUDA mode).
std::string cuda_analysis_section(const std::vector<CudaKernelRecord>& kernels, const CudaMemoryInventory& mem);

std::string direction_name(TransferDirection d);

} // namespace ompforge
