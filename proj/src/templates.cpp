#include "ompforge/agent.hpp"

namespace ompforge {

namespace {

const char* kAnalysis = R"(You are working on the kernel in {kernel_dir}.
Files present:
{file_listing}

System:
{system_info}

Review the loop inventory and data notes below. Confirm the classification of
every CRITICAL loop and call out anything the static pass may have missed
(hidden reductions, aliasing, stage dependencies). Do not modify any file in
this step.

{analysis_report}
)";

const char* kOffloadData = R"(You are working on the kernel in {kernel_dir}.
Files present:
{file_listing}

System:
{system_info}

The loop analysis and the data plan below are binding. Implement a GPU
offload of every CRITICAL loop with OpenMP target directives, following the
plan exactly: array residency, transfer timing, and function placement. Keep
all other behavior identical; program output must match the recorded
baseline byte for byte after normalization.

Prior actions:
{prior_actions}

Profiler output:
{profiler_output}

{analysis_report}

{data_plan}

Reply with one or more unified diffs in ```diff fences. Do not touch the
Makefile targets. Finish with a line `PRIMARY_INSIGHT: <one sentence>`.
)";

const char* kTuning = R"(You are tuning the kernel in {kernel_dir}.
Files present:
{file_listing}

System:
{system_info}

The data strategy is fixed; do not change array residency or transfer
structure in this step. Work strictly from the measured profile and the
prioritized bottleneck plan below.

Prior actions:
{prior_actions}

Profiler output:
{profiler_output}

{optimization_plan}

Propose exactly one optimization now: reply with a unified diff in a
```diff fence plus a line `ACTION: <short description>`. If no further
change is worth trying, reply with the single line `NO_FURTHER_ACTIONS`
followed by `PRIMARY_INSIGHT: <sentence>` and
`REMAINING_BOTTLENECKS: <sentence>`.
)";

const char* kGateRepair = R"(Correctness repair for the kernel in {kernel_dir}.
Files present:
{file_listing}

The candidate output diverges from the recorded baseline:
{divergence}

Checkpoint traces (first divergence shown above) come from the gate header
instrumentation. Apply the minimal fix that restores numerical agreement.
Do not fall back to CPU-only execution. Do not make performance changes in
this step; its sole objective is numerical correctness.

Reply with a unified diff in a ```diff fence.
)";

const char* kBaselineSinglePass = R"(You are working on the kernel in {kernel_dir}.
Files present:
{file_listing}

System:
{system_info}

Your Task:
1. Translate the code to an OpenMP GPU-offloaded version.
2. Apply GPU offloading pragmas as needed.
3. Optimize the code for performance while preserving functionality.
4. Ensure the code compiles and runs.
5. Deliver the modified code to {kernel_dir}.

Deliverable: The complete, modified source code in {kernel_dir}, as one or
more unified diffs in ```diff fences.
)";

const char* kCudaOverlay = R"(The input in {kernel_dir} is CUDA, not serial C.
Additional constraints for the migration:
- preserve the program's existing GPU execution semantics;
- translate CUDA runtime constructs (kernels, launches, cudaMalloc/cudaMemcpy/
  cudaFree) into OpenMP equivalents per the execution-structure table in the
  analysis;
- convert kernels into functions invoked under `target teams loop`; replace
  threadIdx/blockIdx/gridDim indexing with loop induction variables and turn
  grid-stride loops into bounded loops;
- map __shared__ buffers to thread-local storage and atomicAdd to OpenMP
  atomics or reductions; kernels relying on __syncthreads() are flagged in
  the analysis and need restructuring;
- do not reintroduce host-device transfers the original program did not have.
)";

} // namespace

PromptTemplate default_template(StageTemplate stage) {
    switch (stage) {
    case StageTemplate::analysis: return {stage, kAnalysis};
    case StageTemplate::offload_data: return {stage, kOffloadData};
    case StageTemplate::tuning: return {stage, kTuning};
    case StageTemplate::gate_repair: return {stage, kGateRepair};
    case StageTemplate::baseline_single_pass: return {stage, kBaselineSinglePass};
    case StageTemplate::cuda_mode_overlays: return {stage, kCudaOverlay};
    }
    return {stage, ""};
}

} // namespace ompforge
