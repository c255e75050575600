#pragma once

#include "ompforge/agent.hpp"
#include "ompforge/gate.hpp"
#include "ompforge/hotspot.hpp"
#include "ompforge/policy.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace ompforge {

struct PipelineConfig {
    std::string stage_graph = "consolidated3";
    std::string transport = "replay"; // replay | script | live
    std::string transcript_path;      // replay input (file, or dir of <kernel>.jsonl)
    std::string responses_path;       // script transport input
    std::string save_transcript_path; // script mode records a replayable transcript here
    std::string model = "agent-mini";
    std::string escalation_model;

    PolicyConfig policy;
    GateConfig gate;
    AnalysisConfig analysis;
    HttpTransportConfig http;

    std::string profile_source; // dir of profiling-step dirs (00, 01, ...)
    std::map<std::string, long long> problem_sizes;
    std::string system_info_path;
    int max_repair_iterations = 5;
    int max_tuning_actions = 8;
    int suite_parallelism = 1; // concurrent kernel pipelines in a suite run
    bool cuda_mode = false;
    bool deterministic = true;

    std::string suite = "default";
    std::filesystem::path base_dir; // paths in the file resolve against this

    std::filesystem::path resolve(const std::string& p) const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& file);

// host metadata injected into prompts; written once per host
std::string collect_system_info();

} // namespace ompforge
