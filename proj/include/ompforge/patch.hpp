#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ompforge {

struct PatchHunk {
    long old_start = 1;
    long new_start = 1;
    std::vector<std::string> lines; // with leading ' ', '-', '+'
};

struct FilePatch {
    std::string path; // a/... b/... prefixes stripped
    std::vector<PatchHunk> hunks;
};

// Parses a unified diff (one or more files).
std::vector<FilePatch> parse_unified_diff(const std::string& diff_text);

// Applies hunks to files under root. Context must match at the stated line
// or within a small search window; PatchApplyError otherwise.
void apply_patch(const std::filesystem::path& root, const std::vector<FilePatch>& patches);

// Extracts ```diff fenced blocks (or a bare diff) from an agent response.
std::vector<std::string> extract_diff_blocks(const std::string& response);

} // namespace ompforge
