#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ompforge::util {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

struct CommandResult {
    int exit_code = -1;
    std::string output; // stdout+stderr interleaved
    bool timed_out = false;
    bool ok() const { return exit_code == 0 && !timed_out; }
};

// Runs `cmd` through /bin/sh -c in `cwd`; kills the process group on timeout.
CommandResult run_command(const std::string& cmd, const fs::path& cwd, int timeout_sec = 600);

// Regular files under dir, as sorted relative paths.
std::vector<fs::path> list_files_recursive(const fs::path& dir);

// Content hash of a directory: relative path + sha256 of each tracked file.
// Skips baseline/ subtrees and files with the owner-exec bit (build outputs).
std::string tree_hash(const fs::path& dir);

// In-memory snapshot of the tracked files (same tracking rule as tree_hash).
struct TreeSnapshot {
    std::string hash;
    std::map<std::string, std::string> files; // relative path -> bytes
};
TreeSnapshot snapshot_tree(const fs::path& dir);
// Restores exactly the snapshot: rewrites tracked files, removes tracked
// files that did not exist at snapshot time.
void restore_tree(const fs::path& dir, const TreeSnapshot& snap);

std::vector<std::string> split_lines(std::string_view text);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

std::string format_ns_as_us(long long ns);

} // namespace ompforge::util
