#include "ompforge/patch.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#include <algorithm>

namespace ompforge {

namespace fs = std::filesystem;

std::vector<FilePatch> parse_unified_diff(const std::string& diff_text) {
    std::vector<FilePatch> patches;
    auto lines = util::split_lines(diff_text);
    FilePatch current;
    PatchHunk hunk;
    bool in_hunk = false;

    auto flush_hunk = [&]() {
        if (in_hunk && !hunk.lines.empty()) current.hunks.push_back(hunk);
        hunk = PatchHunk{};
        in_hunk = false;
    };
    auto flush_file = [&]() {
        flush_hunk();
        if (!current.path.empty() && !current.hunks.empty()) patches.push_back(current);
        current = FilePatch{};
    };

    for (const auto& line : lines) {
        if (util::starts_with(line, "--- ")) {
            flush_file();
        } else if (util::starts_with(line, "+++ ")) {
            std::string p = util::trim(line.substr(4));
            if (util::starts_with(p, "b/") || util::starts_with(p, "a/")) p = p.substr(2);
            size_t tab = p.find('\t');
            if (tab != std::string::npos) p = p.substr(0, tab);
            current.path = p;
        } else if (util::starts_with(line, "@@")) {
            flush_hunk();
            in_hunk = true;
            // @@ -old_start[,len] +new_start[,len] @@
            size_t minus = line.find('-');
            size_t plus = line.find('+');
            if (minus != std::string::npos) hunk.old_start = std::atol(line.c_str() + minus + 1);
            if (plus != std::string::npos) hunk.new_start = std::atol(line.c_str() + plus + 1);
        } else if (in_hunk && !line.empty() && (line[0] == ' ' || line[0] == '-' || line[0] == '+')) {
            hunk.lines.push_back(line);
        } else if (in_hunk && line.empty()) {
            hunk.lines.push_back(" "); // blank context line
        } else if (in_hunk && line == "\\ No newline at end of file") {
            continue;
        } else if (in_hunk) {
            flush_hunk();
        }
    }
    flush_file();
    return patches;
}

namespace {

std::vector<std::string> file_lines(const std::string& text) {
    return util::split_lines(text);
}

std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 < lines.size() || trailing_newline) out += '\n';
    }
    return out;
}

// True when the hunk's old-side matches `lines` starting at index `at`.
bool matches_at(const std::vector<std::string>& lines, const PatchHunk& hunk, size_t at) {
    size_t i = at;
    for (const auto& hl : hunk.lines) {
        if (hl[0] == '+') continue;
        if (i >= lines.size()) return false;
        if (lines[i] != hl.substr(1)) return false;
        ++i;
    }
    return true;
}

} // namespace

void apply_patch(const fs::path& root, const std::vector<FilePatch>& patches) {
    for (const auto& fp : patches) {
        auto path = root / fp.path;
        if (!fs::exists(path)) throw PatchApplyError("patch targets missing file: " + fp.path);
        auto original = util::read_file(path);
        bool trailing = !original.empty() && original.back() == '\n';
        auto lines = file_lines(original);

        long offset = 0;
        for (const auto& hunk : fp.hunks) {
            long want = hunk.old_start - 1 + offset;
            long found = -1;
            const long window = 200;
            for (long delta = 0; delta <= window && found < 0; ++delta) {
                for (long cand : {want + delta, want - delta}) {
                    if (cand < 0 || cand > static_cast<long>(lines.size())) continue;
                    if (matches_at(lines, hunk, static_cast<size_t>(cand))) {
                        found = cand;
                        break;
                    }
                }
            }
            if (found < 0)
                throw PatchApplyError("hunk context not found in " + fp.path + " near line " +
                                      std::to_string(hunk.old_start));

            std::vector<std::string> replaced;
            size_t consume = 0;
            for (const auto& hl : hunk.lines) {
                if (hl[0] == '+')
                    replaced.push_back(hl.substr(1));
                else if (hl[0] == ' ') {
                    replaced.push_back(hl.substr(1));
                    ++consume;
                } else {
                    ++consume; // '-' removed
                }
            }
            lines.erase(lines.begin() + found, lines.begin() + found + static_cast<long>(consume));
            lines.insert(lines.begin() + found, replaced.begin(), replaced.end());
            offset += static_cast<long>(replaced.size()) - static_cast<long>(consume);
        }
        util::write_file(path, join_lines(lines, trailing));
    }
}

std::vector<std::string> extract_diff_blocks(const std::string& response) {
    std::vector<std::string> blocks;
    size_t pos = 0;
    while (true) {
        size_t fence = response.find("```", pos);
        if (fence == std::string::npos) break;
        size_t lang_end = response.find('\n', fence);
        if (lang_end == std::string::npos) break;
        std::string lang = util::trim(response.substr(fence + 3, lang_end - fence - 3));
        size_t close = response.find("```", lang_end);
        if (close == std::string::npos) break;
        if (lang == "diff" || lang == "patch")
            blocks.push_back(response.substr(lang_end + 1, close - lang_end - 1));
        pos = close + 3;
    }
    if (blocks.empty() && response.find("\n+++ ") != std::string::npos &&
        response.find("\n--- ") != std::string::npos)
        blocks.push_back(response); // bare diff without fences
    return blocks;
}

} // namespace ompforge
