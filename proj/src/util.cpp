#include "ompforge/util.hpp"
#include "ompforge/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ompforge::util {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableSource("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ArtifactWriteFailure("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ArtifactWriteFailure("short write to " + path.string());
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
        throw ForgeError("sha256 failed");
    static const char* hexd = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out += hexd[md[i] >> 4];
        out += hexd[md[i] & 0xf];
    }
    return out;
}

CommandResult run_command(const std::string& cmd, const fs::path& cwd, int timeout_sec) {
    int pipefd[2];
    if (pipe(pipefd) != 0) throw ForgeError("pipe() failed: " + std::string(strerror(errno)));

    pid_t pid = fork();
    if (pid < 0) throw ForgeError("fork() failed: " + std::string(strerror(errno)));

    if (pid == 0) {
        setpgid(0, 0);
        if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
        dup2(pipefd[1], STDOUT_FILENO);
        dup2(pipefd[1], STDERR_FILENO);
        close(pipefd[0]);
        close(pipefd[1]);
        execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(pipefd[1]);
    fcntl(pipefd[0], F_SETFL, O_NONBLOCK);

    CommandResult result;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_sec);
    char buf[4096];
    bool child_done = false;
    int status = 0;
    while (true) {
        ssize_t n;
        while ((n = read(pipefd[0], buf, sizeof buf)) > 0) result.output.append(buf, static_cast<size_t>(n));
        if (n == 0 && child_done) break;

        if (!child_done) {
            pid_t r = waitpid(pid, &status, WNOHANG);
            if (r == pid) child_done = true;
        }
        if (n == 0 && child_done) break;
        if (!child_done && std::chrono::steady_clock::now() > deadline) {
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && child_done) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    // Drain whatever is left after the child exited.
    ssize_t n;
    while ((n = read(pipefd[0], buf, sizeof buf)) > 0) result.output.append(buf, static_cast<size_t>(n));
    close(pipefd[0]);

    if (result.timed_out)
        result.exit_code = -1;
    else if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

namespace {

bool tracked(const fs::path& root, const fs::directory_entry& entry) {
    if (!entry.is_regular_file()) return false;
    auto rel = fs::relative(entry.path(), root);
    for (const auto& part : rel)
        if (part == "baseline") return false;
    auto perms = entry.status().permissions();
    // Build outputs carry the exec bit; sources and artifacts do not.
    if ((perms & fs::perms::owner_exec) != fs::perms::none) return false;
    return true;
}

} // namespace

std::vector<fs::path> list_files_recursive(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file()) out.push_back(fs::relative(entry.path(), dir));
    std::sort(out.begin(), out.end());
    return out;
}

TreeSnapshot snapshot_tree(const fs::path& dir) {
    TreeSnapshot snap;
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!tracked(dir, entry)) continue;
        auto rel = fs::relative(entry.path(), dir).generic_string();
        entries.emplace_back(rel, read_file(entry.path()));
    }
    std::sort(entries.begin(), entries.end());
    std::string acc;
    for (auto& [rel, content] : entries) {
        acc += rel;
        acc += '\0';
        acc += sha256_hex(content);
        acc += '\n';
        snap.files.emplace(rel, std::move(content));
    }
    snap.hash = sha256_hex(acc);
    return snap;
}

std::string tree_hash(const fs::path& dir) {
    std::string acc;
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!tracked(dir, entry)) continue;
        auto rel = fs::relative(entry.path(), dir).generic_string();
        entries.emplace_back(rel, sha256_hex(read_file(entry.path())));
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [rel, h] : entries) {
        acc += rel;
        acc += '\0';
        acc += h;
        acc += '\n';
    }
    return sha256_hex(acc);
}

void restore_tree(const fs::path& dir, const TreeSnapshot& snap) {
    // Remove tracked files that appeared after the snapshot.
    std::vector<fs::path> to_remove;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!tracked(dir, entry)) continue;
        auto rel = fs::relative(entry.path(), dir).generic_string();
        if (!snap.files.count(rel)) to_remove.push_back(entry.path());
    }
    for (const auto& p : to_remove) fs::remove(p);
    for (const auto& [rel, content] : snap.files) write_file(dir / rel, content);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

std::string format_ns_as_us(long long ns) {
    long long us = ns / 1000;
    long long frac = ns % 1000;
    char buf[64];
    if (frac == 0)
        snprintf(buf, sizeof buf, "%lld", us);
    else
        snprintf(buf, sizeof buf, "%lld.%03lld", us, frac);
    return buf;
}

} // namespace ompforge::util
