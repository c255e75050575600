#include "ompforge/cuda_analysis.hpp"
#include "ompforge/hotspot.hpp"
#include "ompforge/util.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <sstream>

namespace ompforge {

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

size_t skip_ws(std::string_view s, size_t pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos;
}

size_t match_paren(std::string_view s, size_t open_pos) {
    int depth = 0;
    for (size_t i = open_pos; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') {
            --depth;
            if (depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

// comma-split at bracket depth 0
std::vector<std::string> split_args(std::string_view s) {
    std::vector<std::string> out;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            out.emplace_back(util::trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.emplace_back(util::trim(s.substr(start)));
    return out;
}

} // namespace

std::string direction_name(TransferDirection d) {
    switch (d) {
    case TransferDirection::H2D: return "H2D";
    case TransferDirection::D2H: return "D2H";
    case TransferDirection::D2D: return "D2D";
    case TransferDirection::unknown: return "unknown";
    }
    return "unknown";
}

std::vector<CudaKernelRecord> detect_kernels(const SourceUnit& unit) {
    const std::string& m = unit.masked;
    std::map<std::string, CudaKernelRecord> kernels;
    std::vector<std::string> order;

    // __global__ definitions
    size_t pos = 0;
    while ((pos = m.find("__global__", pos)) != std::string::npos) {
        size_t p = pos + 10;
        size_t open = m.find('(', p);
        if (open == std::string::npos) break;
        size_t name_end = open;
        while (name_end > p && std::isspace(static_cast<unsigned char>(m[name_end - 1]))) --name_end;
        size_t name_begin = name_end;
        while (name_begin > p && ident_char(m[name_begin - 1])) --name_begin;
        std::string name = unit.text.substr(name_begin, name_end - name_begin);
        size_t close = match_paren(m, open);
        if (name.empty() || close == std::string_view::npos) {
            pos = p;
            continue;
        }
        size_t body_open = skip_ws(m, close + 1);
        size_t body_end = body_open;
        if (body_open < m.size() && m[body_open] == '{') {
            int depth = 0;
            for (size_t i = body_open; i < m.size(); ++i) {
                if (m[i] == '{') ++depth;
                if (m[i] == '}') {
                    --depth;
                    if (depth == 0) {
                        body_end = i + 1;
                        break;
                    }
                }
            }
            if (body_end == body_open) body_end = m.size();
        }
        CudaKernelRecord rec;
        rec.name = name;
        rec.definition_begin = pos;
        rec.definition_end = body_end;
        std::string_view body = std::string_view(m).substr(body_open, body_end - body_open);
        rec.uses_shared_memory = body.find("__shared__") != std::string_view::npos;
        rec.uses_syncthreads = body.find("__syncthreads") != std::string_view::npos;
        static const std::regex atomic_re(R"(atomic(Add|Sub|Max|Min|Exch|CAS|And|Or|Xor|Inc|Dec)\s*\()");
        rec.uses_atomics = std::regex_search(body.begin(), body.end(), atomic_re);
        static const std::regex stride_re(
            R"(\+=\s*(blockDim\.\w+\s*\*\s*gridDim\.\w+|gridDim\.\w+\s*\*\s*blockDim\.\w+))");
        rec.grid_stride = std::regex_search(body.begin(), body.end(), stride_re);
        kernels[name] = rec;
        order.push_back(name);
        pos = body_end;
    }

    // triple-chevron launch sites
    pos = 0;
    while ((pos = m.find("<<<", pos)) != std::string::npos) {
        size_t name_end = pos;
        while (name_end > 0 && std::isspace(static_cast<unsigned char>(m[name_end - 1]))) --name_end;
        size_t name_begin = name_end;
        while (name_begin > 0 && ident_char(m[name_begin - 1])) --name_begin;
        std::string name = unit.text.substr(name_begin, name_end - name_begin);
        size_t close = m.find(">>>", pos + 3);
        CudaLaunchSite site;
        site.offset = name_begin;
        if (close == std::string::npos || name.empty()) {
            site.malformed = true;
            if (close == std::string::npos) close = pos;
        } else {
            auto args = split_args(std::string_view(unit.text).substr(pos + 3, close - pos - 3));
            if (args.size() >= 2) {
                site.grid_expr = args[0];
                site.block_expr = args[1];
            } else {
                site.malformed = true;
            }
        }
        if (!name.empty()) {
            auto it = kernels.find(name);
            if (it == kernels.end()) {
                CudaKernelRecord rec;
                rec.name = name;
                rec.unresolved = true;
                kernels[name] = rec;
                order.push_back(name);
            }
            kernels[name].launch_sites.push_back(site);
        }
        pos = close + 3;
    }

    // device work: grid x block x enclosing host-loop iterations
    std::vector<CudaKernelRecord> out;
    for (const auto& name : order) {
        auto rec = kernels[name];
        if (!rec.launch_sites.empty()) {
            const auto& site = rec.launch_sites.front();
            auto grid = fold_int_expr(site.grid_expr);
            auto block = fold_int_expr(site.block_expr);
            std::optional<long long> iters = 1;
            std::string iter_text = "L";
            for (const auto& loop : unit.loops) {
                if (site.offset >= loop.body_begin && site.offset < loop.body_end) {
                    auto we = estimate_work(loop, {}, unit);
                    if (we.trip_count && iters) {
                        iters = *iters * *we.trip_count; // nested host loops multiply
                    } else {
                        iters.reset();
                        iter_text = we.trip_text();
                    }
                }
            }
            if (grid && block && iters) {
                rec.device_work = *grid * *block * *iters;
                rec.device_work_text = std::to_string(*rec.device_work);
            } else {
                std::string g = grid ? std::to_string(*grid) : (site.grid_expr.empty() ? "G" : site.grid_expr);
                std::string b = block ? std::to_string(*block) : (site.block_expr.empty() ? "B" : site.block_expr);
                std::string l = iters ? std::to_string(*iters) : iter_text;
                rec.device_work_text = "(" + g + ")*(" + b + ")*(" + l + ")";
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

CudaMemoryInventory inventory_cuda_memory(const SourceUnit& unit) {
    CudaMemoryInventory inv;
    const std::string& m = unit.masked;

    auto call_args = [&](size_t call_pos, const std::string& fn) -> std::optional<std::vector<std::string>> {
        size_t open = skip_ws(m, call_pos + fn.size());
        if (open >= m.size() || m[open] != '(') return std::nullopt;
        size_t close = match_paren(m, open);
        if (close == std::string_view::npos) return std::nullopt;
        return split_args(std::string_view(unit.text).substr(open + 1, close - open - 1));
    };
    auto for_each_call = [&](const std::string& fn, auto&& handler) {
        size_t pos = 0;
        while ((pos = m.find(fn, pos)) != std::string::npos) {
            bool lb = pos == 0 || !ident_char(m[pos - 1]);
            bool rb = pos + fn.size() < m.size() && !ident_char(m[pos + fn.size()]);
            if (lb && rb) {
                auto args = call_args(pos, fn);
                if (args) handler(*args);
            }
            pos += fn.size();
        }
    };

    for_each_call("cudaMalloc", [&](const std::vector<std::string>& args) {
        if (args.size() < 2) return;
        std::string ptr = args[0];
        // strip &, casts like (void**)&d_a
        size_t amp = ptr.rfind('&');
        if (amp != std::string::npos) ptr = util::trim(ptr.substr(amp + 1));
        inv.allocations.push_back({ptr, args[1]});
    });
    for_each_call("cudaMemcpy", [&](const std::vector<std::string>& args) {
        if (args.size() < 4) return;
        CudaTransfer t;
        t.dst = args[0];
        t.src = args[1];
        t.size_expr = args[2];
        const std::string& kind = args[3];
        if (kind.find("HostToDevice") != std::string::npos)
            t.direction = TransferDirection::H2D;
        else if (kind.find("DeviceToHost") != std::string::npos)
            t.direction = TransferDirection::D2H;
        else if (kind.find("DeviceToDevice") != std::string::npos)
            t.direction = TransferDirection::D2D;
        inv.transfers.push_back(std::move(t));
    });
    for_each_call("cudaFree", [&](const std::vector<std::string>& args) {
        if (args.empty()) return;
        inv.frees.push_back(args[0]);
    });

    for (const auto& f : inv.frees) {
        bool known = std::any_of(inv.allocations.begin(), inv.allocations.end(),
                                 [&](const CudaAllocation& a) { return a.pointer == f; });
        if (!known) inv.warnings.push_back("cudaFree(" + f + ") without a matching cudaMalloc");
    }
    return inv;
}

std::string cuda_analysis_section(const std::vector<CudaKernelRecord>& kernels, const CudaMemoryInventory& mem) {
    std::ostringstream md;
    md << "## CUDA Execution Structure\n\n";
    md << "| kernel | launches | grid | block | shared | sync | atomics | grid-stride | device work |\n";
    md << "|--------|----------|------|-------|--------|------|---------|-------------|-------------|\n";
    for (const auto& k : kernels) {
        std::string grid = k.launch_sites.empty() ? "-" : k.launch_sites.front().grid_expr;
        std::string block = k.launch_sites.empty() ? "-" : k.launch_sites.front().block_expr;
        md << "| " << k.name << (k.unresolved ? " (unresolved)" : "") << " | " << k.launch_sites.size() << " | "
           << grid << " | " << block << " | " << (k.uses_shared_memory ? "yes" : "no") << " | "
           << (k.uses_syncthreads ? "yes" : "no") << " | " << (k.uses_atomics ? "yes" : "no") << " | "
           << (k.grid_stride ? "yes" : "no") << " | " << (k.device_work_text.empty() ? "-" : k.device_work_text)
           << " |\n";
    }
    md << "\n### Memory Model Inventory\n\n";
    for (const auto& a : mem.allocations) md << "- alloc " << a.pointer << " (" << a.size_expr << ")\n";
    for (const auto& t : mem.transfers)
        md << "- copy " << direction_name(t.direction) << " " << t.src << " -> " << t.dst << " (" << t.size_expr
           << ")\n";
    for (const auto& f : mem.frees) md << "- free " << f << "\n";
    if (mem.allocations.empty() && mem.transfers.empty() && mem.frees.empty()) md << "- (none)\n";
    for (const auto& w : mem.warnings) md << "- warning: " << w << "\n";
    return md.str();
}

} // namespace ompforge
