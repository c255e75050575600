#include "ompforge/hotspot.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace ompforge {

using nlohmann::ordered_json;

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<std::string> idents_in(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        if (ident_char(s[i]) && !std::isdigit(static_cast<unsigned char>(s[i])) &&
            (i == 0 || !ident_char(s[i - 1]))) {
            size_t e = i;
            while (e < s.size() && ident_char(s[e])) ++e;
            out.emplace_back(s.substr(i, e - i));
            i = e;
        } else {
            ++i;
        }
    }
    return out;
}

bool contains_word(std::string_view s, std::string_view w) {
    if (w.empty()) return false;
    size_t pos = 0;
    while ((pos = s.find(w, pos)) != std::string_view::npos) {
        bool lb = pos == 0 || !ident_char(s[pos - 1]);
        bool rb = pos + w.size() >= s.size() || !ident_char(s[pos + w.size()]);
        if (lb && rb) return true;
        pos += w.size();
    }
    return false;
}

// --- integer constant folding -------------------------------------------

struct Folder {
    std::string_view s;
    size_t pos = 0;
    bool fail = false;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    std::optional<long long> parse() {
        auto v = shift();
        skip();
        if (fail || pos != s.size()) return std::nullopt;
        return v;
    }
    long long shift() {
        long long v = add();
        while (!fail) {
            skip();
            if (pos + 1 < s.size() && s[pos] == '<' && s[pos + 1] == '<') {
                pos += 2;
                v <<= add();
            } else if (pos + 1 < s.size() && s[pos] == '>' && s[pos + 1] == '>') {
                pos += 2;
                v >>= add();
            } else {
                break;
            }
        }
        return v;
    }
    long long add() {
        long long v = mul();
        while (!fail) {
            skip();
            if (pos < s.size() && s[pos] == '+' && (pos + 1 >= s.size() || s[pos + 1] != '+')) {
                ++pos;
                v += mul();
            } else if (pos < s.size() && s[pos] == '-' && (pos + 1 >= s.size() || s[pos + 1] != '-')) {
                ++pos;
                v -= mul();
            } else {
                break;
            }
        }
        return v;
    }
    long long mul() {
        long long v = unary();
        while (!fail) {
            skip();
            if (pos < s.size() && (s[pos] == '*' || s[pos] == '/' || s[pos] == '%')) {
                char op = s[pos++];
                long long r = unary();
                if ((op == '/' || op == '%') && r == 0) {
                    fail = true;
                    return 0;
                }
                v = op == '*' ? v * r : op == '/' ? v / r : v % r;
            } else {
                break;
            }
        }
        return v;
    }
    long long unary() {
        skip();
        if (pos < s.size() && s[pos] == '-') {
            ++pos;
            return -unary();
        }
        if (pos < s.size() && s[pos] == '+') {
            ++pos;
            return unary();
        }
        return primary();
    }
    long long primary() {
        skip();
        if (pos < s.size() && s[pos] == '(') {
            ++pos;
            long long v = shift();
            skip();
            if (pos >= s.size() || s[pos] != ')') {
                fail = true;
                return 0;
            }
            ++pos;
            return v;
        }
        if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            size_t e = pos;
            long long v = 0;
            if (s[pos] == '0' && pos + 1 < s.size() && (s[pos + 1] == 'x' || s[pos + 1] == 'X')) {
                e = pos + 2;
                while (e < s.size() && std::isxdigit(static_cast<unsigned char>(s[e]))) ++e;
                v = std::stoll(std::string(s.substr(pos, e - pos)), nullptr, 16);
            } else {
                while (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) ++e;
                v = std::stoll(std::string(s.substr(pos, e - pos)));
            }
            while (e < s.size() && (s[e] == 'u' || s[e] == 'U' || s[e] == 'l' || s[e] == 'L')) ++e;
            pos = e;
            return v;
        }
        fail = true;
        return 0;
    }
};

// --- scalar statement analysis -------------------------------------------

enum class AssignKind { counter, acc_add, acc_mul, acc_minmax, overwrite, carried };

struct ScalarAssign {
    std::string var;
    AssignKind kind;
    std::string rhs;
    std::string stmt;
};

std::vector<std::string> split_statements(std::string_view masked_body) {
    std::vector<std::string> stmts;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < masked_body.size(); ++i) {
        char c = masked_body[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if ((c == ';' || c == '{' || c == '}') && depth == 0) {
            auto piece = util::trim(masked_body.substr(start, i - start));
            if (!piece.empty()) stmts.push_back(piece);
            start = i + 1;
        }
    }
    auto piece = util::trim(masked_body.substr(start));
    if (!piece.empty()) stmts.push_back(piece);
    return stmts;
}

// Splits rhs on top-level occurrences of chars in `ops`.
std::vector<std::string> split_top_level(std::string_view expr, std::string_view ops) {
    std::vector<std::string> parts;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < expr.size(); ++i) {
        char c = expr[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (depth == 0 && ops.find(c) != std::string_view::npos) {
            parts.emplace_back(util::trim(expr.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.emplace_back(util::trim(expr.substr(start)));
    return parts;
}

// "if (...) stmt" and "else stmt" prefixes hide the assignment underneath.
std::string strip_control_prefix(std::string stmt) {
    for (;;) {
        std::string t = util::trim(stmt);
        if (util::starts_with(t, "else")) {
            stmt = t.substr(4);
            continue;
        }
        if (util::starts_with(t, "if") && (t.size() == 2 || !ident_char(t[2]))) {
            size_t open = t.find('(');
            if (open == std::string::npos) return t;
            int d = 0;
            size_t close = std::string::npos;
            for (size_t i = open; i < t.size(); ++i) {
                if (t[i] == '(') ++d;
                if (t[i] == ')') {
                    --d;
                    if (d == 0) {
                        close = i;
                        break;
                    }
                }
            }
            if (close == std::string::npos) return t;
            stmt = t.substr(close + 1);
            continue;
        }
        return t;
    }
}

// Scalar assignment targets may carry a declaration ("double sum = 0");
// pointer stores and member writes are rejected.
std::optional<std::string> scalar_target(const std::string& lhs) {
    std::string t = util::trim(lhs);
    if (t.empty()) return std::nullopt;
    for (char c : t)
        if (!ident_char(c) && !std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
    auto toks = idents_in(t);
    if (toks.empty()) return std::nullopt;
    const std::string& var = toks.back();
    if (std::isdigit(static_cast<unsigned char>(var[0]))) return std::nullopt;
    return var;
}

std::optional<ScalarAssign> parse_scalar_assign(const std::string& raw_stmt) {
    std::string stmt = strip_control_prefix(raw_stmt);
    // ++x / x++ / --x / x--
    static const std::regex incdec_re(R"(^(\+\+|--)?\s*([A-Za-z_]\w*)\s*(\+\+|--)?$)");
    std::smatch mm;
    if (std::regex_match(stmt, mm, incdec_re) && (mm[1].matched || mm[3].matched))
        return ScalarAssign{mm[2].str(), AssignKind::counter, "1", stmt};

    int depth = 0;
    for (size_t i = 0; i < stmt.size(); ++i) {
        char c = stmt[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (depth != 0 || c != '=') continue;
        if (i + 1 < stmt.size() && stmt[i + 1] == '=') return std::nullopt;
        if (i == 0) return std::nullopt;
        char prev = stmt[i - 1];
        if (prev == '=' || prev == '!' || prev == '<' || prev == '>') {
            // <<= and >>= are assignments; <=, >=, == are not
            if ((prev == '<' || prev == '>') && i >= 2 && stmt[i - 2] == prev) {
                auto var = scalar_target(stmt.substr(0, i - 2));
                if (var) return ScalarAssign{*var, AssignKind::carried, util::trim(stmt.substr(i + 1)), stmt};
            }
            return std::nullopt;
        }
        size_t lhs_end = i;
        AssignKind kind = AssignKind::overwrite;
        if (prev == '+' || prev == '-') {
            kind = AssignKind::acc_add;
            lhs_end = i - 1;
        } else if (prev == '*' || prev == '&' || prev == '|' || prev == '^') {
            kind = prev == '*' ? AssignKind::acc_mul : AssignKind::acc_add;
            lhs_end = i - 1;
        } else if (prev == '/' || prev == '%') {
            kind = AssignKind::carried;
            lhs_end = i - 1;
        }
        auto target = scalar_target(stmt.substr(0, lhs_end));
        std::string rhs = util::trim(stmt.substr(i + 1));
        if (!target) return std::nullopt; // array element, pointer store, expression target
        std::string lhs = *target;

        if (kind != AssignKind::overwrite) {
            // += 1 style counters stay counters
            if (kind == AssignKind::acc_add && fold_int_expr(rhs).has_value()) kind = AssignKind::counter;
            return ScalarAssign{lhs, kind, rhs, stmt};
        }

        // plain '=': self-reference decides between accumulation and carried
        if (!contains_word(rhs, lhs)) return ScalarAssign{lhs, AssignKind::overwrite, rhs, stmt};

        auto add_terms = split_top_level(rhs, "+-");
        int self_terms = 0;
        for (const auto& t : add_terms)
            if (t == lhs) ++self_terms;
        if (add_terms.size() > 1 && self_terms == 1) {
            // ensure the var appears nowhere else in the rhs
            int words = 0;
            for (const auto& t : add_terms)
                if (contains_word(t, lhs)) ++words;
            if (words == 1) return ScalarAssign{lhs, AssignKind::acc_add, rhs, stmt};
        }
        if (add_terms.size() == 1) { // pure product only: no top-level +/-
            auto mul_factors = split_top_level(rhs, "*");
            if (mul_factors.size() > 1) {
                int self = 0, words = 0;
                for (const auto& f : mul_factors) {
                    if (f == lhs) ++self;
                    if (contains_word(f, lhs)) ++words;
                }
                if (self == 1 && words == 1) return ScalarAssign{lhs, AssignKind::acc_mul, rhs, stmt};
            }
        }
        static const std::regex minmax_re(R"(^(f?(min|max)f?)\s*\()");
        if (std::regex_search(rhs, minmax_re)) {
            size_t open = rhs.find('(');
            size_t close = rhs.rfind(')');
            if (open != std::string::npos && close != std::string::npos && close > open) {
                auto args = split_top_level(std::string_view(rhs).substr(open + 1, close - open - 1), ",");
                if (args.size() == 2 && (args[0] == lhs || args[1] == lhs))
                    return ScalarAssign{lhs, AssignKind::acc_minmax, rhs, stmt};
            }
        }
        return ScalarAssign{lhs, AssignKind::carried, rhs, stmt};
    }
    return std::nullopt;
}

struct ScalarSummary {
    std::set<std::string> accumulators;  // pure commutative accumulation vars
    std::set<std::string> carried;       // loop-carried, not a reduction
    std::set<std::string> assigned_vars; // all non-counter assignment targets
    std::vector<ScalarAssign> assigns;
};

ScalarSummary summarize_scalars(const LoopSpan& loop, const SourceUnit& unit) {
    ScalarSummary sum;
    std::string_view body =
        std::string_view(unit.masked).substr(loop.body_begin, std::min(loop.body_end, unit.masked.size()) - loop.body_begin);
    auto stmts = split_statements(body);
    for (const auto& st : stmts) {
        auto sa = parse_scalar_assign(st);
        if (sa) sum.assigns.push_back(*sa);
    }

    // Counter-style vars referenced by the loop's own bound are induction
    // bookkeeping, not data dependencies.
    std::set<std::string> induction;
    if (!loop.induction_var.empty()) induction.insert(loop.induction_var);
    for (const auto& sa : sum.assigns)
        if (sa.kind == AssignKind::counter && contains_word(loop.bound_expr, sa.var)) induction.insert(sa.var);

    // A scalar overwritten with a fresh value inside the body is re-seeded
    // every iteration of this loop; it carries nothing across iterations.
    std::set<std::string> reseeded;
    for (const auto& sa : sum.assigns)
        if (sa.kind == AssignKind::overwrite) reseeded.insert(sa.var);

    std::set<std::string> acc_candidates;
    for (const auto& sa : sum.assigns) {
        if (sa.kind != AssignKind::counter) sum.assigned_vars.insert(sa.var);
        if (induction.count(sa.var) || reseeded.count(sa.var)) continue;
        switch (sa.kind) {
        case AssignKind::acc_add:
        case AssignKind::acc_mul:
        case AssignKind::acc_minmax:
        case AssignKind::counter:
            acc_candidates.insert(sa.var);
            break;
        case AssignKind::carried:
            sum.carried.insert(sa.var);
            break;
        case AssignKind::overwrite:
            break;
        }
    }
    // Purity: an accumulator read anywhere outside its own update statements
    // feeds other computation, which makes the dependence a real recurrence.
    for (const auto& v : acc_candidates) {
        if (sum.carried.count(v)) continue;
        std::string stripped;
        for (const auto& st : stmts) {
            auto sa = parse_scalar_assign(st);
            if (sa && sa->var == v) continue;
            stripped += st;
            stripped += '\n';
        }
        if (contains_word(stripped, v))
            sum.carried.insert(v);
        else
            sum.accumulators.insert(v);
    }
    return sum;
}

// --- affine subscript helpers ---------------------------------------------

// Parses `v`, `v+c`, `v-c`, `c+v` into (var, offset).
std::optional<std::pair<std::string, long long>> affine_in_var(std::string_view sub) {
    static const std::regex re(R"(^\s*(?:([A-Za-z_]\w*)\s*([+-])\s*(\d+)|(\d+)\s*\+\s*([A-Za-z_]\w*)|([A-Za-z_]\w*))\s*$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(sub.begin(), sub.end(), m, re)) return std::nullopt;
    if (m[6].matched) return std::make_pair(m[6].str(), 0LL);
    if (m[1].matched) {
        long long c = std::stoll(m[3].str());
        return std::make_pair(m[1].str(), m[2].str() == "-" ? -c : c);
    }
    return std::make_pair(m[5].str(), std::stoll(m[4].str()));
}

std::string norm_ws(std::string_view s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

std::vector<const LoopSpan*> ancestors_of(const LoopSpan& loop, const SourceUnit& unit) {
    std::vector<const LoopSpan*> out;
    auto p = loop.parent;
    while (p) {
        out.push_back(&unit.loops[*p]);
        p = unit.loops[*p].parent;
    }
    return out;
}

std::vector<const LoopSpan*> descendants_of(const LoopSpan& loop, const SourceUnit& unit) {
    std::vector<const LoopSpan*> out;
    for (const auto& cand : unit.loops) {
        if (&cand == &loop) continue;
        if (cand.header_begin >= loop.body_begin && cand.body_end <= loop.body_end) out.push_back(&cand);
    }
    return out;
}

bool multiplicative_update(const LoopSpan& loop) {
    const std::string& inc = loop.incr_expr;
    if (inc.find("<<=") != std::string::npos || inc.find(">>=") != std::string::npos ||
        inc.find("*=") != std::string::npos || inc.find("/=") != std::string::npos)
        return true;
    // var = var * k / var = var << k
    auto sa = parse_scalar_assign(inc);
    return sa && (sa->kind == AssignKind::acc_mul || sa->kind == AssignKind::carried);
}

// True when `expr` uses `var` as a shift operand (either side of << or >>).
bool shift_involves(std::string_view expr, const std::string& var) {
    if (!contains_word(expr, var)) return false;
    size_t pos = 0;
    while ((pos = expr.find(var, pos)) != std::string_view::npos) {
        bool lb = pos == 0 || !ident_char(expr[pos - 1]);
        bool rb = pos + var.size() >= expr.size() || !ident_char(expr[pos + var.size()]);
        if (lb && rb) {
            size_t r = pos + var.size();
            while (r < expr.size() && std::isspace(static_cast<unsigned char>(expr[r]))) ++r;
            size_t l = pos;
            while (l > 0 && std::isspace(static_cast<unsigned char>(expr[l - 1]))) --l;
            bool right_shift = r + 1 < expr.size() && (expr.substr(r, 2) == "<<" || expr.substr(r, 2) == ">>");
            bool left_shift = l >= 2 && (expr.substr(l - 2, 2) == "<<" || expr.substr(l - 2, 2) == ">>");
            if (right_shift || left_shift) return true;
        }
        pos += var.size();
    }
    return false;
}

bool body_contains_call(const LoopSpan& loop, const SourceUnit& unit, const std::vector<std::string>& names) {
    std::string_view body =
        std::string_view(unit.masked).substr(loop.body_begin, std::min(loop.body_end, unit.masked.size()) - loop.body_begin);
    for (const auto& n : names) {
        size_t pos = 0;
        while ((pos = body.find(n, pos)) != std::string_view::npos) {
            bool lb = pos == 0 || !ident_char(body[pos - 1]);
            size_t e = pos + n.size();
            while (e < body.size() && std::isspace(static_cast<unsigned char>(body[e]))) ++e;
            if (lb && e < body.size() && body[e] == '(') return true;
            pos += n.size();
        }
    }
    return false;
}

} // namespace

std::optional<long long> fold_int_expr(std::string_view expr) {
    if (util::trim(expr).empty()) return std::nullopt;
    Folder f{expr};
    return f.parse();
}

std::string WorkEstimate::trip_text() const {
    if (trip_count) return std::to_string(*trip_count);
    return trip_symbol.empty() ? "?" : trip_symbol;
}

std::string WorkEstimate::work_text() const {
    if (work) return std::to_string(*work);
    return std::to_string(ops_per_iter) + "*" + trip_text();
}

bool LoopRecord::has_hazard(HazardKind k) const {
    return std::any_of(hazards.begin(), hazards.end(), [&](const Hazard& h) { return h.kind == k; });
}

const LoopRecord* AnalysisArtifact::find(const std::string& loop_id) const {
    for (const auto& r : records)
        if (r.loop_id == loop_id) return &r;
    return nullptr;
}

bool AnalysisArtifact::has_type(LoopType t) const {
    return std::any_of(records.begin(), records.end(), [&](const LoopRecord& r) { return r.type == t; });
}

std::vector<ByteRange> find_timed_region(const SourceUnit& unit, const AnalysisConfig& cfg) {
    const std::string& m = unit.masked;
    std::optional<size_t> first_start;
    std::optional<size_t> last_stop;
    for (const auto& pat : cfg.timer_start_patterns) {
        size_t pos = m.find(pat);
        if (pos != std::string::npos && (!first_start || pos < *first_start)) first_start = pos + pat.size();
    }
    for (const auto& pat : cfg.timer_stop_patterns) {
        size_t pos = m.rfind(pat);
        if (pos != std::string::npos && (!last_stop || pos > *last_stop)) last_stop = pos;
    }
    if (first_start && last_stop && *last_stop > *first_start) return {{*first_start, *last_stop}};
    return {{0, unit.text.size()}};
}

LoopType classify_loop(const LoopSpan& loop, const std::vector<ArrayAccess>& accesses, const SourceUnit& unit,
                       std::vector<Hazard>* hazards_out, std::string* note_out) {
    auto scalars = summarize_scalars(loop, unit);
    auto ancestors = ancestors_of(loop, unit);
    auto descendants = descendants_of(loop, unit);

    std::vector<Hazard> hazards;
    std::string note;
    std::optional<LoopType> result;

    auto add_hazard = [&](HazardKind k, std::string n) {
        for (const auto& h : hazards)
            if (h.kind == k) return;
        hazards.push_back({k, std::move(n)});
    };

    // E(a): same array written and read at a constant induction offset.
    bool carried_array = false;
    std::string carried_note;
    for (const auto& w : accesses) {
        if (!w.is_write) continue;
        for (const auto& r : accesses) {
            if (r.is_write || r.array != w.array) continue;
            if (w.subscripts.size() != r.subscripts.size() || w.subscripts.empty()) continue;
            for (size_t d = 0; d < w.subscripts.size(); ++d) {
                auto aw = affine_in_var(w.subscripts[d]);
                auto ar = affine_in_var(r.subscripts[d]);
                if (aw && ar && aw->first == ar->first && aw->second != ar->second) {
                    bool others_equal = true;
                    for (size_t o = 0; o < w.subscripts.size(); ++o)
                        if (o != d && norm_ws(w.subscripts[o]) != norm_ws(r.subscripts[o])) others_equal = false;
                    if (others_equal) {
                        carried_array = true;
                        carried_note = w.array + "[" + r.subscripts[d] + "] read after [" + w.subscripts[d] + "] write";
                    }
                }
            }
        }
    }
    // E(c): whole-array re-touch. A write and read of the same array whose
    // subscripts involve neither this loop's variable nor a body-local scalar
    // hit the same slots every iteration: values flow between iterations.
    if (!carried_array) {
        std::set<std::string> body_locals;
        for (const auto& sa : scalars.assigns) body_locals.insert(sa.var);
        auto tied_to_iteration = [&](const ArrayAccess& acc) {
            for (const auto& sub : acc.subscripts) {
                if (!loop.induction_var.empty() && contains_word(sub, loop.induction_var)) return true;
                for (const auto& v : body_locals)
                    if (contains_word(sub, v)) return true;
            }
            return false;
        };
        for (const auto& w : accesses) {
            if (!w.is_write || tied_to_iteration(w)) continue;
            for (const auto& r : accesses) {
                if (r.is_write || r.array != w.array || tied_to_iteration(r)) continue;
                carried_array = true;
                carried_note = w.array + " re-touched every iteration (subscripts independent of " +
                               (loop.induction_var.empty() ? std::string("the loop") : loop.induction_var) + ")";
            }
        }
    }

    // E(b): scalar carried through the body, or read back through the loop
    // condition (convergence-style loops).
    bool carried_scalar = !scalars.carried.empty();
    std::string cond_carried;
    for (const auto& id : idents_in(loop.bound_expr)) {
        if (id == loop.induction_var) continue;
        if (scalars.assigned_vars.count(id)) {
            bool counter_only = true;
            for (const auto& sa : scalars.assigns)
                if (sa.var == id && sa.kind != AssignKind::counter) counter_only = false;
            if (!counter_only) cond_carried = id;
        }
    }
    if (carried_array || carried_scalar || !cond_carried.empty()) {
        std::string note_text = carried_array ? carried_note
                                : carried_scalar
                                    ? "scalar " + *scalars.carried.begin() + " carried across iterations"
                                    : "loop condition reads " + cond_carried + " assigned in the body";
        add_hazard(HazardKind::loop_carried_recurrence, note_text);
        result = LoopType::E;
    }

    bool is_irregular = loop.irregular_form;

    // C1: stride/offset expressions driven by an enclosing stage loop.
    if (!result && !is_irregular) {
        // locals derived from shift expressions of an ancestor variable
        std::set<std::string> stage_derived;
        for (const auto* anc : ancestors) {
            if (anc->induction_var.empty()) continue;
            std::string_view ctx = std::string_view(unit.masked)
                                       .substr(anc->body_begin, std::min(anc->body_end, unit.masked.size()) - anc->body_begin);
            for (const auto& st : split_statements(ctx)) {
                auto sa = parse_scalar_assign(st);
                if (sa && shift_involves(sa->rhs, anc->induction_var)) stage_derived.insert(sa->var);
            }
        }
        auto mentions_stage = [&](std::string_view expr) {
            for (const auto* anc : ancestors) {
                if (anc->induction_var.empty()) continue;
                if (multiplicative_update(*anc) && contains_word(expr, anc->induction_var)) return true;
                if (shift_involves(expr, anc->induction_var)) return true;
            }
            for (const auto& v : stage_derived)
                if (contains_word(expr, v)) return true;
            return false;
        };
        bool c1 = false;
        for (const auto& acc : accesses)
            for (const auto& sub : acc.subscripts)
                if (mentions_stage(sub)) c1 = true;
        if (!c1 && (mentions_stage(loop.bound_expr) || mentions_stage(loop.init_expr))) c1 = true;
        if (c1) {
            add_hazard(HazardKind::stage_dependency, "bounds/offsets depend on an enclosing stage loop");
            result = LoopType::C1;
        }
    }

    // C2: own bound drawn from a level/size table indexed by an enclosing
    // loop; plain lower bound distinguishes this from CSR inner windows.
    if (!result && !is_irregular && loop.init_expr.find('[') == std::string::npos) {
        size_t pos = 0;
        const std::string& b = loop.bound_expr;
        while (pos < b.size()) {
            size_t br = b.find('[', pos);
            if (br == std::string::npos) break;
            size_t close = b.find(']', br);
            if (close == std::string::npos) break;
            std::string sub = b.substr(br + 1, close - br - 1);
            for (const auto* anc : ancestors) {
                if (!anc->induction_var.empty() && contains_word(sub, anc->induction_var)) {
                    add_hazard(HazardKind::stage_dependency, "level-size table bound " + b);
                    add_hazard(HazardKind::variable_bounds, "bound " + b + " varies per level");
                    result = LoopType::C2;
                }
            }
            pos = close + 1;
        }
    }

    // D: indirect writes need atomics (or privatization).
    if (!result && !is_irregular) {
        for (const auto& acc : accesses) {
            if (acc.is_write && acc.kind == ArrayAccess::Kind::indirect) {
                add_hazard(HazardKind::atomic_needed, "indirect write to " + acc.array);
                result = LoopType::D;
                break;
            }
        }
    }

    // F: commutative scalar accumulation is the only carried dependence.
    if (!result && !scalars.accumulators.empty()) {
        add_hazard(HazardKind::reduction_needed, "reduction over " + *scalars.accumulators.begin());
        result = LoopType::F;
    }

    if (is_irregular && !result) {
        note = "irregular do-while form; defaulted to E";
        result = LoopType::E;
    }

    // G: reads at constant-offset neighbors of a written index. Reads that
    // sit in a nested loop's header are bound tables (CSR row pointers), not
    // stencil data, and are skipped.
    auto in_child_header = [&](size_t off) {
        for (const auto* d : descendants)
            if (off >= d->header_begin && off < d->body_begin) return true;
        return false;
    };
    if (!result) {
        for (const auto& w : accesses) {
            if (!w.is_write) continue;
            for (const auto& r : accesses) {
                if (r.is_write || r.array == w.array) continue;
                if (in_child_header(r.offset)) continue;
                if (r.subscripts.size() != w.subscripts.size() || w.subscripts.empty()) continue;
                int diff_dims = 0;
                bool neighbor = false;
                for (size_t d = 0; d < w.subscripts.size(); ++d) {
                    if (norm_ws(w.subscripts[d]) == norm_ws(r.subscripts[d])) continue;
                    ++diff_dims;
                    auto aw = affine_in_var(w.subscripts[d]);
                    auto ar = affine_in_var(r.subscripts[d]);
                    if (aw && ar && aw->first == ar->first && aw->second != ar->second) neighbor = true;
                }
                if (diff_dims == 1 && neighbor) {
                    result = LoopType::G;
                    break;
                }
            }
            if (result) break;
        }
    }

    // B: a nested loop's bounds come from an array indexed by our variable.
    if (!result && !loop.induction_var.empty()) {
        for (const auto* child : descendants) {
            for (const std::string* expr : {&child->bound_expr, &child->init_expr}) {
                size_t pos = 0;
                while (pos < expr->size()) {
                    size_t br = expr->find('[', pos);
                    if (br == std::string::npos) break;
                    size_t close = expr->find(']', br);
                    if (close == std::string::npos) break;
                    if (contains_word(expr->substr(br + 1, close - br - 1), loop.induction_var)) {
                        result = LoopType::B;
                        break;
                    }
                    pos = close + 1;
                }
                if (result) break;
            }
            if (result) break;
        }
    }

    // A: bounds invariant during this loop's own execution.
    if (!result) {
        bool invariant = !loop.bound_expr.empty();
        std::set<std::string> body_assigned;
        for (const auto& sa : scalars.assigns)
            if (sa.kind != AssignKind::counter) body_assigned.insert(sa.var);
        for (const auto& id : idents_in(loop.bound_expr)) {
            if (id == loop.induction_var) continue;
            if (body_assigned.count(id)) invariant = false;
        }
        if (loop.bound_expr.find('[') != std::string::npos) invariant = false;
        if (invariant) {
            for (const auto* anc : ancestors)
                if (!anc->induction_var.empty() && contains_word(loop.bound_expr, anc->induction_var))
                    add_hazard(HazardKind::variable_bounds, "bound depends on enclosing loop variable");
            result = LoopType::A;
        }
    }

    if (!result) {
        note = "no classification rule fired; defaulted to E (safe: not parallelized)";
        result = LoopType::E;
    }
    if (hazards_out) *hazards_out = hazards;
    if (note_out) *note_out = note;
    return *result;
}

bool detect_rng_special_case(const LoopSpan& outer, const LoopSpan& inner, const SourceUnit& unit,
                             const AnalysisConfig& cfg) {
    if (!(inner.header_begin >= outer.body_begin && inner.body_end <= outer.body_end)) return false;

    // Inner loop must update a randomness-named scalar from its own previous
    // value (LCG-style state advance).
    auto inner_scalars = summarize_scalars(inner, unit);
    std::set<std::string> inner_vars;
    for (const auto& sa : inner_scalars.assigns) inner_vars.insert(sa.var);
    std::regex rng_re(cfg.rng_name_pattern, std::regex::icase);
    bool rng_state = false;
    for (const auto& sa : inner_scalars.assigns) {
        if (sa.kind != AssignKind::acc_add && sa.kind != AssignKind::acc_mul && sa.kind != AssignKind::carried)
            continue;
        if (std::regex_search(sa.var, rng_re) || std::regex_search(sa.stmt, rng_re)) rng_state = true;
    }
    if (!rng_state) return false;

    // Outer iterations must be independent samples: any carried scalar that
    // is not inner-local RNG state couples them.
    auto outer_scalars = summarize_scalars(outer, unit);
    for (const auto& v : outer_scalars.carried)
        if (!inner_vars.count(v)) return false;
    return true;
}

WorkEstimate estimate_work(const LoopSpan& loop, const std::vector<ArrayAccess>& accesses, const SourceUnit& unit) {
    WorkEstimate we;

    // trip count from the header when both endpoints fold
    if (loop.keyword == "for" && !loop.bound_expr.empty() && !loop.induction_var.empty()) {
        static const std::regex cmp_re(R"(^\s*(.*?)\s*(<=|>=|<|>|!=)\s*(.*?)\s*$)");
        std::smatch m;
        std::string bound = loop.bound_expr;
        if (std::regex_match(bound, m, cmp_re)) {
            std::string lhs = m[1], op = m[2], rhs = m[3];
            std::string limit_text = contains_word(lhs, loop.induction_var) ? rhs : lhs;
            auto limit = fold_int_expr(limit_text);
            std::optional<long long> init;
            size_t eq = loop.init_expr.find('=');
            if (eq != std::string::npos) init = fold_int_expr(loop.init_expr.substr(eq + 1));
            long long step = 1;
            bool additive = true;
            if (loop.incr_expr.find("+=") != std::string::npos || loop.incr_expr.find("-=") != std::string::npos) {
                size_t peq = loop.incr_expr.find('=');
                auto s = fold_int_expr(loop.incr_expr.substr(peq + 1));
                if (s)
                    step = std::llabs(*s);
                else
                    additive = false;
            } else if (multiplicative_update(loop)) {
                additive = false;
            }
            if (limit && init && additive && step > 0) {
                long long span = (op[0] == '<') ? *limit - *init : *init - *limit;
                if (op == "<=" || op == ">=") span += 1;
                if (op == "!=") span = std::llabs(*limit - *init);
                we.trip_count = std::max(0LL, (span + step - 1) / step);
            } else {
                we.trip_symbol = limit_text.empty() ? bound : limit_text;
            }
        } else {
            we.trip_symbol = bound;
        }
    } else {
        we.trip_symbol = loop.bound_expr.empty() ? "?" : loop.bound_expr;
    }

    // ops/iteration: arithmetic operators outside subscripts plus distinct
    // subscripted reads; writes are not double-counted. Floor of 1.
    std::string_view body =
        std::string_view(unit.masked).substr(loop.body_begin, std::min(loop.body_end, unit.masked.size()) - loop.body_begin);
    long long ops = 0;
    int bracket_depth = 0;
    for (size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        char n = i + 1 < body.size() ? body[i + 1] : '\0';
        if (c == '[') ++bracket_depth;
        if (c == ']') --bracket_depth;
        if (bracket_depth > 0) continue;
        if (c == '-' && n == '>') {
            ++i;
            continue;
        }
        if ((c == '+' && n == '+') || (c == '-' && n == '-')) {
            ++ops;
            ++i;
            continue;
        }
        if ((c == '+' || c == '-' || c == '*' || c == '/' || c == '%') && n == '=') {
            ++ops;
            ++i;
            continue;
        }
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '%') ++ops;
    }
    std::set<std::string> reads;
    for (const auto& acc : accesses)
        if (!acc.is_write) reads.insert(acc.array + "[" + acc.index_text() + "]");
    we.ops_per_iter = std::max(1LL, ops + static_cast<long long>(reads.size()));
    if (we.trip_count) we.work = *we.trip_count * we.ops_per_iter;
    return we;
}

Priority assign_priority(const LoopRecord& record, const LoopSpan& loop, const SourceUnit& unit,
                         const std::vector<LoopRecord>& all_records, const std::vector<ByteRange>& timed_region,
                         const AnalysisConfig& cfg) {
    static const std::vector<std::string> io_calls = {"printf", "fprintf", "scanf",  "fscanf", "fread",
                                                      "fwrite", "fopen",   "fclose", "puts",   "fgets"};
    bool in_timed = std::any_of(timed_region.begin(), timed_region.end(),
                                [&](const ByteRange& r) { return r.contains(loop.header_begin); });

    if (record.work.trip_count && *record.work.trip_count < cfg.small_trip_threshold) return Priority::AVOID;
    if (body_contains_call(loop, unit, io_calls)) return Priority::AVOID;

    if (in_timed) {
        if (record.work.symbolic()) return Priority::CRITICAL;
        long long max_work = 0;
        for (size_t i = 0; i < all_records.size(); ++i) {
            const auto& other = all_records[i];
            if (!other.in_timed_region || !other.work.work) continue;
            max_work = std::max(max_work, *other.work.work);
        }
        max_work = std::max(max_work, record.work.work.value_or(0));
        if (record.work.work && static_cast<double>(*record.work.work) * cfg.critical_band >= static_cast<double>(max_work))
            return Priority::CRITICAL;
        return Priority::IMPORTANT;
    }
    bool nontrivial = record.work.symbolic() ||
                      (record.work.trip_count && *record.work.trip_count >= cfg.small_trip_threshold);
    return nontrivial ? Priority::SECONDARY : Priority::AVOID;
}

AnalysisArtifact analyze_unit(const SourceUnit& unit, const std::string& kernel_id, const AnalysisConfig& cfg) {
    AnalysisArtifact art;
    art.kernel_id = kernel_id;
    art.warnings = unit.warnings;
    auto timed = find_timed_region(unit, cfg);

    std::vector<std::vector<ArrayAccess>> all_accesses;
    all_accesses.reserve(unit.loops.size());
    for (const auto& loop : unit.loops) all_accesses.push_back(extract_array_accesses(loop, unit));

    for (size_t i = 0; i < unit.loops.size(); ++i) {
        const auto& loop = unit.loops[i];
        LoopRecord rec;
        rec.loop_id = loop.id;
        rec.type = classify_loop(loop, all_accesses[i], unit, &rec.hazards, &rec.note);
        rec.work = estimate_work(loop, all_accesses[i], unit);
        rec.in_timed_region = std::any_of(timed.begin(), timed.end(),
                                          [&](const ByteRange& r) { return r.contains(loop.header_begin); });
        if (rec.work.trip_count && *rec.work.trip_count < cfg.small_trip_threshold)
            rec.hazards.push_back({HazardKind::small_trip_count,
                                   "trip count " + std::to_string(*rec.work.trip_count) + " below " +
                                       std::to_string(cfg.small_trip_threshold)});
        if (!rec.note.empty()) art.warnings.push_back(loop.id + ": " + rec.note);
        art.records.push_back(std::move(rec));
    }

    // RNG nests: outer over independent samples, inner carrying RNG state.
    for (size_t i = 0; i < unit.loops.size(); ++i) {
        for (size_t j = 0; j < unit.loops.size(); ++j) {
            if (i == j || !unit.loops[j].parent) continue;
            if (*unit.loops[j].parent != static_cast<int>(i)) continue;
            if (detect_rng_special_case(unit.loops[i], unit.loops[j], unit, cfg)) {
                art.records[i].rng_special_case = true;
                if (art.records[i].in_timed_region)
                    art.records[i].hazards.push_back(
                        {HazardKind::rng_in_timed_region, "per-thread RNG replication required"});
            }
        }
    }

    for (size_t i = 0; i < unit.loops.size(); ++i)
        art.records[i].priority =
            assign_priority(art.records[i], unit.loops[i], unit, art.records, timed, cfg);

    // Data notes: arrays touched inside the timed region.
    std::map<std::string, std::pair<bool, bool>> arrays; // name -> (read, written)
    for (size_t i = 0; i < unit.loops.size(); ++i) {
        if (!art.records[i].in_timed_region) continue;
        for (const auto& acc : all_accesses[i]) {
            auto& rw = arrays[acc.array];
            if (acc.is_write)
                rw.second = true;
            else
                rw.first = true;
        }
    }
    for (const auto& [name, rw] : arrays) {
        std::string role = rw.first && rw.second ? "read+write" : rw.second ? "write-only" : "read-only";
        art.data_notes.push_back(name + ": " + role + " in timed region");
    }
    for (const auto& rec : art.records)
        if (rec.rng_special_case)
            art.data_notes.push_back(rec.loop_id + ": outer samples independent; replicate RNG state per thread");
    return art;
}

std::string loop_type_name(LoopType t) {
    switch (t) {
    case LoopType::A: return "A";
    case LoopType::B: return "B";
    case LoopType::C1: return "C1";
    case LoopType::C2: return "C2";
    case LoopType::D: return "D";
    case LoopType::E: return "E";
    case LoopType::F: return "F";
    case LoopType::G: return "G";
    }
    return "?";
}

std::optional<LoopType> loop_type_from_name(const std::string& s) {
    if (s == "A") return LoopType::A;
    if (s == "B") return LoopType::B;
    if (s == "C1") return LoopType::C1;
    if (s == "C2") return LoopType::C2;
    if (s == "D") return LoopType::D;
    if (s == "E") return LoopType::E;
    if (s == "F") return LoopType::F;
    if (s == "G") return LoopType::G;
    return std::nullopt;
}

std::string priority_name(Priority p) {
    switch (p) {
    case Priority::CRITICAL: return "CRITICAL";
    case Priority::IMPORTANT: return "IMPORTANT";
    case Priority::SECONDARY: return "SECONDARY";
    case Priority::AVOID: return "AVOID";
    }
    return "?";
}

std::string hazard_name(HazardKind k) {
    switch (k) {
    case HazardKind::variable_bounds: return "variable_bounds";
    case HazardKind::reduction_needed: return "reduction_needed";
    case HazardKind::atomic_needed: return "atomic_needed";
    case HazardKind::stage_dependency: return "stage_dependency";
    case HazardKind::rng_in_timed_region: return "rng_in_timed_region";
    case HazardKind::small_trip_count: return "small_trip_count";
    case HazardKind::loop_carried_recurrence: return "loop_carried_recurrence";
    }
    return "?";
}

namespace {

ordered_json record_to_json(const LoopRecord& rec) {
    ordered_json j;
    j["loop"] = rec.loop_id;
    j["loop_type"] = loop_type_name(rec.type);
    j["priority"] = priority_name(rec.priority);
    if (rec.work.trip_count)
        j["trip_count"] = *rec.work.trip_count;
    else
        j["trip_count"] = rec.work.trip_text();
    j["ops_per_iter"] = rec.work.ops_per_iter;
    if (rec.work.work)
        j["work_estimate"] = *rec.work.work;
    else
        j["work_estimate"] = rec.work.work_text();
    auto hz = ordered_json::array();
    for (const auto& h : rec.hazards) hz.push_back({{"kind", hazard_name(h.kind)}, {"note", h.note}});
    j["hazards"] = hz;
    j["rng_special_case"] = rec.rng_special_case;
    j["in_timed_region"] = rec.in_timed_region;
    j["note"] = rec.note;
    return j;
}

} // namespace

void emit_analysis_artifact(const AnalysisArtifact& artifact, const std::filesystem::path& kernel_dir) {
    std::ostringstream md;
    md << "# Hotspot Analysis: " << artifact.kernel_id << "\n\n";
    md << "## Loop Inventory\n\n";
    md << "| id | type | priority | trip | ops | work | hazards |\n";
    md << "|----|------|----------|------|-----|------|--------|\n";
    for (const auto& rec : artifact.records) {
        std::string hz;
        for (size_t i = 0; i < rec.hazards.size(); ++i) {
            if (i) hz += ", ";
            hz += hazard_name(rec.hazards[i].kind);
        }
        if (rec.rng_special_case) hz += hz.empty() ? "rng_replication" : ", rng_replication";
        md << "| " << rec.loop_id << " | " << loop_type_name(rec.type) << " | " << priority_name(rec.priority)
           << " | " << rec.work.trip_text() << " | " << rec.work.ops_per_iter << " | " << rec.work.work_text()
           << " | " << hz << " |\n";
    }
    md << "\n## Data Notes\n\n";
    for (const auto& n : artifact.data_notes) md << "- " << n << "\n";
    if (artifact.data_notes.empty()) md << "- (none)\n";
    if (!artifact.cuda_section.empty()) md << "\n" << artifact.cuda_section;
    md << "\n## Warnings\n\n";
    for (const auto& w : artifact.warnings) md << "- " << w << "\n";
    if (artifact.warnings.empty()) md << "- (none)\n";

    util::write_file(kernel_dir / "analysis.md", md.str());

    ordered_json j;
    j["kernel_id"] = artifact.kernel_id;
    auto recs = ordered_json::array();
    for (const auto& rec : artifact.records) recs.push_back(record_to_json(rec));
    j["records"] = recs;
    j["data_notes"] = artifact.data_notes;
    j["warnings"] = artifact.warnings;
    j["cuda_section"] = artifact.cuda_section;
    util::write_file(kernel_dir / "analysis.json", j.dump(2) + "\n");
}

AnalysisArtifact load_analysis_artifact(const std::filesystem::path& kernel_dir) {
    auto path = kernel_dir / "analysis.json";
    if (!std::filesystem::exists(path)) throw MissingArtifact("analysis.json not found in " + kernel_dir.string());
    auto j = nlohmann::json::parse(util::read_file(path));
    AnalysisArtifact art;
    art.kernel_id = j.value("kernel_id", "");
    for (const auto& rj : j["records"]) {
        LoopRecord rec;
        rec.loop_id = rj.value("loop", "");
        rec.type = loop_type_from_name(rj.value("loop_type", "E")).value_or(LoopType::E);
        std::string pr = rj.value("priority", "AVOID");
        rec.priority = pr == "CRITICAL"    ? Priority::CRITICAL
                       : pr == "IMPORTANT" ? Priority::IMPORTANT
                       : pr == "SECONDARY" ? Priority::SECONDARY
                                           : Priority::AVOID;
        if (rj["trip_count"].is_number())
            rec.work.trip_count = rj["trip_count"].get<long long>();
        else
            rec.work.trip_symbol = rj["trip_count"].get<std::string>();
        rec.work.ops_per_iter = rj.value("ops_per_iter", 1LL);
        if (rj["work_estimate"].is_number()) rec.work.work = rj["work_estimate"].get<long long>();
        for (const auto& hj : rj["hazards"]) {
            std::string kind = hj.value("kind", "");
            for (int k = 0; k <= static_cast<int>(HazardKind::loop_carried_recurrence); ++k)
                if (hazard_name(static_cast<HazardKind>(k)) == kind)
                    rec.hazards.push_back({static_cast<HazardKind>(k), hj.value("note", "")});
        }
        rec.rng_special_case = rj.value("rng_special_case", false);
        rec.in_timed_region = rj.value("in_timed_region", false);
        rec.note = rj.value("note", "");
        art.records.push_back(std::move(rec));
    }
    for (const auto& n : j.value("data_notes", std::vector<std::string>{})) art.data_notes.push_back(n);
    for (const auto& w : j.value("warnings", std::vector<std::string>{})) art.warnings.push_back(w);
    art.cuda_section = j.value("cuda_section", "");
    return art;
}

} // namespace ompforge
