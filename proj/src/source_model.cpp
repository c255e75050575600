#include "ompforge/source_model.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace ompforge {

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_keyword(std::string_view w) {
    static const std::set<std::string, std::less<>> kws = {
        "for", "while", "do", "if", "else", "switch", "return", "sizeof", "case"};
    return kws.count(w) > 0;
}

// Matches the word starting at pos (pos must be a word boundary already).
bool word_at(std::string_view s, size_t pos, std::string_view w) {
    if (pos + w.size() > s.size()) return false;
    if (s.substr(pos, w.size()) != w) return false;
    if (pos > 0 && ident_char(s[pos - 1])) return false;
    if (pos + w.size() < s.size() && ident_char(s[pos + w.size()])) return false;
    return true;
}

size_t skip_ws(std::string_view s, size_t pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos;
}

// Returns offset just past the matching close char, or npos when unbalanced.
size_t match_forward(std::string_view s, size_t open_pos, char open, char close) {
    int depth = 0;
    for (size_t i = open_pos; i < s.size(); ++i) {
        if (s[i] == open)
            ++depth;
        else if (s[i] == close) {
            --depth;
            if (depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

// Splits a for-header interior on top-level semicolons.
std::vector<std::string> split_header_clauses(std::string_view interior) {
    std::vector<std::string> parts;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < interior.size(); ++i) {
        char c = interior[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == ';' && depth == 0) {
            parts.emplace_back(util::trim(interior.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.emplace_back(util::trim(interior.substr(start)));
    return parts;
}

std::string induction_from_clauses(const std::string& init, const std::string& incr) {
    // init: "[type] name = ..." -> identifier directly left of the first '='
    size_t eq = init.find('=');
    if (eq != std::string::npos && (eq + 1 >= init.size() || init[eq + 1] != '=')) {
        size_t e = eq;
        while (e > 0 && std::isspace(static_cast<unsigned char>(init[e - 1]))) --e;
        size_t b = e;
        while (b > 0 && ident_char(init[b - 1])) --b;
        if (b < e) return init.substr(b, e - b);
    }
    // incr: "name++", "++name", "name += k"
    std::string s = util::trim(incr);
    size_t b = 0;
    while (b < s.size() && !ident_char(s[b])) ++b;
    size_t e = b;
    while (e < s.size() && ident_char(s[e])) ++e;
    if (e > b) return s.substr(b, e - b);
    return "";
}

} // namespace

std::string mask_comments_and_strings(std::string_view text) {
    std::string out(text);
    enum class St { code, line_comment, block_comment, str, chr } st = St::code;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        char next = i + 1 < text.size() ? text[i + 1] : '\0';
        switch (st) {
        case St::code:
            if (c == '/' && next == '/') {
                st = St::line_comment;
                out[i] = ' ';
            } else if (c == '/' && next == '*') {
                st = St::block_comment;
                out[i] = ' ';
            } else if (c == '"') {
                st = St::str; // keep the quote, blank the interior
            } else if (c == '\'') {
                st = St::chr;
            }
            break;
        case St::line_comment:
            if (c == '\n')
                st = St::code;
            else
                out[i] = ' ';
            break;
        case St::block_comment:
            if (c == '*' && next == '/') {
                out[i] = ' ';
                out[i + 1] = ' ';
                ++i;
                st = St::code;
            } else if (c != '\n') {
                out[i] = ' ';
            }
            break;
        case St::str:
            if (c == '\\' && i + 1 < text.size()) {
                out[i] = ' ';
                if (text[i + 1] != '\n') out[i + 1] = ' ';
                ++i;
            } else if (c == '"') {
                st = St::code;
            } else if (c != '\n') {
                out[i] = ' ';
            }
            break;
        case St::chr:
            if (c == '\\' && i + 1 < text.size()) {
                out[i] = ' ';
                if (text[i + 1] != '\n') out[i + 1] = ' ';
                ++i;
            } else if (c == '\'') {
                st = St::code;
            } else if (c != '\n') {
                out[i] = ' ';
            }
            break;
        }
    }
    return out;
}

namespace {

// Body of a control statement starting at pos: either a brace block or a
// single statement ending at the first top-level ';'.
struct BodyRange {
    size_t begin, end;
    bool truncated;
};

BodyRange statement_body(std::string_view masked, size_t pos, std::vector<std::string>& warnings) {
    pos = skip_ws(masked, pos);
    if (pos < masked.size() && masked[pos] == '{') {
        size_t end = match_forward(masked, pos, '{', '}');
        if (end == std::string_view::npos) {
            warnings.push_back("unbalanced braces; span truncated at end of file");
            return {pos, masked.size(), true};
        }
        return {pos, end, false};
    }
    // single statement: scan to ';' at depth 0
    int depth = 0;
    for (size_t i = pos; i < masked.size(); ++i) {
        char c = masked[i];
        if (c == '(' || c == '{' || c == '[') ++depth;
        if (c == ')' || c == '}' || c == ']') --depth;
        if (c == ';' && depth <= 0) return {pos, i + 1, false};
    }
    warnings.push_back("unterminated statement body; span truncated at end of file");
    return {pos, masked.size(), true};
}

void discover_functions(SourceUnit& unit) {
    const std::string& m = unit.masked;
    int depth = 0;
    for (size_t i = 0; i < m.size(); ++i) {
        char c = m[i];
        if (c == '{') {
            if (depth == 0) {
                // look back: ')' then matching '(' then identifier
                size_t j = i;
                while (j > 0 && std::isspace(static_cast<unsigned char>(m[j - 1]))) --j;
                if (j > 0 && m[j - 1] == ')') {
                    int pd = 0;
                    size_t k = j;
                    while (k > 0) {
                        --k;
                        if (m[k] == ')') ++pd;
                        if (m[k] == '(') {
                            --pd;
                            if (pd == 0) break;
                        }
                    }
                    size_t e = k;
                    while (e > 0 && std::isspace(static_cast<unsigned char>(m[e - 1]))) --e;
                    size_t b = e;
                    while (b > 0 && ident_char(m[b - 1])) --b;
                    std::string name = unit.text.substr(b, e - b);
                    if (!name.empty() && !is_keyword(name) && !std::isdigit(static_cast<unsigned char>(name[0]))) {
                        size_t body_end = match_forward(m, i, '{', '}');
                        if (body_end == std::string_view::npos) body_end = m.size();
                        unit.functions.push_back({name, b, i, body_end});
                    }
                }
            }
            ++depth;
        } else if (c == '}') {
            --depth;
        }
    }
}

} // namespace

std::optional<int> SourceUnit::enclosing_function(size_t offset) const {
    for (int i = 0; i < static_cast<int>(functions.size()); ++i)
        if (offset >= functions[i].body_begin && offset < functions[i].body_end) return i;
    return std::nullopt;
}

SourceUnit enumerate_loops(std::string_view text, std::string path) {
    SourceUnit unit;
    unit.path = std::move(path);
    unit.text = std::string(text);
    unit.masked = mask_comments_and_strings(text);
    discover_functions(unit);

    const std::string& m = unit.masked;
    std::set<size_t> dowhile_tails; // positions of 'while' consumed by do-while

    for (size_t i = 0; i < m.size(); ++i) {
        if (!ident_char(m[i]) || (i > 0 && ident_char(m[i - 1]))) continue;

        if (word_at(m, i, "for")) {
            LoopSpan loop;
            loop.keyword = "for";
            loop.header_begin = i;
            size_t p = skip_ws(m, i + 3);
            if (p >= m.size() || m[p] != '(') continue; // not a loop (e.g. macro'd token)
            size_t close = match_forward(m, p, '(', ')');
            if (close == std::string_view::npos) {
                unit.warnings.push_back("unbalanced parens in for-header; loop skipped");
                continue;
            }
            loop.header = unit.text.substr(i, close - i);
            auto clauses = split_header_clauses(std::string_view(unit.text).substr(p + 1, close - p - 2));
            if (clauses.size() >= 3) {
                loop.init_expr = clauses[0];
                loop.bound_expr = clauses[1];
                loop.incr_expr = clauses[2];
            }
            loop.induction_var = induction_from_clauses(loop.init_expr, loop.incr_expr);
            auto body = statement_body(m, close, unit.warnings);
            loop.body_begin = body.begin;
            loop.body_end = body.end;
            loop.truncated = body.truncated;
            unit.loops.push_back(std::move(loop));
        } else if (word_at(m, i, "while") && !dowhile_tails.count(i)) {
            LoopSpan loop;
            loop.keyword = "while";
            loop.header_begin = i;
            size_t p = skip_ws(m, i + 5);
            if (p >= m.size() || m[p] != '(') continue;
            size_t close = match_forward(m, p, '(', ')');
            if (close == std::string_view::npos) {
                unit.warnings.push_back("unbalanced parens in while-header; loop skipped");
                continue;
            }
            loop.header = unit.text.substr(i, close - i);
            loop.bound_expr = util::trim(std::string_view(unit.text).substr(p + 1, close - p - 2));
            size_t after = skip_ws(m, close);
            if (after < m.size() && m[after] == ';') continue; // do-while tail already consumed, or empty decl
            auto body = statement_body(m, close, unit.warnings);
            loop.body_begin = body.begin;
            loop.body_end = body.end;
            loop.truncated = body.truncated;
            unit.loops.push_back(std::move(loop));
        } else if (word_at(m, i, "do")) {
            LoopSpan loop;
            loop.keyword = "do";
            loop.header_begin = i;
            loop.header = "do";
            loop.irregular_form = true;
            auto body = statement_body(m, i + 2, unit.warnings);
            loop.body_begin = body.begin;
            loop.body_end = body.end;
            loop.truncated = body.truncated;
            // tail: while (cond);
            size_t w = skip_ws(m, body.end);
            if (word_at(m, w, "while")) {
                dowhile_tails.insert(w);
                size_t p = skip_ws(m, w + 5);
                if (p < m.size() && m[p] == '(') {
                    size_t close = match_forward(m, p, '(', ')');
                    if (close != std::string_view::npos)
                        loop.bound_expr = util::trim(std::string_view(unit.text).substr(p + 1, close - p - 2));
                }
            } else if (!body.truncated) {
                unit.warnings.push_back("do-loop without trailing while; treated as irregular block");
            }
            unit.loops.push_back(std::move(loop));
        }
    }

    // Parent/depth assignment: innermost enclosing loop wins. Loops are in
    // header byte order, so candidate parents precede their children.
    for (size_t k = 0; k < unit.loops.size(); ++k) {
        auto& child = unit.loops[k];
        std::optional<int> best;
        for (size_t j = 0; j < k; ++j) {
            const auto& cand = unit.loops[j];
            if (child.header_begin >= cand.body_begin && child.body_end <= cand.body_end) {
                if (!best || unit.loops[*best].body_begin <= cand.body_begin) best = static_cast<int>(j);
            }
        }
        child.parent = best;
        child.nesting_depth = best ? unit.loops[*best].nesting_depth + 1 : 0;
    }
    for (size_t k = 0; k < unit.loops.size(); ++k) unit.loops[k].id = "L" + std::to_string(k);
    return unit;
}

std::string ArrayAccess::index_text() const {
    std::string out;
    for (size_t i = 0; i < subscripts.size(); ++i) {
        if (i) out += ",";
        out += subscripts[i];
    }
    return out;
}

std::vector<ArrayAccess> extract_array_accesses(const LoopSpan& loop, const SourceUnit& unit) {
    std::vector<ArrayAccess> out;
    const std::string& m = unit.masked;
    size_t begin = loop.body_begin, end = std::min(loop.body_end, m.size());

    for (size_t i = begin; i < end; ++i) {
        if (!ident_char(m[i]) || (i > 0 && ident_char(m[i - 1]))) continue;
        if (std::isdigit(static_cast<unsigned char>(m[i]))) continue;
        size_t e = i;
        while (e < end && ident_char(m[e])) ++e;
        size_t p = skip_ws(m, e);
        if (p >= end || m[p] != '[') continue;

        ArrayAccess acc;
        acc.array = unit.text.substr(i, e - i);
        acc.offset = i;
        bool bad = false;
        while (p < end && m[p] == '[') {
            size_t close = match_forward(m, p, '[', ']');
            if (close == std::string_view::npos || close > end) {
                bad = true;
                break;
            }
            acc.subscripts.push_back(util::trim(std::string_view(unit.text).substr(p + 1, close - p - 2)));
            p = skip_ws(m, close);
        }
        if (bad) {
            acc.kind = ArrayAccess::Kind::unknown;
            out.push_back(std::move(acc));
            break;
        }

        // indirect when any index expression itself subscripts a name
        for (const auto& sub : acc.subscripts) {
            std::string masked_sub = mask_comments_and_strings(sub);
            for (size_t q = 0; q + 1 < masked_sub.size(); ++q) {
                if (!ident_char(masked_sub[q])) continue;
                size_t qe = q;
                while (qe < masked_sub.size() && ident_char(masked_sub[qe])) ++qe;
                size_t qb = skip_ws(masked_sub, qe);
                if (qb < masked_sub.size() && masked_sub[qb] == '[') {
                    acc.kind = ArrayAccess::Kind::indirect;
                    break;
                }
                q = qe;
            }
            if (acc.kind == ArrayAccess::Kind::indirect) break;
        }

        // write detection: assignment / compound / ++ / -- after the chain,
        // or prefix ++/-- before the name
        size_t after = p;
        bool write = false;
        if (after < end) {
            char c = m[after];
            char c2 = after + 1 < end ? m[after + 1] : '\0';
            if (c == '=' && c2 != '=')
                write = true;
            else if ((c == '+' || c == '-' || c == '*' || c == '/' || c == '%' || c == '&' || c == '|' || c == '^') &&
                     c2 == '=')
                write = true;
            else if ((c == '+' && c2 == '+') || (c == '-' && c2 == '-'))
                write = true;
            else if ((c == '<' && c2 == '<' && after + 2 < end && m[after + 2] == '=') ||
                     (c == '>' && c2 == '>' && after + 2 < end && m[after + 2] == '='))
                write = true;
        }
        if (!write && acc.offset >= begin + 2) {
            size_t b = acc.offset;
            while (b > begin && std::isspace(static_cast<unsigned char>(m[b - 1]))) --b;
            if (b >= begin + 2 && ((m[b - 1] == '+' && m[b - 2] == '+') || (m[b - 1] == '-' && m[b - 2] == '-')))
                write = true;
        }
        acc.is_write = write;
        out.push_back(std::move(acc));
        i = e - 1;
    }
    return out;
}

std::string dump_spans(const SourceUnit& unit) {
    std::ostringstream ss;
    for (const auto& loop : unit.loops)
        ss << loop.id << '\t' << loop.header_begin << '\t' << loop.body_end << '\t' << loop.nesting_depth << '\n';
    return ss.str();
}

} // namespace ompforge
