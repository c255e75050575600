#include <doctest.h>

#include "ompforge/source_model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>
#include <set>
#include <string>

using namespace ompforge;

namespace {

// Independent oracle: delete comments/strings entirely, then count loop
// keywords and match braces naively. Used to cross-check the masking pass.
std::string strip_literals(const std::string& src) {
    std::string out;
    enum { code, line_c, block_c, str, chr } st = code;
    for (size_t i = 0; i < src.size(); ++i) {
        char c = src[i];
        char n = i + 1 < src.size() ? src[i + 1] : '\0';
        switch (st) {
        case code:
            if (c == '/' && n == '/') { st = line_c; ++i; }
            else if (c == '/' && n == '*') { st = block_c; ++i; }
            else if (c == '"') st = str;
            else if (c == '\'') st = chr;
            else out += c;
            break;
        case line_c:
            if (c == '\n') { st = code; out += c; }
            break;
        case block_c:
            if (c == '*' && n == '/') { st = code; ++i; }
            break;
        case str:
            if (c == '\\') ++i;
            else if (c == '"') st = code;
            break;
        case chr:
            if (c == '\\') ++i;
            else if (c == '\'') st = code;
            break;
        }
    }
    return out;
}

int oracle_loop_count(const std::string& src) {
    std::string s = strip_literals(src);
    int count = 0;
    auto ic = [](char c) { return std::isalnum((unsigned char)c) || c == '_'; };
    auto word = [&](size_t pos, const std::string& w) {
        if (pos + w.size() > s.size()) return false;
        if (s.compare(pos, w.size(), w) != 0) return false;
        if (pos > 0 && ic(s[pos - 1])) return false;
        if (pos + w.size() < s.size() && ic(s[pos + w.size()])) return false;
        return true;
    };
    std::set<size_t> dowhile_tails;
    for (size_t i = 0; i < s.size(); ++i) {
        if (ic(s[i]) && i > 0 && ic(s[i - 1])) continue;
        if (word(i, "for")) ++count;
        else if (word(i, "do")) {
            ++count;
            size_t p = i + 2;
            while (p < s.size() && std::isspace((unsigned char)s[p])) ++p;
            if (p < s.size() && s[p] == '{') {
                int d = 0;
                for (size_t q = p; q < s.size(); ++q) {
                    if (s[q] == '{') ++d;
                    if (s[q] == '}') { --d; if (d == 0) { p = q + 1; break; } }
                }
            } else {
                while (p < s.size() && s[p] != ';') ++p;
                ++p;
            }
            while (p < s.size() && std::isspace((unsigned char)s[p])) ++p;
            if (word(p, "while")) dowhile_tails.insert(p);
        } else if (word(i, "while") && !dowhile_tails.count(i)) {
            ++count;
        }
    }
    return count;
}

} // namespace

TEST_CASE("single canonical for loop") {
    auto unit = enumerate_loops("for(i=0;i<n;i++){a[i]=0;}", "t.c");
    REQUIRE(unit.loops.size() == 1);
    CHECK(unit.loops[0].nesting_depth == 0);
    CHECK(unit.loops[0].induction_var == "i");
    CHECK(unit.loops[0].bound_expr == "i<n");
    CHECK(unit.loops[0].id == "L0");
}

TEST_CASE("nested for loops get parent link and depth") {
    auto unit = enumerate_loops("for(i=0;i<n;i++){ for(j=0;j<m;j++){ a[i][j]=0; } }", "t.c");
    REQUIRE(unit.loops.size() == 2);
    CHECK(unit.loops[0].nesting_depth == 0);
    CHECK(unit.loops[1].nesting_depth == 1);
    REQUIRE(unit.loops[1].parent.has_value());
    CHECK(*unit.loops[1].parent == 0);
}

TEST_CASE("brace inside string literal does not end the span") {
    std::string src = "for(i=0;i<n;i++){ puts(\"}\"); a[i]=1; }\nint done;\n";
    auto unit = enumerate_loops(src, "t.c");
    REQUIRE(unit.loops.size() == 1);
    CHECK(src.substr(unit.loops[0].body_end - 1, 1) == "}");
    CHECK(unit.loops[0].body_end > src.find("a[i]"));
    CHECK(oracle_loop_count(src) == 1);
}

TEST_CASE("comments with braces and keywords are ignored") {
    std::string src = "// for(k=0;k<3;k++) {\n/* while(1){ } */\nfor(i=0;i<n;i++){ x[i]=i; }\n";
    auto unit = enumerate_loops(src, "t.c");
    REQUIRE(unit.loops.size() == 1);
    CHECK(unit.loops[0].keyword == "for");
}

TEST_CASE("do-while flagged irregular, tail while not double counted") {
    auto unit = enumerate_loops("do { x++; } while (x < n);", "t.c");
    REQUIRE(unit.loops.size() == 1);
    CHECK(unit.loops[0].keyword == "do");
    CHECK(unit.loops[0].irregular_form);
    CHECK(unit.loops[0].bound_expr == "x < n");
}

TEST_CASE("while loop enumerated with condition text") {
    auto unit = enumerate_loops("while (err > tol) { err = update(); }", "t.c");
    REQUIRE(unit.loops.size() == 1);
    CHECK(unit.loops[0].keyword == "while");
    CHECK(unit.loops[0].bound_expr == "err > tol");
}

TEST_CASE("braceless bodies nest properly") {
    auto unit = enumerate_loops("for(i=0;i<n;i++) for(j=0;j<m;j++) a[i*m+j]=0;", "t.c");
    REQUIRE(unit.loops.size() == 2);
    CHECK(unit.loops[1].nesting_depth == 1);
    CHECK(unit.loops[1].body_end <= unit.loops[0].body_end);
}

TEST_CASE("empty input yields empty model, not an error") {
    auto unit = enumerate_loops("", "t.c");
    CHECK(unit.loops.empty());
    CHECK(unit.functions.empty());
}

TEST_CASE("unbalanced braces truncate with a warning") {
    auto unit = enumerate_loops("for(i=0;i<n;i++){ a[i]=0; \n// eof", "t.c");
    REQUIRE(unit.loops.size() == 1);
    CHECK(unit.loops[0].truncated);
    CHECK(!unit.warnings.empty());
    CHECK(unit.loops[0].body_end == unit.text.size());
}

TEST_CASE("function spans discovered and loops assigned to them") {
    std::string src = "int main(void) {\n  for(i=0;i<n;i++) a[i]=0;\n  return 0;\n}\n";
    auto unit = enumerate_loops(src, "t.c");
    REQUIRE(unit.functions.size() == 1);
    CHECK(unit.functions[0].name == "main");
    REQUIRE(unit.loops.size() == 1);
    auto f = unit.enclosing_function(unit.loops[0].header_begin);
    REQUIRE(f.has_value());
    CHECK(*f == 0);
}

TEST_CASE("idempotence: re-parsing identical text reproduces ids and ranges") {
    std::string src = "void k(){ for(i=0;i<n;i++){ for(j=0;j<m;j++) b[j]+=a[i]; } while(t>0){t--;} }";
    auto u1 = enumerate_loops(src, "t.c");
    auto u2 = enumerate_loops(u1.text, "t.c");
    REQUIRE(u1.loops.size() == u2.loops.size());
    for (size_t i = 0; i < u1.loops.size(); ++i) {
        CHECK(u1.loops[i].id == u2.loops[i].id);
        CHECK(u1.loops[i].header_begin == u2.loops[i].header_begin);
        CHECK(u1.loops[i].body_end == u2.loops[i].body_end);
    }
    CHECK(dump_spans(u1) == dump_spans(u2));
}

TEST_CASE("no-overlap property: spans disjoint or nested") {
    std::string src =
        "void a(){ for(i=0;i<n;i++){ x[i]=0; } for(j=0;j<n;j++){ do{y[j]++;}while(y[j]<3); } }\n"
        "void b(){ while(go()){ for(k=0;k<90;k++) z[k]=k; } }\n";
    auto unit = enumerate_loops(src, "t.c");
    REQUIRE(unit.loops.size() == 5);
    for (size_t i = 0; i < unit.loops.size(); ++i) {
        for (size_t j = i + 1; j < unit.loops.size(); ++j) {
            const auto& a = unit.loops[i];
            const auto& b = unit.loops[j];
            bool disjoint = a.body_end <= b.header_begin || b.body_end <= a.header_begin;
            bool a_in_b = a.header_begin >= b.body_begin && a.body_end <= b.body_end;
            bool b_in_a = b.header_begin >= a.body_begin && b.body_end <= a.body_end;
            CHECK((disjoint || a_in_b || b_in_a));
        }
    }
}

TEST_CASE("masking soundness on a generated 50-snippet corpus") {
    std::mt19937 rng(20240817);
    const char* bodies[] = {
        "a[i] = b[i] + 1;",
        "s += x[i]; /* sum } */",
        "puts(\"{ not a brace }\");",
        "if (a[i] > 0) { a[i] = -a[i]; } // flip {",
        "t[i] = '}';",
        "y[i] = x[i] * 2; // trailing }",
    };
    const char* wrappers[] = {
        "for (int i = 0; i < n; i++) {\n    %s\n  }",
        "while (i < n) {\n    %s\n    i++;\n  }",
        "for (i = 0; i < n; i++) {\n    %s\n  }",
        "do {\n    %s\n    i++;\n  } while (i < n);",
    };
    for (int snippet = 0; snippet < 50; ++snippet) {
        std::string src = "void f(int n) {\n";
        int loops = 1 + (int)(rng() % 3);
        for (int l = 0; l < loops; ++l) {
            const char* w = wrappers[rng() % 4];
            const char* b = bodies[rng() % 6];
            char buf[512];
            snprintf(buf, sizeof buf, w, b);
            src += "  ";
            src += buf;
            src += "\n";
        }
        src += "}\n";
        CAPTURE(src);
        auto unit = enumerate_loops(src, "gen.c");
        CHECK((int)unit.loops.size() == oracle_loop_count(src));
        for (const auto& loop : unit.loops) CHECK(!loop.truncated);
    }
}

TEST_CASE("array accesses: reads, writes, indirect") {
    auto unit = enumerate_loops("for(j=0;j<n;j++){ y[i]+=a[j]*x[col[j]]; }", "t.c");
    REQUIRE(unit.loops.size() == 1);
    auto accs = extract_array_accesses(unit.loops[0], unit);

    std::set<std::string> writes, reads, indirect;
    for (const auto& a : accs) {
        (a.is_write ? writes : reads).insert(a.array);
        if (a.kind == ArrayAccess::Kind::indirect) indirect.insert(a.array);
    }
    CHECK(writes == std::set<std::string>{"y"});
    CHECK(reads == std::set<std::string>{"a", "x", "col"});
    CHECK(indirect == std::set<std::string>{"x"});
}

TEST_CASE("no subscripts yields empty access list") {
    auto unit = enumerate_loops("for(i=0;i<n;i++){ s += i; }", "t.c");
    CHECK(extract_array_accesses(unit.loops[0], unit).empty());
}

TEST_CASE("postfix increment on indirect target is a write") {
    auto unit = enumerate_loops("for(i=0;i<n;i++){ hist[idx[i]]++; }", "t.c");
    auto accs = extract_array_accesses(unit.loops[0], unit);
    bool found = false;
    for (const auto& a : accs)
        if (a.array == "hist") {
            found = true;
            CHECK(a.is_write);
            CHECK(a.kind == ArrayAccess::Kind::indirect);
        }
    CHECK(found);
}

TEST_CASE("multi-dimensional subscript chains are captured") {
    auto unit = enumerate_loops("for(i=1;i<n;i++){ u[i][j] = v[i-1][j]; }", "t.c");
    auto accs = extract_array_accesses(unit.loops[0], unit);
    REQUIRE(accs.size() == 2);
    CHECK(accs[0].subscripts.size() == 2);
    CHECK(accs[1].subscripts[0] == "i-1");
}

TEST_CASE("debug span dump is line oriented") {
    auto unit = enumerate_loops("for(i=0;i<3;i++){x[i]=i;}", "t.c");
    auto dump = dump_spans(unit);
    CHECK(dump.substr(0, 3) == "L0\t");
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 1);
}
