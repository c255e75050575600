#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ompforge {

// One loop discovered by the tolerant lexer. Offsets are byte offsets into
// SourceUnit::text; the body range is [body_begin, body_end).
struct LoopSpan {
    std::string id;         // "L<n>" in discovery (byte) order; stable for identical text
    std::string keyword;    // for | while | do
    std::string header;     // raw header text, e.g. "for (i = 0; i < n; i++)"
    std::string init_expr;  // for-init clause, "" otherwise
    std::string bound_expr; // condition clause text, "" if unknown
    std::string incr_expr;  // for-increment clause, "" otherwise
    std::string induction_var; // "" when unknown
    size_t header_begin = 0;
    size_t body_begin = 0;
    size_t body_end = 0;
    std::optional<int> parent; // index into SourceUnit::loops
    int nesting_depth = 0;
    bool irregular_form = false; // do ... while
    bool truncated = false;      // span cut at the last consistent point
};

struct FunctionSpan {
    std::string name;
    size_t begin = 0; // start of the name token
    size_t body_begin = 0;
    size_t body_end = 0;
};

struct SourceUnit {
    std::string path;
    std::string text;
    std::string masked; // comments/strings blanked, same length as text
    std::vector<FunctionSpan> functions;
    std::vector<LoopSpan> loops;
    std::vector<std::string> warnings;

    // Index of the innermost function containing offset, or nullopt (file scope).
    std::optional<int> enclosing_function(size_t offset) const;
};

struct ArrayAccess {
    enum class Kind { direct, indirect, unknown };
    std::string array;
    std::vector<std::string> subscripts; // one entry per [] in the chain
    bool is_write = false;
    Kind kind = Kind::direct;
    size_t offset = 0; // byte offset of the array name

    std::string index_text() const; // subscripts joined with ","
};

// Blanks comments and string/char literals (newlines preserved) so brace
// matching never sees quoted or commented braces.
std::string mask_comments_and_strings(std::string_view text);

SourceUnit enumerate_loops(std::string_view text, std::string path);

std::vector<ArrayAccess> extract_array_accesses(const LoopSpan& loop, const SourceUnit& unit);

// Debug dump: one `loop_id<TAB>start<TAB>end<TAB>depth` line per loop.
std::string dump_spans(const SourceUnit& unit);

} // namespace ompforge
