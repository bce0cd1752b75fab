#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracekit/errors.hpp"

namespace tracekit {

// A trace is a flat sequence of tagged fields in one fixed order:
//   <plan>...</plan><gold_docs>...</gold_docs><reason>...</reason><answer>...</answer>
// The five variants drop fields from the front end of that template while
// always keeping the answer:
//   v1 = plan, gold_docs, reason, answer
//   v2 =       gold_docs, reason, answer
//   v3 = plan,            reason, answer
//   v4 =                  reason, answer
//   v5 =                          answer
enum class TraceVariant { V1, V2, V3, V4, V5 };
enum class TraceField { Plan, GoldDocs, Reason, Answer };

inline std::string_view field_tag(TraceField f) {
    switch (f) {
        case TraceField::Plan: return "plan";
        case TraceField::GoldDocs: return "gold_docs";
        case TraceField::Reason: return "reason";
        case TraceField::Answer: return "answer";
    }
    return {};
}

inline std::string_view variant_name(TraceVariant v) {
    switch (v) {
        case TraceVariant::V1: return "v1";
        case TraceVariant::V2: return "v2";
        case TraceVariant::V3: return "v3";
        case TraceVariant::V4: return "v4";
        case TraceVariant::V5: return "v5";
    }
    return {};
}

inline TraceVariant variant_from_name(std::string_view name) {
    if (name == "v1") return TraceVariant::V1;
    if (name == "v2") return TraceVariant::V2;
    if (name == "v3") return TraceVariant::V3;
    if (name == "v4") return TraceVariant::V4;
    if (name == "v5") return TraceVariant::V5;
    throw Error("unknown trace variant '" + std::string(name) + "' (expected v1..v5)");
}

// Required fields for a variant, in canonical order. Answer is always last.
inline const std::vector<TraceField>& required_fields(TraceVariant v) {
    using F = TraceField;
    static const std::vector<F> v1{F::Plan, F::GoldDocs, F::Reason, F::Answer};
    static const std::vector<F> v2{F::GoldDocs, F::Reason, F::Answer};
    static const std::vector<F> v3{F::Plan, F::Reason, F::Answer};
    static const std::vector<F> v4{F::Reason, F::Answer};
    static const std::vector<F> v5{F::Answer};
    switch (v) {
        case TraceVariant::V1: return v1;
        case TraceVariant::V2: return v2;
        case TraceVariant::V3: return v3;
        case TraceVariant::V4: return v4;
        case TraceVariant::V5: return v5;
    }
    return v5;
}

inline bool variant_has(TraceVariant v, TraceField f) {
    const auto& fields = required_fields(v);
    return std::find(fields.begin(), fields.end(), f) != fields.end();
}

enum class FormatError {
    MissingClosingTag,
    Truncation,
    TagMismatch,
    MissingAnswerBlock,
    ExtraText,
    WrongFormat,
    EmptyAnswer,
    MalformedTag,
    OutOfOrder,
};

inline std::string_view format_error_name(FormatError e) {
    switch (e) {
        case FormatError::MissingClosingTag: return "missing_closing_tag";
        case FormatError::Truncation: return "truncation";
        case FormatError::TagMismatch: return "tag_mismatch";
        case FormatError::MissingAnswerBlock: return "missing_answer_block";
        case FormatError::ExtraText: return "extra_text";
        case FormatError::WrongFormat: return "wrong_format";
        case FormatError::EmptyAnswer: return "empty_answer";
        case FormatError::MalformedTag: return "malformed_tag";
        case FormatError::OutOfOrder: return "out_of_order";
    }
    return {};
}

struct FormatReport {
    bool valid = false;
    std::optional<FormatError> error_class;  // engaged iff !valid
    std::string detail;                      // human-readable, for diagnostics only
};

struct ParsedTrace {
    TraceVariant variant = TraceVariant::V5;
    std::optional<std::string> plan;
    std::optional<std::set<int>> citations;  // gold_docs, deduplicated
    std::optional<std::string> reason;
    std::string answer;
    std::string raw;  // original text, provenance only

    // Equality is semantic; `raw` is deliberately excluded.
    friend bool operator==(const ParsedTrace& a, const ParsedTrace& b) {
        return a.variant == b.variant && a.plan == b.plan &&
               a.citations == b.citations && a.reason == b.reason &&
               a.answer == b.answer;
    }
    friend bool operator!=(const ParsedTrace& a, const ParsedTrace& b) { return !(a == b); }
};

namespace detail {

inline bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

inline std::string_view trim_view(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && is_ws(s[b])) ++b;
    std::size_t e = s.size();
    while (e > b && is_ws(s[e - 1])) --e;
    return s.substr(b, e - b);
}

struct TagLex {
    enum Kind { None, Tag, Partial } kind = None;
    bool closing = false;
    TraceField field = TraceField::Answer;
    std::size_t length = 0;  // token length including the angle brackets
};

struct TagText {
    std::string text;
    bool closing;
    TraceField field;
};

inline const std::array<TagText, 8>& tag_tokens() {
    static const std::array<TagText, 8> toks = [] {
        std::array<TagText, 8> t{};
        const TraceField fields[] = {TraceField::Plan, TraceField::GoldDocs,
                                     TraceField::Reason, TraceField::Answer};
        std::size_t i = 0;
        for (TraceField f : fields) {
            t[i++] = {"<" + std::string(field_tag(f)) + ">", false, f};
            t[i++] = {"</" + std::string(field_tag(f)) + ">", true, f};
        }
        return t;
    }();
    return toks;
}

// Try to read one of the eight recognized tags at s[pos]. Partial means the
// string ends mid-way through text that could still only become a recognized
// tag (e.g. a trailing "</answ"). Anything else starting with '<' is plain
// text, which also covers attributed or unknown tags.
inline TagLex lex_tag(std::string_view s, std::size_t pos) {
    const std::string_view rest = s.substr(pos);
    bool partial = false;
    for (const auto& tok : tag_tokens()) {
        if (rest.size() >= tok.text.size()) {
            if (rest.compare(0, tok.text.size(), tok.text) == 0)
                return {TagLex::Tag, tok.closing, tok.field, tok.text.size()};
        } else if (tok.text.compare(0, rest.size(), rest) == 0) {
            partial = true;
        }
    }
    if (partial) return {TagLex::Partial, false, TraceField::Answer, rest.size()};
    return {};
}

struct ScanOutcome {
    FormatReport report;
    std::array<std::optional<std::string_view>, 4> bodies;  // views into the input
};

inline std::optional<std::string_view>& body_slot(ScanOutcome& out, TraceField f) {
    return out.bodies[static_cast<std::size_t>(f)];
}

// Single-pass structural scan followed by a template check against the
// variant. The first failure encountered wins; structural problems (unclosed
// or mismatched tags, stray text, truncated tags) take precedence over
// missing or misordered fields, so e.g. "<answer>1958 Award" reports the
// missing closing tag rather than the absent earlier blocks.
inline ScanOutcome scan_trace(std::string_view raw, TraceVariant variant) {
    const auto& fields = required_fields(variant);
    ScanOutcome out;
    auto fail = [&](FormatError e, std::string detail) -> ScanOutcome& {
        out.report = FormatReport{false, e, std::move(detail)};
        return out;
    };

    bool any_tag = false;
    for (std::size_t i = 0; i < raw.size() && !any_tag; ++i) {
        if (raw[i] == '<' && lex_tag(raw, i).kind == TagLex::Tag) any_tag = true;
    }

    struct Block {
        TraceField field;
        std::string_view body;
    };
    std::vector<Block> blocks;

    bool inside = false;
    TraceField cur = TraceField::Answer;
    std::size_t body_begin = 0;

    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw[i] == '<') {
            const TagLex t = lex_tag(raw, i);
            if (t.kind == TagLex::Tag) {
                const std::string tag(field_tag(t.field));
                if (!t.closing) {
                    if (inside)
                        return fail(FormatError::MissingClosingTag,
                                    "missing </" + std::string(field_tag(cur)) + "> before <" + tag + ">");
                    inside = true;
                    cur = t.field;
                    body_begin = i + t.length;
                } else {
                    if (!inside)
                        return fail(FormatError::TagMismatch, "stray </" + tag + "> with no open block");
                    if (t.field != cur)
                        return fail(FormatError::TagMismatch,
                                    "<" + std::string(field_tag(cur)) + "> closed by </" + tag + ">");
                    blocks.push_back({cur, raw.substr(body_begin, i - body_begin)});
                    inside = false;
                }
                i += t.length;
                continue;
            }
            if (t.kind == TagLex::Partial) {
                if (inside)
                    return fail(FormatError::MalformedTag,
                                "output ends inside a truncated closing tag for <" +
                                    std::string(field_tag(cur)) + ">");
                return fail(FormatError::MalformedTag, "output ends inside a truncated tag");
            }
        }
        if (!inside && !is_ws(raw[i])) {
            if (!any_tag)
                return fail(FormatError::WrongFormat, "no tagged fields found");
            return fail(FormatError::ExtraText,
                        "text outside any field at offset " + std::to_string(i));
        }
        ++i;
    }
    if (inside) {
        if (cur == TraceField::Answer)
            return fail(FormatError::MissingClosingTag, "missing </answer> at end of output");
        return fail(FormatError::Truncation,
                    "output ends inside <" + std::string(field_tag(cur)) + ">");
    }

    // Template check: the block sequence must match the variant exactly.
    std::size_t fi = 0;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const TraceField f = blocks[bi].field;
        const std::string tag(field_tag(f));
        if (fi < fields.size() && f == fields[fi]) {
            body_slot(out, f) = blocks[bi].body;
            ++fi;
            continue;
        }
        if (!variant_has(variant, f))
            return fail(FormatError::WrongFormat,
                        "<" + tag + "> is not part of variant " + std::string(variant_name(variant)));
        const std::size_t pos = static_cast<std::size_t>(
            std::find(fields.begin(), fields.end(), f) - fields.begin());
        if (pos < fi)
            return fail(FormatError::OutOfOrder, "repeated <" + tag + "> block");
        const std::string expected(field_tag(fields[fi]));
        for (std::size_t k = bi + 1; k < blocks.size(); ++k) {
            if (blocks[k].field == fields[fi])
                return fail(FormatError::OutOfOrder,
                            "<" + expected + "> appears after <" + tag + ">");
        }
        if (fields[fi] == TraceField::Answer)
            return fail(FormatError::MissingAnswerBlock, "<answer> block is absent");
        return fail(FormatError::WrongFormat, "required <" + expected + "> block is absent");
    }
    if (fi < fields.size()) {
        if (!any_tag)
            return fail(FormatError::WrongFormat, "no tagged fields found");
        if (fields[fi] == TraceField::Answer)
            return fail(FormatError::MissingAnswerBlock, "output ends without an <answer> block");
        return fail(FormatError::Truncation,
                    "output ends before <" + std::string(field_tag(fields[fi])) + ">");
    }

    if (trim_view(*body_slot(out, TraceField::Answer)).empty())
        return fail(FormatError::EmptyAnswer, "<answer> block has no content");

    out.report.valid = true;
    return out;
}

} // namespace detail

inline FormatReport validate_format(std::string_view raw, TraceVariant variant) {
    return detail::scan_trace(raw, variant).report;
}

// Parse a gold_docs body: integers separated by commas and/or whitespace,
// with one optional surrounding pair of square brackets. "[2, 5]", "2 5" and
// "[]" all parse; anything with non-integer tokens does not.
inline std::set<int> parse_citation_list(std::string_view body) {
    std::string_view s = detail::trim_view(body);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            throw CitationParseError("unterminated '[' in citation list: '" + std::string(body) + "'");
        s = detail::trim_view(s.substr(1, s.size() - 2));
    } else if (!s.empty() && s.back() == ']') {
        throw CitationParseError("unmatched ']' in citation list: '" + std::string(body) + "'");
    }
    std::set<int> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (detail::is_ws(s[i]) || s[i] == ',') {
            ++i;
            continue;
        }
        if (s[i] < '0' || s[i] > '9')
            throw CitationParseError("citation list has a non-integer token: '" + std::string(body) + "'");
        long v = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            v = v * 10 + (s[i] - '0');
            if (v > 1000000000)
                throw CitationParseError("citation index too large");
            ++i;
        }
        if (v < 1)
            throw CitationParseError("document indices are 1-based; got " + std::to_string(v));
        out.insert(static_cast<int>(v));
    }
    return out;
}

// Collect document references from running text. A reference is a bracketed
// integer group: [3] or [2, 5]. Bracketed non-integers ("[Answer3]") and
// groups containing an index < 1 are not references. Whitespace inside the
// brackets is irrelevant.
inline std::set<int> extract_citations(std::string_view reason) {
    std::set<int> out;
    std::size_t i = 0;
    while (i < reason.size()) {
        if (reason[i] != '[') {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        std::vector<int> group;
        bool ok = true;
        bool expect_int = true;
        while (true) {
            while (j < reason.size() && detail::is_ws(reason[j])) ++j;
            if (j >= reason.size()) {
                ok = false;
                break;
            }
            if (expect_int) {
                if (reason[j] < '0' || reason[j] > '9') {
                    ok = false;
                    break;
                }
                long v = 0;
                while (j < reason.size() && reason[j] >= '0' && reason[j] <= '9') {
                    v = v * 10 + (reason[j] - '0');
                    if (v > 1000000000) {
                        ok = false;
                        break;
                    }
                    ++j;
                }
                if (!ok || v < 1) {
                    ok = false;
                    break;
                }
                group.push_back(static_cast<int>(v));
                expect_int = false;
            } else if (reason[j] == ',') {
                ++j;
                expect_int = true;
            } else if (reason[j] == ']') {
                ++j;
                break;
            } else {
                ok = false;
                break;
            }
        }
        if (ok && !group.empty()) {
            out.insert(group.begin(), group.end());
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

// Parse a raw trace against a variant. Throws FormatInvalid when
// validate_format would reject it, CitationParseError when the gold_docs
// body is not an integer list. Field bodies are kept verbatim apart from
// trimming surrounding whitespace.
inline ParsedTrace parse_trace(std::string_view raw, TraceVariant variant) {
    detail::ScanOutcome scanned = detail::scan_trace(raw, variant);
    if (!scanned.report.valid)
        throw FormatInvalid(std::string(format_error_name(*scanned.report.error_class)) + ": " +
                            scanned.report.detail);
    ParsedTrace t;
    t.variant = variant;
    t.raw = std::string(raw);
    auto body = [&](TraceField f) {
        return std::string(detail::trim_view(*detail::body_slot(scanned, f)));
    };
    if (variant_has(variant, TraceField::Plan)) t.plan = body(TraceField::Plan);
    if (variant_has(variant, TraceField::GoldDocs))
        t.citations = parse_citation_list(*detail::body_slot(scanned, TraceField::GoldDocs));
    if (variant_has(variant, TraceField::Reason)) t.reason = body(TraceField::Reason);
    t.answer = body(TraceField::Answer);
    return t;
}

inline std::string render_citation_list(const std::set<int>& citations) {
    std::string s = "[";
    bool first = true;
    for (int c : citations) {
        if (!first) s += ", ";
        s += std::to_string(c);
        first = false;
    }
    return s + "]";
}

// Inverse of parse_trace for traces that satisfy the invariants: emits the
// variant's fields in canonical order, one per line. Citations come out
// ascending, so parse(render(t)) == t up to the provenance `raw` field.
inline std::string render_trace(const ParsedTrace& t) {
    std::string out;
    for (TraceField f : required_fields(t.variant)) {
        std::string body;
        switch (f) {
            case TraceField::Plan:
                if (!t.plan) throw Error("trace is missing the plan field required by its variant");
                body = *t.plan;
                break;
            case TraceField::GoldDocs:
                if (!t.citations) throw Error("trace is missing the gold_docs field required by its variant");
                body = render_citation_list(*t.citations);
                break;
            case TraceField::Reason:
                if (!t.reason) throw Error("trace is missing the reason field required by its variant");
                body = *t.reason;
                break;
            case TraceField::Answer:
                body = t.answer;
                break;
        }
        if (!out.empty()) out += "\n";
        out += "<" + std::string(field_tag(f)) + ">" + body + "</" + std::string(field_tag(f)) + ">";
    }
    return out;
}

} // namespace tracekit
