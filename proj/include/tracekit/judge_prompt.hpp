#pragma once

#include <string>
#include <string_view>

#include "tracekit/judge.hpp"
#include "tracekit/trace.hpp"

namespace tracekit {

// Prompt sent to a remote judge. The same text is shipped as
// assets/judge_prompt_v1.txt; a test keeps the two in sync. Bump the version
// suffix when the wording changes, since verdicts are only comparable within
// one prompt version.
inline constexpr std::string_view kJudgePromptVersion = "v1";

inline constexpr std::string_view kJudgePromptTemplate =
    R"(You are auditing a structured answer trace produced for a question over a fixed set of retrieved documents.

Question:
{{question}}

Documents:
{{documents}}

Trace:
{{trace}}

Answer each requested check with exactly one line of the form name=1 (pass) or name=0 (fail). Output only those lines and nothing else.

Requested checks:
{{checks}}
)";

namespace detail {

inline void replace_all(std::string& s, std::string_view needle, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = s.find(needle, pos)) != std::string::npos) {
        s.replace(pos, needle.size(), value);
        pos += value.size();
    }
}

inline std::string_view check_question(AuditDimension d) {
    switch (d) {
        case AuditDimension::PlanReason:
            return "does the reasoning work through the plan's sub-questions in their stated order?";
        case AuditDimension::CitationBoundary:
            return "does the reasoning cite at least one document, and only documents listed in gold_docs?";
        case AuditDimension::ReasonAnswer:
            return "is the final answer a logical conclusion of the reasoning?";
        case AuditDimension::Grounding:
            return "is every claim that cites a document actually supported by that document's text?";
    }
    return {};
}

} // namespace detail

inline std::string render_judge_prompt(const JudgeRequest& request,
                                       std::string_view tmpl = kJudgePromptTemplate) {
    std::string docs;
    for (const auto& d : request.documents) {
        if (!docs.empty()) docs += "\n";
        docs += "[" + std::to_string(d.index) + "] " + d.title + ": " + d.body;
    }
    std::string checks;
    for (AuditDimension d : request.dimensions) {
        if (!checks.empty()) checks += "\n";
        checks += "- " + std::string(dimension_key(d)) + ": " +
                  std::string(detail::check_question(d));
    }
    std::string out(tmpl);
    detail::replace_all(out, "{{question}}", request.question);
    detail::replace_all(out, "{{documents}}", docs);
    detail::replace_all(out, "{{trace}}", render_trace(request.trace));
    detail::replace_all(out, "{{checks}}", checks);
    return out;
}

} // namespace tracekit
