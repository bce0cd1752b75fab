#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracekit/dataset.hpp"
#include "tracekit/errors.hpp"
#include "tracekit/text.hpp"
#include "tracekit/trace.hpp"

namespace tracekit {

// The four audited aspects of a trace:
//   PlanReason       - does the reasoning follow the declared plan?
//   CitationBoundary - does the reasoning cite only declared gold docs?
//   ReasonAnswer     - does the answer follow from the reasoning?
//   Grounding        - are cited claims supported by the cited documents?
// CitationBoundary is a set check computed locally; the other three need a
// judge (a model, a script, or the bundled heuristic mock).
enum class AuditDimension { PlanReason, CitationBoundary, ReasonAnswer, Grounding };

inline std::string_view dimension_key(AuditDimension d) {
    switch (d) {
        case AuditDimension::PlanReason: return "plan_reason";
        case AuditDimension::CitationBoundary: return "citation_boundary";
        case AuditDimension::ReasonAnswer: return "reason_answer";
        case AuditDimension::Grounding: return "grounding";
    }
    return {};
}

struct JudgeVerdict {
    std::optional<int> plan_reason;        // present iff the variant has a plan
    std::optional<int> citation_boundary;  // present iff the variant has gold_docs
    int reason_answer = 0;
    std::optional<int> grounding;          // present for every auditable variant
    int checks = 0;                        // how many bits were applicable
    double r_faith = 0.0;                  // mean of the applicable bits
};

struct JudgeRequest {
    std::string question;
    std::vector<Document> documents;
    ParsedTrace trace;
    std::vector<AuditDimension> dimensions;  // what the caller wants assessed
};

class Judge {
public:
    virtual ~Judge() = default;
    // Must return a 0/1 bit for every requested dimension; throws
    // JudgeFailure when it cannot.
    virtual std::map<AuditDimension, int> assess(const JudgeRequest& request) = 0;
};

// Deterministic citation-boundary check: pass iff the reasoning cites at
// least one document and every cited index was declared in gold_docs.
inline int check_citation_boundary(const ParsedTrace& trace) {
    if (!trace.citations || !trace.reason)
        throw VariantMismatch("citation boundary needs both gold_docs and reason fields");
    const std::set<int> cited = extract_citations(*trace.reason);
    if (cited.empty()) return 0;
    return std::includes(trace.citations->begin(), trace.citations->end(), cited.begin(),
                         cited.end())
               ? 1
               : 0;
}

struct AuditOptions {
    // When set, the citation-boundary bit is requested from the judge
    // instead of computed from the subset rule. Used to replay verdicts that
    // were scored elsewhere (see ScriptedJudge).
    bool citation_from_judge = false;
};

// Run every check the variant supports and average the bits. Answer-only
// traces have nothing to audit and are rejected.
inline JudgeVerdict audit(const ParsedTrace& trace, const QAInstance& instance, Judge& judge,
                          const AuditOptions& opts = {}) {
    if (trace.variant == TraceVariant::V5)
        throw VariantInapplicable("answer-only traces have no reasoning fields to audit");
    const bool has_plan = variant_has(trace.variant, TraceField::Plan);
    const bool has_gold = variant_has(trace.variant, TraceField::GoldDocs);

    JudgeRequest req{instance.question, instance.documents, trace, {}};
    if (has_plan) req.dimensions.push_back(AuditDimension::PlanReason);
    if (has_gold && opts.citation_from_judge)
        req.dimensions.push_back(AuditDimension::CitationBoundary);
    req.dimensions.push_back(AuditDimension::ReasonAnswer);
    req.dimensions.push_back(AuditDimension::Grounding);

    const auto bits = judge.assess(req);
    auto bit = [&](AuditDimension d) {
        auto it = bits.find(d);
        if (it == bits.end())
            throw JudgeFailure("judge returned no verdict for '" + std::string(dimension_key(d)) + "'");
        if (it->second != 0 && it->second != 1)
            throw JudgeFailure("judge returned a non-binary verdict for '" +
                               std::string(dimension_key(d)) + "'");
        return it->second;
    };

    JudgeVerdict v;
    int sum = 0;
    if (has_plan) {
        v.plan_reason = bit(AuditDimension::PlanReason);
        sum += *v.plan_reason;
        ++v.checks;
    }
    if (has_gold) {
        v.citation_boundary = opts.citation_from_judge ? bit(AuditDimension::CitationBoundary)
                                                       : check_citation_boundary(trace);
        sum += *v.citation_boundary;
        ++v.checks;
    }
    v.reason_answer = bit(AuditDimension::ReasonAnswer);
    sum += v.reason_answer;
    ++v.checks;
    v.grounding = bit(AuditDimension::Grounding);
    sum += *v.grounding;
    ++v.checks;
    v.r_faith = static_cast<double>(sum) / static_cast<double>(v.checks);
    return v;
}

// Replays a fixed set of outcomes. Handy in tests and for re-scoring traces
// whose verdicts were produced by an external judge.
class ScriptedJudge : public Judge {
public:
    explicit ScriptedJudge(std::map<AuditDimension, int> script) : script_(std::move(script)) {
        for (const auto& [d, bit] : script_) {
            if (bit != 0 && bit != 1)
                throw Error("scripted verdict for '" + std::string(dimension_key(d)) +
                            "' must be 0 or 1");
        }
    }

    std::map<AuditDimension, int> assess(const JudgeRequest& request) override {
        std::map<AuditDimension, int> out;
        for (AuditDimension d : request.dimensions) {
            auto it = script_.find(d);
            if (it == script_.end())
                throw JudgeFailure("no scripted outcome for '" + std::string(dimension_key(d)) + "'");
            out[d] = it->second;
        }
        return out;
    }

private:
    std::map<AuditDimension, int> script_;
};

namespace detail {

inline const std::set<std::string>& stopwords() {
    static const std::set<std::string> words{
        "is",  "are",   "was",  "were", "be",   "been", "being", "of",   "in",   "on",
        "at",  "to",    "for",  "with", "and",  "or",   "but",   "if",   "then", "that",
        "this", "these", "those", "it",  "its",  "as",   "by",    "from", "into", "about",
        "who", "whom",  "what", "where", "when", "which", "how",  "why",  "did",  "do",
        "does", "not",  "no",   "he",   "she",  "they", "we",    "you",  "i",    "same"};
    return words;
}

inline std::set<std::string> content_tokens(std::string_view text) {
    std::set<std::string> out;
    for (auto& t : normalize_text(text))
        if (!stopwords().count(t)) out.insert(std::move(t));
    return out;
}

inline std::set<std::string> all_tokens(std::string_view text) {
    std::set<std::string> out;
    for (auto& t : normalize_text(text)) out.insert(std::move(t));
    return out;
}

inline std::vector<std::string> split_segments(std::string_view text, std::string_view breaks) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (breaks.find(c) != std::string_view::npos) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace detail

struct MockJudgeConfig {
    double grounding_overlap = 0.3;  // min shared fraction of a claim's content tokens
};

// A cheap deterministic stand-in for a model judge. The heuristics are
// intentionally blunt; what matters is that they are stable, so reward
// pipelines built on top of them are reproducible.
//
//   PlanReason:   every plan segment (split on '?' and newlines) shares at
//                 least one content token with the reasoning.
//   ReasonAnswer: every normalized answer token appears in the reasoning.
//   Grounding:    every reasoning sentence that cites [j] shares at least
//                 `grounding_overlap` of its content tokens with document
//                 j's body; citing an unknown index fails.
// Checks with nothing to inspect (no plan segments, no cited sentences, an
// answer that normalizes to nothing) pass vacuously.
class MockJudge : public Judge {
public:
    explicit MockJudge(MockJudgeConfig cfg = {}) : cfg_(cfg) {}

    std::map<AuditDimension, int> assess(const JudgeRequest& request) override {
        std::map<AuditDimension, int> out;
        for (AuditDimension d : request.dimensions) {
            switch (d) {
                case AuditDimension::PlanReason:
                    out[d] = plan_follows(request.trace);
                    break;
                case AuditDimension::ReasonAnswer:
                    out[d] = answer_supported(request.trace);
                    break;
                case AuditDimension::Grounding:
                    out[d] = claims_grounded(request.trace, request.documents);
                    break;
                case AuditDimension::CitationBoundary:
                    throw JudgeFailure("mock judge does not assess the citation boundary");
            }
        }
        return out;
    }

private:
    int plan_follows(const ParsedTrace& trace) const {
        if (!trace.plan || !trace.reason) return 0;
        const auto reason_tokens = detail::content_tokens(*trace.reason);
        for (const auto& segment : detail::split_segments(*trace.plan, "?\n")) {
            const auto seg_tokens = detail::content_tokens(segment);
            if (seg_tokens.empty()) continue;
            bool shared = false;
            for (const auto& t : seg_tokens)
                if (reason_tokens.count(t)) {
                    shared = true;
                    break;
                }
            if (!shared) return 0;
        }
        return 1;
    }

    int answer_supported(const ParsedTrace& trace) const {
        if (!trace.reason) return 0;
        const auto reason_tokens = detail::all_tokens(*trace.reason);
        for (const auto& t : normalize_text(trace.answer))
            if (!reason_tokens.count(t)) return 0;
        return 1;
    }

    int claims_grounded(const ParsedTrace& trace, const std::vector<Document>& docs) const {
        if (!trace.reason) return 0;
        for (const auto& sentence : detail::split_segments(*trace.reason, ".!?\n")) {
            const std::set<int> cited = extract_citations(sentence);
            if (cited.empty()) continue;
            const auto claim_tokens = detail::content_tokens(sentence);
            if (claim_tokens.empty()) continue;
            for (int j : cited) {
                const Document* doc = nullptr;
                for (const auto& d : docs)
                    if (d.index == j) {
                        doc = &d;
                        break;
                    }
                if (!doc) return 0;
                const auto doc_tokens = detail::all_tokens(doc->body);
                std::size_t shared = 0;
                for (const auto& t : claim_tokens) shared += doc_tokens.count(t);
                if (static_cast<double>(shared) <
                    cfg_.grounding_overlap * static_cast<double>(claim_tokens.size()))
                    return 0;
            }
        }
        return 1;
    }

    MockJudgeConfig cfg_;
};

} // namespace tracekit
