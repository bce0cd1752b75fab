#pragma once

#include <optional>
#include <string>

#include "tracekit/dataset.hpp"
#include "tracekit/judge.hpp"
#include "tracekit/rewards.hpp"
#include "tracekit/trace.hpp"

namespace tracekit {

struct ScoredTrace {
    FormatReport format;
    std::optional<ParsedTrace> trace;     // empty on format failure
    RewardBreakdown breakdown;
    std::optional<JudgeVerdict> verdict;  // set when an audit ran
    std::string diagnostic;               // empty when nothing went sideways
};

// Full reward pipeline for one trace: validate, parse, score each applicable
// component, audit. Per-trace problems never escape as exceptions - an
// invalid format (or a gold_docs body that does not parse) earns the gated
// all-zero breakdown, and a failing judge pins faith to 0 - so batch callers
// keep going and surface `diagnostic` instead.
inline ScoredTrace score_trace(const std::string& raw, const QAInstance& instance,
                               TraceVariant variant, const RewardWeights& weights, Judge& judge,
                               const AuditOptions& audit_opts = {}) {
    ScoredTrace out;
    out.format = validate_format(raw, variant);
    if (!out.format.valid) {
        out.breakdown = format_failure_breakdown(variant);
        return out;
    }

    ParsedTrace trace;
    try {
        trace = parse_trace(raw, variant);
    } catch (const CitationParseError& e) {
        out.breakdown = format_failure_breakdown(variant);
        out.diagnostic = std::string("citation_parse_error: ") + e.what();
        return out;
    }
    out.trace = trace;

    const double ans = soft_f1(trace.answer, instance.gold_answer);
    std::optional<double> gold;
    std::optional<double> faith;
    if (component_applicable(variant, RewardComponent::Gold)) {
        try {
            gold = citation_f1(*trace.citations, instance.supports);
        } catch (const EmptyGoldSupports& e) {
            gold = 0.0;
            out.diagnostic = std::string("bad_instance: ") + e.what();
        }
    }
    if (component_applicable(variant, RewardComponent::Faith)) {
        try {
            out.verdict = audit(trace, instance, judge, audit_opts);
            faith = out.verdict->r_faith;
        } catch (const JudgeFailure& e) {
            faith = 0.0;
            out.diagnostic = std::string("judge_failure: ") + e.what();
        }
    }
    out.breakdown = composite_reward(1, gold, faith, ans, variant, weights);
    return out;
}

} // namespace tracekit
