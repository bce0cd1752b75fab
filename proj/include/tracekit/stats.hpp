#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "tracekit/dataset.hpp"
#include "tracekit/errors.hpp"
#include "tracekit/judge.hpp"
#include "tracekit/text.hpp"
#include "tracekit/trace.hpp"

namespace tracekit {

// 2x2 agreement table between a judge and a human annotator.
struct ConfusionCounts {
    long both_pass = 0;
    long both_fail = 0;
    long judge_pass_human_fail = 0;
    long judge_fail_human_pass = 0;

    long total() const {
        return both_pass + both_fail + judge_pass_human_fail + judge_fail_human_pass;
    }
};

namespace detail {

inline void check_counts(const ConfusionCounts& c) {
    if (c.both_pass < 0 || c.both_fail < 0 || c.judge_pass_human_fail < 0 ||
        c.judge_fail_human_pass < 0)
        throw Error("confusion counts must be non-negative");
    if (c.total() == 0) throw EmptyConfusion("confusion table has no observations");
}

} // namespace detail

inline double observed_agreement(const ConfusionCounts& c) {
    detail::check_counts(c);
    return static_cast<double>(c.both_pass + c.both_fail) / static_cast<double>(c.total());
}

// Cohen's kappa from the 2x2 marginals. When chance agreement is already
// perfect (p_e = 1) the observed agreement must be too, and kappa is 1.
inline double cohen_kappa(const ConfusionCounts& c) {
    detail::check_counts(c);
    const double n = static_cast<double>(c.total());
    const double a = static_cast<double>(c.both_pass);
    const double b = static_cast<double>(c.judge_pass_human_fail);
    const double d = static_cast<double>(c.judge_fail_human_pass);
    const double e = static_cast<double>(c.both_fail);
    const double po = (a + e) / n;
    // marginals: judge passes a+b, human passes a+d
    const double pe = ((a + b) * (a + d) + (e + d) * (e + b)) / (n * n);
    if (1.0 - pe == 0.0) return 1.0;
    return (po - pe) / (1.0 - pe);
}

// Ascending ranks 1..n, ties sharing the average of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

namespace detail {

inline void check_paired(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw LengthMismatch("paired series have different lengths");
    if (x.size() < 2) throw LengthMismatch("paired statistics need at least 2 points");
}

} // namespace detail

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    detail::check_paired(x, y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ConstantSeries("correlation is undefined for a constant series");
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    detail::check_paired(x, y);
    return pearson(average_ranks(x), average_ranks(y));
}

inline double mean_abs_delta(const std::vector<double>& x, const std::vector<double>& y) {
    detail::check_paired(x, y);
    double sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
    return sum / static_cast<double>(x.size());
}

// Fraction of items holding the same descending rank position in both
// series. Average ranks keep ties consistent between the two sides.
inline double ranking_agreement(const std::vector<double>& x, const std::vector<double>& y) {
    detail::check_paired(x, y);
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    // descending position = n + 1 - ascending rank; the offset cancels, so
    // comparing ascending ranks directly is equivalent
    std::size_t matches = 0;
    for (std::size_t i = 0; i < rx.size(); ++i)
        if (rx[i] == ry[i]) ++matches;
    return static_cast<double>(matches) / static_cast<double>(rx.size());
}

// One evaluated trace: the instance it answers, the parse result (absent on
// format failure) and the audit verdict when one was produced.
struct EvalRecord {
    QAInstance instance;
    std::optional<ParsedTrace> trace;
    std::optional<JudgeVerdict> verdict;
};

struct CorpusMetrics {
    std::size_t n = 0;
    double em = 0.0;  // percentages
    double f1 = 0.0;
    std::optional<double> faith_overall;            // mean r_faith, in percent
    std::map<AuditDimension, double> faith_by_dimension;  // pass rate per check, in percent
};

// Corpus-level metrics. Format failures count as zero EM/F1. Faithfulness
// aggregates only over records that carry a verdict; per-dimension rates
// divide by how many verdicts had that check applicable. faith_overall is
// the mean r_faith, which coincides with the mean of the per-dimension rates
// exactly when every verdict has all checks applicable.
inline CorpusMetrics evaluate_corpus(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw Error("no records to evaluate");
    std::optional<TraceVariant> variant;
    for (const auto& r : records) {
        if (!r.trace) continue;
        if (!variant) variant = r.trace->variant;
        else if (*variant != r.trace->variant)
            throw MixedVariants("records mix trace variants");
    }

    CorpusMetrics m;
    m.n = records.size();
    double em_sum = 0, f1_sum = 0;
    double faith_sum = 0;
    std::size_t faith_n = 0;
    std::map<AuditDimension, std::pair<std::size_t, std::size_t>> dim;  // passes, applicable
    for (const auto& r : records) {
        if (r.trace) {
            em_sum += exact_match(r.trace->answer, r.instance.gold_answer);
            f1_sum += soft_f1(r.trace->answer, r.instance.gold_answer);
        }
        if (r.verdict) {
            faith_sum += r.verdict->r_faith;
            ++faith_n;
            auto tally = [&](AuditDimension d, const std::optional<int>& bit) {
                if (!bit) return;
                dim[d].first += static_cast<std::size_t>(*bit);
                dim[d].second += 1;
            };
            tally(AuditDimension::PlanReason, r.verdict->plan_reason);
            tally(AuditDimension::CitationBoundary, r.verdict->citation_boundary);
            tally(AuditDimension::ReasonAnswer, r.verdict->reason_answer);
            tally(AuditDimension::Grounding, r.verdict->grounding);
        }
    }
    const double n = static_cast<double>(records.size());
    m.em = 100.0 * em_sum / n;
    m.f1 = 100.0 * f1_sum / n;
    if (faith_n > 0) m.faith_overall = 100.0 * faith_sum / static_cast<double>(faith_n);
    for (const auto& [d, counts] : dim)
        m.faith_by_dimension[d] =
            100.0 * static_cast<double>(counts.first) / static_cast<double>(counts.second);
    return m;
}

} // namespace tracekit
