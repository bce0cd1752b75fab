#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tracekit/stats.hpp"

using namespace tracekit;

namespace {

// Benchmark agreement tables: judge verdicts against 500 human annotations
// per check (both_pass, both_fail, judge_pass_human_fail, judge_fail_human_pass).
const ConfusionCounts kPlanReason{393, 78, 15, 14};
const ConfusionCounts kEvidenceGrounding{375, 83, 25, 17};
const ConfusionCounts kAnswerDerivation{410, 71, 9, 10};
const ConfusionCounts kGoldDocCitation{370, 80, 33, 17};

// Two judges scoring the same four configurations, three datasets.
const std::vector<double> kMusiqueA{58.25, 50.85, 71.20, 80.35};
const std::vector<double> kMusiqueB{55.40, 49.70, 69.85, 77.60};
const std::vector<double> kHotpotA{83.65, 83.50, 91.80, 95.00};
const std::vector<double> kHotpotB{82.15, 81.40, 90.25, 93.60};
const std::vector<double> kWikiA{76.85, 78.95, 89.25, 94.80};
const std::vector<double> kWikiB{73.90, 77.50, 86.80, 93.25};

} // namespace

TEST_CASE("observed agreement and kappa on the annotation tables") {
    CHECK_THAT(observed_agreement(kPlanReason) * 100, Catch::Matchers::WithinAbs(94.2, 1e-9));
    CHECK_THAT(observed_agreement(kEvidenceGrounding) * 100,
               Catch::Matchers::WithinAbs(91.6, 1e-9));
    CHECK_THAT(observed_agreement(kAnswerDerivation) * 100,
               Catch::Matchers::WithinAbs(96.2, 1e-9));
    CHECK_THAT(observed_agreement(kGoldDocCitation) * 100,
               Catch::Matchers::WithinAbs(90.0, 1e-9));

    CHECK_THAT(cohen_kappa(kPlanReason), Catch::Matchers::WithinAbs(0.80766170, 1e-6));
    CHECK_THAT(cohen_kappa(kEvidenceGrounding), Catch::Matchers::WithinAbs(0.74514563, 1e-6));
    CHECK_THAT(cohen_kappa(kAnswerDerivation), Catch::Matchers::WithinAbs(0.85934261, 1e-6));
    CHECK_THAT(cohen_kappa(kGoldDocCitation), Catch::Matchers::WithinAbs(0.69907797, 1e-6));

    const double mean_agree = (observed_agreement(kPlanReason) + observed_agreement(kEvidenceGrounding) +
                               observed_agreement(kAnswerDerivation) + observed_agreement(kGoldDocCitation)) /
                              4.0 * 100.0;
    const double mean_kappa = (cohen_kappa(kPlanReason) + cohen_kappa(kEvidenceGrounding) +
                               cohen_kappa(kAnswerDerivation) + cohen_kappa(kGoldDocCitation)) /
                              4.0;
    CHECK_THAT(mean_agree, Catch::Matchers::WithinAbs(93.0, 1e-9));
    CHECK_THAT(mean_kappa, Catch::Matchers::WithinAbs(0.77780698, 1e-6));
}

TEST_CASE("kappa degenerate and validation cases") {
    // unanimous passes leave no room for chance correction
    CHECK(cohen_kappa({10, 0, 0, 0}) == 1.0);
    CHECK(cohen_kappa({0, 10, 0, 0}) == 1.0);
    // agreement no better than chance
    CHECK_THAT(cohen_kappa({25, 25, 25, 25}), Catch::Matchers::WithinAbs(0.0, 1e-12));
    // perfectly crossed verdicts
    CHECK_THAT(cohen_kappa({0, 0, 25, 25}), Catch::Matchers::WithinAbs(-1.0, 1e-12));

    CHECK_THROWS_AS(observed_agreement({0, 0, 0, 0}), EmptyConfusion);
    CHECK_THROWS_AS(cohen_kappa({0, 0, 0, 0}), EmptyConfusion);
    CHECK_THROWS_AS(cohen_kappa({-1, 1, 0, 0}), Error);
}

TEST_CASE("average ranks") {
    CHECK(average_ranks({10.0, 20.0, 20.0, 30.0}) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    CHECK(average_ranks({3.0, 1.0, 2.0}) == std::vector<double>{3.0, 1.0, 2.0});
    CHECK(average_ranks({5.0, 5.0, 5.0}) == std::vector<double>{2.0, 2.0, 2.0});
    CHECK(average_ranks({}).empty());
}

TEST_CASE("pearson, spearman and mean abs delta on the cross-judge tables") {
    CHECK_THAT(pearson(kMusiqueA, kMusiqueB), Catch::Matchers::WithinAbs(0.99791213, 1e-6));
    CHECK_THAT(pearson(kHotpotA, kHotpotB), Catch::Matchers::WithinAbs(0.99918307, 1e-6));
    CHECK_THAT(pearson(kWikiA, kWikiB), Catch::Matchers::WithinAbs(0.99709048, 1e-6));
    CHECK(pearson(kMusiqueA, kMusiqueB) >= 0.995);
    CHECK(pearson(kHotpotA, kHotpotB) >= 0.995);
    CHECK(pearson(kWikiA, kWikiB) >= 0.995);

    // both judges order the four configurations identically
    CHECK(spearman(kMusiqueA, kMusiqueB) == 1.0);
    CHECK(spearman(kHotpotA, kHotpotB) == 1.0);
    CHECK(spearman(kWikiA, kWikiB) == 1.0);

    CHECK_THAT(mean_abs_delta(kMusiqueA, kMusiqueB), Catch::Matchers::WithinAbs(2.025, 1e-12));
    CHECK_THAT(mean_abs_delta(kHotpotA, kHotpotB), Catch::Matchers::WithinAbs(1.6375, 1e-12));
    CHECK_THAT(mean_abs_delta(kWikiA, kWikiB), Catch::Matchers::WithinAbs(2.10, 1e-12));

    CHECK(ranking_agreement(kMusiqueA, kMusiqueB) == 1.0);
    CHECK(ranking_agreement(kHotpotA, kHotpotB) == 1.0);
    CHECK(ranking_agreement(kWikiA, kWikiB) == 1.0);
}

TEST_CASE("paired statistics validation") {
    CHECK_THROWS_AS(pearson({1.0, 2.0}, {1.0, 2.0, 3.0}), LengthMismatch);
    CHECK_THROWS_AS(pearson({1.0}, {1.0}), LengthMismatch);
    CHECK_THROWS_AS(pearson({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), ConstantSeries);
    CHECK_THROWS_AS(pearson({1.0, 2.0, 3.0}, {5.0, 5.0, 5.0}), ConstantSeries);
    CHECK_THROWS_AS(spearman({2.0}, {2.0}), LengthMismatch);
    CHECK_THROWS_AS(mean_abs_delta({1.0}, {1.0}), LengthMismatch);
    CHECK_THROWS_AS(ranking_agreement({1.0, 2.0}, {1.0}), LengthMismatch);
}

TEST_CASE("correlation behavior") {
    // perfect linear relation
    CHECK_THAT(pearson({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0}),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(pearson({1.0, 2.0, 3.0, 4.0}, {9.0, 7.0, 5.0, 3.0}),
               Catch::Matchers::WithinAbs(-1.0, 1e-12));
    // monotone but nonlinear: spearman saturates, pearson does not
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> y{1.0, 8.0, 27.0, 64.0, 125.0};
    CHECK(spearman(x, y) == 1.0);
    CHECK(pearson(x, y) < 1.0);
    // ties handled through average ranks: 3 / sqrt(10)
    CHECK_THAT(spearman({1.0, 2.0, 2.0, 3.0}, {1.0, 2.0, 3.0, 4.0}),
               Catch::Matchers::WithinAbs(3.0 / std::sqrt(10.0), 1e-12));
}

TEST_CASE("ranking agreement counts matching positions") {
    CHECK(ranking_agreement({1.0, 2.0, 3.0, 4.0}, {4.0, 3.0, 2.0, 1.0}) == 0.0);
    CHECK(ranking_agreement({1.0, 2.0, 3.0, 4.0}, {11.0, 12.0, 13.0, 14.0}) == 1.0);
    // one swapped pair keeps the other two positions
    CHECK_THAT(ranking_agreement({1.0, 2.0, 3.0, 4.0}, {2.0, 1.0, 3.0, 4.0}),
               Catch::Matchers::WithinAbs(0.5, 1e-12));
    // a tie on one side but not the other breaks those positions only
    CHECK_THAT(ranking_agreement({1.0, 2.0, 2.0, 4.0}, {1.0, 2.0, 3.0, 4.0}),
               Catch::Matchers::WithinAbs(0.5, 1e-12));
}

namespace {

EvalRecord record_with_answer(const std::string& pred, const std::string& gold,
                              TraceVariant v = TraceVariant::V5) {
    EvalRecord r;
    r.instance.id = "q";
    r.instance.question = "?";
    r.instance.documents = {{1, "t", "b"}};
    r.instance.supports = {1};
    r.instance.gold_answer = gold;
    ParsedTrace t;
    t.variant = v;
    t.answer = pred;
    t.raw = "<answer>" + pred + "</answer>";
    r.trace = t;
    return r;
}

} // namespace

TEST_CASE("corpus metrics over answers") {
    std::vector<EvalRecord> records;
    records.push_back(record_with_answer("Tista", "Tista"));
    records.push_back(record_with_answer("the Tista!", "tista"));
    records.push_back(record_with_answer("the United States of America", "United States"));
    EvalRecord failed;  // a format failure: no trace, no verdict
    failed.instance.gold_answer = "whatever";
    records.push_back(failed);

    const auto m = evaluate_corpus(records);
    CHECK(m.n == 4);
    CHECK_THAT(m.em, Catch::Matchers::WithinAbs(50.0, 1e-9));
    CHECK_THAT(m.f1, Catch::Matchers::WithinAbs(100.0 * (2.0 + 2.0 / 3.0) / 4.0, 1e-9));
    CHECK_FALSE(m.faith_overall.has_value());
    CHECK(m.faith_by_dimension.empty());
}

TEST_CASE("corpus metrics reject mixed variants and empty input") {
    CHECK_THROWS_AS(evaluate_corpus({}), Error);
    std::vector<EvalRecord> mixed;
    mixed.push_back(record_with_answer("a", "a", TraceVariant::V5));
    mixed.push_back(record_with_answer("b", "b", TraceVariant::V4));
    mixed[1].trace->reason = "r";
    CHECK_THROWS_AS(evaluate_corpus(mixed), MixedVariants);
}

TEST_CASE("per-dimension faithfulness rates at scale") {
    // 2000 verdicts with pass counts chosen per dimension; every verdict has
    // all four checks applicable, so overall faithfulness equals the mean of
    // the per-dimension rates.
    const std::size_t n = 2000;
    const std::size_t pass_pr = 1537;   // 76.85%
    const std::size_t pass_cb = 1379;   // 68.95%
    const std::size_t pass_ra = 1403;   // 70.15%
    const std::size_t pass_g = 1227;    // 61.35%

    std::vector<EvalRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        EvalRecord r = record_with_answer("x", "x", TraceVariant::V1);
        r.trace->plan = "p";
        r.trace->citations = std::set<int>{1};
        r.trace->reason = "r [1]";
        JudgeVerdict v;
        v.plan_reason = (i < pass_pr) ? 1 : 0;
        v.citation_boundary = (i < pass_cb) ? 1 : 0;
        v.reason_answer = (i < pass_ra) ? 1 : 0;
        v.grounding = (i < pass_g) ? 1 : 0;
        v.checks = 4;
        v.r_faith = (*v.plan_reason + *v.citation_boundary + v.reason_answer + *v.grounding) / 4.0;
        r.verdict = v;
        records.push_back(std::move(r));
    }

    const auto m = evaluate_corpus(records);
    REQUIRE(m.faith_overall.has_value());
    CHECK_THAT(m.faith_by_dimension.at(AuditDimension::PlanReason),
               Catch::Matchers::WithinAbs(76.85, 1e-9));
    CHECK_THAT(m.faith_by_dimension.at(AuditDimension::CitationBoundary),
               Catch::Matchers::WithinAbs(68.95, 1e-9));
    CHECK_THAT(m.faith_by_dimension.at(AuditDimension::ReasonAnswer),
               Catch::Matchers::WithinAbs(70.15, 1e-9));
    CHECK_THAT(m.faith_by_dimension.at(AuditDimension::Grounding),
               Catch::Matchers::WithinAbs(61.35, 1e-9));
    CHECK_THAT(*m.faith_overall, Catch::Matchers::WithinAbs(69.325, 1e-9));

    double dim_mean = 0.0;
    for (const auto& [d, rate] : m.faith_by_dimension) dim_mean += rate;
    dim_mean /= static_cast<double>(m.faith_by_dimension.size());
    CHECK_THAT(*m.faith_overall, Catch::Matchers::WithinAbs(dim_mean, 1e-9));
}

TEST_CASE("verdicts with fewer applicable checks weight r_faith accordingly") {
    // two V4 verdicts: one passes both checks, one fails both
    std::vector<EvalRecord> records;
    for (int pass = 1; pass >= 0; --pass) {
        EvalRecord r = record_with_answer("x", "x", TraceVariant::V4);
        r.trace->reason = "r";
        JudgeVerdict v;
        v.reason_answer = pass;
        v.grounding = pass;
        v.checks = 2;
        v.r_faith = pass;
        r.verdict = v;
        records.push_back(std::move(r));
    }
    const auto m = evaluate_corpus(records);
    REQUIRE(m.faith_overall.has_value());
    CHECK_THAT(*m.faith_overall, Catch::Matchers::WithinAbs(50.0, 1e-9));
    CHECK(m.faith_by_dimension.count(AuditDimension::PlanReason) == 0);
    CHECK(m.faith_by_dimension.count(AuditDimension::CitationBoundary) == 0);
    CHECK_THAT(m.faith_by_dimension.at(AuditDimension::ReasonAnswer),
               Catch::Matchers::WithinAbs(50.0, 1e-9));
}
