#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tracekit/rewards.hpp"
#include "tracekit/text.hpp"

using namespace tracekit;

namespace {

// Independent normalization oracle, written against the same convention but
// through a different route: regex-free character filter, stream tokenizer,
// then an article filter pass.
std::vector<std::string> oracle_tokens(const std::string& s) {
    const std::string punct = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
    std::string kept;
    for (char c : s) {
        if (punct.find(c) != std::string::npos) continue;
        kept += static_cast<char>(
            c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    }
    std::istringstream in(kept);
    std::vector<std::string> tokens, out;
    std::string t;
    while (in >> t) tokens.push_back(t);
    for (const auto& tok : tokens)
        if (tok != "a" && tok != "an" && tok != "the") out.push_back(tok);
    return out;
}

// Quadratic multiset-overlap F1, no hash maps involved.
double oracle_soft_f1(const std::string& pred, const std::string& gold) {
    const auto p = oracle_tokens(pred);
    const auto g = oracle_tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::vector<bool> used(g.size(), false);
    int overlap = 0;
    for (const auto& tp : p) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (!used[j] && g[j] == tp) {
                used[j] = true;
                ++overlap;
                break;
            }
        }
    }
    if (overlap == 0) return 0.0;
    const double pr = double(overlap) / double(p.size());
    const double rc = double(overlap) / double(g.size());
    return 2 * pr * rc / (pr + rc);
}

int oracle_exact(const std::string& pred, const std::string& gold) {
    return oracle_tokens(pred) == oracle_tokens(gold) ? 1 : 0;
}

std::string random_answer(std::mt19937_64& rng) {
    static const std::vector<std::string> vocab = {
        "the",    "a",     "an",     "Mario",  "Andretti", "united", "states", "of",
        "America", "river", "$72,641", "1958",  "award",    "Bug's",  "life",   "won",
        "race",   "city",  "E=mc^2",  "#42",   "Halden",   "Tista",  "income", "..."};
    std::uniform_int_distribution<int> len(0, 6);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::uniform_int_distribution<int> style(0, 3);
    std::string out;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
        if (!out.empty()) out += style(rng) == 0 ? "  " : " ";
        std::string w = vocab[pick(rng)];
        if (style(rng) == 1)
            for (char& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        out += w;
    }
    return out;
}

} // namespace

TEST_CASE("normalization matches the usual convention") {
    CHECK(normalize_text("The Mario Andretti") == std::vector<std::string>{"mario", "andretti"});
    CHECK(normalize_text("$72,641") == std::vector<std::string>{"72641"});
    CHECK(normalize_text("Hunter-Reay") == std::vector<std::string>{"hunterreay"});
    CHECK(normalize_text("an   Apple!") == std::vector<std::string>{"apple"});
    CHECK(normalize_text("the a an") == std::vector<std::string>{});
    CHECK(normalize_text("").empty());
    // 'a' embedded in a word survives; only whole article tokens drop
    CHECK(normalize_text("a banana") == std::vector<std::string>{"banana"});
}

TEST_CASE("exact match examples") {
    CHECK(exact_match("The Beatles", "beatles!") == 1);
    CHECK(exact_match("", "") == 1);
    CHECK(exact_match("the", "") == 1);  // both normalize to nothing
    CHECK(exact_match("Mario Andretti", "Ryan Hunter-Reay") == 0);
}

TEST_CASE("soft f1 frozen examples") {
    // overlap 2, |pred| 4, |gold| 2 after normalization
    CHECK_THAT(soft_f1("the United States of America", "United States"),
               Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
    CHECK(soft_f1("same answer", "same answer") == 1.0);
    CHECK(soft_f1("alpha beta", "gamma delta") == 0.0);
    CHECK(soft_f1("", "") == 1.0);
    CHECK(soft_f1("something", "") == 0.0);
    CHECK(soft_f1("", "something") == 0.0);
    // multiset behavior: a repeated predicted token only matches once
    CHECK_THAT(soft_f1("x x", "x y"), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("text metrics agree with the brute-force oracle on 1000 random pairs") {
    std::mt19937_64 rng(123457);
    for (int i = 0; i < 1000; ++i) {
        const std::string a = random_answer(rng);
        const std::string b = random_answer(rng);
        INFO("pred='" << a << "' gold='" << b << "'");
        REQUIRE(exact_match(a, b) == oracle_exact(a, b));
        REQUIRE_THAT(soft_f1(a, b), Catch::Matchers::WithinAbs(oracle_soft_f1(a, b), 1e-12));
        if (exact_match(a, b) == 1) REQUIRE(soft_f1(a, b) == 1.0);
    }
}

TEST_CASE("citation f1") {
    CHECK_THAT(citation_f1({2, 5}, {2, 8}), Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK(citation_f1({2, 5}, {2, 5}) == 1.0);
    CHECK(citation_f1({}, {1}) == 0.0);
    CHECK(citation_f1({3, 4}, {1, 2}) == 0.0);
    CHECK_THROWS_AS(citation_f1({1}, {}), EmptyGoldSupports);
    // precision/recall asymmetry
    CHECK_THAT(citation_f1({1, 2, 3, 4}, {1, 2}), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("citation f1 is 1 exactly when the sets match") {
    std::mt19937_64 rng(5150);
    std::uniform_int_distribution<int> idx(1, 10), count(1, 6);
    for (int i = 0; i < 500; ++i) {
        std::set<int> pred, gold;
        for (int k = count(rng); k > 0; --k) pred.insert(idx(rng));
        for (int k = count(rng); k > 0; --k) gold.insert(idx(rng));
        const double f1 = citation_f1(pred, gold);
        if (pred == gold) REQUIRE(f1 == 1.0);
        else REQUIRE(f1 < 1.0);
    }
}

TEST_CASE("applicable components per variant") {
    using C = RewardComponent;
    CHECK(applicable_components(TraceVariant::V1) ==
          std::vector<C>{C::Fmt, C::Gold, C::Faith, C::Ans});
    CHECK(applicable_components(TraceVariant::V2) ==
          std::vector<C>{C::Fmt, C::Gold, C::Faith, C::Ans});
    CHECK(applicable_components(TraceVariant::V3) == std::vector<C>{C::Fmt, C::Faith, C::Ans});
    CHECK(applicable_components(TraceVariant::V4) == std::vector<C>{C::Fmt, C::Faith, C::Ans});
    CHECK(applicable_components(TraceVariant::V5) == std::vector<C>{C::Fmt, C::Ans});
}

TEST_CASE("composite reward examples") {
    SECTION("normalized mean over four components") {
        const auto b = composite_reward(1, 0.5, 0.75, 1.0, TraceVariant::V1);
        CHECK_THAT(b.composite, Catch::Matchers::WithinAbs(0.8125, 1e-12));
        CHECK(b.fmt == 1);
        CHECK(b.gold == 0.5);
        CHECK(b.faith == 0.75);
        CHECK(b.ans == 1.0);
    }
    SECTION("sum aggregation") {
        RewardWeights w;
        w.aggregation = Aggregation::Sum;
        const auto b = composite_reward(1, 1.0, 1.0, 1.0, TraceVariant::V1, w);
        CHECK_THAT(b.composite, Catch::Matchers::WithinAbs(4.0, 1e-12));
    }
    SECTION("weights shift the mean") {
        RewardWeights w;
        w.ans = 3.0;
        const auto b = composite_reward(1, 1.0, 1.0, 0.0, TraceVariant::V1, w);
        // (1 + 1 + 1 + 3*0) / 6
        CHECK_THAT(b.composite, Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("answer-only variant") {
        const auto b = composite_reward(1, std::nullopt, std::nullopt, 0.6, TraceVariant::V5);
        CHECK_THAT(b.composite, Catch::Matchers::WithinAbs(0.8, 1e-12));
        CHECK_FALSE(b.gold.has_value());
        CHECK_FALSE(b.faith.has_value());
    }
}

TEST_CASE("format gate forces everything to zero") {
    const auto b = composite_reward(0, 0.9, 0.9, 0.9, TraceVariant::V1);
    CHECK(b.fmt == 0);
    CHECK(b.gold == 0.0);
    CHECK(b.faith == 0.0);
    CHECK(b.ans == 0.0);
    CHECK(b.composite == 0.0);
    const auto g = format_failure_breakdown(TraceVariant::V4);
    CHECK(g.fmt == 0);
    CHECK_FALSE(g.gold.has_value());
    CHECK(g.faith == 0.0);
    CHECK(g.composite == 0.0);
}

TEST_CASE("component coverage must match the variant") {
    CHECK_THROWS_AS(composite_reward(1, std::nullopt, 0.5, 0.5, TraceVariant::V1),
                    MissingComponent);
    CHECK_THROWS_AS(composite_reward(1, 0.5, std::nullopt, 0.5, TraceVariant::V2),
                    MissingComponent);
    CHECK_THROWS_AS(composite_reward(1, 0.5, 0.5, 0.5, TraceVariant::V4), ExtraComponent);
    CHECK_THROWS_AS(composite_reward(1, std::nullopt, 0.5, 0.5, TraceVariant::V5),
                    ExtraComponent);
    CHECK_THROWS_AS(composite_reward(1, 0.5, 0.5, 1.5, TraceVariant::V1), Error);
    CHECK_THROWS_AS(composite_reward(2, 0.5, 0.5, 0.5, TraceVariant::V1), Error);
}

TEST_CASE("zero applicable weight mass is rejected") {
    RewardWeights w;
    w.fmt = w.ans = 0.0;
    CHECK_THROWS_AS(composite_reward(1, std::nullopt, std::nullopt, 1.0, TraceVariant::V5, w),
                    Error);
}

TEST_CASE("gate, range and monotonicity over 10000 random breakdowns") {
    std::mt19937_64 rng(909090);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick_variant(0, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    const TraceVariant variants[] = {TraceVariant::V1, TraceVariant::V2, TraceVariant::V3,
                                     TraceVariant::V4, TraceVariant::V5};
    for (int i = 0; i < 10000; ++i) {
        const TraceVariant v = variants[pick_variant(rng)];
        const bool has_gold = component_applicable(v, RewardComponent::Gold);
        const bool has_faith = component_applicable(v, RewardComponent::Faith);
        std::optional<double> gold, faith;
        if (has_gold) gold = unit(rng);
        if (has_faith) faith = unit(rng);
        const double ans = unit(rng);

        const auto gated = composite_reward(0, has_gold ? std::optional<double>(gold) : std::nullopt,
                                            faith, ans, v);
        REQUIRE(gated.composite == 0.0);
        REQUIRE(gated.fmt == 0);
        REQUIRE(gated.ans == 0.0);
        if (has_gold) REQUIRE(gated.gold == 0.0);
        if (has_faith) REQUIRE(gated.faith == 0.0);

        const auto base = composite_reward(1, gold, faith, ans, v);
        REQUIRE(base.composite >= 0.0);
        REQUIRE(base.composite <= 1.0 + 1e-12);

        // bump one applicable component upward; the mean must not drop
        auto bumped_gold = gold, bumped_faith = faith;
        double bumped_ans = ans;
        switch (coin(rng) * 2 + coin(rng)) {
            case 0:
                if (has_gold) bumped_gold = std::min(1.0, *gold + unit(rng));
                break;
            case 1:
                if (has_faith) bumped_faith = std::min(1.0, *faith + unit(rng));
                break;
            default:
                bumped_ans = std::min(1.0, ans + unit(rng));
        }
        const auto bumped = composite_reward(1, bumped_gold, bumped_faith, bumped_ans, v);
        REQUIRE(bumped.composite >= base.composite - 1e-12);
    }
}
