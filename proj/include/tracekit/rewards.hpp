#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tracekit/errors.hpp"
#include "tracekit/text.hpp"
#include "tracekit/trace.hpp"

namespace tracekit {

enum class RewardComponent { Fmt, Gold, Faith, Ans };
enum class Aggregation { NormalizedMean, Sum };

inline std::string_view component_name(RewardComponent c) {
    switch (c) {
        case RewardComponent::Fmt: return "fmt";
        case RewardComponent::Gold: return "gold";
        case RewardComponent::Faith: return "faith";
        case RewardComponent::Ans: return "ans";
    }
    return {};
}

inline std::string_view aggregation_name(Aggregation a) {
    return a == Aggregation::Sum ? "sum" : "mean";
}

inline Aggregation aggregation_from_name(std::string_view name) {
    if (name == "mean") return Aggregation::NormalizedMean;
    if (name == "sum") return Aggregation::Sum;
    throw Error("unknown aggregation '" + std::string(name) + "' (expected mean or sum)");
}

struct RewardWeights {
    double fmt = 1.0;
    double gold = 1.0;
    double faith = 1.0;
    double ans = 1.0;
    Aggregation aggregation = Aggregation::NormalizedMean;

    double weight(RewardComponent c) const {
        switch (c) {
            case RewardComponent::Fmt: return fmt;
            case RewardComponent::Gold: return gold;
            case RewardComponent::Faith: return faith;
            case RewardComponent::Ans: return ans;
        }
        return 0.0;
    }
};

// Which reward components a variant can earn. Format and answer always
// apply; the citation reward needs a gold_docs field and the faithfulness
// reward needs a reason to audit.
inline const std::vector<RewardComponent>& applicable_components(TraceVariant v) {
    using C = RewardComponent;
    static const std::vector<C> full{C::Fmt, C::Gold, C::Faith, C::Ans};
    static const std::vector<C> no_gold{C::Fmt, C::Faith, C::Ans};
    static const std::vector<C> minimal{C::Fmt, C::Ans};
    switch (v) {
        case TraceVariant::V1:
        case TraceVariant::V2: return full;
        case TraceVariant::V3:
        case TraceVariant::V4: return no_gold;
        case TraceVariant::V5: return minimal;
    }
    return minimal;
}

inline bool component_applicable(TraceVariant v, RewardComponent c) {
    const auto& cs = applicable_components(v);
    for (RewardComponent x : cs)
        if (x == c) return true;
    return false;
}

// Set-level F1 between cited and gold supporting documents.
inline double citation_f1(const std::set<int>& predicted, const std::set<int>& gold) {
    if (gold.empty()) throw EmptyGoldSupports("gold support set is empty");
    if (predicted.empty()) return 0.0;
    std::size_t overlap = 0;
    for (int p : predicted) overlap += gold.count(p);
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(predicted.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

struct RewardBreakdown {
    TraceVariant variant = TraceVariant::V5;
    int fmt = 0;
    std::optional<double> gold;   // empty = not applicable for the variant
    std::optional<double> faith;  // empty = not applicable for the variant
    double ans = 0.0;
    double composite = 0.0;
};

// Combine per-component scores into one scalar. An invalid format gates
// everything: all applicable components are forced to 0 and the composite is
// 0 no matter what was measured. Otherwise the composite is the weighted
// mean over the variant's applicable components, or the plain weighted sum
// when Aggregation::Sum is selected.
inline RewardBreakdown composite_reward(int fmt, std::optional<double> gold,
                                        std::optional<double> faith, double ans,
                                        TraceVariant variant, const RewardWeights& w = {}) {
    const bool wants_gold = component_applicable(variant, RewardComponent::Gold);
    const bool wants_faith = component_applicable(variant, RewardComponent::Faith);
    if (wants_gold && !gold)
        throw MissingComponent("variant " + std::string(variant_name(variant)) + " needs a gold score");
    if (!wants_gold && gold)
        throw ExtraComponent("variant " + std::string(variant_name(variant)) + " has no gold component");
    if (wants_faith && !faith)
        throw MissingComponent("variant " + std::string(variant_name(variant)) + " needs a faith score");
    if (!wants_faith && faith)
        throw ExtraComponent("variant " + std::string(variant_name(variant)) + " has no faith component");
    if (fmt != 0 && fmt != 1) throw Error("fmt must be 0 or 1");
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if ((gold && !in_unit(*gold)) || (faith && !in_unit(*faith)) || !in_unit(ans))
        throw Error("component scores must lie in [0, 1]");

    RewardBreakdown b;
    b.variant = variant;
    b.fmt = fmt;
    if (fmt == 0) {
        if (wants_gold) b.gold = 0.0;
        if (wants_faith) b.faith = 0.0;
        b.ans = 0.0;
        b.composite = 0.0;
        return b;
    }
    b.gold = gold;
    b.faith = faith;
    b.ans = ans;

    double weight_sum = 0.0;
    double weighted = 0.0;
    for (RewardComponent c : applicable_components(variant)) {
        const double wc = w.weight(c);
        if (wc < 0.0) throw Error("weights must be non-negative");
        weight_sum += wc;
        double value = 0.0;
        switch (c) {
            case RewardComponent::Fmt: value = static_cast<double>(fmt); break;
            case RewardComponent::Gold: value = *gold; break;
            case RewardComponent::Faith: value = *faith; break;
            case RewardComponent::Ans: value = ans; break;
        }
        weighted += wc * value;
    }
    if (weight_sum <= 0.0)
        throw Error("at least one weight applicable to the variant must be positive");
    b.composite = w.aggregation == Aggregation::Sum ? weighted : weighted / weight_sum;
    return b;
}

// The breakdown a format failure earns: everything applicable pinned to 0.
inline RewardBreakdown format_failure_breakdown(TraceVariant variant) {
    RewardBreakdown b;
    b.variant = variant;
    if (component_applicable(variant, RewardComponent::Gold)) b.gold = 0.0;
    if (component_applicable(variant, RewardComponent::Faith)) b.faith = 0.0;
    return b;
}

} // namespace tracekit
