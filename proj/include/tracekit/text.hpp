#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tracekit {

// Answer normalization in the usual extractive-QA style: lowercase, delete
// punctuation, drop the articles a/an/the, split on whitespace. Bytes above
// 0x7f pass through untouched, so multibyte UTF-8 text survives unharmed.
inline std::vector<std::string> normalize_text(std::string_view s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (unsigned char c : s) {
        if (c < 0x80 && std::ispunct(c)) continue;
        cleaned.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }

    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && cur != "a" && cur != "an" && cur != "the")
            tokens.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : cleaned) {
        if (c < 0x80 && std::isspace(c)) flush();
        else cur.push_back(static_cast<char>(c));
    }
    flush();
    return tokens;
}

inline int exact_match(std::string_view pred, std::string_view gold) {
    return normalize_text(pred) == normalize_text(gold) ? 1 : 0;
}

// Token-level F1 with multiset overlap: each gold token can be matched at
// most as many times as it occurs. Two empty normalizations count as a
// perfect match; one empty side scores zero.
inline double soft_f1(std::string_view pred, std::string_view gold) {
    const auto p = normalize_text(pred);
    const auto g = normalize_text(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;

    std::unordered_map<std::string, int> remaining;
    for (const auto& t : g) remaining[t]++;
    int overlap = 0;
    for (const auto& t : p) {
        auto it = remaining.find(t);
        if (it != remaining.end() && it->second > 0) {
            ++overlap;
            --it->second;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace tracekit
