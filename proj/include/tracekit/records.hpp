#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tracekit/errors.hpp"
#include "tracekit/scoring.hpp"
#include "tracekit/stats.hpp"
#include "tracekit/trace.hpp"

namespace tracekit {

// One line of a traces file: the raw text plus an optional id used to join
// against a corpus.
struct TraceRecord {
    std::optional<std::string> id;
    std::string trace;
};

inline std::vector<TraceRecord> load_trace_records(std::istream& in,
                                                   const std::string& origin = "<stream>") {
    std::vector<TraceRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("trace") || !j["trace"].is_string())
            throw SchemaError(where + ": expected {\"trace\": \"...\", \"id\"?: \"...\"}");
        TraceRecord r;
        r.trace = j["trace"].get<std::string>();
        if (j.contains("id")) {
            if (!j["id"].is_string()) throw SchemaError(where + ": field 'id' must be a string");
            r.id = j["id"].get<std::string>();
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<TraceRecord> load_trace_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileMissing("cannot open traces file: " + path);
    return load_trace_records(in, path);
}

inline nlohmann::json format_report_record(const std::optional<std::string>& id,
                                           const FormatReport& report) {
    nlohmann::json j;
    if (id) j["id"] = *id;
    j["valid"] = report.valid;
    j["error_class"] =
        report.error_class ? nlohmann::json(std::string(format_error_name(*report.error_class)))
                           : nlohmann::json(nullptr);
    j["detail"] = report.detail;
    return j;
}

inline nlohmann::json verdict_to_json(const JudgeVerdict& v) {
    auto opt = [](const std::optional<int>& b) {
        return b ? nlohmann::json(*b) : nlohmann::json(nullptr);
    };
    return nlohmann::json{{"plan_reason", opt(v.plan_reason)},
                          {"citation_boundary", opt(v.citation_boundary)},
                          {"reason_answer", v.reason_answer},
                          {"grounding", opt(v.grounding)},
                          {"checks", v.checks},
                          {"r_faith", v.r_faith}};
}

inline nlohmann::json breakdown_record(const std::string& id, const ScoredTrace& scored) {
    auto opt = [](const std::optional<double>& x) {
        return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
    };
    const RewardBreakdown& b = scored.breakdown;
    nlohmann::json j{{"id", id},
                     {"variant", std::string(variant_name(b.variant))},
                     {"fmt", b.fmt},
                     {"gold", opt(b.gold)},
                     {"faith", opt(b.faith)},
                     {"ans", b.ans},
                     {"composite", b.composite}};
    if (scored.verdict) j["verdict"] = verdict_to_json(*scored.verdict);
    if (!scored.diagnostic.empty()) j["diag"] = scored.diagnostic;
    return j;
}

inline nlohmann::json metrics_record(const CorpusMetrics& m) {
    nlohmann::json dims = nlohmann::json::object();
    for (const auto& [d, rate] : m.faith_by_dimension)
        dims[std::string(dimension_key(d))] = rate;
    return nlohmann::json{{"type", "corpus_metrics"},
                          {"n", m.n},
                          {"em", m.em},
                          {"f1", m.f1},
                          {"faith_overall",
                           m.faith_overall ? nlohmann::json(*m.faith_overall) : nlohmann::json(nullptr)},
                          {"faith_by_dimension", dims},
                          // r_faith averages partial credit; an all-checks-pass
                          // rate would read lower on the same verdicts.
                          {"faith_definition", "mean_r_faith"}};
}

} // namespace tracekit
