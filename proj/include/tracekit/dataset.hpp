#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tracekit/errors.hpp"

namespace tracekit {

struct Document {
    int index = 0;  // 1-based, explicit in the record rather than positional
    std::string title;
    std::string body;
};

struct QAInstance {
    std::string id;
    std::string question;
    std::vector<Document> documents;
    std::set<int> supports;  // indices of the gold supporting documents
    std::string gold_answer;

    const Document* find_document(int index) const {
        for (const auto& d : documents)
            if (d.index == index) return &d;
        return nullptr;
    }
};

inline void validate_instance(const QAInstance& q) {
    if (q.id.empty()) throw InvariantViolation("instance id is empty");
    const std::size_t k = q.documents.size();
    std::set<int> seen;
    for (const auto& d : q.documents) {
        if (d.index < 1 || static_cast<std::size_t>(d.index) > k)
            throw InvariantViolation("document index " + std::to_string(d.index) +
                                     " outside 1.." + std::to_string(k));
        if (!seen.insert(d.index).second)
            throw InvariantViolation("duplicate document index " + std::to_string(d.index));
    }
    // seen covering 1..k follows from range + uniqueness + count
    if (q.supports.empty()) throw InvariantViolation("supports set is empty");
    for (int s : q.supports) {
        if (s < 1 || static_cast<std::size_t>(s) > k)
            throw InvariantViolation("support index " + std::to_string(s) +
                                     " outside 1.." + std::to_string(k));
    }
}

namespace detail {

inline QAInstance instance_from_json(const nlohmann::json& j) {
    auto need = [&](const char* field) -> const nlohmann::json& {
        if (!j.contains(field)) throw SchemaError(std::string("missing field '") + field + "'");
        return j.at(field);
    };
    QAInstance q;
    if (!need("id").is_string()) throw SchemaError("field 'id' must be a string");
    q.id = j.at("id").get<std::string>();
    if (!need("question").is_string()) throw SchemaError("field 'question' must be a string");
    q.question = j.at("question").get<std::string>();
    if (!need("documents").is_array()) throw SchemaError("field 'documents' must be an array");
    for (const auto& dj : j.at("documents")) {
        if (!dj.is_object() || !dj.contains("idx") || !dj.at("idx").is_number_integer() ||
            !dj.contains("title") || !dj.at("title").is_string() ||
            !dj.contains("text") || !dj.at("text").is_string())
            throw SchemaError("field 'documents' entries need integer 'idx', string 'title', string 'text'");
        q.documents.push_back({dj.at("idx").get<int>(), dj.at("title").get<std::string>(),
                               dj.at("text").get<std::string>()});
    }
    if (!need("supports").is_array()) throw SchemaError("field 'supports' must be an array");
    for (const auto& sj : j.at("supports")) {
        if (!sj.is_number_integer()) throw SchemaError("field 'supports' entries must be integers");
        q.supports.insert(sj.get<int>());
    }
    if (!need("gold_answer").is_string()) throw SchemaError("field 'gold_answer' must be a string");
    q.gold_answer = j.at("gold_answer").get<std::string>();
    return q;
}

} // namespace detail

// Read a JSON Lines corpus. Every line is checked; all problems are
// collected so one bad line does not hide the rest, then the first problem's
// category decides the exception type. Blank lines are skipped.
inline std::vector<QAInstance> load_instances(std::istream& in, const std::string& origin = "<stream>") {
    std::vector<QAInstance> out;
    std::vector<std::string> schema_errors;
    std::vector<std::string> invariant_errors;
    bool schema_first = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            if (schema_errors.empty() && invariant_errors.empty()) schema_first = true;
            schema_errors.push_back(where + ": not a JSON object");
            continue;
        }
        try {
            QAInstance q = detail::instance_from_json(j);
            validate_instance(q);
            out.push_back(std::move(q));
        } catch (const SchemaError& e) {
            if (schema_errors.empty() && invariant_errors.empty()) schema_first = true;
            schema_errors.push_back(where + ": " + e.what());
        } catch (const InvariantViolation& e) {
            invariant_errors.push_back(where + ": " + e.what());
        }
    }
    if (!schema_errors.empty() || !invariant_errors.empty()) {
        std::string msg;
        for (const auto& e : schema_errors) msg += (msg.empty() ? "" : "\n") + e;
        for (const auto& e : invariant_errors) msg += (msg.empty() ? "" : "\n") + e;
        if (schema_first || invariant_errors.empty()) throw SchemaError(msg);
        throw InvariantViolation(msg);
    }
    return out;
}

inline std::vector<QAInstance> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileMissing("cannot open corpus file: " + path);
    return load_instances(in, path);
}

inline nlohmann::json instance_to_json(const QAInstance& q) {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : q.documents)
        docs.push_back({{"idx", d.index}, {"title", d.title}, {"text", d.body}});
    return nlohmann::json{{"id", q.id},
                          {"question", q.question},
                          {"documents", docs},
                          {"supports", q.supports},
                          {"gold_answer", q.gold_answer}};
}

inline void write_instances(std::ostream& os, const std::vector<QAInstance>& instances) {
    for (const auto& q : instances) os << instance_to_json(q).dump() << "\n";
}

namespace detail {

// Portable draws: std::shuffle and the distribution classes are
// implementation-defined, so roll the byte-level parts by hand.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t x = rng();
        if (x >= threshold) return x % n;
    }
}

template <class T>
inline void shuffle_portable(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

} // namespace detail

struct MixtureSpec {
    std::map<std::string, std::size_t> quotas;  // source name -> sample count
    std::uint64_t seed = 0;
};

// Draw the exact quota from each source without replacement, then shuffle
// the union. Sources are visited in name order, so the result depends only
// on the inputs and the seed.
inline std::vector<QAInstance> sample_mixture(
    const std::map<std::string, std::vector<QAInstance>>& sources, const MixtureSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::vector<QAInstance> out;
    for (const auto& [name, quota] : spec.quotas) {
        if (quota == 0) throw Error("quota for source '" + name + "' must be positive");
        auto it = sources.find(name);
        if (it == sources.end())
            throw QuotaExceedsSource("unknown source '" + name + "'");
        if (quota > it->second.size())
            throw QuotaExceedsSource("source '" + name + "' has " +
                                     std::to_string(it->second.size()) + " instances, quota is " +
                                     std::to_string(quota));
        std::vector<std::size_t> idx(it->second.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        detail::shuffle_portable(idx, rng);
        for (std::size_t i = 0; i < quota; ++i) out.push_back(it->second[idx[i]]);
    }
    detail::shuffle_portable(out, rng);
    return out;
}

} // namespace tracekit
