#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tracekit/dataset.hpp"
#include "tracekit/errors.hpp"
#include "tracekit/rewards.hpp"
#include "tracekit/scoring.hpp"

namespace tracekit {

struct SimConfig {
    int group_size = 4;
    double epsilon = 1e-4;        // stabilizer added to the group's std deviation
    double learning_rate = 5e-6;  // scale to taste; the demo uses 0.1
    int steps = 0;
    std::uint64_t seed = 0;
};

// A categorical policy over a fixed candidate pool: one logit per candidate.
struct PolicyState {
    std::vector<double> logits;
    std::vector<std::string> candidate_traces;
    std::uint64_t rng_seed = 0;
};

struct GroupSample {
    std::vector<int> indices;  // sampled candidate per group slot
    std::vector<std::string> traces;
    std::vector<double> rewards;
    std::vector<double> advantages;
};

inline std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw Error("softmax over an empty logit vector");
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& p : out) p /= sum;
    return out;
}

// Group-relative advantages: center on the group mean, scale by the group's
// population standard deviation plus epsilon. A group of identical rewards
// has zero numerator everywhere, so it normalizes to exact zeros.
inline std::vector<double> normalize_group(const std::vector<double>& rewards, double epsilon) {
    if (rewards.size() < 2)
        throw GroupTooSmall("group-relative normalization needs at least 2 rewards");
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    bool all_equal = true;
    for (double r : rewards)
        if (r != rewards[0]) {
            all_equal = false;
            break;
        }
    if (all_equal) return std::vector<double>(rewards.size(), 0.0);

    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n;
    const double denom = std::sqrt(var) + epsilon;
    std::vector<double> out(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
    return out;
}

namespace detail {

// 53-bit uniform in [0,1); written out by hand so sampling is identical
// across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace detail

// Draw group_size candidate indices from the policy's softmax distribution.
inline std::vector<int> sample_group(const PolicyState& policy, int group_size,
                                     std::uint64_t seed) {
    if (group_size < 2) throw GroupTooSmall("group size must be at least 2");
    const std::vector<double> probs = softmax(policy.logits);
    std::mt19937_64 rng(seed);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(group_size));
    for (int g = 0; g < group_size; ++g) {
        const double u = detail::uniform01(rng);
        double cum = 0.0;
        int pick = static_cast<int>(probs.size()) - 1;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) {
                pick = static_cast<int>(k);
                break;
            }
        }
        out.push_back(pick);
    }
    return out;
}

// One ascent step on the advantage-weighted log-likelihood of the sampled
// group: d/dlogit_k sum_i adv_i * log p(y_i) = sum_i adv_i * (1[y_i=k] - p_k).
inline PolicyState policy_update(const PolicyState& policy, const GroupSample& group,
                                 double learning_rate) {
    if (group.indices.size() != group.advantages.size())
        throw Error("group indices and advantages must align");
    const std::vector<double> probs = softmax(policy.logits);
    std::vector<double> grad(policy.logits.size(), 0.0);
    for (std::size_t i = 0; i < group.indices.size(); ++i) {
        const int y = group.indices[i];
        if (y < 0 || static_cast<std::size_t>(y) >= policy.logits.size())
            throw Error("sampled index outside the candidate pool");
        const double adv = group.advantages[i];
        for (std::size_t k = 0; k < grad.size(); ++k)
            grad[k] += adv * ((static_cast<std::size_t>(y) == k ? 1.0 : 0.0) - probs[k]);
    }
    PolicyState next = policy;
    for (std::size_t k = 0; k < next.logits.size(); ++k)
        next.logits[k] += learning_rate * grad[k];
    return next;
}

struct TrainingInstance {
    QAInstance instance;
    std::vector<std::string> candidates;  // raw candidate traces for this question
};

struct StepStats {
    int step = 0;
    double total_reward = 0.0;  // mean composite over the step's samples
    double r_fmt = 0.0;
    std::optional<double> r_gold;   // empty when the variant has no such component
    std::optional<double> r_faith;
    double r_ans = 0.0;
};

struct TrainingRun {
    std::vector<StepStats> history;     // one row per step plus a final evaluation row
    std::vector<PolicyState> policies;  // final per-instance policies
    std::size_t diagnostics = 0;        // per-trace problems written to the diag stream
};

// Desk-scale training loop: each instance keeps its own categorical policy
// over its candidate traces. Every step samples a group per instance, scores
// it with the full reward pipeline, normalizes within the group and updates
// that policy. The last history row evaluates the final policy without
// updating, so steps=0 yields exactly one row.
inline TrainingRun run_training(const std::vector<TrainingInstance>& data, TraceVariant variant,
                                const RewardWeights& weights, const SimConfig& cfg, Judge& judge,
                                std::ostream* diag = nullptr) {
    if (data.empty()) throw Error("no training instances");
    if (cfg.steps < 0) throw Error("steps must be >= 0");
    if (cfg.group_size < 2) throw GroupTooSmall("group size must be at least 2");
    if (!(cfg.epsilon > 0.0)) throw Error("epsilon must be positive");
    for (const auto& ti : data) {
        validate_instance(ti.instance);
        if (ti.candidates.empty())
            throw Error("instance '" + ti.instance.id + "' has no candidate traces");
    }

    TrainingRun run;
    std::mt19937_64 master(cfg.seed);
    for (std::size_t i = 0; i < data.size(); ++i) {
        PolicyState p;
        p.logits.assign(data[i].candidates.size(), 0.0);
        p.candidate_traces = data[i].candidates;
        p.rng_seed = master();
        run.policies.push_back(std::move(p));
    }

    const bool has_gold = component_applicable(variant, RewardComponent::Gold);
    const bool has_faith = component_applicable(variant, RewardComponent::Faith);

    auto eval_step = [&](int step, bool update) {
        double sum_comp = 0, sum_fmt = 0, sum_gold = 0, sum_faith = 0, sum_ans = 0;
        std::size_t count = 0;
        for (std::size_t ii = 0; ii < data.size(); ++ii) {
            PolicyState& policy = run.policies[ii];
            GroupSample group;
            group.indices = sample_group(policy, cfg.group_size, master());
            for (int idx : group.indices) {
                const std::string& raw = policy.candidate_traces[static_cast<std::size_t>(idx)];
                RewardBreakdown b;
                try {
                    ScoredTrace scored =
                        score_trace(raw, data[ii].instance, variant, weights, judge);
                    b = scored.breakdown;
                    if (!scored.diagnostic.empty()) {
                        ++run.diagnostics;
                        if (diag)
                            *diag << "step " << step << " instance " << data[ii].instance.id
                                  << ": " << scored.diagnostic << "\n";
                    }
                } catch (const Error& e) {
                    b = format_failure_breakdown(variant);
                    ++run.diagnostics;
                    if (diag)
                        *diag << "step " << step << " instance " << data[ii].instance.id
                              << ": scoring failed: " << e.what() << "\n";
                }
                group.traces.push_back(raw);
                group.rewards.push_back(b.composite);
                sum_comp += b.composite;
                sum_fmt += b.fmt;
                if (b.gold) sum_gold += *b.gold;
                if (b.faith) sum_faith += *b.faith;
                sum_ans += b.ans;
                ++count;
            }
            if (update) {
                group.advantages = normalize_group(group.rewards, cfg.epsilon);
                policy = policy_update(policy, group, cfg.learning_rate);
            }
        }
        StepStats s;
        s.step = step;
        const double n = static_cast<double>(count);
        s.total_reward = sum_comp / n;
        s.r_fmt = sum_fmt / n;
        if (has_gold) s.r_gold = sum_gold / n;
        if (has_faith) s.r_faith = sum_faith / n;
        s.r_ans = sum_ans / n;
        run.history.push_back(s);
    };

    for (int step = 0; step < cfg.steps; ++step) eval_step(step, true);
    eval_step(cfg.steps, false);
    return run;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace detail

inline void write_history_csv(std::ostream& os, const std::vector<StepStats>& history) {
    os << "step,total_reward,r_fmt,r_gold,r_faith,r_ans\n";
    for (const auto& s : history) {
        os << s.step << "," << detail::format_double(s.total_reward) << ","
           << detail::format_double(s.r_fmt) << ",";
        if (s.r_gold) os << detail::format_double(*s.r_gold);
        os << ",";
        if (s.r_faith) os << detail::format_double(*s.r_faith);
        os << "," << detail::format_double(s.r_ans) << "\n";
    }
}

// Settings for a simulator run as read from a key=value config file.
struct SimFileConfig {
    TraceVariant variant = TraceVariant::V1;
    SimConfig sim;
    RewardWeights weights;
    std::string judge = "mock";
    std::string corpus_path;
    std::string candidates_path;
};

inline RewardWeights parse_weights(std::string_view spec, RewardWeights base = {}) {
    RewardWeights w = base;
    std::size_t start = 0;
    while (start < spec.size()) {
        std::size_t end = spec.find(',', start);
        if (end == std::string_view::npos) end = spec.size();
        const std::string_view item = detail::trim_view(spec.substr(start, end - start));
        start = end + 1;
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos)
            throw Error("weight entry '" + std::string(item) + "' is not name=value");
        const std::string_view name = detail::trim_view(item.substr(0, eq));
        double value = 0.0;
        try {
            value = std::stod(std::string(detail::trim_view(item.substr(eq + 1))));
        } catch (const std::exception&) {
            throw Error("weight entry '" + std::string(item) + "' has a non-numeric value");
        }
        if (value < 0.0) throw Error("weights must be non-negative");
        if (name == "fmt") w.fmt = value;
        else if (name == "gold") w.gold = value;
        else if (name == "faith") w.faith = value;
        else if (name == "ans") w.ans = value;
        else throw Error("unknown weight '" + std::string(name) + "'");
    }
    return w;
}

// Minimal key = value config reader: one setting per line, values optionally
// double-quoted, '#' starts a comment. Unknown keys are rejected so typos
// fail loudly.
inline SimFileConfig parse_sim_config(std::istream& in) {
    SimFileConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string_view trimmed = detail::trim_view(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string_view::npos)
            throw Error("config line " + std::to_string(line_no) + " is not key = value");
        const std::string key(detail::trim_view(trimmed.substr(0, eq)));
        std::string value(detail::trim_view(trimmed.substr(eq + 1)));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        try {
            if (key == "variant") cfg.variant = variant_from_name(value);
            else if (key == "group_size") cfg.sim.group_size = std::stoi(value);
            else if (key == "epsilon") cfg.sim.epsilon = std::stod(value);
            else if (key == "learning_rate") cfg.sim.learning_rate = std::stod(value);
            else if (key == "steps") cfg.sim.steps = std::stoi(value);
            else if (key == "seed") cfg.sim.seed = std::stoull(value);
            else if (key == "aggregation") cfg.weights.aggregation = aggregation_from_name(value);
            else if (key == "weights") cfg.weights = parse_weights(value, cfg.weights);
            else if (key == "judge") cfg.judge = value;
            else if (key == "corpus") cfg.corpus_path = value;
            else if (key == "candidates") cfg.candidates_path = value;
            else throw Error("unknown config key '" + key + "'");
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
        }
    }
    return cfg;
}

inline SimFileConfig load_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileMissing("cannot open config file: " + path);
    SimFileConfig cfg = parse_sim_config(in);
    // Relative data paths count from the config file's directory.
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
    };
    resolve(cfg.corpus_path);
    resolve(cfg.candidates_path);
    return cfg;
}

// Candidate pools come as JSON Lines: {"id": ..., "candidates": [...]},
// joined against the corpus by id.
inline std::vector<TrainingInstance> load_training_instances(const std::string& corpus_path,
                                                             const std::string& candidates_path) {
    const std::vector<QAInstance> corpus = load_instances(corpus_path);
    std::ifstream in(candidates_path);
    if (!in) throw FileMissing("cannot open candidates file: " + candidates_path);

    std::vector<TrainingInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = candidates_path + ":" + std::to_string(line_no);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
            !j.contains("candidates") || !j["candidates"].is_array())
            throw SchemaError(where + ": expected {\"id\", \"candidates\": [...]}");
        TrainingInstance ti;
        const std::string id = j["id"].get<std::string>();
        const QAInstance* found = nullptr;
        for (const auto& q : corpus)
            if (q.id == id) {
                found = &q;
                break;
            }
        if (!found) throw IdMismatch(where + ": id '" + id + "' not in the corpus");
        ti.instance = *found;
        for (const auto& c : j["candidates"]) {
            if (!c.is_string()) throw SchemaError(where + ": candidates must be strings");
            ti.candidates.push_back(c.get<std::string>());
        }
        if (ti.candidates.empty()) throw SchemaError(where + ": empty candidate list");
        out.push_back(std::move(ti));
    }
    if (out.empty()) throw SchemaError(candidates_path + ": no candidate records");
    return out;
}

} // namespace tracekit
