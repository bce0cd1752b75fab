// Command-line front end: parse, score, evaluate, agree, grpo-sim.
//
// Exit codes: 0 success, 1 domain failure (invalid traces, bad data, failed
// checks), 2 environment failure (missing files, unwritable outputs).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tracekit/judge_client.hpp"
#include "tracekit/tracekit.hpp"

namespace {

using namespace tracekit;

// Writes either to stdout or to a file; failure to open or flush is an
// environment problem, reported as exit code 2 by the caller.
class OutputSink {
public:
    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::ios_base::failure("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
    void finish() {
        stream().flush();
        if (file_.is_open() && !file_) throw std::ios_base::failure("failed writing output file");
        if (!file_.is_open() && !std::cout) throw std::ios_base::failure("failed writing stdout");
    }

private:
    std::ofstream file_;
};

std::unique_ptr<Judge> make_judge(const std::string& kind, const std::string& endpoint,
                                  const std::string& model) {
    if (kind == "mock") return std::make_unique<MockJudge>();
    if (kind == "remote") {
        if (endpoint.empty()) throw Error("--judge remote needs --endpoint");
        JudgeConfig cfg;
        cfg.endpoint = endpoint;
        if (!model.empty()) cfg.model_name = model;
        return std::make_unique<RemoteJudge>(cfg);
    }
    throw Error("unknown judge '" + kind + "' (expected mock or remote)");
}

struct ParseArgs {
    std::string input, variant, out;
};

int run_parse(const ParseArgs& a) {
    const TraceVariant variant = variant_from_name(a.variant);
    const auto records = load_trace_records(a.input);
    OutputSink sink(a.out);
    bool any_invalid = false;
    for (const auto& r : records) {
        const FormatReport report = validate_format(r.trace, variant);
        if (!report.valid) any_invalid = true;
        sink.stream() << format_report_record(r.id, report).dump() << "\n";
    }
    sink.finish();
    return any_invalid ? 1 : 0;
}

struct ScoreArgs {
    std::string corpus, traces, variant, judge = "mock", endpoint, model, weights, aggregation,
                out;
};

RewardWeights weights_from_args(const std::string& weights, const std::string& aggregation) {
    RewardWeights w;
    if (!weights.empty()) w = parse_weights(weights);
    if (!aggregation.empty()) w.aggregation = aggregation_from_name(aggregation);
    return w;
}

int run_score(const ScoreArgs& a) {
    const TraceVariant variant = variant_from_name(a.variant);
    const RewardWeights weights = weights_from_args(a.weights, a.aggregation);
    const auto corpus = load_instances(a.corpus);
    std::map<std::string, const QAInstance*> by_id;
    for (const auto& q : corpus) by_id[q.id] = &q;
    const auto records = load_trace_records(a.traces);
    auto judge = make_judge(a.judge, a.endpoint, a.model);

    OutputSink sink(a.out);
    double sum_comp = 0, sum_fmt = 0, sum_gold = 0, sum_faith = 0, sum_ans = 0;
    std::size_t n = 0, n_gold = 0, n_faith = 0;
    for (const auto& r : records) {
        if (!r.id) throw IdMismatch("trace record without an id cannot be joined to the corpus");
        auto it = by_id.find(*r.id);
        if (it == by_id.end()) throw IdMismatch("trace id '" + *r.id + "' not in the corpus");
        const ScoredTrace scored = score_trace(r.trace, *it->second, variant, weights, *judge);
        sink.stream() << breakdown_record(*r.id, scored).dump() << "\n";
        const RewardBreakdown& b = scored.breakdown;
        sum_comp += b.composite;
        sum_fmt += b.fmt;
        if (b.gold) { sum_gold += *b.gold; ++n_gold; }
        if (b.faith) { sum_faith += *b.faith; ++n_faith; }
        sum_ans += b.ans;
        ++n;
    }
    sink.finish();
    if (n > 0) {
        std::ostringstream s;
        s << "scored " << n << " traces: composite " << sum_comp / n << ", fmt " << sum_fmt / n;
        if (n_gold) s << ", gold " << sum_gold / n_gold;
        if (n_faith) s << ", faith " << sum_faith / n_faith;
        s << ", ans " << sum_ans / n;
        std::cerr << s.str() << "\n";
    }
    return 0;
}

struct EvaluateArgs {
    std::string corpus, traces, variant, judge = "mock", endpoint, model, out, per_sample;
};

int run_evaluate(const EvaluateArgs& a) {
    const TraceVariant variant = variant_from_name(a.variant);
    const auto corpus = load_instances(a.corpus);
    std::map<std::string, const QAInstance*> by_id;
    for (const auto& q : corpus) by_id[q.id] = &q;
    const auto records = load_trace_records(a.traces);
    auto judge = make_judge(a.judge, a.endpoint, a.model);

    std::vector<EvalRecord> evals;
    for (const auto& r : records) {
        if (!r.id) throw IdMismatch("trace record without an id cannot be joined to the corpus");
        auto it = by_id.find(*r.id);
        if (it == by_id.end()) throw IdMismatch("trace id '" + *r.id + "' not in the corpus");
        EvalRecord e;
        e.instance = *it->second;
        const ScoredTrace scored = score_trace(r.trace, e.instance, variant, RewardWeights{}, *judge);
        e.trace = scored.trace;
        e.verdict = scored.verdict;
        evals.push_back(std::move(e));
    }
    const CorpusMetrics metrics = evaluate_corpus(evals);

    if (!a.per_sample.empty()) {
        std::ofstream csv(a.per_sample);
        if (!csv) throw std::ios_base::failure("cannot open per-sample file: " + a.per_sample);
        csv << "id,em,f1,r_faith\n";
        for (const auto& e : evals) {
            const double em = e.trace ? exact_match(e.trace->answer, e.instance.gold_answer) : 0;
            const double f1 = e.trace ? soft_f1(e.trace->answer, e.instance.gold_answer) : 0;
            csv << e.instance.id << "," << em << "," << f1 << ",";
            if (e.verdict) csv << e.verdict->r_faith;
            csv << "\n";
        }
        if (!csv) throw std::ios_base::failure("failed writing per-sample file");
    }

    OutputSink sink(a.out);
    sink.stream() << metrics_record(metrics).dump() << "\n";
    sink.finish();
    return 0;
}

struct AgreeArgs {
    std::string confusion, paired;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileMissing("cannot open CSV file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

bool numeric_cell(const std::string& s) {
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end && *end == '\0' && end != s.c_str();
}

int run_agree(const AgreeArgs& a) {
    if (a.confusion.empty() == a.paired.empty())
        throw Error("agree needs exactly one of --confusion or --paired");

    if (!a.confusion.empty()) {
        auto rows = read_csv(a.confusion);
        std::vector<std::pair<std::string, ConfusionCounts>> aspects;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& row = rows[i];
            if (i == 0 && row.size() >= 5 && !numeric_cell(row[1])) continue;  // header
            if (row.size() != 5 || !numeric_cell(row[1]) || !numeric_cell(row[2]) ||
                !numeric_cell(row[3]) || !numeric_cell(row[4]))
                throw Error("row " + std::to_string(i + 1) +
                            ": expected aspect,both_pass,both_fail,judge_pass_human_fail,judge_fail_human_pass");
            ConfusionCounts c{std::stol(row[1]), std::stol(row[2]), std::stol(row[3]),
                              std::stol(row[4])};
            aspects.emplace_back(row[0], c);
        }
        if (aspects.empty()) throw Error("confusion CSV has no data rows");
        double sum_agree = 0, sum_kappa = 0;
        std::printf("%-24s %10s %8s\n", "aspect", "agreement", "kappa");
        for (const auto& [name, c] : aspects) {
            const double agree = observed_agreement(c);
            const double kappa = cohen_kappa(c);
            sum_agree += agree;
            sum_kappa += kappa;
            std::printf("%-24s %9.2f%% %8.3f\n", name.c_str(), 100.0 * agree, kappa);
        }
        const double n = static_cast<double>(aspects.size());
        std::printf("%-24s %9.2f%% %8.3f\n", "average", 100.0 * sum_agree / n, sum_kappa / n);
        return 0;
    }

    auto rows = read_csv(a.paired);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        // accept "x,y" or "label,x,y"; a non-numeric first row is a header
        const std::size_t off = row.size() == 3 ? 1 : 0;
        if (row.size() != 2 && row.size() != 3)
            throw Error("row " + std::to_string(i + 1) + ": expected two value columns");
        if (!numeric_cell(row[off]) || !numeric_cell(row[off + 1])) {
            if (i == 0) continue;  // header
            throw Error("row " + std::to_string(i + 1) + ": non-numeric value");
        }
        x.push_back(std::stod(row[off]));
        y.push_back(std::stod(row[off + 1]));
    }
    const double mad = mean_abs_delta(x, y);
    const double agreement = ranking_agreement(x, y);
    const auto matches = static_cast<long>(agreement * static_cast<double>(x.size()) + 0.5);
    std::printf("n %zu\n", x.size());
    std::printf("pearson %.5f\n", pearson(x, y));
    std::printf("spearman %.5f\n", spearman(x, y));
    std::printf("mean_abs_delta %.5f\n", mad);
    std::printf("ranking_agreement %ld/%zu (%.3f)\n", matches, x.size(), agreement);
    return 0;
}

struct GrpoArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<double> learning_rate;
    std::optional<int> group_size;
};

int run_grpo(const GrpoArgs& a) {
    SimFileConfig cfg = load_sim_config(a.config);
    if (a.seed) cfg.sim.seed = *a.seed;
    if (a.steps) cfg.sim.steps = *a.steps;
    if (a.learning_rate) cfg.sim.learning_rate = *a.learning_rate;
    if (a.group_size) cfg.sim.group_size = *a.group_size;
    if (cfg.corpus_path.empty() || cfg.candidates_path.empty())
        throw Error("config must set corpus and candidates paths");
    if (cfg.judge != "mock")
        throw Error("the simulator runs with the mock judge only");

    const auto data = load_training_instances(cfg.corpus_path, cfg.candidates_path);
    MockJudge judge;
    const TrainingRun run =
        run_training(data, cfg.variant, cfg.weights, cfg.sim, judge, &std::cerr);

    OutputSink sink(a.out);
    write_history_csv(sink.stream(), run.history);
    sink.finish();

    for (std::size_t i = 0; i < run.policies.size(); ++i) {
        const auto probs = softmax(run.policies[i].logits);
        std::ostringstream s;
        s << "instance " << data[i].instance.id << " final probs:";
        for (double p : probs) s << " " << p;
        std::cerr << s.str() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured reasoning-trace toolkit"};
    app.require_subcommand(1);

    ParseArgs parse_args;
    auto* cmd_parse = app.add_subcommand("parse", "validate traces against a variant");
    cmd_parse->add_option("--input", parse_args.input, "traces JSONL file")->required();
    cmd_parse->add_option("--variant", parse_args.variant, "trace variant v1..v5")->required();
    cmd_parse->add_option("--out", parse_args.out, "output path (default stdout)");

    ScoreArgs score_args;
    auto* cmd_score = app.add_subcommand("score", "score traces against a corpus");
    cmd_score->add_option("--corpus", score_args.corpus, "corpus JSONL file")->required();
    cmd_score->add_option("--traces", score_args.traces, "traces JSONL file")->required();
    cmd_score->add_option("--variant", score_args.variant, "trace variant v1..v5")->required();
    cmd_score->add_option("--judge", score_args.judge, "mock or remote (default mock)");
    cmd_score->add_option("--endpoint", score_args.endpoint, "remote judge base URL");
    cmd_score->add_option("--model", score_args.model, "remote judge model name");
    cmd_score->add_option("--weights", score_args.weights, "e.g. fmt=1,gold=1,faith=1,ans=1");
    cmd_score->add_option("--aggregation", score_args.aggregation, "mean or sum");
    cmd_score->add_option("--out", score_args.out, "output path (default stdout)");

    EvaluateArgs eval_args;
    auto* cmd_eval = app.add_subcommand("evaluate", "corpus-level metrics for traces");
    cmd_eval->add_option("--corpus", eval_args.corpus, "corpus JSONL file")->required();
    cmd_eval->add_option("--traces", eval_args.traces, "traces JSONL file")->required();
    cmd_eval->add_option("--variant", eval_args.variant, "trace variant v1..v5")->required();
    cmd_eval->add_option("--judge", eval_args.judge, "mock or remote (default mock)");
    cmd_eval->add_option("--endpoint", eval_args.endpoint, "remote judge base URL");
    cmd_eval->add_option("--model", eval_args.model, "remote judge model name");
    cmd_eval->add_option("--per-sample", eval_args.per_sample, "write per-sample CSV here");
    cmd_eval->add_option("--out", eval_args.out, "output path (default stdout)");

    AgreeArgs agree_args;
    auto* cmd_agree = app.add_subcommand("agree", "agreement statistics from CSV tables");
    cmd_agree->add_option("--confusion", agree_args.confusion,
                          "CSV of aspect,both_pass,both_fail,judge_pass_human_fail,judge_fail_human_pass");
    cmd_agree->add_option("--paired", agree_args.paired, "CSV of paired score columns");

    GrpoArgs grpo_args;
    auto* cmd_grpo = app.add_subcommand("grpo-sim", "run the desk-scale training simulator");
    cmd_grpo->add_option("--config", grpo_args.config, "key=value config file")->required();
    cmd_grpo->add_option("--out", grpo_args.out, "history CSV path (default stdout)");
    cmd_grpo->add_option("--seed", grpo_args.seed, "override the config seed");
    cmd_grpo->add_option("--steps", grpo_args.steps, "override the config step count");
    cmd_grpo->add_option("--learning-rate", grpo_args.learning_rate, "override the learning rate");
    cmd_grpo->add_option("--group-size", grpo_args.group_size, "override the group size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(cmd_parse)) return run_parse(parse_args);
        if (app.got_subcommand(cmd_score)) return run_score(score_args);
        if (app.got_subcommand(cmd_eval)) return run_evaluate(eval_args);
        if (app.got_subcommand(cmd_agree)) return run_agree(agree_args);
        if (app.got_subcommand(cmd_grpo)) return run_grpo(grpo_args);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const FileMissing& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const tracekit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
