#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tracekit/errors.hpp"
#include "tracekit/judge.hpp"
#include "tracekit/judge_prompt.hpp"

namespace tracekit {

struct JudgeConfig {
    std::string endpoint;  // base URL, e.g. "http://127.0.0.1:8311"
    std::string model_name = "judge";
    double temperature = 0.0;  // fixed; nonzero would make audits non-reproducible
    int max_retries = 2;       // extra attempts after the first
    std::chrono::seconds timeout{30};
    int max_in_flight = 8;  // cap on concurrent requests across threads
    std::string api_key_env = "TRACEKIT_JUDGE_API_KEY";
    std::string prompt_template = std::string(kJudgePromptTemplate);
};

// Parse the judge's reply: one `key=0|1` line per check. Lines must use the
// known keys and binary values; every requested dimension must be present.
inline std::map<AuditDimension, int> parse_judge_response(
    std::string_view body, const std::vector<AuditDimension>& requested) {
    std::map<AuditDimension, int> out;
    std::size_t start = 0;
    int line_no = 0;
    while (start <= body.size()) {
        std::size_t end = body.find('\n', start);
        if (end == std::string_view::npos) end = body.size();
        std::string_view line = detail::trim_view(body.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ResponseParseError("judge reply line " + std::to_string(line_no) +
                                     " is not key=value: '" + std::string(line) + "'");
        const std::string_view key = detail::trim_view(line.substr(0, eq));
        const std::string_view val = detail::trim_view(line.substr(eq + 1));
        AuditDimension dim;
        if (key == "plan_reason") dim = AuditDimension::PlanReason;
        else if (key == "citation_boundary") dim = AuditDimension::CitationBoundary;
        else if (key == "reason_answer") dim = AuditDimension::ReasonAnswer;
        else if (key == "grounding") dim = AuditDimension::Grounding;
        else
            throw ResponseParseError("judge reply has unknown check '" + std::string(key) + "'");
        if (val != "0" && val != "1")
            throw ResponseParseError("judge reply for '" + std::string(key) +
                                     "' must be 0 or 1, got '" + std::string(val) + "'");
        if (out.count(dim))
            throw ResponseParseError("judge reply repeats check '" + std::string(key) + "'");
        out[dim] = (val == "1") ? 1 : 0;
    }
    for (AuditDimension d : requested) {
        if (!out.count(d))
            throw ResponseParseError("judge reply is missing check '" +
                                     std::string(dimension_key(d)) + "'");
    }
    return out;
}

// Chat-completion client for a remote judge. One request carries all
// requested checks for a trace. Transport and parse failures are retried up
// to max_retries times; when every attempt fails the caller gets a single
// JudgeFailure. The API key, if any, comes from the environment only.
class RemoteJudge : public Judge {
public:
    explicit RemoteJudge(JudgeConfig cfg) : cfg_(std::move(cfg)), slots_(cfg_.max_in_flight) {
        if (cfg_.temperature != 0.0) throw Error("judge temperature is fixed at 0.0");
        if (cfg_.endpoint.empty()) throw Error("remote judge needs an endpoint");
        if (cfg_.max_retries < 0) throw Error("max_retries must be >= 0");
        if (cfg_.max_in_flight < 1) throw Error("max_in_flight must be >= 1");
    }

    std::map<AuditDimension, int> assess(const JudgeRequest& request) override {
        for (AuditDimension d : request.dimensions)
            if (d == AuditDimension::CitationBoundary)
                throw Error("the citation boundary is checked locally, not by the remote judge");

        const std::string prompt = render_judge_prompt(request, cfg_.prompt_template);
        nlohmann::json payload{
            {"model", cfg_.model_name},
            {"temperature", cfg_.temperature},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
        const std::string body = payload.dump();

        std::string last_error;
        const int attempts = cfg_.max_retries + 1;
        for (int attempt = 1; attempt <= attempts; ++attempt) {
            last_attempts_.store(attempt, std::memory_order_relaxed);
            try {
                return attempt_once(body, request.dimensions);
            } catch (const TransportError& e) {
                last_error = e.what();
            } catch (const ResponseParseError& e) {
                last_error = e.what();
            }
        }
        throw JudgeFailure("no usable judge verdict after " + std::to_string(attempts) +
                           " attempts: " + last_error);
    }

    // Attempts used by the most recent assess() call, including the
    // successful one.
    int last_attempts() const { return last_attempts_.load(std::memory_order_relaxed); }

private:
    std::map<AuditDimension, int> attempt_once(const std::string& body,
                                               const std::vector<AuditDimension>& requested) {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{slots_};

        httplib::Client client(cfg_.endpoint);
        client.set_connection_timeout(cfg_.timeout);
        client.set_read_timeout(cfg_.timeout);
        client.set_write_timeout(cfg_.timeout);

        httplib::Headers headers;
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);

        auto res = client.Post("/v1/chat/completions", headers, body, "application/json");
        if (!res)
            throw TransportError("judge endpoint unreachable: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw TransportError("judge endpoint returned HTTP " + std::to_string(res->status));

        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded()) throw ResponseParseError("judge response is not valid JSON");
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
            throw ResponseParseError("judge response has no choices");
        const auto& choice = j["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string())
            throw ResponseParseError("judge response has no message content");
        return parse_judge_response(choice["message"]["content"].get<std::string>(), requested);
    }

    JudgeConfig cfg_;
    std::counting_semaphore<> slots_;
    std::atomic<int> last_attempts_{0};
};

} // namespace tracekit
