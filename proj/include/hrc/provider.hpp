#pragma once

#include "hrc/relevance.hpp"

#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

namespace hrc::relevance {

HRC_DEFINE_ERROR(ProviderError);

struct Query
{
    ActionHistory history;
    std::set<std::string> object_labels;
};

/// Something that turns an action history into a relevance prediction.
/// Implementations must be callable from a background thread.
class Provider
{
  public:
    virtual ~Provider() = default;
    virtual RelevanceResult predict(const Query& query) = 0;
    virtual std::string name() const = 0;
};

class MockProvider final : public Provider
{
  public:
    explicit MockProvider(RuleTable rules) : rules_(std::move(rules)) {}
    RelevanceResult predict(const Query& query) override;
    std::string name() const override { return "mock"; }

  private:
    RuleTable rules_;
};

struct HttpProviderConfig
{
    std::string base_url{"http://127.0.0.1:8080"};
    std::string path{"/v1/chat/completions"};
    std::string model{"gpt-4o-mini"};
    std::string api_key_env{"OPENAI_API_KEY"};
    double timeout_s{30.0};
    double temperature{0.0};
};

/// Chat-completion client: one user message carrying the prompt.
class HttpProvider final : public Provider
{
  public:
    explicit HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {}
    RelevanceResult predict(const Query& query) override;
    std::string name() const override { return "http"; }

    nlohmann::json request_body(const std::string& prompt) const;
    /// Text of the first choice in a chat-completion response body.
    static std::string extract_content(const std::string& body);

  private:
    HttpProviderConfig config_;
};

/// Runs a provider on a background thread. At most one request is in flight;
/// the result comes back as a message picked up by the caller's loop.
class AsyncRelevanceWorker
{
  public:
    struct Response
    {
        long issued_tick{0};
        std::optional<RelevanceResult> result;
        std::string error; // set when result is empty
        double wall_seconds{0.0};
    };

    explicit AsyncRelevanceWorker(std::shared_ptr<Provider> provider);
    ~AsyncRelevanceWorker();
    AsyncRelevanceWorker(const AsyncRelevanceWorker&) = delete;
    AsyncRelevanceWorker& operator=(const AsyncRelevanceWorker&) = delete;

    /// False (and nothing enqueued) if a request is already outstanding.
    bool submit(Query query, long issued_tick);
    bool outstanding() const;
    /// Non-blocking; empty while the provider is still working.
    std::optional<Response> try_take();
    /// Blocks until the outstanding request completes. Throws if none is outstanding.
    Response wait_take();

  private:
    void run(std::stop_token stop);

    std::shared_ptr<Provider> provider_;
    mutable std::mutex mutex_;
    std::condition_variable_any cv_;
    std::optional<std::pair<Query, long>> request_;
    std::optional<Response> response_;
    bool outstanding_{false};
    std::jthread thread_;
};

} // namespace hrc::relevance
