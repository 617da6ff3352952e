#include "hrc/provider.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "httplib.h"

namespace hrc::relevance {

RelevanceResult MockProvider::predict(const Query& query)
{
    return mock_predict(query.history, rules_);
}

nlohmann::json HttpProvider::request_body(const std::string& prompt) const
{
    return {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    };
}

std::string HttpProvider::extract_content(const std::string& body)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string())
            throw ProviderError("chat completion content is not a string");
        return content.get<std::string>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ProviderError(std::string("unexpected chat completion body: ") + e.what());
    }
}

RelevanceResult HttpProvider::predict(const Query& query)
{
    if (query.history.actions.empty())
        throw EmptyHistory("action history is empty");

    httplib::Client client(config_.base_url);
    if (!client.is_valid())
        throw ProviderError("invalid provider base URL '" + config_.base_url + "'");
    const auto secs = static_cast<time_t>(config_.timeout_s);
    const auto usecs = static_cast<time_t>((config_.timeout_s - std::floor(config_.timeout_s)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!config_.api_key_env.empty())
        if (const char* token = std::getenv(config_.api_key_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);

    const std::string body = request_body(build_prompt(query.history, query.object_labels)).dump();
    auto res = client.Post(config_.path, headers, body, "application/json");
    if (!res)
        throw ProviderError("request to " + config_.base_url + config_.path +
                            " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw ProviderError("provider returned HTTP " + std::to_string(res->status));
    return parse_response(extract_content(res->body));
}

AsyncRelevanceWorker::AsyncRelevanceWorker(std::shared_ptr<Provider> provider)
    : provider_(std::move(provider))
{
    thread_ = std::jthread([this](std::stop_token st) { run(st); });
}

AsyncRelevanceWorker::~AsyncRelevanceWorker()
{
    thread_.request_stop();
    cv_.notify_all();
}

bool AsyncRelevanceWorker::submit(Query query, long issued_tick)
{
    {
        std::lock_guard lock(mutex_);
        if (outstanding_)
            return false;
        outstanding_ = true;
        request_.emplace(std::move(query), issued_tick);
    }
    cv_.notify_all();
    return true;
}

bool AsyncRelevanceWorker::outstanding() const
{
    std::lock_guard lock(mutex_);
    return outstanding_;
}

std::optional<AsyncRelevanceWorker::Response> AsyncRelevanceWorker::try_take()
{
    std::lock_guard lock(mutex_);
    if (!response_)
        return std::nullopt;
    auto out = std::move(response_);
    response_.reset();
    outstanding_ = false;
    return out;
}

AsyncRelevanceWorker::Response AsyncRelevanceWorker::wait_take()
{
    std::unique_lock lock(mutex_);
    if (!outstanding_)
        throw Error("no relevance request outstanding");
    cv_.wait(lock, [&] { return response_.has_value(); });
    Response out = std::move(*response_);
    response_.reset();
    outstanding_ = false;
    return out;
}

void AsyncRelevanceWorker::run(std::stop_token stop)
{
    while (true)
    {
        std::pair<Query, long> job;
        {
            std::unique_lock lock(mutex_);
            if (!cv_.wait(lock, stop, [&] { return request_.has_value(); }))
                return;
            job = std::move(*request_);
            request_.reset();
        }

        Response r;
        r.issued_tick = job.second;
        const auto start = std::chrono::steady_clock::now();
        try
        {
            r.result = provider_->predict(job.first);
        }
        catch (const std::exception& e)
        {
            r.error = e.what();
        }
        r.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        {
            std::lock_guard lock(mutex_);
            response_ = std::move(r);
        }
        cv_.notify_all();
    }
}

} // namespace hrc::relevance
