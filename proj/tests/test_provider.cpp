#include "doctest.h"

#include "hrc/provider.hpp"

#include "httplib.h"

#include <chrono>
#include <cstdlib>
#include <thread>

using namespace hrc::relevance;
using nlohmann::json;

namespace {

RuleTable cereal_rules()
{
    RuleTable t;
    t.rules.push_back({{"grabbed bowl"}, "making cereals", {"cereal", "bowl", "milk", "spoon"}});
    return t;
}

Query bowl_query()
{
    return {{{"grabbed bowl"}, "kitchen"}, {"bowl", "cereal", "milk", "spoon", "cup"}};
}

class SlowProvider final : public Provider
{
  public:
    RelevanceResult predict(const Query& q) override
    {
        std::this_thread::sleep_for(std::chrono::milliseconds(150));
        if (q.history.actions.front() == "fail")
            throw ProviderError("boom");
        return {"making tea", {"cup"}, 0, 0};
    }
    std::string name() const override { return "slow"; }
};

// Local chat-completion endpoint that records the request it receives.
struct FakeEndpoint
{
    httplib::Server server;
    std::thread thread;
    int port{0};
    std::string last_body;
    std::string last_auth;
    std::string reply;
    int status{200};

    FakeEndpoint()
    {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            res.status = status;
            res.set_content(reply, "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeEndpoint()
    {
        server.stop();
        thread.join();
    }

    HttpProviderConfig config() const
    {
        HttpProviderConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port);
        c.api_key_env = "HRC_TEST_TOKEN";
        c.timeout_s = 5.0;
        return c;
    }
};

std::string chat_reply(const std::string& content)
{
    return json{{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}}
        .dump();
}

} // namespace

TEST_CASE("mock provider wraps the rule table")
{
    MockProvider p(cereal_rules());
    const auto r = p.predict(bowl_query());
    CHECK(r.objective == "making cereals");
    CHECK(r.relevant_labels.size() == 4);
    CHECK(p.name() == "mock");
}

TEST_CASE("http provider request body and content extraction")
{
    HttpProvider p({});
    const auto body = p.request_body("hello");
    CHECK(body["model"] == "gpt-4o-mini");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["messages"].size() == 1);
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["messages"][0]["content"] == "hello");

    CHECK(HttpProvider::extract_content(chat_reply("abc")) == "abc");
    CHECK_THROWS_AS(HttpProvider::extract_content("{}"), ProviderError);
    CHECK_THROWS_AS(HttpProvider::extract_content("nope"), ProviderError);
}

TEST_CASE("http provider round trip against a local endpoint")
{
    FakeEndpoint ep;
    ep.reply = chat_reply("```relevance\nobjective: making cereals\nrelevant: cereal, bowl, milk, spoon\n```");
    ::setenv("HRC_TEST_TOKEN", "secret-token", 1);

    HttpProvider p(ep.config());
    const auto r = p.predict(bowl_query());
    CHECK(r.objective == "making cereals");
    CHECK(r.relevant_labels == std::set<std::string>{"bowl", "cereal", "milk", "spoon"});
    CHECK(ep.last_auth == "Bearer secret-token");
    const auto sent = json::parse(ep.last_body);
    CHECK(sent["messages"][0]["content"].get<std::string>().find("a person has already grabbed bowl.") !=
          std::string::npos);

    ep.status = 500;
    CHECK_THROWS_AS(p.predict(bowl_query()), ProviderError);

    ep.status = 200;
    ep.reply = chat_reply("I think they are cooking.");
    CHECK_THROWS_AS(p.predict(bowl_query()), MalformedResponse);

    Query empty = bowl_query();
    empty.history.actions.clear();
    CHECK_THROWS_AS(p.predict(empty), EmptyHistory);
    ::unsetenv("HRC_TEST_TOKEN");
}

TEST_CASE("http provider reports an unreachable endpoint")
{
    HttpProviderConfig c;
    c.base_url = "http://127.0.0.1:1";
    c.timeout_s = 1.0;
    HttpProvider p(c);
    CHECK_THROWS_AS(p.predict(bowl_query()), ProviderError);
}

TEST_CASE("async worker never blocks the caller and allows one request at a time")
{
    AsyncRelevanceWorker w(std::make_shared<SlowProvider>());
    CHECK_FALSE(w.outstanding());
    CHECK_FALSE(w.try_take().has_value());
    CHECK_THROWS(w.wait_take());

    const auto t0 = std::chrono::steady_clock::now();
    CHECK(w.submit(bowl_query(), 7));
    CHECK_FALSE(w.submit(bowl_query(), 8));
    CHECK(w.outstanding());
    CHECK_FALSE(w.try_take().has_value()); // still working
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::milliseconds(100));

    const auto r = w.wait_take();
    CHECK(r.issued_tick == 7);
    REQUIRE(r.result.has_value());
    CHECK(r.result->objective == "making tea");
    CHECK(r.wall_seconds > 0.1);
    CHECK_FALSE(w.outstanding());

    Query bad = bowl_query();
    bad.history.actions = {"fail"};
    CHECK(w.submit(bad, 9));
    std::optional<AsyncRelevanceWorker::Response> got;
    while (!(got = w.try_take()))
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    CHECK_FALSE(got->result.has_value());
    CHECK(got->error == "boom");
}

TEST_CASE("async worker shuts down with a request in flight")
{
    auto w = std::make_unique<AsyncRelevanceWorker>(std::make_shared<SlowProvider>());
    CHECK(w->submit(bowl_query(), 0));
    w.reset(); // must not hang or crash
    CHECK(true);
}
