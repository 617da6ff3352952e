#include "doctest.h"

#include "hrc/relevance.hpp"

#include <random>

using namespace hrc::relevance;

TEST_CASE("truncate_plan examples")
{
    const std::vector<std::string> eight{"a", "b", "c", "d", "e", "f", "g", "h"};
    CHECK(truncate_plan(eight, 0.25) == std::vector<std::string>{"a", "b"});
    const std::vector<std::string> four{"a", "b", "c", "d"};
    CHECK(truncate_plan(four, 1.0) == four);
    const std::vector<std::string> five{"a", "b", "c", "d", "e"};
    CHECK(truncate_plan(five, 0.5) == std::vector<std::string>{"a", "b", "c"});
    // Exact products are not bumped up by floating-point noise.
    const std::vector<std::string> twelve(12, "x");
    CHECK(truncate_plan(twelve, 0.25).size() == 3);
    CHECK(truncate_plan(twelve, 0.75).size() == 9);
    // Tiny ratios still give at least one action.
    CHECK(truncate_plan(eight, 0.01).size() == 1);

    CHECK_THROWS_AS(truncate_plan(four, 0.0), InvalidRatio);
    CHECK_THROWS_AS(truncate_plan(four, 1.5), InvalidRatio);
    CHECK_THROWS_AS(truncate_plan(four, -0.2), InvalidRatio);
}

TEST_CASE("truncate_plan is monotone in the ratio")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    std::uniform_int_distribution<int> len(1, 40);
    for (int i = 0; i < 500; ++i)
    {
        std::vector<std::string> plan(static_cast<std::size_t>(len(rng)));
        for (std::size_t k = 0; k < plan.size(); ++k)
            plan[k] = "step " + std::to_string(k);
        double r1 = u(rng), r2 = u(rng);
        if (r1 > r2)
            std::swap(r1, r2);
        const auto a = truncate_plan(plan, r1), b = truncate_plan(plan, r2);
        REQUIRE(a.size() <= b.size());
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST_CASE("build_prompt fills the template")
{
    ActionHistory h{{"grabbed bowl"}, "kitchen"};
    const std::string p = build_prompt(h, {"milk", "bowl"});
    CHECK(p.find("In a kitchen with bowl, milk, a person has already grabbed bowl.") !=
          std::string::npos);
    CHECK(p.find("```relevance") != std::string::npos);
    CHECK(p.find("objective:") != std::string::npos);
    CHECK(p.find("relevant:") != std::string::npos);

    // Every label appears exactly once in the object list sentence.
    h.actions.push_back("grabbed milk");
    const std::string q = build_prompt(h, {"spoon", "milk", "bowl", "cereal"});
    CHECK(q.find("with bowl, cereal, milk, spoon,") != std::string::npos);
    CHECK(q.find("grabbed bowl, grabbed milk.") != std::string::npos);

    CHECK_THROWS(build_prompt(h, {}));
}

TEST_CASE("build_prompt is a pure function")
{
    const ActionHistory h{{"grabbed bowl", "grabbed cereal"}, "kitchen"};
    const std::set<std::string> objs{"spoon", "bowl", "milk", "cereal", "plate"};
    const std::string first = build_prompt(h, objs);
    for (int i = 0; i < 20; ++i)
        CHECK(build_prompt(h, objs) == first);
}

TEST_CASE("parse_response")
{
    const std::string good = "Sure, here it is.\n```relevance\nobjective: making cereals\n"
                             "relevant: cereal, bowl, milk, spoon\n```\nHope that helps.";
    const auto r = parse_response(good);
    CHECK(r.objective == "making cereals");
    CHECK(r.relevant_labels == std::set<std::string>{"bowl", "cereal", "milk", "spoon"});

    CHECK_THROWS_AS(parse_response("The person is probably making breakfast."), MalformedResponse);
    CHECK_THROWS_AS(parse_response("objective: tea\nrelevant: \n"), MalformedResponse);

    const auto dup = parse_response("objective: making tea\nrelevant: cup, Cup, kettle, cup\n");
    CHECK(dup.relevant_labels == std::set<std::string>{"cup", "kettle"});
}

TEST_CASE("mock_predict")
{
    RuleTable table;
    table.rules.push_back({{"grabbed bowl"}, "making cereals", {"cereal", "bowl", "milk", "spoon"}});
    table.rules.push_back({{"grabbed bowl", "grabbed egg"}, "making omelette", {"egg", "bowl", "pan"}});

    const auto r = mock_predict({{"grabbed bowl", "grabbed cereal"}, "kitchen"}, table);
    CHECK(r.objective == "making cereals");
    CHECK(r.relevant_labels == std::set<std::string>{"bowl", "cereal", "milk", "spoon"});

    const auto longer = mock_predict({{"grabbed bowl", "grabbed egg"}, "kitchen"}, table);
    CHECK(longer.objective == "making omelette");

    CHECK_THROWS_AS(mock_predict({{"grabbed bowl"}, "kitchen"}, RuleTable{}), NoRuleMatched);
    CHECK_THROWS_AS(mock_predict({{"grabbed cup"}, "kitchen"}, table), NoRuleMatched);
    CHECK_THROWS_AS(mock_predict({{}, "kitchen"}, table), EmptyHistory);

    // Same-length ties go to the first rule listed.
    table.rules.push_back({{"grabbed bowl"}, "making soup", {"bowl", "ladle"}});
    CHECK(mock_predict({{"grabbed bowl"}, "kitchen"}, table).objective == "making cereals");
}

TEST_CASE("score_objective")
{
    CHECK(score_objective("making cereals", "cereals"));
    CHECK_FALSE(score_objective("coffee", "tea"));
    CHECK(score_objective("scrambled egg", "scrambledegg"));
    CHECK(score_objective("Making Cereal.", "making cereals"));
    CHECK_FALSE(score_objective("", "tea"));
}

TEST_CASE("score_relevance")
{
    CHECK(score_relevance({"cereal", "bowl", "milk", "spoon"}, {"cereal", "bowl", "milk", "spoon"}) ==
          1.0);
    CHECK(score_relevance({"bowl"}, {"bowl", "milk"}) == 0.5);
    CHECK(score_relevance({}, {"bowl"}) == 0.0);
    CHECK_THROWS_AS(score_relevance({"bowl"}, {}), EmptyGroundTruth);

    std::mt19937_64 rng(2);
    const std::vector<std::string> pool{"bowl", "cup", "milk", "pan", "spoon", "tea", "egg"};
    for (int i = 0; i < 100; ++i)
    {
        std::set<std::string> s;
        for (const auto& l : pool)
            if (rng() % 2)
                s.insert(l);
        if (s.empty())
            s.insert("bowl");
        CHECK(score_relevance(s, s) == 1.0);
        CHECK(score_relevance({}, s) == 0.0);
    }
}

TEST_CASE("normalize_label")
{
    CHECK(normalize_label("  Making,  Cereals! ") == "making cereals");
    CHECK(normalize_label("ICE-cream") == "ice cream");
    CHECK(normalize_label("") == "");
}

TEST_CASE("rule tables and fixtures parse")
{
    const auto table = parse_rule_table(R"({"env": "kitchen", "rules": [
        {"prefix": ["take bowl"], "objective": "making cereals", "relevant": ["bowl", "milk"]}]})");
    CHECK(table.env_label == "kitchen");
    REQUIRE(table.rules.size() == 1);
    CHECK(table.rules[0].relevant == std::vector<std::string>{"bowl", "milk"});
    CHECK_THROWS_AS(parse_rule_table("{\"rules\": 3}"), FixtureError);
    CHECK_THROWS_AS(parse_rule_table("not json"), FixtureError);

    const auto recs = parse_fixtures("# comment\n\n"
                                     "gto=making cereals | gtp=take bowl;pour cereals | relevant=bowl,cereal\n");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].gto == "making cereals");
    CHECK(recs[0].gtp == std::vector<std::string>{"take bowl", "pour cereals"});
    CHECK(recs[0].gt_relevant == std::set<std::string>{"bowl", "cereal"});

    CHECK_THROWS_AS(parse_fixtures("gto=x | gtp=a\n"), FixtureError);
    CHECK_THROWS_AS(parse_fixtures("gto=x | what=a | relevant=b | gtp=c\n"), FixtureError);
    CHECK(parse_fixtures("# only comments\n").empty());
}
