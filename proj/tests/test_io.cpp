#include "doctest.h"

#include "carl/errors.hpp"
#include "carl/io.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <cstdio>
#include <filesystem>

using namespace carl;
using nlohmann::json;

namespace {

json gtw_document() {
  return json::parse(R"({
    "states": ["s0", "s1", "s2", "g"],
    "initial": "s0",
    "goals": ["g"],
    "n": 2,
    "bounds": [15, 10],
    "actions": [
      {"name": "run", "source": "s0", "cost": [1, 0, 20], "outcomes": [{"target": "g", "prob": 1.0}]},
      {"name": "taxi", "source": "s0", "cost": [1, 30, 0], "outcomes": [{"target": "g", "prob": 1.0}]},
      {"name": "walk", "source": "s0", "cost": [1, 0, 1],
       "outcomes": [{"target": "s1", "prob": 0.5}, {"target": "s2", "prob": 0.5}]},
      {"name": "train", "source": "s1", "cost": [1, 20, 0], "outcomes": [{"target": "g", "prob": 1.0}]},
      {"name": "walk_to_work", "source": "s2", "cost": [3, 0, 6], "outcomes": [{"target": "g", "prob": 1.0}]}
    ]
  })");
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("the getting to work document loads") {
    const CsspModel m = parse_model(gtw_document().dump());
    CHECK(m.num_states() == 4);
    CHECK(m.num_actions() == 5);
    CHECK(evaluate_policy(m, fixture::policy(m, {{"s0", {{"run", 0.5}, {"taxi", 0.5}}}}))
              .isApprox(Eigen::Vector3d(1, 15, 10)));
  }

  TEST_CASE("models survive a save and load round trip") {
    const auto path = std::filesystem::temp_directory_path() / "carl_io_roundtrip.json";
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const CsspModel m = generate(oracle::random_spec(seed));
      save_model(m, path.string());
      const CsspModel back = load_model(path.string());
      CHECK(model_to_json(back) == model_to_json(m));
      CHECK(back.bounds() == m.bounds());
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("schema violations are malformed models") {
    CHECK_THROWS_AS(parse_model("not json"), MalformedModel);
    CHECK_THROWS_AS(parse_model("[]"), MalformedModel);
    json doc = gtw_document();
    doc.erase("initial");
    CHECK_THROWS_AS(parse_model(doc.dump()), MalformedModel);
    doc = gtw_document();
    doc["actions"][0]["cost"] = "cheap";
    CHECK_THROWS_AS(parse_model(doc.dump()), MalformedModel);
    doc = gtw_document();
    doc["actions"][0]["outcomes"][0].erase("prob");
    CHECK_THROWS_AS(parse_model(doc.dump()), MalformedModel);
  }

  TEST_CASE("semantic errors surface from model validation") {
    json doc = gtw_document();
    doc["actions"][2]["outcomes"][0]["prob"] = 0.4;
    CHECK_THROWS_AS(parse_model(doc.dump()), BadDistribution);
    doc = gtw_document();
    doc["actions"][1]["cost"][0] = 0;
    CHECK_THROWS_AS(parse_model(doc.dump()), NonpositivePrimaryCost);
  }

  TEST_CASE("policies round trip through JSON") {
    const CsspModel m = fixture::getting_to_work();
    const auto pi = fixture::policy(m, {{"s0", {{"run", 0.5}, {"taxi", 0.5}}}});
    const json doc = policy_to_json(m, pi);
    CHECK(doc == json::parse(R"({"s0": [["run", 0.5], ["taxi", 0.5]]})"));
    const StochasticPolicy back = policy_from_json(m, doc);
    CHECK(back.prob(0, fixture::action(m, "run")) == 0.5);
    CHECK(back.prob(0, fixture::action(m, "taxi")) == 0.5);
    CHECK_FALSE(back.defined(fixture::state(m, "s1")));
  }

  TEST_CASE("bad policy documents are rejected") {
    const CsspModel m = fixture::getting_to_work();
    CHECK_THROWS_AS(policy_from_json(m, json::parse(R"({"s9": [["run", 1]]})")), MalformedModel);
    CHECK_THROWS_AS(policy_from_json(m, json::parse(R"({"s0": [["fly", 1]]})")), MalformedModel);
    CHECK_THROWS_AS(policy_from_json(m, json::parse(R"({"s0": [["train", 1]]})")), MalformedModel);
    CHECK_THROWS_AS(policy_from_json(m, json::parse(R"({"s0": [["run"]]})")), MalformedModel);
    CHECK_THROWS_AS(policy_from_json(m, json::parse(R"({"s0": [["run", 0.3]]})")), BadDistribution);
  }

  TEST_CASE("a missing file is an error") {
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
  }
}
