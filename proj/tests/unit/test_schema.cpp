#include <doctest.h>

#include "cupmem/errors.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/text.hpp"
#include "support/fixtures.hpp"

using namespace cupmem;
namespace fx = cupmem::testing;

TEST_SUITE_BEGIN("schema");

TEST_CASE("default document loads the ten-domain schema") {
    auto schema = fx::default_schema();
    CHECK(schema->domains().size() == 10);
    CHECK(schema->slot_cardinality({"location_and_living", "current_base_location"}) ==
          Cardinality::Single);
    CHECK(schema->slot_cardinality({"health_and_mobility", "functional_limitation"}) ==
          Cardinality::Multi);
}

TEST_CASE("zero domains are rejected") {
    CHECK_THROWS_AS(load_schema(R"({"version": "v", "domains": []})"), ValidationError);
}

TEST_CASE("dangling dependency edge is rejected and named") {
    const std::string doc = R"({
      "version": "v",
      "domains": [{"name": "health_and_mobility", "slots": [{"name": "s", "cardinality": "multi"}]}],
      "dependency_edges": [{"source": "health_and_mobility", "target": "routine_and_transport"}]
    })";
    try {
        load_schema(doc);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("routine_and_transport") != std::string::npos);
    }
}

TEST_CASE("duplicate identifiers are rejected") {
    CHECK_THROWS_AS(load_schema(R"({"version": "v", "domains": [
        {"name": "d", "slots": []}, {"name": "d", "slots": []}]})"),
                    ValidationError);
    CHECK_THROWS_AS(load_schema(R"({"version": "v", "domains": [
        {"name": "d", "slots": [{"name": "s", "cardinality": "multi"},
                                 {"name": "s", "cardinality": "single"}]}]})"),
                    ValidationError);
}

TEST_CASE("unknown fields fail strict mode") {
    CHECK_THROWS_AS(load_schema(R"({"version": "v", "domains": [], "extra": 1})"),
                    ValidationError);
    CHECK_THROWS_AS(load_schema(R"({"version": "v", "domains": [
        {"name": "d", "slots": [], "typo_field": true}]})"),
                    ValidationError);
}

TEST_CASE("malformed document is a parse error") {
    CHECK_THROWS_AS(load_schema("{not json"), ParseError);
    CHECK_THROWS_AS(load_schema(R"({"version": "v", "domains": 3})"), ParseError);
}

TEST_CASE("dependency_neighbors follows declared edges") {
    auto schema = fx::default_schema();
    auto health = schema->dependency_neighbors("health_and_mobility");
    CHECK(std::find(health.begin(), health.end(), "routine_and_transport") != health.end());
    CHECK(std::find(health.begin(), health.end(), "current_focus_and_goals") != health.end());
    CHECK(health.size() == 2);

    CHECK(schema->dependency_neighbors("identity_and_background").empty());
    CHECK_THROWS_AS(schema->dependency_neighbors("nope"), UnknownDomain);

    // Neighbors are always declared domains.
    for (const auto& d : schema->domains())
        for (const auto& n : schema->dependency_neighbors(d)) CHECK(schema->has_domain(n));
}

TEST_CASE("slot_cardinality rejects undeclared slots") {
    auto schema = fx::default_schema();
    CHECK_THROWS_AS(schema->slot_cardinality({"health_and_mobility", "nope"}), UnknownSlot);
    CHECK_THROWS_AS(schema->slot_cardinality({"nope", "nope"}), UnknownSlot);
}

TEST_CASE("loading is deterministic") {
    StateSchema a = load_schema(default_schema_document());
    StateSchema b = load_schema(default_schema_document());
    CHECK(a.structural_hash() == b.structural_hash());
    CHECK(a.domains() == b.domains());
    CHECK(a.dependency_edges() == b.dependency_edges());
}

TEST_CASE("knowledge rules validate against the schema") {
    auto& rules = fx::default_knowledge();
    CHECK(rules.rules().size() == 7);
    CHECK(rules.find("dep_injury_commute") != nullptr);
    CHECK(rules.find("nope") == nullptr);

    // A dependency crossing domains without an edge is rejected.
    const std::string bad = R"({
      "version": "micro-1",
      "domains": [
        {"name": "a", "slots": [{"name": "x", "cardinality": "single"}]},
        {"name": "b", "slots": [{"name": "y", "cardinality": "single"}]}
      ],
      "knowledge_rules": [{
        "id": "r", "kind": "dependency",
        "source": {"domain": "a", "slot": "x"}, "source_pattern": "*",
        "target": {"domain": "b", "slot": "y"}, "target_pattern": "*"
      }]
    })";
    StateSchema schema = load_schema(bad);
    CHECK_THROWS_AS(load_knowledge(bad, schema), ValidationError);
}

TEST_CASE("identity-pair dependency rules need no edge") {
    const std::string doc = R"({
      "version": "v",
      "domains": [{"name": "a", "slots": [
        {"name": "x", "cardinality": "single"},
        {"name": "y", "cardinality": "single"}]}],
      "knowledge_rules": [{
        "id": "r", "kind": "dependency",
        "source": {"domain": "a", "slot": "x"}, "source_pattern": "*",
        "target": {"domain": "a", "slot": "y"}, "target_pattern": "*"
      }]
    })";
    StateSchema schema = load_schema(doc);
    CHECK(load_knowledge(doc, schema).rules().size() == 1);
}

TEST_CASE("patterns match globs with alternation, totally") {
    CHECK(pattern_match("leg_*", "leg_fracture"));
    CHECK(!pattern_match("leg_*", "knee_surgery"));
    CHECK(pattern_match("bicycle|walking", "walking"));
    CHECK(!pattern_match("bicycle|walking", "car"));
    CHECK(pattern_match("*", "anything_at_all"));
    CHECK(pattern_match("a*c", "abc"));
    CHECK(pattern_match("a*c", "ac"));
    CHECK(!pattern_match("a*c", "acb"));
    CHECK(!pattern_match("", "x"));
    CHECK(pattern_match("", ""));
}

TEST_CASE("value normalization") {
    CHECK(normalize_value("  Leg Fracture ") == "leg_fracture");
    CHECK(normalize_value("BICYCLE") == "bicycle");
    CHECK_THROWS_AS(normalize_value("   "), ValidationError);
    CHECK(make_proposition({"health", "limitation"}, " Leg  Fracture ").value == "leg_fracture");
}

TEST_SUITE_END();
