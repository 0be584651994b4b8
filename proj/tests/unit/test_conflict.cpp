#include <doctest.h>

#include "cupmem/conflict.hpp"
#include "cupmem/errors.hpp"
#include "support/fixtures.hpp"

using namespace cupmem;
namespace fx = cupmem::testing;

namespace {

Observation obs(const std::string& id, Instant t, const SlotRef& slot, const std::string& value) {
    Observation o;
    o.session_id = id;
    o.timestamp = t;
    o.assertions.push_back(make_proposition(slot, value));
    o.flags.mentions.insert(slot);
    return o;
}

Proposition prop(const SlotRef& slot, const std::string& value) {
    return make_proposition(slot, value);
}

}  // namespace

TEST_SUITE_BEGIN("conflict");

TEST_CASE("belief incompatibility fires on a SINGLE-slot value change") {
    auto fired = belief_incompatible(prop(fx::kCity, "seattle"),
                                     {prop(fx::kCity, "portland")},
                                     fx::micro_knowledge(), *fx::micro_schema());
    REQUIRE(fired.has_value());
    CHECK(fired->kind == TriggerKind::SingleSlotConflict);
    CHECK(!fired->rule_id.has_value());
}

TEST_CASE("belief incompatibility fires through a dependency rule") {
    auto fired = belief_incompatible(prop(fx::kCommute, "bicycle"),
                                     {prop(fx::kLimitation, "leg_fracture")},
                                     fx::micro_knowledge(), *fx::micro_schema());
    REQUIRE(fired.has_value());
    CHECK(fired->kind == TriggerKind::DependencyRule);
    CHECK(fired->rule_id == "dep_leg_commute");
}

TEST_CASE("incompatibility respects rule patterns and slot identity") {
    // Unrelated ruleless slots never conflict.
    CHECK(!belief_incompatible(prop(fx::kDiet, "vegan"), {prop(fx::kCity, "portland")},
                               fx::micro_knowledge(), *fx::micro_schema()));
    // Pattern mismatch on the source side.
    CHECK(!belief_incompatible(prop(fx::kCommute, "bicycle"),
                               {prop(fx::kLimitation, "pollen_allergy")},
                               fx::micro_knowledge(), *fx::micro_schema()));
    // Pattern mismatch on the target side.
    CHECK(!belief_incompatible(prop(fx::kCommute, "car"),
                               {prop(fx::kLimitation, "leg_fracture")},
                               fx::micro_knowledge(), *fx::micro_schema()));
    // Same value is never self-incompatible.
    CHECK(!belief_incompatible(prop(fx::kCity, "seattle"), {prop(fx::kCity, "seattle")},
                               fx::micro_knowledge(), *fx::micro_schema()));
    // Incompat rule on a MULTI slot, both orders.
    CHECK(belief_incompatible(prop(fx::kDiet, "vegan"), {prop(fx::kDiet, "meat_heavy")},
                              fx::micro_knowledge(), *fx::micro_schema())
              ->kind == TriggerKind::IncompatRule);
    CHECK(belief_incompatible(prop(fx::kDiet, "meat_heavy"), {prop(fx::kDiet, "vegan")},
                              fx::micro_knowledge(), *fx::micro_schema())
              ->kind == TriggerKind::IncompatRule);
}

TEST_CASE("explicit invalidation is surface-level only") {
    const Proposition bicycle = prop(fx::kCommute, "bicycle");

    Observation negating;
    negating.session_id = "neg";
    negating.timestamp = 10;
    negating.flags.explicit_negation_of.push_back(bicycle);
    std::vector<Observation> seg{negating};
    CHECK(explicitly_invalidated(seg, bicycle));

    CHECK(!explicitly_invalidated({}, bicycle));

    // Indirect implication does not qualify: an injury update is implicit.
    std::vector<Observation> implicit_only{obs("n", 10, fx::kLimitation, "leg_fracture")};
    CHECK(!explicitly_invalidated(implicit_only, bicycle));

    // A DENY assertion is a direct correction.
    Observation denying;
    denying.session_id = "deny";
    denying.timestamp = 11;
    denying.assertions.push_back(Proposition{fx::kCommute, "bicycle", Polarity::Deny});
    std::vector<Observation> deny_seg{denying};
    CHECK(explicitly_invalidated(deny_seg, bicycle));
}

TEST_CASE("classification: co-referential pair is TYPE_I") {
    std::vector<Observation> h{obs("o", 0, fx::kCity, "seattle"),
                               obs("n", 100, fx::kCity, "portland")};
    ConflictWitness w = classify_conflict(h, 0, 1, fx::micro_knowledge(), *fx::micro_schema());
    CHECK(w.kind == ConflictType::TypeI);
    CHECK(w.target_slot == fx::kCity);
    CHECK(!w.upstream_slot.has_value());
}

TEST_CASE("classification: propagated pair is TYPE_II with upstream slot") {
    std::vector<Observation> h{obs("o", 0, fx::kCommute, "bicycle"),
                               obs("n", 100, fx::kLimitation, "leg_fracture")};
    ConflictWitness w = classify_conflict(h, 0, 1, fx::micro_knowledge(), *fx::micro_schema());
    CHECK(w.kind == ConflictType::TypeII);
    CHECK(w.target_slot == fx::kCommute);
    REQUIRE(w.upstream_slot.has_value());
    CHECK(*w.upstream_slot == fx::kLimitation);
    CHECK(w.rule_id == "dep_leg_commute");
}

TEST_CASE("an intermediate explicit negation screens the conflict to NONE") {
    std::vector<Observation> h{obs("o", 0, fx::kCommute, "bicycle"),
                               obs("mid", 50, fx::kCondition, "fine"),
                               obs("n", 100, fx::kLimitation, "leg_fracture")};
    h[1].flags.explicit_negation_of.push_back(prop(fx::kCommute, "bicycle"));
    ConflictWitness w = classify_conflict(h, 0, 2, fx::micro_knowledge(), *fx::micro_schema());
    CHECK(w.kind == ConflictType::None);

    // Without the flag the same pair is a conflict.
    h[1].flags.explicit_negation_of.clear();
    CHECK(classify_conflict(h, 0, 2, fx::micro_knowledge(), *fx::micro_schema()).kind ==
          ConflictType::TypeII);
}

TEST_CASE("same-slot evidence wins when both conditions fire") {
    // The new observation both replaces the commute mode directly and
    // carries an injury whose rule would invalidate it: TYPE_I wins.
    Observation o;
    o.session_id = "o";
    o.timestamp = 0;
    o.assertions.push_back(prop(fx::kCommute, "bicycle"));
    Observation n;
    n.session_id = "n";
    n.timestamp = 100;
    n.assertions.push_back(prop(fx::kLimitation, "leg_fracture"));
    n.assertions.push_back(prop(fx::kCommute, "car"));

    std::vector<Observation> h{o, n};
    ConflictWitness w = classify_conflict(h, 0, 1, fx::micro_knowledge(), *fx::micro_schema());
    CHECK(w.kind == ConflictType::TypeI);
    CHECK(!w.upstream_slot.has_value());
}

TEST_CASE("classification preconditions") {
    std::vector<Observation> h{obs("o", 0, fx::kCity, "seattle"),
                               obs("n", 100, fx::kCity, "portland")};
    CHECK_THROWS_AS(classify_conflict(h, 1, 1, fx::micro_knowledge(), *fx::micro_schema()),
                    IndexError);
    CHECK_THROWS_AS(classify_conflict(h, 1, 0, fx::micro_knowledge(), *fx::micro_schema()),
                    IndexError);
    CHECK_THROWS_AS(classify_conflict(h, 0, 2, fx::micro_knowledge(), *fx::micro_schema()),
                    IndexError);
}

TEST_CASE("brute-force scan enumerates ordered pairs deterministically") {
    SUBCASE("single observation yields nothing") {
        std::vector<Observation> h{obs("o", 0, fx::kCity, "seattle")};
        CHECK(brute_force_scan(h, fx::micro_knowledge(), *fx::micro_schema()).empty());
    }
    SUBCASE("mutually compatible observations yield nothing") {
        std::vector<Observation> h{obs("o", 0, fx::kCity, "seattle"),
                                   obs("n", 100, fx::kDiet, "vegan")};
        CHECK(brute_force_scan(h, fx::micro_knowledge(), *fx::micro_schema()).empty());
    }
    SUBCASE("one planted conflict yields exactly one witness") {
        std::vector<Observation> h{obs("d0", 0, fx::kDiet, "vegan"),
                                   obs("o", 10, fx::kCommute, "bicycle"),
                                   obs("n", 100, fx::kLimitation, "leg_fracture")};
        auto witnesses = brute_force_scan(h, fx::micro_knowledge(), *fx::micro_schema());
        REQUIRE(witnesses.size() == 1);
        CHECK(witnesses[0].kind == ConflictType::TypeII);
        CHECK(witnesses[0].old_index == 1);
        CHECK(witnesses[0].new_index == 2);
    }
}

TEST_SUITE_END();
