#include <doctest.h>

#include <algorithm>

#include "cupmem/errors.hpp"
#include "cupmem/write_pipeline.hpp"
#include "support/fixtures.hpp"

using namespace cupmem;
namespace fx = cupmem::testing;

namespace {

const Instant kT0 = parse_instant("2027-03-01 09:00");
const Instant kT1 = parse_instant("2027-06-10 18:30");
const Instant kT2 = parse_instant("2027-08-02 12:00");

bool has_tag(const std::vector<RevisionCandidate>& cands, ItemId id,
             RevisionCandidate::Tag tag) {
    for (const auto& c : cands)
        if (c.item == id) return c.tag == tag;
    return false;
}

// Throws on the nth decision; used to verify all-or-nothing sessions.
class FaultyAdjudicator : public Adjudicator {
public:
    explicit FaultyAdjudicator(int fail_at) : fail_at_(fail_at) {}
    AdjudicationDecision decide(const AdjudicationContext&) override {
        if (calls_++ == fail_at_) throw std::runtime_error("injected adjudicator fault");
        return {AdjudicationDecision::Verdict::Keep, std::nullopt, "ok"};
    }

private:
    int fail_at_;
    int calls_ = 0;
};

}  // namespace

TEST_SUITE_BEGIN("write_pipeline");

TEST_CASE("structured extraction copies tags and filters the rest") {
    StructuredExtractor extractor;

    SUBCASE("a tagged span becomes a DIRECT candidate with confidence 1") {
        Session s = fx::evidence_session("s1", kT0, fx::kLimitation, "leg_fracture",
                                         "i broke my leg yesterday");
        auto got = extractor.extract(s, *fx::micro_schema());
        REQUIRE(got.size() == 1);
        CHECK(got[0].slot == fx::kLimitation);
        CHECK(got[0].value.value == "leg_fracture");
        CHECK(got[0].origin == SourceKind::Direct);
        CHECK(got[0].confidence == 1.0);
        CHECK(got[0].timestamp == kT0);
        REQUIRE(got[0].evidence.size() == 1);
        CHECK(got[0].evidence[0].session_id == "s1");
        CHECK(got[0].evidence[0].text == "i broke my leg yesterday");
    }
    SUBCASE("a pure distractor yields nothing") {
        CHECK(extractor.extract(fx::chat_session("s2", kT0, "how about podcasts"),
                                *fx::micro_schema())
                  .empty());
    }
    SUBCASE("historical mentions are filtered") {
        Session s = fx::evidence_session("s3", kT0, fx::kCity, "seattle", "back when i lived there");
        s.turns[0].spans[0].historical = true;
        CHECK(extractor.extract(s, *fx::micro_schema()).empty());
    }
    SUBCASE("negation spans are not update candidates") {
        Session s = fx::negation_session("s4", kT0, fx::kCommute, "bicycle");
        CHECK(extractor.extract(s, *fx::micro_schema()).empty());
    }
    SUBCASE("undeclared slots are an extraction failure") {
        Session s = fx::evidence_session("s5", kT0, {"health", "nope"}, "x", "text");
        CHECK_THROWS_AS(extractor.extract(s, *fx::micro_schema()), ExtractorFailure);
    }
}

TEST_CASE("local update on SINGLE slots") {
    MemoryStore store(fx::micro_schema());

    LocalAction add = local_update(store, fx::candidate(fx::kCity, "seattle", kT0));
    CHECK(add.kind == LocalAction::Kind::Add);
    REQUIRE(add.inserted.has_value());

    SUBCASE("same value is a no-op") {
        LocalAction again = local_update(store, fx::candidate(fx::kCity, "seattle", kT1));
        CHECK(again.kind == LocalAction::Kind::NoOp);
        CHECK(store.items().size() == 1);
    }
    SUBCASE("a later different value replaces atomically") {
        LocalAction rep = local_update(store, fx::candidate(fx::kCity, "portland", kT1));
        CHECK(rep.kind == LocalAction::Kind::Replace);
        CHECK(rep.target == add.inserted);
        CHECK(store.require(*rep.target).status == ItemStatus::Stale);
        REQUIRE(rep.inserted.has_value());
        CHECK(store.require(*rep.inserted).proposition.value == "portland");
        CHECK(store.active_in_slot(fx::kCity).size() == 1);
    }
    SUBCASE("replacing with a non-later candidate violates temporal causality") {
        CHECK_THROWS_AS(local_update(store, fx::candidate(fx::kCity, "portland", kT0)),
                        TemporalCausalityViolation);
    }
}

TEST_CASE("local update on MULTI slots") {
    MemoryStore store(fx::micro_schema());
    LocalAction add = local_update(store, fx::candidate(fx::kLimitation, "leg", kT0));
    CHECK(add.kind == LocalAction::Kind::Add);

    SUBCASE("token-prefix refinement refines") {
        LocalAction ref = local_update(store, fx::candidate(fx::kLimitation, "leg_fracture", kT1));
        CHECK(ref.kind == LocalAction::Kind::Refine);
        CHECK(ref.target == add.inserted);
        CHECK(store.require(*ref.target).status == ItemStatus::Stale);
        CHECK(store.active_in_slot(fx::kLimitation).size() == 1);
    }
    SUBCASE("unrelated values coexist") {
        LocalAction other = local_update(store, fx::candidate(fx::kLimitation, "pollen_allergy", kT1));
        CHECK(other.kind == LocalAction::Kind::Add);
        CHECK(store.active_in_slot(fx::kLimitation).size() == 2);
    }
    SUBCASE("identical value is a no-op") {
        CHECK(local_update(store, fx::candidate(fx::kLimitation, "leg", kT1)).kind ==
              LocalAction::Kind::NoOp);
    }
}

TEST_CASE("refinement is a strict token-prefix relation") {
    CHECK(is_refinement("leg", "leg_fracture"));
    CHECK(is_refinement("leg_fracture", "leg_fracture_left"));
    CHECK(!is_refinement("leg", "leg"));
    CHECK(!is_refinement("leg_fracture", "leg"));
    CHECK(!is_refinement("legs", "leg_fracture"));
    CHECK(!is_refinement("arm", "leg_fracture"));
}

TEST_CASE("affected regions expand one hop over dependency edges") {
    auto schema = fx::default_schema();

    SUBCASE("a touched health domain exposes all routine slots") {
        std::vector<UpdateCandidate> updates{
            fx::candidate({"health_and_mobility", "functional_limitation"}, "leg_fracture", kT0)};
        auto region = affected_regions(*schema, updates);
        CHECK(region.count({"routine_and_transport", "current_commute_mode"}) == 1);
        CHECK(region.count({"routine_and_transport", "transport_access_condition"}) == 1);
        CHECK(region.count({"routine_and_transport", "routine_shift"}) == 1);
        // current_focus_and_goals is the second neighbor: 3 + 3 slots.
        CHECK(region.size() == 6);
    }
    SUBCASE("a domain without edges exposes nothing") {
        std::vector<UpdateCandidate> updates{
            fx::candidate({"identity_and_background", "core_identity_or_role"}, "parent", kT0)};
        CHECK(affected_regions(*schema, updates).empty());
    }
    SUBCASE("the transitive flag closes over multi-hop chains") {
        // weather -> location -> routine reaches routine only transitively.
        std::vector<UpdateCandidate> updates{
            fx::candidate({"weather_and_environment", "environmental_condition"},
                          "desert_heat_spell", kT0)};
        auto one_hop = affected_regions(*schema, updates, false);
        CHECK(one_hop.count({"routine_and_transport", "current_commute_mode"}) == 0);
        auto closed = affected_regions(*schema, updates, true);
        CHECK(closed.count({"routine_and_transport", "current_commute_mode"}) == 1);
    }
    SUBCASE("overlapping neighbors union without duplicates") {
        std::vector<UpdateCandidate> updates{
            fx::candidate({"health_and_mobility", "functional_limitation"}, "leg_fracture", kT0),
            fx::candidate({"work_and_schedule", "work_transition_or_change"}, "night_shift", kT0)};
        auto region = affected_regions(*schema, updates);
        // health -> routine + focus; work -> routine (overlap on routine).
        CHECK(region.count({"routine_and_transport", "current_commute_mode"}) == 1);
        std::size_t routine_slots = 0;
        for (const auto& s : region)
            if (s.domain == "routine_and_transport") ++routine_slots;
        CHECK(routine_slots == 3);
    }
}

TEST_CASE("revision candidates: direct, affected, global, never just-written") {
    MemoryStore store(fx::micro_schema());
    ItemId bicycle = store.insert_item([&] {
        MemoryItem m;
        m.slot = fx::kCommute;
        m.proposition = make_proposition(fx::kCommute, "bicycle");
        m.provenance = Provenance{"old", kT0, SourceKind::Direct};
        m.evidence.push_back(EvidenceSpan{"old", 0, "bike commute", fx::kCommute});
        return m;
    }());

    std::vector<UpdateCandidate> updates{fx::candidate(fx::kLimitation, "leg_fracture", kT1)};

    SUBCASE("an item across a dependency edge is AFFECTED") {
        auto cands = build_revision_candidates(store, updates, *fx::micro_schema(), 5);
        REQUIRE(cands.size() == 1);
        CHECK(has_tag(cands, bicycle, RevisionCandidate::Tag::Affected));
    }
    SUBCASE("an item in a touched domain is DIRECT and wins over AFFECTED") {
        ItemId condition = store.insert_item([&] {
            MemoryItem m;
            m.slot = fx::kCondition;
            m.proposition = make_proposition(fx::kCondition, "fit");
            m.provenance = Provenance{"old2", kT0, SourceKind::Direct};
            m.evidence.push_back(EvidenceSpan{"old2", 0, "feeling fit", fx::kCondition});
            return m;
        }());
        auto cands = build_revision_candidates(store, updates, *fx::micro_schema(), 5);
        CHECK(has_tag(cands, condition, RevisionCandidate::Tag::Direct));
        CHECK(has_tag(cands, bicycle, RevisionCandidate::Tag::Affected));
    }
    SUBCASE("global fallback is lexical, bounded and ACTIVE-only") {
        ItemId diet = store.insert_item([&] {
            MemoryItem m;
            m.slot = fx::kDiet;
            m.proposition = make_proposition(fx::kDiet, "vegan");
            m.provenance = Provenance{"old3", kT0, SourceKind::Direct};
            m.evidence.push_back(
                EvidenceSpan{"old3", 0, "tagged utterance about my leg brace", fx::kDiet});
            return m;
        }());
        auto cands = build_revision_candidates(store, updates, *fx::micro_schema(), 5);
        CHECK(has_tag(cands, diet, RevisionCandidate::Tag::Global));

        auto none = build_revision_candidates(store, updates, *fx::micro_schema(), 0);
        bool diet_in = false;
        for (const auto& c : none) diet_in |= c.item == diet;
        CHECK(!diet_in);
    }
    SUBCASE("just-written items are excluded") {
        ItemId injury = store.insert_item([&] {
            MemoryItem m;
            m.slot = fx::kLimitation;
            m.proposition = make_proposition(fx::kLimitation, "leg_fracture");
            m.provenance = Provenance{"new", kT1, SourceKind::Direct};
            m.evidence.push_back(EvidenceSpan{"new", 0, "broke my leg", fx::kLimitation});
            return m;
        }());
        auto cands = build_revision_candidates(store, updates, *fx::micro_schema(), 5, {injury});
        for (const auto& c : cands) CHECK(c.item != injury);
    }
    SUBCASE("no edges, no same-domain items, k=0 gives an empty set") {
        MemoryStore empty_store(fx::micro_schema());
        std::vector<UpdateCandidate> city_update{fx::candidate(fx::kCity, "denver", kT1)};
        CHECK(build_revision_candidates(empty_store, city_update, *fx::micro_schema(), 0).empty());
    }
}

TEST_CASE("revision proposals fire on incompatibility conditions only") {
    MemoryStore store(fx::micro_schema());
    ItemId bicycle = store.insert_item([&] {
        MemoryItem m;
        m.slot = fx::kCommute;
        m.proposition = make_proposition(fx::kCommute, "bicycle");
        m.provenance = Provenance{"old", kT0, SourceKind::Direct};
        m.evidence.push_back(EvidenceSpan{"old", 0, "bike commute", fx::kCommute});
        return m;
    }());

    SUBCASE("a dependency rule firing yields one proposal citing the rule") {
        std::vector<UpdateCandidate> updates{fx::candidate(fx::kLimitation, "leg_fracture", kT1)};
        auto proposals = propose_revisions(
            store, {{bicycle, RevisionCandidate::Tag::Affected}}, updates,
            fx::micro_knowledge(), *fx::micro_schema());
        REQUIRE(proposals.size() == 1);
        CHECK(proposals[0].old_item == bicycle);
        CHECK(proposals[0].trigger_kind == TriggerKind::DependencyRule);
        CHECK(proposals[0].triggering_rule == "dep_leg_commute");
        CHECK(proposals[0].confidence == 1.0);
        REQUIRE(proposals[0].supporting_updates.size() == 1);
    }
    SUBCASE("an untouched candidate yields no proposal") {
        std::vector<UpdateCandidate> updates{fx::candidate(fx::kCondition, "tired", kT1)};
        CHECK(propose_revisions(store, {{bicycle, RevisionCandidate::Tag::Direct}}, updates,
                                fx::micro_knowledge(), *fx::micro_schema())
                  .empty());
    }
    SUBCASE("a GLOBAL tag does not suppress a same-slot conflict") {
        std::vector<UpdateCandidate> updates{fx::candidate(fx::kCommute, "car", kT1)};
        auto proposals = propose_revisions(
            store, {{bicycle, RevisionCandidate::Tag::Global}}, updates,
            fx::micro_knowledge(), *fx::micro_schema());
        REQUIRE(proposals.size() == 1);
        CHECK(proposals[0].trigger_kind == TriggerKind::SingleSlotConflict);
    }
    SUBCASE("confidence is the minimum over supporting updates") {
        auto weak = fx::candidate(fx::kCommute, "car", kT1);
        weak.confidence = 0.25;
        auto strong = fx::candidate(fx::kCommute, "bus", kT1);
        strong.confidence = 0.9;
        auto proposals = propose_revisions(store, {{bicycle, RevisionCandidate::Tag::Direct}},
                                           {weak, strong}, fx::micro_knowledge(),
                                           *fx::micro_schema());
        REQUIRE(proposals.size() == 1);
        CHECK(proposals[0].confidence == doctest::Approx(0.25));
    }
}

TEST_CASE("ingest applies the decision table end to end") {
    fx::MicroEngine engine;

    SUBCASE("a co-referential relocation replaces the old default") {
        engine.ingest(fx::evidence_session("s-old", kT0, fx::kCity, "seattle",
                                           "i have been based in seattle for years"));
        IngestReport rep = engine.ingest(fx::evidence_session(
            "s-new", kT1, fx::kCity, "portland", "set up utilities at my new place in portland"));

        CHECK(rep.candidates_extracted == 1);
        REQUIRE(rep.local_actions.size() == 1);
        CHECK(rep.local_actions[0].kind == LocalAction::Kind::Replace);

        auto items = engine.store.retrieve_same_slot(fx::kCity);
        REQUIRE(items.size() == 2);
        CHECK(items[0]->proposition.value == "portland");
        CHECK(items[0]->status == ItemStatus::Active);
        CHECK(items[1]->proposition.value == "seattle");
        CHECK(items[1]->status == ItemStatus::Stale);
    }
    SUBCASE("a pure distractor leaves the store byte-identical") {
        engine.ingest(fx::evidence_session("s-old", kT0, fx::kCity, "seattle", "based in seattle"));
        const std::string before = engine.store.persist_string();
        IngestReport rep = engine.ingest(fx::chat_session("s-noise", kT1, "podcast tips please"));
        CHECK(rep.candidates_extracted == 0);
        CHECK(engine.store.persist_string() == before);
    }
    SUBCASE("a propagated conflict stales and blocks the dependent default") {
        engine.ingest(fx::evidence_session("s-old", kT0, fx::kCommute, "bicycle",
                                           "i bike to work daily"));
        IngestReport rep = engine.ingest(fx::evidence_session(
            "s-new", kT1, fx::kLimitation, "leg_fracture", "broke my leg, six weeks in a cast"));

        REQUIRE(rep.proposals.size() == 1);
        REQUIRE(rep.decisions.size() == 1);
        CHECK(rep.decisions[0].verdict == AdjudicationDecision::Verdict::Unknown);
        REQUIRE(rep.markers_set.size() == 1);
        CHECK(rep.markers_set[0] == fx::kCommute);

        auto commute = engine.store.retrieve_same_slot(fx::kCommute);
        REQUIRE(commute.size() == 1);
        CHECK(commute[0]->status == ItemStatus::Stale);
        CHECK(commute[0]->staled_by->rule_id == "dep_leg_commute");
        CHECK(engine.store.marker_for(fx::kCommute) != nullptr);
    }
    SUBCASE("decision application is sound: staled items are STALE, kept items untouched") {
        engine.ingest(fx::evidence_session("s-old", kT0, fx::kCommute, "bicycle", "bike to work"));
        engine.ingest(fx::evidence_session("s-d", kT0 + 60, fx::kDiet, "vegan", "vegan for years"));
        IngestReport rep = engine.ingest(fx::evidence_session(
            "s-new", kT1, fx::kLimitation, "leg_fracture", "broke my leg"));
        for (ItemId id : rep.items_staled)
            CHECK(engine.store.require(id).status == ItemStatus::Stale);
        // The diet item matched no condition and is untouched.
        auto diet = engine.store.retrieve_same_slot(fx::kDiet);
        REQUIRE(diet.size() == 1);
        CHECK(diet[0]->status == ItemStatus::Active);
    }
    SUBCASE("out-of-order sessions are rejected") {
        engine.ingest(fx::evidence_session("s-old", kT1, fx::kCity, "seattle", "seattle now"));
        CHECK_THROWS_AS(
            engine.ingest(fx::evidence_session("s-past", kT0, fx::kCity, "portland", "earlier")),
            OutOfOrderSession);
    }
    SUBCASE("a failing adjudication aborts the whole session") {
        engine.ingest(fx::evidence_session("s-old", kT0, fx::kCommute, "bicycle", "bike to work"));
        const std::string before = engine.store.persist_string();

        FaultyAdjudicator faulty(0);
        IngestConfig config = engine.config();
        config.adjudicator = &faulty;
        CHECK_THROWS(ingest_session(engine.store, fx::evidence_session("s-new", kT1, fx::kLimitation,
                                                                       "leg_fracture", "broke leg"),
                                    config));
        CHECK(engine.store.persist_string() == before);
    }
    SUBCASE("an explicit negation retires the belief outside adjudication") {
        engine.ingest(fx::evidence_session("s-old", kT0, fx::kCommute, "bicycle", "bike to work"));
        IngestReport rep = engine.ingest(fx::negation_session("s-neg", kT1, fx::kCommute, "bicycle"));
        REQUIRE(rep.explicit_retirements.size() == 1);
        CHECK(rep.proposals.empty());
        const MemoryItem& item = engine.store.require(rep.explicit_retirements[0]);
        CHECK(item.status == ItemStatus::Stale);
        CHECK(item.staled_by->rationale == "explicit negation");
        CHECK(!item.staled_by->rule_id.has_value());
    }
    SUBCASE("incompat rule on a MULTI slot stales the old value, keeps the new one") {
        engine.ingest(fx::evidence_session("s-old", kT0, fx::kDiet, "vegan", "vegan lifestyle"));
        IngestReport rep = engine.ingest(
            fx::evidence_session("s-new", kT1, fx::kDiet, "meat_heavy", "steak every night"));
        REQUIRE(rep.decisions.size() == 1);
        CHECK(rep.decisions[0].verdict == AdjudicationDecision::Verdict::Stale);
        auto diet = engine.store.retrieve_same_slot(fx::kDiet);
        REQUIRE(diet.size() == 2);
        CHECK(diet[0]->proposition.value == "meat_heavy");
        CHECK(diet[0]->status == ItemStatus::Active);
        CHECK(diet[1]->proposition.value == "vegan");
        CHECK(diet[1]->status == ItemStatus::Stale);
        // No marker: the slot still holds a usable ACTIVE value.
        CHECK(engine.store.marker_for(fx::kDiet) == nullptr);
    }
}

TEST_SUITE_END();
