#pragma once
// Shared test fixtures: schemas, knowledge sets, session builders and a
// small engine bundle wiring the pipeline together.

#include <memory>
#include <string>
#include <vector>

#include "cupmem/adjudicator.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/session.hpp"
#include "cupmem/store.hpp"
#include "cupmem/write_pipeline.hpp"

namespace cupmem::testing {

inline std::shared_ptr<const StateSchema> default_schema() {
    static const auto schema =
        std::make_shared<const StateSchema>(load_schema(default_schema_document()));
    return schema;
}

inline const KnowledgeRuleSet& default_knowledge() {
    static const KnowledgeRuleSet rules =
        load_knowledge(default_schema_document(), *default_schema());
    return rules;
}

// Compact universe used by oracle and pipeline tests.
inline const std::string& micro_schema_document() {
    static const std::string doc = R"JSON({
  "version": "micro-1",
  "domains": [
    {"name": "health", "slots": [
      {"name": "limitation", "cardinality": "multi"},
      {"name": "condition", "cardinality": "single"}
    ]},
    {"name": "routine", "slots": [
      {"name": "commute", "cardinality": "single"}
    ]},
    {"name": "location", "slots": [
      {"name": "city", "cardinality": "single"}
    ]},
    {"name": "prefs", "slots": [
      {"name": "diet", "cardinality": "multi"}
    ]}
  ],
  "dependency_edges": [
    {"source": "health", "target": "routine"}
  ],
  "knowledge_rules": [
    {
      "id": "dep_leg_commute",
      "kind": "dependency",
      "source": {"domain": "health", "slot": "limitation"},
      "source_pattern": "leg_*",
      "target": {"domain": "routine", "slot": "commute"},
      "target_pattern": "bicycle|walking",
      "source_examples": ["leg_fracture"],
      "target_examples": ["bicycle"]
    },
    {
      "id": "inc_diet",
      "kind": "incompat_same_slot",
      "slot": {"domain": "prefs", "slot": "diet"},
      "patterns": ["vegan|vegetarian", "meat_*"],
      "a_examples": ["vegan"],
      "b_examples": ["meat_heavy"]
    }
  ]
})JSON";
    return doc;
}

inline std::shared_ptr<const StateSchema> micro_schema() {
    static const auto schema =
        std::make_shared<const StateSchema>(load_schema(micro_schema_document()));
    return schema;
}

inline const KnowledgeRuleSet& micro_knowledge() {
    static const KnowledgeRuleSet rules =
        load_knowledge(micro_schema_document(), *micro_schema());
    return rules;
}

inline Session evidence_session(const std::string& id, Instant t, const SlotRef& slot,
                                const std::string& value, const std::string& text) {
    Session s;
    s.session_id = id;
    s.timestamp = t;
    s.kind = SessionKind::NewEvidence;
    s.turns.push_back(Turn{"user", text, {TaggedSpan{slot, value, false, false}}});
    return s;
}

inline Session negation_session(const std::string& id, Instant t, const SlotRef& slot,
                                const std::string& value) {
    Session s;
    s.session_id = id;
    s.timestamp = t;
    s.kind = SessionKind::Distractor;
    s.turns.push_back(Turn{"user", "actually, scrap that " + value + " note",
                           {TaggedSpan{slot, value, false, true}}});
    return s;
}

inline Session chat_session(const std::string& id, Instant t, const std::string& text) {
    Session s;
    s.session_id = id;
    s.timestamp = t;
    s.kind = SessionKind::Distractor;
    s.turns.push_back(Turn{"user", text, {}});
    return s;
}

inline UpdateCandidate candidate(const SlotRef& slot, const std::string& value, Instant t,
                                 const std::string& session_id = "sess",
                                 const std::string& text = "tagged utterance") {
    UpdateCandidate c;
    c.slot = slot;
    c.value = make_proposition(slot, value);
    c.timestamp = t;
    c.evidence.push_back(EvidenceSpan{session_id, 0, text, slot});
    return c;
}

// Engine bundle over the micro schema with a rule-based adjudicator.
struct MicroEngine {
    std::shared_ptr<const StateSchema> schema = micro_schema();
    const KnowledgeRuleSet& knowledge = micro_knowledge();
    StructuredExtractor extractor;
    RuleBasedAdjudicator adjudicator{knowledge, *schema};
    MemoryStore store{schema};

    IngestConfig config() {
        IngestConfig c;
        c.schema = schema.get();
        c.knowledge = &knowledge;
        c.extractor = &extractor;
        c.adjudicator = &adjudicator;
        return c;
    }

    IngestReport ingest(const Session& s) { return ingest_session(store, s, config()); }
};

inline const SlotRef kLimitation{"health", "limitation"};
inline const SlotRef kCondition{"health", "condition"};
inline const SlotRef kCommute{"routine", "commute"};
inline const SlotRef kCity{"location", "city"};
inline const SlotRef kDiet{"prefs", "diet"};

}  // namespace cupmem::testing
