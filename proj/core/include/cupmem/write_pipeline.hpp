#pragma once
// Write-side pipeline: extract update candidates from a session, perform
// same-slot local updates, build the direct/affected/global revision
// candidate set, generate proposals for incompatible old items, have the
// adjudicator decide them, and apply the decisions — all before query
// time. A session's mutations are applied all-or-nothing.

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cupmem/adjudicator.hpp"
#include "cupmem/revision.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/session.hpp"
#include "cupmem/store.hpp"

namespace cupmem {

struct IngestReport {
    std::string session_id;
    std::size_t candidates_extracted = 0;
    std::vector<LocalAction> local_actions;
    std::vector<RevisionProposal> proposals;
    std::vector<AdjudicationDecision> decisions;   // aligned with proposals
    std::vector<ItemId> items_staled;              // both local and adjudicated
    std::vector<SlotRef> markers_set;
    std::vector<ItemId> explicit_retirements;      // staled by surface negations
};

// Converts a session's tagged spans into update candidates.
class Extractor {
public:
    virtual ~Extractor() = default;
    virtual std::vector<UpdateCandidate> extract(const Session& session,
                                                 const StateSchema& schema) = 0;
};

// Copies structured annotations: non-historical assertion spans become
// DIRECT candidates with confidence 1.0; task wrappers (untagged turns),
// historical mentions and negation spans are filtered out.
class StructuredExtractor : public Extractor {
public:
    std::vector<UpdateCandidate> extract(const Session& session,
                                         const StateSchema& schema) override;
};

struct IngestConfig {
    const StateSchema* schema = nullptr;
    const KnowledgeRuleSet* knowledge = nullptr;
    Extractor* extractor = nullptr;
    Adjudicator* adjudicator = nullptr;
    int global_k = 5;                 // bound for the global fallback search
    bool transitive_affect = false;   // one hop by default
};

// Same-slot local update for one candidate. SINGLE slots: differing value
// replaces (old item staled and new inserted atomically), equal value is a
// no-op, empty slot adds. MULTI slots: equal value no-op, token-prefix
// refinement refines, otherwise adds.
LocalAction local_update(MemoryStore& store, const UpdateCandidate& candidate);

// Old value is a strict token-prefix of the new value.
bool is_refinement(const std::string& old_value, const std::string& new_value);

// All slots of every one-hop dependency-neighbor domain of every domain
// touched by the updates (transitive closure when configured).
std::set<SlotRef> affected_regions(const StateSchema& schema,
                                   const std::vector<UpdateCandidate>& updates,
                                   bool transitive = false);

// Bounded candidate set over ACTIVE items: DIRECT covers domains touched
// by updates or their evidence, AFFECTED covers dependency neighbors,
// GLOBAL is a top-k lexical fallback over the rest. Never contains the
// just-written items.
std::vector<RevisionCandidate> build_revision_candidates(
    const MemoryStore& store, const std::vector<UpdateCandidate>& updates,
    const StateSchema& schema, int k, const std::set<ItemId>& exclude = {},
    bool transitive = false);

// One proposal per candidate item that an update renders incompatible;
// items matching no condition yield no proposal.
std::vector<RevisionProposal> propose_revisions(const MemoryStore& store,
                                                const std::vector<RevisionCandidate>& candidates,
                                                const std::vector<UpdateCandidate>& updates,
                                                const KnowledgeRuleSet& knowledge,
                                                const StateSchema& schema);

// End-to-end ingestion of one session, applied atomically.
IngestReport ingest_session(MemoryStore& store, const Session& session,
                            const IngestConfig& config);

}  // namespace cupmem
