#pragma once
// Write-pipeline currency: update candidates extracted from sessions,
// same-slot local actions, cross-item revision proposals, and the
// adjudication decisions that resolve them.

#include <optional>
#include <string>
#include <vector>

#include "cupmem/conflict.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/store.hpp"
#include "cupmem/time.hpp"

namespace cupmem {

struct UpdateCandidate {
    SlotRef slot;
    Proposition value;
    SourceKind origin = SourceKind::Direct;
    double confidence = 1.0;                 // in [0,1]
    Instant timestamp = 0;
    std::vector<EvidenceSpan> evidence;      // non-empty
};

struct LocalAction {
    enum class Kind { Add, Refine, Replace, NoOp };

    Kind kind = Kind::NoOp;
    SlotRef slot;
    std::optional<ItemId> target;     // revised item, set for Refine/Replace
    std::optional<ItemId> inserted;   // newly written item, when any
};

struct RevisionProposal {
    ItemId old_item = 0;
    std::vector<UpdateCandidate> supporting_updates;   // the updates that fire
    std::string rationale;
    double confidence = 1.0;                           // min over supporting updates
    TriggerKind trigger_kind = TriggerKind::None;
    std::optional<std::string> triggering_rule;
};

struct AdjudicationDecision {
    enum class Verdict { Keep, Stale, Replace, Unknown };

    Verdict verdict = Verdict::Keep;
    std::optional<Proposition> replacement;   // required iff verdict == Replace
    std::string rationale;
};

// A revision candidate and how it was reached; precedence when an item is
// reachable several ways is Direct > Affected > Global.
struct RevisionCandidate {
    enum class Tag { Direct, Affected, Global };

    ItemId item = 0;
    Tag tag = Tag::Direct;
};

const char* to_string(LocalAction::Kind k);
const char* to_string(AdjudicationDecision::Verdict v);
const char* to_string(RevisionCandidate::Tag t);

}  // namespace cupmem
