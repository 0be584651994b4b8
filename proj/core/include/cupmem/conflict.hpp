#pragma once
// The formal implicit-conflict oracle over structured observation
// histories: belief incompatibility under the knowledge rules, the
// explicitness screen, TYPE_I / TYPE_II classification, and the
// brute-force pair scan used as ground truth by pipeline properties
// and simulator validation.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cupmem/schema.hpp"
#include "cupmem/time.hpp"

namespace cupmem {

struct ObservationFlags {
    std::set<SlotRef> mentions;                      // attributes explicitly mentioned
    std::vector<Proposition> explicit_negation_of;   // surface-level negations/corrections
};

struct Observation {
    std::string session_id;
    Instant timestamp = 0;
    std::vector<Proposition> assertions;
    ObservationFlags flags;
};

enum class ConflictType { None, TypeI, TypeII };

enum class TriggerKind { None, SingleSlotConflict, IncompatRule, DependencyRule };

struct FiringCondition {
    TriggerKind kind = TriggerKind::None;
    std::optional<std::string> rule_id;   // set for rule-based triggers
};

struct ConflictWitness {
    ConflictType kind = ConflictType::None;
    std::size_t old_index = 0;
    std::size_t new_index = 0;
    SlotRef target_slot;                     // attribute a whose belief is invalidated
    std::optional<SlotRef> upstream_slot;    // attribute b, TYPE_II only
    std::optional<std::string> rule_id;
};

// Does a single update imply the negation of the old belief? Checks, in
// precedence order: same SINGLE slot with a distinct asserted value, an
// incompat-same-slot rule, then dependency rules (rule file order).
std::optional<FiringCondition> fires_against(const Proposition& old_belief,
                                             const Proposition& update,
                                             const KnowledgeRuleSet& knowledge,
                                             const StateSchema& schema);

// First firing condition over the updates, by (condition precedence,
// update order, rule order). None when no update implies the negation.
std::optional<FiringCondition> belief_incompatible(const Proposition& old_belief,
                                                   const std::vector<Proposition>& updates,
                                                   const KnowledgeRuleSet& knowledge,
                                                   const StateSchema& schema);

// True iff some observation in the segment explicitly negates, corrects,
// or marks the belief obsolete. Indirect implication never qualifies.
bool explicitly_invalidated(std::span<const Observation> segment, const Proposition& belief);

// Applies both axioms to the ordered pair (history[o], history[n]) and
// classifies the structural relationship. Same-slot evidence wins over a
// dependency trigger when both fire.
ConflictWitness classify_conflict(const std::vector<Observation>& history,
                                  std::size_t o_index, std::size_t n_index,
                                  const KnowledgeRuleSet& knowledge,
                                  const StateSchema& schema);

// classify_conflict over all ordered pairs, o ascending then n ascending;
// only non-NONE witnesses are returned.
std::vector<ConflictWitness> brute_force_scan(const std::vector<Observation>& history,
                                              const KnowledgeRuleSet& knowledge,
                                              const StateSchema& schema);

const char* to_string(ConflictType t);
const char* to_string(TriggerKind k);

}  // namespace cupmem
