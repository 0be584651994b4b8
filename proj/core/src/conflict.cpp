#include "cupmem/conflict.hpp"

#include <algorithm>

#include "cupmem/errors.hpp"
#include "cupmem/text.hpp"

namespace cupmem {

namespace {

int precedence(TriggerKind k) {
    switch (k) {
        case TriggerKind::SingleSlotConflict: return 0;
        case TriggerKind::IncompatRule: return 1;
        case TriggerKind::DependencyRule: return 2;
        case TriggerKind::None: break;
    }
    return 3;
}

}  // namespace

std::optional<FiringCondition> fires_against(const Proposition& old_belief,
                                             const Proposition& update,
                                             const KnowledgeRuleSet& knowledge,
                                             const StateSchema& schema) {
    if (old_belief.polarity != Polarity::Assert || update.polarity != Polarity::Assert)
        return std::nullopt;

    // Built-in default: distinct asserted values of one SINGLE slot are
    // mutually incompatible.
    if (update.attribute == old_belief.attribute && update.value != old_belief.value &&
        schema.slot_cardinality(old_belief.attribute) == Cardinality::Single)
        return FiringCondition{TriggerKind::SingleSlotConflict, std::nullopt};

    for (const auto& rule : knowledge.rules()) {
        if (rule.kind != KnowledgeRule::Kind::IncompatSameSlot) continue;
        if (rule.slot != old_belief.attribute || update.attribute != old_belief.attribute)
            continue;
        if (update.value == old_belief.value) continue;
        const bool ab = pattern_match(rule.pattern_a, update.value) &&
                        pattern_match(rule.pattern_b, old_belief.value);
        const bool ba = pattern_match(rule.pattern_b, update.value) &&
                        pattern_match(rule.pattern_a, old_belief.value);
        if (ab || ba) return FiringCondition{TriggerKind::IncompatRule, rule.id};
    }

    for (const auto& rule : knowledge.rules()) {
        if (rule.kind != KnowledgeRule::Kind::Dependency) continue;
        if (rule.source_slot != update.attribute || rule.target_slot != old_belief.attribute)
            continue;
        if (pattern_match(rule.source_pattern, update.value) &&
            pattern_match(rule.target_pattern, old_belief.value))
            return FiringCondition{TriggerKind::DependencyRule, rule.id};
    }
    return std::nullopt;
}

std::optional<FiringCondition> belief_incompatible(const Proposition& old_belief,
                                                   const std::vector<Proposition>& updates,
                                                   const KnowledgeRuleSet& knowledge,
                                                   const StateSchema& schema) {
    std::optional<FiringCondition> best;
    for (const auto& u : updates) {
        auto fired = fires_against(old_belief, u, knowledge, schema);
        if (!fired) continue;
        if (!best || precedence(fired->kind) < precedence(best->kind)) best = fired;
    }
    return best;
}

bool explicitly_invalidated(std::span<const Observation> segment, const Proposition& belief) {
    for (const auto& obs : segment) {
        for (const auto& negated : obs.flags.explicit_negation_of)
            if (negated.attribute == belief.attribute && negated.value == belief.value)
                return true;
        // A DENY assertion is a direct surface correction of the belief.
        for (const auto& a : obs.assertions)
            if (a.polarity == Polarity::Deny && a.attribute == belief.attribute &&
                a.value == belief.value)
                return true;
    }
    return false;
}

ConflictWitness classify_conflict(const std::vector<Observation>& history,
                                  std::size_t o_index, std::size_t n_index,
                                  const KnowledgeRuleSet& knowledge,
                                  const StateSchema& schema) {
    if (o_index >= history.size() || n_index >= history.size())
        throw IndexError("observation index out of range");
    if (o_index >= n_index)
        throw IndexError("old observation must strictly precede new observation");

    const Observation& old_obs = history[o_index];
    const Observation& new_obs = history[n_index];

    std::vector<Proposition> updates;
    for (const auto& a : new_obs.assertions)
        if (a.polarity == Polarity::Assert) updates.push_back(a);

    ConflictWitness best{};
    for (const auto& belief : old_obs.assertions) {
        if (belief.polarity != Polarity::Assert) continue;

        std::optional<FiringCondition> fired;
        std::size_t fired_update = 0;
        for (std::size_t u = 0; u < updates.size(); ++u) {
            auto f = fires_against(belief, updates[u], knowledge, schema);
            if (!f) continue;
            if (!fired || precedence(f->kind) < precedence(fired->kind)) {
                fired = f;
                fired_update = u;
            }
        }
        if (!fired) continue;

        // Axiom 2 screen over (m_o, m_n], including m_n itself.
        std::span<const Observation> between(history.data() + o_index + 1, n_index - o_index);
        if (explicitly_invalidated(between, belief)) continue;

        ConflictWitness w;
        w.old_index = o_index;
        w.new_index = n_index;
        w.target_slot = belief.attribute;
        w.rule_id = fired->rule_id;
        if (fired->kind == TriggerKind::DependencyRule &&
            updates[fired_update].attribute != belief.attribute) {
            w.kind = ConflictType::TypeII;
            w.upstream_slot = updates[fired_update].attribute;
        } else {
            w.kind = ConflictType::TypeI;
        }

        // Same-slot evidence is the more direct witness.
        if (best.kind == ConflictType::None ||
            (best.kind == ConflictType::TypeII && w.kind == ConflictType::TypeI))
            best = w;
        if (best.kind == ConflictType::TypeI) break;
    }
    return best;
}

std::vector<ConflictWitness> brute_force_scan(const std::vector<Observation>& history,
                                              const KnowledgeRuleSet& knowledge,
                                              const StateSchema& schema) {
    std::vector<ConflictWitness> out;
    for (std::size_t o = 0; o < history.size(); ++o) {
        for (std::size_t n = o + 1; n < history.size(); ++n) {
            ConflictWitness w = classify_conflict(history, o, n, knowledge, schema);
            if (w.kind != ConflictType::None) out.push_back(std::move(w));
        }
    }
    return out;
}

const char* to_string(ConflictType t) {
    switch (t) {
        case ConflictType::None: return "none";
        case ConflictType::TypeI: return "type_i";
        case ConflictType::TypeII: return "type_ii";
    }
    return "none";
}

const char* to_string(TriggerKind k) {
    switch (k) {
        case TriggerKind::None: return "none";
        case TriggerKind::SingleSlotConflict: return "single_slot_conflict";
        case TriggerKind::IncompatRule: return "incompat_rule";
        case TriggerKind::DependencyRule: return "dependency_rule";
    }
    return "none";
}

}  // namespace cupmem
