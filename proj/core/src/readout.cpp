#include "cupmem/readout.hpp"

#include <algorithm>
#include <set>

#include "cupmem/errors.hpp"

namespace cupmem {

QueryAnalysis analyze_query(const Probe& probe, const StateSchema& schema) {
    for (const auto& p : probe.presupposed) {
        if (!schema.has_slot(p.attribute))
            throw MalformedProbe("probe '" + probe.id + "' presupposes undeclared slot '" +
                                 p.attribute.str() + "'");
        if (p.value.empty())
            throw MalformedProbe("probe '" + probe.id + "' presupposes an empty value");
    }
    for (const auto& s : probe.basis_slots) {
        if (!schema.has_slot(s))
            throw MalformedProbe("probe '" + probe.id + "' names undeclared basis slot '" +
                                 s.str() + "'");
    }
    if (probe.dimension == ProbeDimension::PR && probe.presupposed.empty())
        throw MalformedProbe("PR probe '" + probe.id + "' presupposes nothing");
    if (probe.dimension == ProbeDimension::SR && probe.presupposed.empty())
        throw MalformedProbe("SR probe '" + probe.id + "' names no probed belief");
    if (probe.dimension == ProbeDimension::IPA) {
        if (probe.basis_slots.empty())
            throw MalformedProbe("IPA probe '" + probe.id + "' names no basis slots");
        if (!probe.presupposed.empty())
            throw MalformedProbe("IPA probe '" + probe.id + "' must not presuppose state");
    }

    QueryAnalysis a;
    a.intent = probe.intent;
    a.presupposed = probe.presupposed;
    a.basis_slots = probe.basis_slots;
    a.action = probe.action;
    a.dimension_hint = probe.dimension;
    return a;
}

std::vector<PremiseVerdict> verify_premises(const MemoryStore& store,
                                            const QueryAnalysis& analysis) {
    std::vector<PremiseVerdict> out;
    for (const auto& premise : analysis.presupposed) {
        PremiseVerdict v;
        v.premise = premise;

        const MemoryItem* active_hit = nullptr;
        const MemoryItem* stale_hit = nullptr;
        for (const auto& item : store.items()) {
            if (item.proposition != premise) continue;
            if (item.status == ItemStatus::Active) {
                active_hit = &item;
                break;
            }
            // Most recent STALE witness; earlier id breaks timestamp ties.
            if (!stale_hit ||
                item.provenance.timestamp > stale_hit->provenance.timestamp)
                stale_hit = &item;
        }

        if (active_hit) {
            v.verdict = PremiseStatus::Supported;
            v.witness = active_hit->id;
        } else if (stale_hit) {
            v.verdict = PremiseStatus::Outdated;
            v.witness = stale_hit->id;
        } else {
            v.verdict = PremiseStatus::Unresolved;
            v.marker_witness = store.marker_for(premise.attribute) != nullptr;
        }
        out.push_back(std::move(v));
    }
    return out;
}

CurrentBasis assemble_basis(const MemoryStore& store, const QueryAnalysis& analysis,
                            const std::vector<PremiseVerdict>& verdicts) {
    CurrentBasis basis;

    std::set<SlotRef> slots;
    for (const auto& s : analysis.basis_slots) slots.insert(s);
    for (const auto& p : analysis.presupposed) slots.insert(p.attribute);

    for (const auto& slot : slots)
        for (const MemoryItem* m : store.active_in_slot(slot))
            basis.active_grounding.push_back(*m);
    std::sort(basis.active_grounding.begin(), basis.active_grounding.end(),
              [](const MemoryItem& a, const MemoryItem& b) { return a.id < b.id; });

    for (const auto& v : verdicts) {
        if (v.verdict == PremiseStatus::Supported) continue;
        basis.blocked_premises.push_back(v);
        if (v.verdict == PremiseStatus::Outdated && v.witness)
            basis.historical_context.push_back(store.require(*v.witness));
    }

    for (const auto& slot : analysis.basis_slots) {
        const bool has_marker = store.marker_for(slot) != nullptr;
        const bool has_active = !store.active_in_slot(slot).empty();
        if (has_marker || !has_active) basis.unknown_slots.push_back(slot);
    }
    return basis;
}

GroundedAnswer answer_query(const MemoryStore& store, const Probe& probe,
                            const ReadoutConfig& config) {
    Probe effective = probe;
    if (config.dimension_override) effective.dimension = config.dimension_override;
    if (!effective.dimension)
        throw MalformedProbe("probe '" + probe.id + "' carries no dimension and none was given");

    QueryAnalysis analysis = analyze_query(effective, store.schema());
    std::vector<PremiseVerdict> verdicts = verify_premises(store, analysis);
    CurrentBasis basis = assemble_basis(store, analysis, verdicts);

    GroundedAnswer answer;
    answer.dimension = effective.dimension;
    answer.verdict_summary = verdicts;
    answer.basis = std::move(basis);

    switch (*effective.dimension) {
        case ProbeDimension::SR: {
            // The probed belief is the first presupposed proposition.
            switch (verdicts.front().verdict) {
                case PremiseStatus::Supported: answer.sr_state = SrState::StillValid; break;
                case PremiseStatus::Outdated: answer.sr_state = SrState::NoLongerValid; break;
                case PremiseStatus::Unresolved: answer.sr_state = SrState::Unresolved; break;
            }
            break;
        }
        case ProbeDimension::PR: {
            bool any_blocked = std::any_of(
                verdicts.begin(), verdicts.end(), [](const PremiseVerdict& v) {
                    return v.verdict != PremiseStatus::Supported;
                });
            answer.pr_state = any_blocked ? PrState::PremiseRejected : PrState::PremiseFollowed;
            break;
        }
        case ProbeDimension::IPA: {
            for (const auto& slot : analysis.basis_slots) {
                IpaChoice choice;
                choice.slot = slot;
                const bool unknown =
                    std::find(answer.basis.unknown_slots.begin(),
                              answer.basis.unknown_slots.end(),
                              slot) != answer.basis.unknown_slots.end();
                if (unknown) {
                    choice.unknown = true;
                } else {
                    for (const auto& item : answer.basis.active_grounding)
                        if (item.slot == slot) choice.chosen.push_back(item.proposition);
                }
                answer.ipa_choices.push_back(std::move(choice));
            }
            break;
        }
    }
    return answer;
}

const char* to_string(ProbeDimension d) {
    switch (d) {
        case ProbeDimension::SR: return "sr";
        case ProbeDimension::PR: return "pr";
        case ProbeDimension::IPA: return "ipa";
    }
    return "sr";
}

const char* to_string(PremiseStatus s) {
    switch (s) {
        case PremiseStatus::Supported: return "supported";
        case PremiseStatus::Outdated: return "outdated";
        case PremiseStatus::Unresolved: return "unresolved";
    }
    return "unresolved";
}

const char* to_string(SrState s) {
    switch (s) {
        case SrState::StillValid: return "still_valid";
        case SrState::NoLongerValid: return "no_longer_valid";
        case SrState::Unresolved: return "unresolved";
    }
    return "unresolved";
}

const char* to_string(PrState s) {
    return s == PrState::PremiseRejected ? "premise_rejected" : "premise_followed";
}

std::optional<ProbeDimension> parse_dimension(const std::string& text) {
    if (text == "sr") return ProbeDimension::SR;
    if (text == "pr") return ProbeDimension::PR;
    if (text == "ipa") return ProbeDimension::IPA;
    return std::nullopt;
}

}  // namespace cupmem
