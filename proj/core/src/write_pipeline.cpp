#include "cupmem/write_pipeline.hpp"

#include <algorithm>

#include "cupmem/errors.hpp"
#include "cupmem/text.hpp"

namespace cupmem {

std::vector<UpdateCandidate> StructuredExtractor::extract(const Session& session,
                                                          const StateSchema& schema) {
    std::vector<UpdateCandidate> out;
    for (std::size_t t = 0; t < session.turns.size(); ++t) {
        const Turn& turn = session.turns[t];
        for (const auto& span : turn.spans) {
            if (span.historical || span.negation) continue;   // never state updates
            if (!schema.has_slot(span.slot))
                throw ExtractorFailure("session '" + session.session_id +
                                       "' tags undeclared slot '" + span.slot.str() + "'");
            UpdateCandidate c;
            c.slot = span.slot;
            try {
                c.value = make_proposition(span.slot, span.value);
            } catch (const Error& e) {
                throw ExtractorFailure("session '" + session.session_id + "': " + e.what());
            }
            c.origin = SourceKind::Direct;
            c.confidence = 1.0;
            c.timestamp = session.timestamp;
            c.evidence.push_back(EvidenceSpan{session.session_id, static_cast<int>(t),
                                              turn.text, span.slot});
            out.push_back(std::move(c));
        }
    }
    return out;
}

bool is_refinement(const std::string& old_value, const std::string& new_value) {
    auto old_tokens = tokenize(old_value);
    auto new_tokens = tokenize(new_value);
    if (old_tokens.empty() || old_tokens.size() >= new_tokens.size()) return false;
    return std::equal(old_tokens.begin(), old_tokens.end(), new_tokens.begin());
}

namespace {

MemoryItem item_from_candidate(const UpdateCandidate& c) {
    if (c.evidence.empty()) throw ValidationError("update candidate carries no evidence");
    if (c.confidence < 0.0 || c.confidence > 1.0)
        throw ValidationError("update candidate confidence outside [0,1]");
    MemoryItem m;
    m.slot = c.slot;
    m.proposition = c.value;
    m.status = ItemStatus::Active;
    m.provenance = Provenance{c.evidence.front().session_id, c.timestamp, c.origin};
    m.evidence = c.evidence;
    return m;
}

StaleCause cause_from_candidate(const UpdateCandidate& c, std::string rationale,
                                std::optional<std::string> rule_id = std::nullopt) {
    if (c.evidence.empty()) throw ValidationError("update candidate carries no evidence");
    return StaleCause{c.evidence.front().session_id, c.timestamp, std::move(rationale),
                      std::move(rule_id)};
}

}  // namespace

LocalAction local_update(MemoryStore& store, const UpdateCandidate& candidate) {
    store.schema().require_slot(candidate.slot);
    auto actives = store.active_in_slot(candidate.slot);

    LocalAction action;
    action.slot = candidate.slot;

    if (store.schema().slot_cardinality(candidate.slot) == Cardinality::Single) {
        if (actives.empty()) {
            action.kind = LocalAction::Kind::Add;
            action.inserted = store.insert_item(item_from_candidate(candidate));
            return action;
        }
        const MemoryItem* old = actives.front();
        if (old->proposition == candidate.value) {
            action.kind = LocalAction::Kind::NoOp;
            return action;
        }
        store.mark_stale(old->id, cause_from_candidate(
                                      candidate, "replaced by '" + candidate.value.value + "'"));
        action.kind = LocalAction::Kind::Replace;
        action.target = old->id;
        action.inserted = store.insert_item(item_from_candidate(candidate));
        return action;
    }

    // MULTI slot
    for (const MemoryItem* m : actives) {
        if (m->proposition == candidate.value) {
            action.kind = LocalAction::Kind::NoOp;
            return action;
        }
    }
    const MemoryItem* refined = nullptr;
    for (const MemoryItem* m : actives) {
        if (!is_refinement(m->proposition.value, candidate.value.value)) continue;
        // Longest matching prefix wins; id ascending breaks ties.
        if (!refined ||
            m->proposition.value.size() > refined->proposition.value.size() ||
            (m->proposition.value.size() == refined->proposition.value.size() &&
             m->id < refined->id))
            refined = m;
    }
    if (refined) {
        store.mark_stale(refined->id,
                         cause_from_candidate(candidate, "refined to '" +
                                                             candidate.value.value + "'"));
        action.kind = LocalAction::Kind::Refine;
        action.target = refined->id;
        action.inserted = store.insert_item(item_from_candidate(candidate));
        return action;
    }
    action.kind = LocalAction::Kind::Add;
    action.inserted = store.insert_item(item_from_candidate(candidate));
    return action;
}

std::set<SlotRef> affected_regions(const StateSchema& schema,
                                   const std::vector<UpdateCandidate>& updates,
                                   bool transitive) {
    std::set<std::string> touched;
    for (const auto& u : updates) touched.insert(u.slot.domain);

    std::set<std::string> region;
    std::vector<std::string> frontier(touched.begin(), touched.end());
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& d : frontier) {
            for (const auto& n : schema.dependency_neighbors(d)) {
                if (region.insert(n).second && transitive && !touched.count(n)) next.push_back(n);
            }
        }
        if (!transitive) break;
        frontier = std::move(next);
    }

    std::set<SlotRef> out;
    for (const auto& d : region)
        for (const auto& s : schema.slots_of(d)) out.insert(SlotRef{d, s.name});
    return out;
}

std::vector<RevisionCandidate> build_revision_candidates(
    const MemoryStore& store, const std::vector<UpdateCandidate>& updates,
    const StateSchema& schema, int k, const std::set<ItemId>& exclude, bool transitive) {
    std::set<std::string> touched_domains;
    for (const auto& u : updates) {
        touched_domains.insert(u.slot.domain);
        for (const auto& ev : u.evidence)
            if (ev.tagged_slot) touched_domains.insert(ev.tagged_slot->domain);
    }
    const std::set<SlotRef> affected = affected_regions(schema, updates, transitive);

    std::vector<RevisionCandidate> out;
    std::set<ItemId> taken;

    for (const auto& item : store.items()) {
        if (item.status != ItemStatus::Active || exclude.count(item.id)) continue;
        if (touched_domains.count(item.slot.domain)) {
            out.push_back({item.id, RevisionCandidate::Tag::Direct});
            taken.insert(item.id);
        }
    }
    for (const auto& item : store.items()) {
        if (item.status != ItemStatus::Active || exclude.count(item.id) || taken.count(item.id))
            continue;
        if (affected.count(item.slot)) {
            out.push_back({item.id, RevisionCandidate::Tag::Affected});
            taken.insert(item.id);
        }
    }

    if (k > 0) {
        std::vector<std::string> terms;
        for (const auto& u : updates) {
            for (const auto& t : tokenize(u.value.value)) terms.push_back(t);
            for (const auto& ev : u.evidence)
                for (const auto& t : tokenize(ev.text)) terms.push_back(t);
        }
        auto ranked = store.retrieve_lexical(terms, store.items().size());
        int remaining = k;
        for (const auto& [item, score] : ranked) {
            if (remaining == 0) break;
            if (item->status != ItemStatus::Active || exclude.count(item->id) ||
                taken.count(item->id))
                continue;
            out.push_back({item->id, RevisionCandidate::Tag::Global});
            taken.insert(item->id);
            --remaining;
        }
    }
    return out;
}

std::vector<RevisionProposal> propose_revisions(const MemoryStore& store,
                                                const std::vector<RevisionCandidate>& candidates,
                                                const std::vector<UpdateCandidate>& updates,
                                                const KnowledgeRuleSet& knowledge,
                                                const StateSchema& schema) {
    std::vector<RevisionProposal> out;
    for (const auto& cand : candidates) {
        const MemoryItem& item = store.require(cand.item);
        if (item.status != ItemStatus::Active) continue;

        std::optional<FiringCondition> primary;
        std::vector<UpdateCandidate> supporting;
        for (const auto& u : updates) {
            // Only strictly later evidence may support a revision.
            if (u.timestamp <= item.provenance.timestamp) continue;
            auto fired = fires_against(item.proposition, u.value, knowledge, schema);
            if (!fired) continue;
            supporting.push_back(u);
            auto rank = [](TriggerKind kind) {
                return kind == TriggerKind::SingleSlotConflict ? 0
                       : kind == TriggerKind::IncompatRule     ? 1
                                                               : 2;
            };
            if (!primary || rank(fired->kind) < rank(primary->kind)) primary = fired;
        }
        if (!primary) continue;

        RevisionProposal p;
        p.old_item = item.id;
        p.supporting_updates = std::move(supporting);
        p.trigger_kind = primary->kind;
        p.triggering_rule = primary->rule_id;
        p.confidence = 1.0;
        for (const auto& u : p.supporting_updates) p.confidence = std::min(p.confidence, u.confidence);
        p.rationale = "'" + item.proposition.str() + "' incompatible with newer evidence (" +
                      std::string(to_string(primary->kind)) +
                      (primary->rule_id ? ", rule " + *primary->rule_id : "") + ")";
        out.push_back(std::move(p));
    }
    return out;
}

IngestReport ingest_session(MemoryStore& store, const Session& session,
                            const IngestConfig& config) {
    if (!config.schema || !config.knowledge || !config.extractor || !config.adjudicator)
        throw ValidationError("ingest config is incomplete");
    if (session.timestamp < store.clock())
        throw OutOfOrderSession("session '" + session.session_id + "' at " +
                                format_instant(session.timestamp) + " precedes store clock " +
                                format_instant(store.clock()));

    MemoryStore work = store;   // mutate a copy; commit on success
    IngestReport report;
    report.session_id = session.session_id;

    // Surface negations resolve beliefs explicitly, outside adjudication.
    for (const auto& turn : session.turns) {
        for (const auto& span : turn.spans) {
            if (!span.negation) continue;
            work.schema().require_slot(span.slot);
            const std::string value = normalize_value(span.value);
            std::vector<ItemId> hits;
            for (const MemoryItem* m : work.active_in_slot(span.slot))
                if (m->proposition.value == value) hits.push_back(m->id);
            for (ItemId id : hits) {
                work.mark_stale(id, StaleCause{session.session_id, session.timestamp,
                                               "explicit negation", std::nullopt});
                report.explicit_retirements.push_back(id);
            }
        }
    }

    auto candidates = config.extractor->extract(session, *config.schema);
    report.candidates_extracted = candidates.size();

    std::set<ItemId> just_written;
    for (const auto& c : candidates) {
        LocalAction action = local_update(work, c);
        if (action.inserted) just_written.insert(*action.inserted);
        if (action.target) report.items_staled.push_back(*action.target);
        report.local_actions.push_back(action);
    }

    if (!candidates.empty()) {
        auto cands = build_revision_candidates(work, candidates, *config.schema,
                                               config.global_k, just_written,
                                               config.transitive_affect);
        report.proposals = propose_revisions(work, cands, candidates, *config.knowledge,
                                             *config.schema);

        std::string session_text;
        for (const auto& turn : session.turns) {
            if (turn.speaker != "user") continue;
            if (!session_text.empty()) session_text.push_back('\n');
            session_text += turn.text;
        }

        std::vector<AdjudicationContext> contexts;
        contexts.reserve(report.proposals.size());
        for (const auto& p : report.proposals) {
            AdjudicationContext ctx;
            ctx.proposal = p;
            ctx.old_item = work.require(p.old_item);
            ctx.session_text = session_text;
            ctx.schema_version = config.schema->version();
            contexts.push_back(std::move(ctx));
        }
        report.decisions = config.adjudicator->decide_batch(contexts);
        if (report.decisions.size() != report.proposals.size())
            throw SystemFault("adjudicator returned " + std::to_string(report.decisions.size()) +
                              " decisions for " + std::to_string(report.proposals.size()) +
                              " proposals");

        for (std::size_t i = 0; i < report.proposals.size(); ++i) {
            const RevisionProposal& p = report.proposals[i];
            const AdjudicationDecision& d = report.decisions[i];
            const SlotRef slot = work.require(p.old_item).slot;
            const StaleCause cause{session.session_id, session.timestamp, d.rationale,
                                   p.triggering_rule};
            switch (d.verdict) {
                case AdjudicationDecision::Verdict::Keep:
                    break;
                case AdjudicationDecision::Verdict::Stale:
                    work.mark_stale(p.old_item, cause);
                    report.items_staled.push_back(p.old_item);
                    break;
                case AdjudicationDecision::Verdict::Replace: {
                    if (!d.replacement)
                        throw SystemFault("REPLACE decision without replacement proposition");
                    work.mark_stale(p.old_item, cause);
                    report.items_staled.push_back(p.old_item);
                    bool present = false;
                    for (const MemoryItem* m : work.active_in_slot(slot))
                        if (m->proposition == *d.replacement) present = true;
                    if (!present) {
                        MemoryItem m;
                        m.slot = slot;
                        m.proposition = *d.replacement;
                        m.status = ItemStatus::Active;
                        m.provenance = Provenance{session.session_id, session.timestamp,
                                                  SourceKind::Inferred};
                        for (const auto& u : p.supporting_updates)
                            m.evidence.insert(m.evidence.end(), u.evidence.begin(),
                                              u.evidence.end());
                        just_written.insert(work.insert_item(std::move(m)));
                    }
                    break;
                }
                case AdjudicationDecision::Verdict::Unknown:
                    work.mark_stale(p.old_item, cause);
                    report.items_staled.push_back(p.old_item);
                    // The marker only makes sense once the slot holds no
                    // usable ACTIVE value.
                    if (work.active_in_slot(slot).empty()) {
                        work.set_unknown_current(slot, session.timestamp, d.rationale);
                        report.markers_set.push_back(slot);
                    }
                    break;
            }
        }
    }

    store = std::move(work);
    return report;
}

}  // namespace cupmem
