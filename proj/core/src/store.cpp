#include "cupmem/store.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "cupmem/errors.hpp"
#include "cupmem/text.hpp"
#include "json_util.hpp"

namespace cupmem {

using detail::json;

MemoryStore::MemoryStore(std::shared_ptr<const StateSchema> schema)
    : schema_(std::move(schema)) {
    if (!schema_) throw ValidationError("store requires a schema");
}

const MemoryItem* MemoryStore::find(ItemId id) const {
    // Items are kept in id order; ids are dense but loads may start high.
    auto it = std::lower_bound(items_.begin(), items_.end(), id,
                               [](const MemoryItem& m, ItemId v) { return m.id < v; });
    if (it != items_.end() && it->id == id) return &*it;
    return nullptr;
}

const MemoryItem& MemoryStore::require(ItemId id) const {
    const MemoryItem* m = find(id);
    if (!m) throw UnknownItem("item " + std::to_string(id) + " not found");
    return *m;
}

const SlotMarker* MemoryStore::marker_for(const SlotRef& slot) const {
    for (const auto& m : markers_)
        if (m.slot == slot) return &m;
    return nullptr;
}

ItemId MemoryStore::insert_item(MemoryItem item) {
    schema_->require_slot(item.slot);
    if (item.status != ItemStatus::Active)
        throw ValidationError("insert_item requires an ACTIVE item");
    if (item.proposition.attribute != item.slot)
        throw ValidationError("item proposition attribute differs from item slot");
    if (item.staled_by)
        throw ValidationError("ACTIVE item carries staled_by");

    if (schema_->slot_cardinality(item.slot) == Cardinality::Single) {
        for (const auto& existing : items_)
            if (existing.slot == item.slot && existing.status == ItemStatus::Active)
                throw SingleSlotOccupied("slot '" + item.slot.str() +
                                         "' already holds ACTIVE item " +
                                         std::to_string(existing.id));
    }

    item.id = next_id_++;
    clock_ = std::max(clock_, item.provenance.timestamp);

    // An ACTIVE replacement clears any marker it supersedes.
    std::erase_if(markers_, [&](const SlotMarker& m) {
        return m.slot == item.slot && m.since <= item.provenance.timestamp;
    });

    items_.push_back(std::move(item));
    return items_.back().id;
}

const MemoryItem& MemoryStore::mark_stale(ItemId id, const StaleCause& cause) {
    auto it = std::find_if(items_.begin(), items_.end(),
                           [&](const MemoryItem& m) { return m.id == id; });
    if (it == items_.end()) throw UnknownItem("item " + std::to_string(id) + " not found");
    if (it->status == ItemStatus::Stale)
        throw AlreadyStale("item " + std::to_string(id) + " is already STALE");
    if (cause.timestamp <= it->provenance.timestamp)
        throw TemporalCausalityViolation(
            "cause at " + format_instant(cause.timestamp) + " is not strictly later than item " +
            std::to_string(id) + " at " + format_instant(it->provenance.timestamp));
    if (cause.rationale.empty())
        throw ValidationError("stale cause requires a rationale");

    it->status = ItemStatus::Stale;
    it->staled_by = cause;
    return *it;
}

const SlotMarker& MemoryStore::set_unknown_current(const SlotRef& slot, Instant since,
                                                   const std::string& cause) {
    schema_->require_slot(slot);
    for (const auto& item : items_)
        if (item.slot == slot && item.status == ItemStatus::Active)
            throw ActiveItemPresent("slot '" + slot.str() + "' still holds ACTIVE item " +
                                    std::to_string(item.id));
    // A newer marker replaces an older one on the same slot.
    std::erase_if(markers_, [&](const SlotMarker& m) { return m.slot == slot; });
    markers_.push_back(SlotMarker{slot, since, cause});
    return markers_.back();
}

std::vector<const MemoryItem*> MemoryStore::retrieve_same_slot(const SlotRef& slot) const {
    schema_->require_slot(slot);
    std::vector<const MemoryItem*> out;
    for (const auto& item : items_)
        if (item.slot == slot) out.push_back(&item);
    std::sort(out.begin(), out.end(), [](const MemoryItem* a, const MemoryItem* b) {
        if (a->status != b->status) return a->status == ItemStatus::Active;
        if (a->provenance.timestamp != b->provenance.timestamp)
            return a->provenance.timestamp > b->provenance.timestamp;
        return a->id < b->id;
    });
    return out;
}

std::vector<std::pair<const MemoryItem*, double>> MemoryStore::retrieve_lexical(
    const std::vector<std::string>& query_terms, std::size_t k) const {
    std::vector<std::pair<const MemoryItem*, double>> ranked;
    if (k == 0) return ranked;

    std::vector<std::string> terms = query_terms;
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    for (const auto& item : items_) {
        double score = 0.0;
        if (!terms.empty()) {
            std::string blob = item.proposition.value;
            for (const auto& ev : item.evidence) {
                blob.push_back(' ');
                blob += ev.text;
            }
            auto item_tokens = token_set(blob);
            std::size_t hits = 0;
            for (const auto& t : terms)
                if (std::binary_search(item_tokens.begin(), item_tokens.end(), t)) ++hits;
            score = static_cast<double>(hits) / static_cast<double>(terms.size());
        }
        ranked.emplace_back(&item, score);
    }

    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        if (a.first->provenance.timestamp != b.first->provenance.timestamp)
            return a.first->provenance.timestamp > b.first->provenance.timestamp;
        return a.first->id < b.first->id;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

std::vector<const MemoryItem*> MemoryStore::active_in_slot(const SlotRef& slot) const {
    std::vector<const MemoryItem*> out;
    for (const auto& item : items_)
        if (item.slot == slot && item.status == ItemStatus::Active) out.push_back(&item);
    return out;
}

namespace {

json slot_to_json(const SlotRef& s) {
    return json{{"domain", s.domain}, {"slot", s.slot}};
}

SlotRef slot_from_json(const json& v) {
    return SlotRef{v.at("domain").get<std::string>(), v.at("slot").get<std::string>()};
}

json item_to_json(const MemoryItem& m) {
    json j{{"kind", "item"},
           {"id", m.id},
           {"slot", slot_to_json(m.slot)},
           {"value", m.proposition.value},
           {"polarity", to_string(m.proposition.polarity)},
           {"status", to_string(m.status)},
           {"session_id", m.provenance.session_id},
           {"timestamp", format_instant(m.provenance.timestamp)},
           {"source_kind", to_string(m.provenance.source_kind)}};
    json evidence = json::array();
    for (const auto& ev : m.evidence) {
        json e{{"session_id", ev.session_id}, {"turn_index", ev.turn_index}, {"text", ev.text}};
        if (ev.tagged_slot) e["tagged_slot"] = slot_to_json(*ev.tagged_slot);
        evidence.push_back(std::move(e));
    }
    j["evidence"] = std::move(evidence);
    if (m.staled_by) {
        json c{{"session_id", m.staled_by->session_id},
               {"timestamp", format_instant(m.staled_by->timestamp)},
               {"rationale", m.staled_by->rationale}};
        if (m.staled_by->rule_id) c["rule_id"] = *m.staled_by->rule_id;
        j["staled_by"] = std::move(c);
    }
    return j;
}

MemoryItem item_from_json(const json& j) {
    MemoryItem m;
    m.id = j.at("id").get<ItemId>();
    m.slot = slot_from_json(j.at("slot"));
    m.proposition.attribute = m.slot;
    m.proposition.value = j.at("value").get<std::string>();
    m.proposition.polarity =
        j.at("polarity").get<std::string>() == "deny" ? Polarity::Deny : Polarity::Assert;
    m.status = j.at("status").get<std::string>() == "stale" ? ItemStatus::Stale
                                                            : ItemStatus::Active;
    m.provenance.session_id = j.at("session_id").get<std::string>();
    m.provenance.timestamp = parse_instant(j.at("timestamp").get<std::string>());
    m.provenance.source_kind = j.at("source_kind").get<std::string>() == "inferred"
                                   ? SourceKind::Inferred
                                   : SourceKind::Direct;
    for (const auto& e : j.at("evidence")) {
        EvidenceSpan ev;
        ev.session_id = e.at("session_id").get<std::string>();
        ev.turn_index = e.at("turn_index").get<int>();
        ev.text = e.at("text").get<std::string>();
        if (e.contains("tagged_slot")) ev.tagged_slot = slot_from_json(e.at("tagged_slot"));
        m.evidence.push_back(std::move(ev));
    }
    if (j.contains("staled_by")) {
        const json& c = j.at("staled_by");
        StaleCause cause;
        cause.session_id = c.at("session_id").get<std::string>();
        cause.timestamp = parse_instant(c.at("timestamp").get<std::string>());
        cause.rationale = c.at("rationale").get<std::string>();
        if (c.contains("rule_id")) cause.rule_id = c.at("rule_id").get<std::string>();
        m.staled_by = std::move(cause);
    }
    return m;
}

}  // namespace

void MemoryStore::persist(std::ostream& sink) const {
    json header{{"kind", "header"},
                {"schema_version", schema_->version()},
                {"clock", format_instant(clock_)},
                {"next_id", next_id_}};
    sink << header.dump() << '\n';
    for (const auto& item : items_) sink << item_to_json(item).dump() << '\n';
    for (const auto& m : markers_) {
        json j{{"kind", "marker"},
               {"slot", slot_to_json(m.slot)},
               {"since", format_instant(m.since)},
               {"cause", m.cause}};
        sink << j.dump() << '\n';
    }
}

std::string MemoryStore::persist_string() const {
    std::ostringstream out;
    persist(out);
    return out.str();
}

MemoryStore MemoryStore::load(std::istream& source, std::shared_ptr<const StateSchema> schema) {
    MemoryStore store(std::move(schema));
    std::string line;
    std::size_t offset = 0;
    bool saw_header = false;
    while (std::getline(source, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("kind"))
            throw IoError("bad snapshot record at byte offset " + std::to_string(offset));
        try {
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind == "header") {
                const std::string version = rec.at("schema_version").get<std::string>();
                if (version != store.schema_->version())
                    throw SchemaVersionMismatch("snapshot version '" + version +
                                                "' vs schema '" + store.schema_->version() + "'");
                store.clock_ = parse_instant(rec.at("clock").get<std::string>());
                store.next_id_ = rec.at("next_id").get<ItemId>();
                saw_header = true;
            } else if (kind == "item") {
                store.items_.push_back(item_from_json(rec));
            } else if (kind == "marker") {
                store.markers_.push_back(SlotMarker{slot_from_json(rec.at("slot")),
                                                    parse_instant(rec.at("since").get<std::string>()),
                                                    rec.at("cause").get<std::string>()});
            } else {
                throw IoError("unknown record kind '" + kind + "' at byte offset " +
                              std::to_string(offset));
            }
        } catch (const SchemaVersionMismatch&) {
            throw;
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw IoError("bad snapshot record at byte offset " + std::to_string(offset) + ": " +
                          e.what());
        }
        offset += line.size() + 1;
    }
    if (!saw_header) throw IoError("snapshot is missing its header record");
    for (std::size_t i = 0; i + 1 < store.items_.size(); ++i)
        if (store.items_[i].id >= store.items_[i + 1].id)
            throw IoError("snapshot items are not in strictly ascending id order");
    for (const auto& item : store.items_)
        if (item.id >= store.next_id_)
            throw IoError("snapshot next_id does not exceed item " + std::to_string(item.id));
    return store;
}

MemoryStore MemoryStore::load_string(const std::string& text,
                                     std::shared_ptr<const StateSchema> schema) {
    std::istringstream in(text);
    return load(in, std::move(schema));
}

std::uint64_t MemoryStore::fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : persist_string()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

bool MemoryStore::operator==(const MemoryStore& other) const {
    return schema_->version() == other.schema_->version() && items_ == other.items_ &&
           markers_ == other.markers_ && clock_ == other.clock_ && next_id_ == other.next_id_;
}

const char* to_string(ItemStatus s) { return s == ItemStatus::Active ? "active" : "stale"; }
const char* to_string(SourceKind s) { return s == SourceKind::Direct ? "direct" : "inferred"; }

}  // namespace cupmem
