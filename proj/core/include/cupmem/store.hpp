#pragma once
// Typed temporal memory store.
//
// Items are append-only: a revision archives the old item as STALE and
// writes a new one; nothing is ever deleted. A SINGLE-cardinality slot
// holds at most one ACTIVE item. Mutation follows a single-writer
// contract; the store is a plain value type, so the write pipeline takes
// a copy, mutates it, and commits by swap for all-or-nothing sessions.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cupmem/schema.hpp"
#include "cupmem/time.hpp"

namespace cupmem {

using ItemId = std::uint64_t;

struct EvidenceSpan {
    std::string session_id;
    int turn_index = 0;
    std::string text;
    std::optional<SlotRef> tagged_slot;

    bool operator==(const EvidenceSpan&) const = default;
};

enum class ItemStatus { Active, Stale };
enum class SourceKind { Direct, Inferred };

struct Provenance {
    std::string session_id;
    Instant timestamp = 0;
    SourceKind source_kind = SourceKind::Direct;

    bool operator==(const Provenance&) const = default;
};

struct StaleCause {
    std::string session_id;
    Instant timestamp = 0;
    std::string rationale;
    std::optional<std::string> rule_id;

    bool operator==(const StaleCause&) const = default;
};

struct MemoryItem {
    ItemId id = 0;
    SlotRef slot;
    Proposition proposition;                 // proposition.attribute == slot
    ItemStatus status = ItemStatus::Active;
    Provenance provenance;
    std::vector<EvidenceSpan> evidence;
    std::optional<StaleCause> staled_by;     // set iff status == Stale

    bool operator==(const MemoryItem&) const = default;
};

// Slot-level unknown-current marker: the old default is unsafe and no
// replacement is settled; basis assembly treats the slot as empty.
struct SlotMarker {
    SlotRef slot;
    Instant since = 0;
    std::string cause;

    bool operator==(const SlotMarker&) const = default;
};

class MemoryStore {
public:
    explicit MemoryStore(std::shared_ptr<const StateSchema> schema);

    const StateSchema& schema() const { return *schema_; }
    std::shared_ptr<const StateSchema> schema_ptr() const { return schema_; }
    Instant clock() const { return clock_; }

    const std::vector<MemoryItem>& items() const { return items_; }
    const std::vector<SlotMarker>& markers() const { return markers_; }

    const MemoryItem* find(ItemId id) const;
    const MemoryItem& require(ItemId id) const;  // throws UnknownItem
    const SlotMarker* marker_for(const SlotRef& slot) const;

    // Stores an ACTIVE item and advances the clock. The id field of the
    // argument is ignored; the store assigns the next id. Rejects a second
    // ACTIVE item in a SINGLE slot (callers must revise, never blind-insert).
    ItemId insert_item(MemoryItem item);

    // Archives an item. The cause must be strictly later than the item's
    // provenance (temporal causality); archived items never change again.
    const MemoryItem& mark_stale(ItemId id, const StaleCause& cause);

    // Records an unknown-current marker. Requires the slot to have no
    // ACTIVE item (stale it first in the same transaction).
    const SlotMarker& set_unknown_current(const SlotRef& slot, Instant since,
                                          const std::string& cause);

    // All items of a slot: ACTIVE before STALE, each group ordered by
    // timestamp descending then id ascending.
    std::vector<const MemoryItem*> retrieve_same_slot(const SlotRef& slot) const;

    // Top-k items by token overlap with the query terms, over proposition
    // value plus evidence text. score = |intersection| / |query term set|.
    // Ranks every item (zero scores included); ties break by score desc,
    // timestamp desc, id asc.
    std::vector<std::pair<const MemoryItem*, double>> retrieve_lexical(
        const std::vector<std::string>& query_terms, std::size_t k) const;

    std::vector<const MemoryItem*> active_in_slot(const SlotRef& slot) const;

    // Newline-delimited record persistence; load(persist(s)) == s exactly,
    // including ids and ordering.
    void persist(std::ostream& sink) const;
    std::string persist_string() const;
    static MemoryStore load(std::istream& source, std::shared_ptr<const StateSchema> schema);
    static MemoryStore load_string(const std::string& text,
                                   std::shared_ptr<const StateSchema> schema);

    std::uint64_t fingerprint() const;

    bool operator==(const MemoryStore& other) const;

private:
    std::shared_ptr<const StateSchema> schema_;
    std::vector<MemoryItem> items_;       // id order
    std::vector<SlotMarker> markers_;     // insertion order
    Instant clock_ = 0;
    ItemId next_id_ = 1;
};

const char* to_string(ItemStatus s);
const char* to_string(SourceKind s);

}  // namespace cupmem
