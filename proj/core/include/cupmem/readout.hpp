#pragma once
// Constrained query-time readout. Answers are grounded only in memories
// authorized by write-side adjudication: premises are verified against
// the store, stale premises are blocked, and the answer is derived from
// the assembled current basis — never from a raw retrieval list.

#include <optional>
#include <string>
#include <vector>

#include "cupmem/schema.hpp"
#include "cupmem/store.hpp"

namespace cupmem {

enum class ProbeDimension { SR, PR, IPA };

// Structured probe: simulator output or a hand-written query record.
struct Probe {
    std::string id;
    std::optional<ProbeDimension> dimension;
    std::string intent;
    std::string text;
    std::vector<Proposition> presupposed;   // P_q
    std::vector<SlotRef> basis_slots;       // B_q
    std::string action;                     // A_q
};

struct QueryAnalysis {
    std::string intent;
    std::vector<Proposition> presupposed;
    std::vector<SlotRef> basis_slots;
    std::string action;
    std::optional<ProbeDimension> dimension_hint;
};

enum class PremiseStatus { Supported, Outdated, Unresolved };

struct PremiseVerdict {
    Proposition premise;
    PremiseStatus verdict = PremiseStatus::Unresolved;
    std::optional<ItemId> witness;   // ACTIVE for SUPPORTED, STALE for OUTDATED
    bool marker_witness = false;     // UNRESOLVED via an unknown-current marker
};

struct CurrentBasis {
    std::vector<MemoryItem> active_grounding;    // ACTIVE only
    std::vector<MemoryItem> historical_context;  // STALE, informational
    std::vector<PremiseVerdict> blocked_premises;
    std::vector<SlotRef> unknown_slots;
};

enum class SrState { StillValid, NoLongerValid, Unresolved };
enum class PrState { PremiseRejected, PremiseFollowed };

struct IpaChoice {
    SlotRef slot;
    std::vector<Proposition> chosen;   // empty iff unknown
    bool unknown = false;
};

struct GroundedAnswer {
    std::optional<ProbeDimension> dimension;
    std::vector<PremiseVerdict> verdict_summary;
    CurrentBasis basis;
    std::optional<SrState> sr_state;
    std::optional<PrState> pr_state;
    std::vector<IpaChoice> ipa_choices;
};

struct ReadoutConfig {
    std::optional<ProbeDimension> dimension_override;
};

// Validates the structured probe against the schema and copies its tags.
// PR probes must presuppose something; IPA probes must name basis slots
// and presuppose nothing.
QueryAnalysis analyze_query(const Probe& probe, const StateSchema& schema);

// Per premise: equal ACTIVE item -> SUPPORTED; equal STALE item with no
// equal ACTIVE item -> OUTDATED; marker on the slot or no match at all
// -> UNRESOLVED.
std::vector<PremiseVerdict> verify_premises(const MemoryStore& store,
                                            const QueryAnalysis& analysis);

CurrentBasis assemble_basis(const MemoryStore& store, const QueryAnalysis& analysis,
                            const std::vector<PremiseVerdict>& verdicts);

// Pure read; never mutates the store.
GroundedAnswer answer_query(const MemoryStore& store, const Probe& probe,
                            const ReadoutConfig& config = {});

const char* to_string(ProbeDimension d);
const char* to_string(PremiseStatus s);
const char* to_string(SrState s);
const char* to_string(PrState s);
std::optional<ProbeDimension> parse_dimension(const std::string& text);

}  // namespace cupmem
