#pragma once
// The pluggable decision authority over revision proposals: a
// deterministic rule-based implementation used for verification, and a
// client for an external model-backed judge speaking a small wire
// protocol. External failures never surface into the pipeline; they
// degrade to a configured fallback verdict (UNKNOWN by default, so an
// unsafe old default is blocked rather than silently kept).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cupmem/revision.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/store.hpp"
#include "cupmem/time.hpp"

namespace cupmem {

struct AdjudicationContext {
    RevisionProposal proposal;
    MemoryItem old_item;                      // old_item.id == proposal.old_item
    std::optional<std::string> session_text;  // raw session, forwarded to external judges
    std::string schema_version;
};

class Adjudicator {
public:
    virtual ~Adjudicator() = default;

    // Total: always returns one of the four verdicts, never throws into
    // the pipeline.
    virtual AdjudicationDecision decide(const AdjudicationContext& context) = 0;

    // Order-preserving, element-wise equal to mapping decide.
    virtual std::vector<AdjudicationDecision> decide_batch(
        const std::vector<AdjudicationContext>& contexts);
};

// Deterministic mapping from the proposal's firing condition:
//   single-slot conflict with exactly one incompatible update -> REPLACE
//   dependency rule fired                                     -> UNKNOWN
//   incompat-same-slot rule fired                             -> STALE
//   no firing condition                                       -> KEEP
class RuleBasedAdjudicator : public Adjudicator {
public:
    RuleBasedAdjudicator(const KnowledgeRuleSet& knowledge, const StateSchema& schema)
        : knowledge_(&knowledge), schema_(&schema) {}

    AdjudicationDecision decide(const AdjudicationContext& context) override;

private:
    const KnowledgeRuleSet* knowledge_;
    const StateSchema* schema_;
};

// Request/response byte channel beneath the external client. Returns the
// response body, or nullopt on timeout/transport failure.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::optional<std::string> round_trip(const std::string& request_body,
                                                  Duration timeout_sec) = 0;
};

// HTTP POST transport for endpoint descriptors of the form
// "http://host:port/path".
std::shared_ptr<Transport> make_http_transport(const std::string& endpoint);

struct AdjudicatorConfig {
    enum class Kind { RuleBased, External };

    Kind kind = Kind::RuleBased;
    std::string endpoint;                // external only
    Duration timeout_sec = 10;           // > 0
    int max_retries = 2;                 // >= 0
    AdjudicationDecision::Verdict fallback_verdict = AdjudicationDecision::Verdict::Unknown;
};

class ExternalAdjudicator : public Adjudicator {
public:
    ExternalAdjudicator(AdjudicatorConfig config, std::shared_ptr<Transport> transport);

    AdjudicationDecision decide(const AdjudicationContext& context) override;

    // Wire protocol bodies (UTF-8 structured text).
    static std::string encode_request(const AdjudicationContext& context);
    static std::optional<AdjudicationDecision> parse_response(const std::string& body,
                                                              const SlotRef& old_slot);

private:
    AdjudicatorConfig config_;
    std::shared_ptr<Transport> transport_;
};

// Builds the configured adjudicator; rule-based needs knowledge + schema,
// external needs an endpoint unless a transport is supplied directly.
std::unique_ptr<Adjudicator> make_adjudicator(const AdjudicatorConfig& config,
                                              const KnowledgeRuleSet& knowledge,
                                              const StateSchema& schema,
                                              std::shared_ptr<Transport> transport = nullptr);

}  // namespace cupmem
