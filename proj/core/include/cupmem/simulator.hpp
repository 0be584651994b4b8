#pragma once
// Deterministic scenario simulator and scoring harness: structured
// implicit-conflict instances (both types), haystack assembly with
// distractor safety, order-preserving timestamp scheduling, and the
// evaluation loop with retrieval-visibility diagnostics.
//
// All randomness flows from explicit seeds; identical seeds and inputs
// reproduce identical scenarios, schedules and metrics byte for byte.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cupmem/adjudicator.hpp"
#include "cupmem/conflict.hpp"
#include "cupmem/readout.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/session.hpp"
#include "cupmem/store.hpp"
#include "cupmem/write_pipeline.hpp"

namespace cupmem {

// splitmix64 stream; stdlib distributions are avoided so that seeded
// output is identical across standard libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    std::uint64_t bounded(std::uint64_t n);               // uniform in [0, n)
    std::int64_t range(std::int64_t lo, std::int64_t hi); // uniform in [lo, hi]

    template <typename T>
    const T& pick(const std::vector<T>& pool) {
        return pool[bounded(pool.size())];
    }

private:
    std::uint64_t state_;
};

// Tokens with a small function-word stoplist removed; the leakage checks
// compare content only, so articles and prepositions never count as
// "introduced" vocabulary.
std::vector<std::string> content_tokens(const std::string& text);

struct ProbeSet {
    Probe sr;
    Probe pr;
    Probe ipa;
};

struct GroundTruth {
    bool old_invalid_after_new = true;
    SrState expected_sr = SrState::NoLongerValid;
    PrState expected_pr = PrState::PremiseRejected;
    std::optional<Proposition> expected_replacement;   // empty: UNKNOWN is correct
};

struct Scenario {
    std::string id;
    ConflictType conflict_type = ConflictType::TypeI;
    SlotRef target_slot;
    Proposition old_value;
    Proposition new_value;                  // same slot (TYPE_I) or upstream (TYPE_II)
    std::optional<SlotRef> upstream_slot;   // TYPE_II only
    std::optional<std::string> rule_id;
    std::string old_text;                   // templated utterances
    std::string new_text;
    Observation m_old;
    Observation m_new;
    Duration gap = 0;
    ProbeSet probes;
    GroundTruth ground_truth;
};

struct Haystack {
    std::vector<Session> sessions;   // chronological
    std::size_t old_index = 0;
    std::size_t new_index = 0;
    Instant query_time = 0;
};

struct GapSpec {
    Duration min_gap = days(30);
    Duration max_gap = days(180);
};

// Deterministic in the seed. The emitted pair is validated against the
// conflict oracle at the declared type, and the PR probe passes the
// zero-leakage token check against the new utterance.
Scenario generate_scenario(std::uint64_t seed, const StateSchema& schema,
                           const KnowledgeRuleSet& knowledge, ConflictType type);

// True when the pool session can serve as background noise for the
// scenario: it never touches the target slot, never fires against the
// old belief, and is not itself invalidated by the evidence pair.
bool distractor_safe(const Scenario& scenario, const Session& candidate,
                     const KnowledgeRuleSet& knowledge, const StateSchema& schema);

// Embeds the evidence pair among deduplicated distractors: the old
// session lands uniformly in the first half, the new one in the second.
// Unsafe pool entries are rejected with UnsafeDistractor.
Haystack build_haystack(const Scenario& scenario, const std::vector<Session>& pool,
                        std::size_t n_sessions, std::uint64_t seed,
                        const KnowledgeRuleSet& knowledge, const StateSchema& schema);

// Assigns strictly monotone instants in the target year with jittered
// interpolation; the old/new gap lands inside the given bounds (to the
// second when min == max) and query time follows the last session.
void schedule_timestamps(Haystack& haystack, const GapSpec& gap, int target_year,
                         std::uint64_t seed);

// Built-in distractor corpus (safe slots only, distinct values).
const std::vector<Session>& builtin_distractor_pool();

// ---- systems under test ----

struct TraceEntry {
    ItemId id = 0;
    SlotRef slot;
    std::string value;
    ItemStatus status = ItemStatus::Active;
    std::string session_id;
    double score = 0.0;
};

class SystemUnderTest {
public:
    virtual ~SystemUnderTest() = default;
    virtual void ingest(const Session& session) = 0;
    virtual GroundedAnswer answer(const Probe& probe) = 0;
    virtual std::vector<TraceEntry> last_retrieval_trace() const = 0;
    // Empty string opts out of the frozen-memory check.
    virtual std::string memory_fingerprint() const { return {}; }
};

// The engine: full write-side adjudication plus constrained readout.
class EngineSystem : public SystemUnderTest {
public:
    EngineSystem(std::shared_ptr<const StateSchema> schema, const KnowledgeRuleSet& knowledge,
                 std::unique_ptr<Adjudicator> adjudicator, int global_k = 5);

    void ingest(const Session& session) override;
    GroundedAnswer answer(const Probe& probe) override;
    std::vector<TraceEntry> last_retrieval_trace() const override { return trace_; }
    std::string memory_fingerprint() const override;

    const MemoryStore& store() const { return store_; }
    MemoryStore& mutable_store() { return store_; }
    const IngestReport& last_report() const { return last_report_; }

private:
    std::shared_ptr<const StateSchema> schema_;
    const KnowledgeRuleSet* knowledge_;
    std::unique_ptr<Adjudicator> adjudicator_;
    StructuredExtractor extractor_;
    MemoryStore store_;
    IngestConfig config_;
    std::vector<TraceEntry> trace_;
    IngestReport last_report_;
};

// Retrieval-only baseline: stores every span verbatim, answers from the
// ranked list with no status tracking and no adjudication. Recency wins
// for same-slot reading, so SR partially survives, but a retrievable old
// premise is always followed and IPA grounds in the first-stored record.
class NaiveSystem : public SystemUnderTest {
public:
    explicit NaiveSystem(std::shared_ptr<const StateSchema> schema);

    void ingest(const Session& session) override;
    GroundedAnswer answer(const Probe& probe) override;
    std::vector<TraceEntry> last_retrieval_trace() const override { return trace_; }

private:
    struct Record {
        ItemId id;
        SlotRef slot;
        std::string value;
        std::string session_id;
        Instant timestamp;
        std::string text;
    };

    std::vector<std::pair<const Record*, double>> rank(
        const std::vector<std::string>& terms) const;

    std::shared_ptr<const StateSchema> schema_;
    std::vector<Record> records_;
    std::vector<TraceEntry> trace_;
    ItemId next_id_ = 1;
};

// ---- evaluation ----

struct CellStats {
    int total = 0;
    int passed = 0;
    std::optional<double> rate() const {
        if (total == 0) return std::nullopt;
        return static_cast<double>(passed) / total;
    }
};

struct DiagStats {
    int answered = 0;        // denominator for visibility rates
    int new_retrieved = 0;   // new evidence within the trace depth
    int both_retrieved = 0;
    int old_top1 = 0;
    int new_top1 = 0;
    int failed_with_new = 0; // failures among new_retrieved cases
};

struct EvalMetrics {
    // cells[type][dimension]; type index 0 = TYPE_I, 1 = TYPE_II.
    std::array<std::array<CellStats, 3>, 2> cells{};
    std::array<DiagStats, 3> diagnostics{};   // per dimension, both types pooled
    int scenarios_total = 0;
    int system_faults = 0;
    std::size_t trace_depth = 20;
};

struct ScenarioRun {
    Scenario scenario;
    Haystack haystack;
};

struct DimensionTrace {
    std::string scenario_id;
    ConflictType conflict_type = ConflictType::TypeI;
    ProbeDimension dimension = ProbeDimension::SR;
    bool passed = false;
    bool faulted = false;
    std::vector<TraceEntry> retrieval;
};

struct EvalConfig {
    std::size_t trace_depth = 20;
};

using SystemFactory = std::function<std::unique_ptr<SystemUnderTest>()>;

bool score_answer(const GroundedAnswer& answer, const Scenario& scenario,
                  ProbeDimension dimension);

// Ingests each haystack in order, freezes the memory, issues the three
// probes against it, scores them against ground truth and accumulates
// retrieval diagnostics. A faulting system marks its scenario failed and
// the run continues.
EvalMetrics run_evaluation(const SystemFactory& factory, const std::vector<ScenarioRun>& runs,
                           const EvalConfig& config = {},
                           std::vector<DimensionTrace>* traces = nullptr);

struct SuiteSpec {
    int type1_count = 200;
    int type2_count = 200;
    std::size_t sessions_per_haystack = 10;
    GapSpec gap{};
    int target_year = 2027;
};

// Seed-deterministic suite: scenarios, haystacks and schedules.
std::vector<ScenarioRun> generate_suite(const StateSchema& schema,
                                        const KnowledgeRuleSet& knowledge,
                                        const SuiteSpec& spec, std::uint64_t seed);

}  // namespace cupmem
