// Microbenchmarks for the hot paths: haystack ingestion, lexical
// retrieval, probe answering, scenario generation and the oracle scan.

#include <benchmark/benchmark.h>

#include <memory>

#include "cupmem/adjudicator.hpp"
#include "cupmem/simulator.hpp"

using namespace cupmem;

namespace {

std::shared_ptr<const StateSchema> schema() {
    static const auto s = std::make_shared<const StateSchema>(
        load_schema(default_schema_document()));
    return s;
}

const KnowledgeRuleSet& knowledge() {
    static const KnowledgeRuleSet k = load_knowledge(default_schema_document(), *schema());
    return k;
}

ScenarioRun make_run(std::uint64_t seed, std::size_t sessions) {
    ScenarioRun run;
    run.scenario = generate_scenario(seed, *schema(), knowledge(), ConflictType::TypeII);
    run.haystack = build_haystack(run.scenario, builtin_distractor_pool(), sessions, seed,
                                  knowledge(), *schema());
    schedule_timestamps(run.haystack, GapSpec{}, 2027, seed);
    return run;
}

std::unique_ptr<EngineSystem> fresh_engine() {
    return std::make_unique<EngineSystem>(
        schema(), knowledge(),
        std::make_unique<RuleBasedAdjudicator>(knowledge(), *schema()));
}

void BM_IngestHaystack(benchmark::State& state) {
    const ScenarioRun run = make_run(42, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto engine = fresh_engine();
        for (const auto& s : run.haystack.sessions) engine->ingest(s);
        benchmark::DoNotOptimize(engine->store().items().size());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IngestHaystack)->Arg(10)->Arg(20);

void BM_LexicalRetrieval(benchmark::State& state) {
    auto engine = fresh_engine();
    // Grow the store from repeated suite scenarios.
    for (std::uint64_t seed = 0; engine->store().items().size() <
                                 static_cast<std::size_t>(state.range(0));
         ++seed) {
        const ScenarioRun run = make_run(seed, 8);
        MemoryStore& store = engine->mutable_store();
        for (const auto& s : run.haystack.sessions) {
            for (const auto& turn : s.turns) {
                for (const auto& span : turn.spans) {
                    MemoryItem m;
                    m.slot = span.slot;
                    m.proposition = make_proposition(span.slot, span.value);
                    m.provenance = Provenance{s.session_id + std::to_string(seed),
                                              s.timestamp, SourceKind::Direct};
                    m.evidence.push_back(EvidenceSpan{s.session_id, 0, turn.text, span.slot});
                    if (store.schema().slot_cardinality(span.slot) == Cardinality::Multi)
                        store.insert_item(std::move(m));
                }
            }
        }
    }
    const std::vector<std::string> query = {"commute", "leg", "work", "plan"};
    for (auto _ : state) {
        auto ranked = engine->store().retrieve_lexical(query, 20);
        benchmark::DoNotOptimize(ranked.size());
    }
}
BENCHMARK(BM_LexicalRetrieval)->Arg(100)->Arg(1000);

void BM_AnswerThreeProbes(benchmark::State& state) {
    const ScenarioRun run = make_run(42, 10);
    auto engine = fresh_engine();
    for (const auto& s : run.haystack.sessions) engine->ingest(s);
    for (auto _ : state) {
        benchmark::DoNotOptimize(engine->answer(run.scenario.probes.sr));
        benchmark::DoNotOptimize(engine->answer(run.scenario.probes.pr));
        benchmark::DoNotOptimize(engine->answer(run.scenario.probes.ipa));
    }
    state.SetItemsProcessed(state.iterations() * 3);
}
BENCHMARK(BM_AnswerThreeProbes);

void BM_GenerateScenario(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Scenario sc = generate_scenario(seed++, *schema(), knowledge(), ConflictType::TypeI);
        benchmark::DoNotOptimize(sc.id.size());
    }
}
BENCHMARK(BM_GenerateScenario);

void BM_BruteForceScan(benchmark::State& state) {
    const ScenarioRun run = make_run(7, static_cast<std::size_t>(state.range(0)));
    std::vector<Observation> history;
    for (const auto& s : run.haystack.sessions) history.push_back(to_observation(s));
    for (auto _ : state) {
        auto witnesses = brute_force_scan(history, knowledge(), *schema());
        benchmark::DoNotOptimize(witnesses.size());
    }
}
BENCHMARK(BM_BruteForceScan)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
