#include <doctest.h>

#include "support/properties.hpp"

using namespace cupmem;
namespace fx = cupmem::testing;

// Fast randomized passes; the acceptance gate reruns these drivers at
// 1000+ cases each.

TEST_SUITE_BEGIN("property");

TEST_CASE("single-slot uniqueness holds along random operation walks") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto rep = fx::store_walk(seed, 60, fx::check_single_slot_uniqueness);
        violations += rep.violations;
        CHECK(rep.accepted_ops > 0);
    }
    CHECK(violations == 0);
}

TEST_CASE("temporal causality holds along random operation walks") {
    int violations = 0;
    for (std::uint64_t seed = 100; seed < 140; ++seed)
        violations += fx::store_walk(seed, 60, fx::check_temporal_causality).violations;
    CHECK(violations == 0);
}

TEST_CASE("archive status is monotone along random operation walks") {
    int violations = 0;
    for (std::uint64_t seed = 200; seed < 240; ++seed) {
        fx::ArchiveMonotonicity monotone;
        violations += fx::store_walk(seed, 60, [&](const MemoryStore& s) {
                          return monotone.observe(s);
                      }).violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("markers never coexist with newer ACTIVE items") {
    int violations = 0;
    for (std::uint64_t seed = 300; seed < 340; ++seed)
        violations += fx::store_walk(seed, 60, fx::check_marker_invariant).violations;
    CHECK(violations == 0);
}

TEST_CASE("stale propositions never surface in answers") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed)
        violations += fx::stale_exclusion_violations(seed);
    CHECK(violations == 0);
}

TEST_CASE("ingest is atomic under injected adjudicator faults") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed)
        violations += fx::atomicity_violations(seed);
    CHECK(violations == 0);
}

TEST_CASE("oracle-invalidated items always reach the candidate set") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed)
        violations += fx::candidate_completeness_violations(seed);
    CHECK(violations == 0);
}

TEST_CASE("the pipeline retires exactly what the oracle invalidates") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed)
        violations += fx::pipeline_soundness_violations(seed);
    CHECK(violations == 0);
}

TEST_CASE("persistence round-trips along random operation walks") {
    int violations = 0;
    for (std::uint64_t seed = 400; seed < 420; ++seed)
        violations += fx::roundtrip_violations(seed);
    CHECK(violations == 0);
}

TEST_SUITE_END();
