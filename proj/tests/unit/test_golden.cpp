#include <doctest.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "cupmem/adjudicator.hpp"
#include "cupmem/record_io.hpp"
#include "cupmem/simulator.hpp"
#include "support/fixtures.hpp"

// Golden files pin the machine and human report formats; regenerate with
//   cupmem evaluate --seed 3 --type both --count 2 --sessions-per 4 \
//       --system engine --out <dir>
// and copy metrics.json / metrics.txt into tests/golden/.

using namespace cupmem;
namespace fx = cupmem::testing;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing golden file: " << path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE_BEGIN("golden");

TEST_CASE("metric reports match their golden files") {
    auto schema = fx::default_schema();
    const auto& knowledge = fx::default_knowledge();
    SuiteSpec spec;
    spec.type1_count = 2;
    spec.type2_count = 2;
    spec.sessions_per_haystack = 4;
    auto runs = generate_suite(*schema, knowledge, spec, 3);

    EvalMetrics m = run_evaluation([&]() -> std::unique_ptr<SystemUnderTest> {
        return std::make_unique<EngineSystem>(
            schema, knowledge, std::make_unique<RuleBasedAdjudicator>(knowledge, *schema));
    }, runs);

    const std::string dir = std::string(CUPMEM_TEST_SOURCE_DIR) + "/golden/";
    CHECK(metrics_json(m) + "\n" == slurp(dir + "metrics_small.json"));
    CHECK(metrics_text(m) == slurp(dir + "metrics_small.txt"));
}

TEST_SUITE_END();
