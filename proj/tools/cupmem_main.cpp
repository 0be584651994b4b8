// cupmem CLI: schema validation, session ingestion, constrained querying,
// scenario simulation, evaluation runs and report rendering.
//
// Exit codes: 0 success, 1 domain violation, 2 environment/IO trouble.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cupmem/adjudicator.hpp"
#include "cupmem/errors.hpp"
#include "cupmem/record_io.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/simulator.hpp"
#include "cupmem/store.hpp"
#include "cupmem/write_pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cupmem::IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw cupmem::IoError("cannot write '" + tmp.string() + "'");
        out << content;
    }
    fs::rename(tmp, target);
}

struct CommonOpts {
    std::string schema_path;     // empty: built-in default
    std::string knowledge_path;  // empty: same document as the schema
};

std::string schema_document(const CommonOpts& opts) {
    return opts.schema_path.empty() ? cupmem::default_schema_document()
                                    : read_file(opts.schema_path);
}

std::shared_ptr<const cupmem::StateSchema> load_schema_opt(const CommonOpts& opts) {
    return std::make_shared<cupmem::StateSchema>(cupmem::load_schema(schema_document(opts)));
}

cupmem::KnowledgeRuleSet load_knowledge_opt(const CommonOpts& opts,
                                            const cupmem::StateSchema& schema) {
    const std::string doc =
        opts.knowledge_path.empty() ? schema_document(opts) : read_file(opts.knowledge_path);
    return cupmem::load_knowledge(doc, schema);
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--schema", opts.schema_path,
                    "Schema document path (omit for the built-in default)");
    cmd->add_option("--knowledge", opts.knowledge_path,
                    "Knowledge rules document (defaults to the schema document)");
}

cupmem::SuiteSpec suite_spec_from(const std::string& type, int count, std::size_t sessions) {
    cupmem::SuiteSpec spec;
    spec.sessions_per_haystack = sessions;
    spec.type1_count = (type == "1" || type == "both") ? count : 0;
    spec.type2_count = (type == "2" || type == "both") ? count : 0;
    return spec;
}

cupmem::EvalMetrics metrics_from_json(const json& rec) {
    cupmem::EvalMetrics m;
    m.scenarios_total = rec.at("scenarios_total").get<int>();
    m.system_faults = rec.at("system_faults").get<int>();
    m.trace_depth = rec.value("trace_depth", std::size_t{20});
    const char* dims[3] = {"sr", "pr", "ipa"};
    for (int t = 0; t < 2; ++t) {
        const json& row = rec.at("cells").at(t == 0 ? "type_i" : "type_ii");
        for (int d = 0; d < 3; ++d) {
            m.cells[t][d].total = row.at(dims[d]).at("total").get<int>();
            m.cells[t][d].passed = row.at(dims[d]).at("passed").get<int>();
        }
    }
    for (int d = 0; d < 3; ++d) {
        const json& row = rec.at("diagnostics").at(dims[d]);
        cupmem::DiagStats& s = m.diagnostics[d];
        s.answered = row.at("new_evidence_retrieved").at("denominator").get<int>();
        s.new_retrieved = row.at("new_evidence_retrieved").at("count").get<int>();
        s.both_retrieved = row.at("old_and_new_both_retrieved").at("count").get<int>();
        s.old_top1 = row.at("old_top1").at("count").get<int>();
        s.new_top1 = row.at("new_top1").at("count").get<int>();
        s.failed_with_new = row.at("failure_despite_new_evidence").at("count").get<int>();
    }
    return m;
}

int run(int argc, char** argv) {
    CLI::App app{"cupmem: write-time adjudicated user-state memory engine"};
    app.require_subcommand(1);

    // schema validate
    auto* schema_cmd = app.add_subcommand("schema", "Schema utilities");
    schema_cmd->require_subcommand(1);
    CommonOpts validate_opts;
    auto* validate = schema_cmd->add_subcommand("validate", "Validate a schema document");
    add_common(validate, validate_opts);

    // ingest
    CommonOpts ingest_opts;
    std::string ingest_store, ingest_sessions, ingest_out, ingest_adjudicator = "rule";
    std::string ingest_endpoint;
    int ingest_k = 5;
    auto* ingest = app.add_subcommand("ingest", "Ingest a chronological session file");
    add_common(ingest, ingest_opts);
    ingest->add_option("--store", ingest_store, "Store snapshot path")->required();
    ingest->add_option("--sessions", ingest_sessions, "Session record file")->required();
    ingest->add_option("--adjudicator", ingest_adjudicator, "rule|external")
        ->check(CLI::IsMember({"rule", "external"}));
    ingest->add_option("--endpoint", ingest_endpoint, "External adjudicator endpoint");
    ingest->add_option("--global-k", ingest_k, "Global candidate bound");
    ingest->add_option("--out", ingest_out, "Ingest report file (default stdout)");

    // query
    CommonOpts query_opts;
    std::string query_store, query_probes, query_dimension, query_out;
    auto* query = app.add_subcommand("query", "Answer structured probes against a store");
    add_common(query, query_opts);
    query->add_option("--store", query_store, "Store snapshot path")->required();
    query->add_option("--probes", query_probes, "Probe record file")->required();
    query->add_option("--dimension", query_dimension, "Override probe dimension (sr|pr|ipa)")
        ->check(CLI::IsMember({"sr", "pr", "ipa"}));
    query->add_option("--out", query_out, "Answer record file (default stdout)");

    // simulate
    CommonOpts sim_opts;
    std::uint64_t sim_seed = 1;
    std::string sim_type = "both", sim_out;
    int sim_count = 200;
    std::size_t sim_sessions = 10;
    auto* simulate = app.add_subcommand("simulate", "Generate a seeded scenario suite");
    add_common(simulate, sim_opts);
    simulate->add_option("--seed", sim_seed, "Generation seed");
    simulate->add_option("--type", sim_type, "Conflict type: 1|2|both")
        ->check(CLI::IsMember({"1", "2", "both"}));
    simulate->add_option("--count", sim_count, "Scenarios per type")->check(CLI::NonNegativeNumber);
    simulate->add_option("--sessions-per", sim_sessions, "Sessions per haystack");
    simulate->add_option("--out", sim_out, "Suite record file (default stdout)");

    // evaluate
    CommonOpts eval_opts;
    std::uint64_t eval_seed = 1;
    std::string eval_type = "both", eval_system = "engine", eval_out;
    int eval_count = 200, eval_k = 5;
    std::size_t eval_sessions = 10;
    auto* evaluate = app.add_subcommand("evaluate", "Run a system against a generated suite");
    add_common(evaluate, eval_opts);
    evaluate->add_option("--seed", eval_seed, "Generation seed");
    evaluate->add_option("--type", eval_type, "Conflict type: 1|2|both")
        ->check(CLI::IsMember({"1", "2", "both"}));
    evaluate->add_option("--count", eval_count, "Scenarios per type")
        ->check(CLI::NonNegativeNumber);
    evaluate->add_option("--sessions-per", eval_sessions, "Sessions per haystack");
    evaluate->add_option("--system", eval_system, "System under test: engine|naive")
        ->check(CLI::IsMember({"engine", "naive"}));
    evaluate->add_option("--global-k", eval_k, "Global candidate bound (engine)");
    evaluate->add_option("--out", eval_out, "Output directory")->required();

    // inspect
    CommonOpts inspect_opts;
    std::string inspect_store;
    auto* inspect = app.add_subcommand("inspect", "Dump a store with status and markers");
    add_common(inspect, inspect_opts);
    inspect->add_option("--store", inspect_store, "Store snapshot path")->required();

    // report
    std::string report_metrics;
    auto* report = app.add_subcommand("report", "Render a metrics file as a text summary");
    report->add_option("--metrics", report_metrics, "Metrics JSON record")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        auto schema = load_schema_opt(validate_opts);
        auto knowledge = load_knowledge_opt(validate_opts, *schema);
        std::size_t slot_count = 0;
        for (const auto& d : schema->domains()) slot_count += schema->slots_of(d).size();
        std::cout << "schema '" << schema->version() << "': " << schema->domains().size()
                  << " domains, " << slot_count << " slots, "
                  << schema->dependency_edges().size() << " dependency edges, "
                  << knowledge.rules().size() << " knowledge rules\n";
        return 0;
    }

    if (ingest->parsed()) {
        auto schema = load_schema_opt(ingest_opts);
        auto knowledge = load_knowledge_opt(ingest_opts, *schema);

        cupmem::AdjudicatorConfig adj_config;
        if (ingest_adjudicator == "external") {
            adj_config.kind = cupmem::AdjudicatorConfig::Kind::External;
            adj_config.endpoint = ingest_endpoint;
        }
        auto adjudicator = cupmem::make_adjudicator(adj_config, knowledge, *schema);

        cupmem::MemoryStore store =
            fs::exists(ingest_store)
                ? cupmem::MemoryStore::load_string(read_file(ingest_store), schema)
                : cupmem::MemoryStore(schema);

        std::ifstream in(ingest_sessions);
        if (!in) throw cupmem::IoError("cannot open '" + ingest_sessions + "'");
        cupmem::RecordFile records = cupmem::read_records(in);

        for (std::size_t i = 1; i < records.sessions.size(); ++i) {
            if (records.sessions[i].timestamp < records.sessions[i - 1].timestamp)
                throw cupmem::OutOfOrderSession("session '" + records.sessions[i].session_id +
                                                "' is out of chronological order");
        }

        cupmem::StructuredExtractor extractor;
        cupmem::IngestConfig config;
        config.schema = schema.get();
        config.knowledge = &knowledge;
        config.extractor = &extractor;
        config.adjudicator = adjudicator.get();
        config.global_k = ingest_k;

        std::ofstream report_file;
        if (!ingest_out.empty()) {
            const fs::path target(ingest_out);
            if (target.has_parent_path()) fs::create_directories(target.parent_path());
            report_file.open(target, std::ios::binary | std::ios::trunc);
            if (!report_file) throw cupmem::IoError("cannot write '" + ingest_out + "'");
        }
        std::ostream& report_sink = ingest_out.empty() ? std::cout : report_file;
        for (const auto& session : records.sessions) {
            cupmem::IngestReport rep = cupmem::ingest_session(store, session, config);
            // Per-session persistence: interrupted runs resume without
            // re-adjudicating what was already applied.
            write_file(ingest_store, store.persist_string());
            report_sink << cupmem::ingest_report_record(rep) << '\n';
            report_sink.flush();
        }
        return 0;
    }

    if (query->parsed()) {
        auto schema = load_schema_opt(query_opts);
        cupmem::MemoryStore store =
            cupmem::MemoryStore::load_string(read_file(query_store), schema);

        std::ifstream in(query_probes);
        if (!in) throw cupmem::IoError("cannot open '" + query_probes + "'");
        cupmem::RecordFile records = cupmem::read_records(in);

        cupmem::ReadoutConfig config;
        if (!query_dimension.empty()) config.dimension_override = cupmem::parse_dimension(query_dimension);

        std::ostringstream answers;
        for (const auto& probe : records.probes) {
            cupmem::GroundedAnswer answer = cupmem::answer_query(store, probe, config);
            answers << cupmem::grounded_answer_record(answer, probe.id) << '\n';
        }
        if (query_out.empty())
            std::cout << answers.str();
        else
            write_file(query_out, answers.str());
        return 0;
    }

    if (simulate->parsed()) {
        auto schema = load_schema_opt(sim_opts);
        auto knowledge = load_knowledge_opt(sim_opts, *schema);
        auto runs = cupmem::generate_suite(*schema, knowledge,
                                           suite_spec_from(sim_type, sim_count, sim_sessions),
                                           sim_seed);
        std::ostringstream out;
        cupmem::write_suite(out, runs);
        if (sim_out.empty())
            std::cout << out.str();
        else
            write_file(sim_out, out.str());
        return 0;
    }

    if (evaluate->parsed()) {
        auto schema = load_schema_opt(eval_opts);
        auto knowledge = load_knowledge_opt(eval_opts, *schema);
        auto runs = cupmem::generate_suite(*schema, knowledge,
                                           suite_spec_from(eval_type, eval_count, eval_sessions),
                                           eval_seed);

        cupmem::SystemFactory factory;
        if (eval_system == "engine") {
            factory = [&]() -> std::unique_ptr<cupmem::SystemUnderTest> {
                auto adjudicator =
                    std::make_unique<cupmem::RuleBasedAdjudicator>(knowledge, *schema);
                return std::make_unique<cupmem::EngineSystem>(schema, knowledge,
                                                              std::move(adjudicator), eval_k);
            };
        } else {
            factory = [&]() -> std::unique_ptr<cupmem::SystemUnderTest> {
                return std::make_unique<cupmem::NaiveSystem>(schema);
            };
        }

        std::vector<cupmem::DimensionTrace> traces;
        cupmem::EvalMetrics metrics = cupmem::run_evaluation(factory, runs, {}, &traces);

        std::ostringstream trace_out;
        for (const auto& t : traces) trace_out << cupmem::dimension_trace_record(t) << '\n';

        const fs::path dir(eval_out);
        write_file((dir / "metrics.json").string(), cupmem::metrics_json(metrics) + "\n");
        write_file((dir / "metrics.txt").string(), cupmem::metrics_text(metrics));
        write_file((dir / "traces.ndjson").string(), trace_out.str());
        std::cout << cupmem::metrics_text(metrics);
        return 0;
    }

    if (inspect->parsed()) {
        auto schema = load_schema_opt(inspect_opts);
        cupmem::MemoryStore store =
            cupmem::MemoryStore::load_string(read_file(inspect_store), schema);
        for (const auto& item : store.items()) {
            std::cout << item.id << "  [" << cupmem::to_string(item.status) << "]  "
                      << item.slot.str() << " = " << item.proposition.value << "  ("
                      << item.provenance.session_id << " @ "
                      << cupmem::format_instant(item.provenance.timestamp) << ")";
            if (item.staled_by)
                std::cout << "  staled by " << item.staled_by->session_id << " @ "
                          << cupmem::format_instant(item.staled_by->timestamp) << ": "
                          << item.staled_by->rationale;
            std::cout << "\n";
        }
        for (const auto& m : store.markers()) {
            std::cout << "marker  " << m.slot.str() << "  UNKNOWN_CURRENT since "
                      << cupmem::format_instant(m.since) << ": " << m.cause << "\n";
        }
        return 0;
    }

    if (report->parsed()) {
        json rec = json::parse(read_file(report_metrics), nullptr, false);
        if (rec.is_discarded()) throw cupmem::IoError("malformed metrics file");
        std::cout << cupmem::metrics_text(metrics_from_json(rec));
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cupmem::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.category() == cupmem::ErrorCategory::Io ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
