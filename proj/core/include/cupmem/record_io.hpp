#pragma once
// Newline-delimited structured records: the on-disk voice of sessions,
// probes, scenarios, ingest reports, grounded answers, traces and
// metrics. Serialization is canonical (sorted keys), so identical inputs
// produce byte-identical files.

#include <iosfwd>
#include <string>
#include <vector>

#include "cupmem/readout.hpp"
#include "cupmem/session.hpp"
#include "cupmem/simulator.hpp"
#include "cupmem/write_pipeline.hpp"

namespace cupmem {

std::string session_record(const Session& session);
Session parse_session_record(const std::string& line);

std::string probe_record(const Probe& probe);
Probe parse_probe_record(const std::string& line);

std::string scenario_record(const Scenario& scenario, const Haystack& haystack);

std::string ingest_report_record(const IngestReport& report);
std::string grounded_answer_record(const GroundedAnswer& answer, const std::string& probe_id);
std::string dimension_trace_record(const DimensionTrace& trace);

std::string metrics_json(const EvalMetrics& metrics);

// Plain-text summary table of pass rates plus the retrieval diagnostics
// columns (new evidence retrieved, old & new both retrieved, old/new
// ranked top-1, failure despite new evidence).
std::string metrics_text(const EvalMetrics& metrics);

// Writes one run's scenario/session/probe records for every run.
void write_suite(std::ostream& out, const std::vector<ScenarioRun>& runs);

// Reads session and probe records from a record stream; other kinds are
// ignored. Sessions keep file order.
struct RecordFile {
    std::vector<Session> sessions;
    std::vector<Probe> probes;
};
RecordFile read_records(std::istream& in);

}  // namespace cupmem
