#include "cupmem/record_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "cupmem/errors.hpp"
#include "json_util.hpp"

namespace cupmem {

using detail::json;

namespace {

json slot_json(const SlotRef& s) { return json{{"domain", s.domain}, {"slot", s.slot}}; }

SlotRef slot_from(const json& v) {
    return SlotRef{v.at("domain").get<std::string>(), v.at("slot").get<std::string>()};
}

json prop_json(const Proposition& p) {
    return json{{"slot", slot_json(p.attribute)},
                {"value", p.value},
                {"polarity", to_string(p.polarity)}};
}

Proposition prop_from(const json& v) {
    Proposition p;
    p.attribute = slot_from(v.at("slot"));
    p.value = v.at("value").get<std::string>();
    p.polarity = v.value("polarity", "assert") == std::string("deny") ? Polarity::Deny
                                                                      : Polarity::Assert;
    return p;
}

json parse_line(const std::string& line, const char* what) {
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object())
        throw IoError(std::string("malformed ") + what + " record");
    return rec;
}

}  // namespace

std::string session_record(const Session& session) {
    json turns = json::array();
    for (const auto& t : session.turns) {
        json spans = json::array();
        for (const auto& sp : t.spans) {
            json s{{"slot", slot_json(sp.slot)}, {"value", sp.value}};
            if (sp.historical) s["historical"] = true;
            if (sp.negation) s["negation"] = true;
            spans.push_back(std::move(s));
        }
        turns.push_back(json{{"speaker", t.speaker}, {"text", t.text}, {"spans", std::move(spans)}});
    }
    json rec{{"kind", "session"},
             {"id", session.session_id},
             {"timestamp", format_instant(session.timestamp)},
             {"session_kind", to_string(session.kind)},
             {"turns", std::move(turns)}};
    return rec.dump();
}

Session parse_session_record(const std::string& line) try {
    json rec = parse_line(line, "session");
    Session s;
    s.session_id = rec.at("id").get<std::string>();
    s.timestamp = parse_instant(rec.at("timestamp").get<std::string>());
    const std::string kind = rec.value("session_kind", "distractor");
    s.kind = kind == "old_evidence"   ? SessionKind::OldEvidence
             : kind == "new_evidence" ? SessionKind::NewEvidence
                                      : SessionKind::Distractor;
    for (const auto& t : rec.at("turns")) {
        Turn turn;
        turn.speaker = t.at("speaker").get<std::string>();
        turn.text = t.at("text").get<std::string>();
        if (t.contains("spans")) {
            for (const auto& sp : t.at("spans")) {
                TaggedSpan span;
                span.slot = slot_from(sp.at("slot"));
                span.value = sp.at("value").get<std::string>();
                span.historical = sp.value("historical", false);
                span.negation = sp.value("negation", false);
                turn.spans.push_back(std::move(span));
            }
        }
        s.turns.push_back(std::move(turn));
    }
    return s;
} catch (const Error&) {
    throw;
} catch (const std::exception& e) {
    throw IoError(std::string("malformed session record: ") + e.what());
}

std::string probe_record(const Probe& probe) {
    json presupposed = json::array();
    for (const auto& p : probe.presupposed) presupposed.push_back(prop_json(p));
    json basis = json::array();
    for (const auto& s : probe.basis_slots) basis.push_back(slot_json(s));
    json rec{{"kind", "probe"},
             {"id", probe.id},
             {"intent", probe.intent},
             {"text", probe.text},
             {"presupposed", std::move(presupposed)},
             {"basis_slots", std::move(basis)},
             {"action", probe.action}};
    if (probe.dimension) rec["dimension"] = to_string(*probe.dimension);
    return rec.dump();
}

Probe parse_probe_record(const std::string& line) try {
    json rec = parse_line(line, "probe");
    Probe p;
    p.id = rec.at("id").get<std::string>();
    p.intent = rec.value("intent", "");
    p.text = rec.value("text", "");
    p.action = rec.value("action", "");
    if (rec.contains("dimension"))
        p.dimension = parse_dimension(rec.at("dimension").get<std::string>());
    if (rec.contains("presupposed"))
        for (const auto& v : rec.at("presupposed")) p.presupposed.push_back(prop_from(v));
    if (rec.contains("basis_slots"))
        for (const auto& v : rec.at("basis_slots")) p.basis_slots.push_back(slot_from(v));
    return p;
} catch (const Error&) {
    throw;
} catch (const std::exception& e) {
    throw IoError(std::string("malformed probe record: ") + e.what());
}

std::string scenario_record(const Scenario& scenario, const Haystack& haystack) {
    json rec{{"kind", "scenario"},
             {"id", scenario.id},
             {"conflict_type", to_string(scenario.conflict_type)},
             {"target_slot", slot_json(scenario.target_slot)},
             {"old_value", prop_json(scenario.old_value)},
             {"new_value", prop_json(scenario.new_value)},
             {"gap_seconds", scenario.gap},
             {"old_session", haystack.sessions[haystack.old_index].session_id},
             {"new_session", haystack.sessions[haystack.new_index].session_id},
             {"query_time", format_instant(haystack.query_time)},
             {"ground_truth",
              json{{"old_invalid_after_new", scenario.ground_truth.old_invalid_after_new},
                   {"expected_sr", to_string(scenario.ground_truth.expected_sr)},
                   {"expected_pr", to_string(scenario.ground_truth.expected_pr)},
                   {"expected_replacement",
                    scenario.ground_truth.expected_replacement
                        ? json(scenario.ground_truth.expected_replacement->value)
                        : json(nullptr)}}}};
    if (scenario.upstream_slot) rec["upstream_slot"] = slot_json(*scenario.upstream_slot);
    if (scenario.rule_id) rec["rule_id"] = *scenario.rule_id;
    return rec.dump();
}

std::string ingest_report_record(const IngestReport& report) {
    json actions = json::array();
    for (const auto& a : report.local_actions) {
        json j{{"action", to_string(a.kind)}, {"slot", slot_json(a.slot)}};
        if (a.target) j["target"] = *a.target;
        if (a.inserted) j["inserted"] = *a.inserted;
        actions.push_back(std::move(j));
    }
    json proposals = json::array();
    for (const auto& p : report.proposals) {
        json j{{"old_item", p.old_item},
               {"trigger", to_string(p.trigger_kind)},
               {"confidence", p.confidence},
               {"rationale", p.rationale}};
        if (p.triggering_rule) j["rule_id"] = *p.triggering_rule;
        proposals.push_back(std::move(j));
    }
    json decisions = json::array();
    for (const auto& d : report.decisions) {
        json j{{"verdict", to_string(d.verdict)}, {"rationale", d.rationale}};
        if (d.replacement) j["replacement"] = d.replacement->value;
        decisions.push_back(std::move(j));
    }
    json markers = json::array();
    for (const auto& s : report.markers_set) markers.push_back(slot_json(s));
    json rec{{"kind", "ingest_report"},
             {"session_id", report.session_id},
             {"candidates_extracted", report.candidates_extracted},
             {"local_actions", std::move(actions)},
             {"proposals", std::move(proposals)},
             {"decisions", std::move(decisions)},
             {"items_staled", report.items_staled},
             {"markers_set", std::move(markers)},
             {"explicit_retirements", report.explicit_retirements}};
    return rec.dump();
}

std::string grounded_answer_record(const GroundedAnswer& answer, const std::string& probe_id) {
    json verdicts = json::array();
    for (const auto& v : answer.verdict_summary) {
        json j{{"premise", prop_json(v.premise)}, {"verdict", to_string(v.verdict)}};
        if (v.witness) j["witness"] = *v.witness;
        if (v.marker_witness) j["marker_witness"] = true;
        verdicts.push_back(std::move(j));
    }
    json grounding = json::array();
    for (const auto& m : answer.basis.active_grounding)
        grounding.push_back(json{{"id", m.id}, {"slot", slot_json(m.slot)},
                                 {"value", m.proposition.value}});
    json historical = json::array();
    for (const auto& m : answer.basis.historical_context)
        historical.push_back(json{{"id", m.id}, {"slot", slot_json(m.slot)},
                                  {"value", m.proposition.value}});
    json unknown = json::array();
    for (const auto& s : answer.basis.unknown_slots) unknown.push_back(slot_json(s));

    json rec{{"kind", "answer"},
             {"probe_id", probe_id},
             {"verdicts", std::move(verdicts)},
             {"active_grounding", std::move(grounding)},
             {"historical_context", std::move(historical)},
             {"unknown_slots", std::move(unknown)}};
    if (answer.dimension) rec["dimension"] = to_string(*answer.dimension);
    if (answer.sr_state) rec["sr_state"] = to_string(*answer.sr_state);
    if (answer.pr_state) rec["pr_state"] = to_string(*answer.pr_state);
    if (!answer.ipa_choices.empty()) {
        json choices = json::array();
        for (const auto& c : answer.ipa_choices) {
            json props = json::array();
            for (const auto& p : c.chosen) props.push_back(p.value);
            choices.push_back(json{{"slot", slot_json(c.slot)},
                                   {"chosen", std::move(props)},
                                   {"unknown", c.unknown}});
        }
        rec["ipa_choices"] = std::move(choices);
    }
    return rec.dump();
}

std::string dimension_trace_record(const DimensionTrace& trace) {
    json entries = json::array();
    for (const auto& e : trace.retrieval) {
        entries.push_back(json{{"id", e.id},
                               {"slot", slot_json(e.slot)},
                               {"value", e.value},
                               {"status", to_string(e.status)},
                               {"session_id", e.session_id},
                               {"score", e.score}});
    }
    json rec{{"kind", "trace"},
             {"scenario", trace.scenario_id},
             {"conflict_type", to_string(trace.conflict_type)},
             {"dimension", to_string(trace.dimension)},
             {"passed", trace.passed},
             {"faulted", trace.faulted},
             {"retrieval", std::move(entries)}};
    return rec.dump();
}

namespace {

json cell_json(const CellStats& c) {
    json j{{"total", c.total}, {"passed", c.passed}};
    if (auto r = c.rate())
        j["rate"] = *r;
    else
        j["rate"] = nullptr;
    return j;
}

json rate_json(int num, int den) {
    json j{{"count", num}, {"denominator", den}};
    if (den > 0)
        j["rate"] = static_cast<double>(num) / den;
    else
        j["rate"] = nullptr;
    return j;
}

std::string pct(int num, int den) {
    if (den == 0) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * num / den);
    return buf;
}

std::string cell_pct(const CellStats& c) { return pct(c.passed, c.total); }

}  // namespace

std::string metrics_json(const EvalMetrics& m) {
    const char* dims[3] = {"sr", "pr", "ipa"};
    json cells;
    for (int t = 0; t < 2; ++t) {
        json row;
        for (int d = 0; d < 3; ++d) row[dims[d]] = cell_json(m.cells[t][d]);
        cells[t == 0 ? "type_i" : "type_ii"] = std::move(row);
    }
    json diag;
    for (int d = 0; d < 3; ++d) {
        const DiagStats& s = m.diagnostics[d];
        diag[dims[d]] =
            json{{"new_evidence_retrieved", rate_json(s.new_retrieved, s.answered)},
                 {"old_and_new_both_retrieved", rate_json(s.both_retrieved, s.answered)},
                 {"old_top1", rate_json(s.old_top1, s.answered)},
                 {"new_top1", rate_json(s.new_top1, s.answered)},
                 {"failure_despite_new_evidence",
                  rate_json(s.failed_with_new, s.new_retrieved)}};
    }
    json rec{{"kind", "metrics"},
             {"scenarios_total", m.scenarios_total},
             {"system_faults", m.system_faults},
             {"trace_depth", m.trace_depth},
             {"cells", std::move(cells)},
             {"diagnostics", std::move(diag)}};
    return rec.dump();
}

std::string metrics_text(const EvalMetrics& m) {
    std::ostringstream out;
    out << "Pass rates (type x dimension)\n";
    out << "  Type    SR       PR       IPA\n";
    const char* names[2] = {"Type I ", "Type II"};
    for (int t = 0; t < 2; ++t) {
        out << "  " << names[t];
        for (int d = 0; d < 3; ++d) out << "  " << cell_pct(m.cells[t][d]);
        out << "\n";
    }
    out << "\nRetrieval diagnostics (top-" << m.trace_depth << ")\n";
    out << "  Dim.  New evidence retrieved  Old & new both retrieved  "
           "Old evidence ranked top-1  New evidence ranked top-1  "
           "Failure despite new evidence\n";
    const char* dims[3] = {"SR ", "PR ", "IPA"};
    for (int d = 0; d < 3; ++d) {
        const DiagStats& s = m.diagnostics[d];
        out << "  " << dims[d] << "   " << pct(s.new_retrieved, s.answered) << "  "
            << pct(s.both_retrieved, s.answered) << "  " << pct(s.old_top1, s.answered) << "  "
            << pct(s.new_top1, s.answered) << "  " << pct(s.failed_with_new, s.new_retrieved)
            << "\n";
    }
    out << "\nScenarios: " << m.scenarios_total << ", system faults: " << m.system_faults << "\n";
    return out.str();
}

void write_suite(std::ostream& out, const std::vector<ScenarioRun>& runs) {
    for (const auto& run : runs) {
        out << scenario_record(run.scenario, run.haystack) << '\n';
        for (const auto& s : run.haystack.sessions) out << session_record(s) << '\n';
        out << probe_record(run.scenario.probes.sr) << '\n';
        out << probe_record(run.scenario.probes.pr) << '\n';
        out << probe_record(run.scenario.probes.ipa) << '\n';
    }
}

RecordFile read_records(std::istream& in) {
    RecordFile file;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("kind"))
            throw IoError("malformed record line");
        const std::string kind = rec.at("kind").get<std::string>();
        if (kind == "session")
            file.sessions.push_back(parse_session_record(line));
        else if (kind == "probe")
            file.probes.push_back(parse_probe_record(line));
    }
    return file;
}

}  // namespace cupmem
