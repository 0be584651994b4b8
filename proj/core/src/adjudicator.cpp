#include "cupmem/adjudicator.hpp"

#include <algorithm>
#include <set>

#include "cupmem/errors.hpp"
#include "json_util.hpp"

#include <httplib.h>

namespace cupmem {

using detail::json;

std::vector<AdjudicationDecision> Adjudicator::decide_batch(
    const std::vector<AdjudicationContext>& contexts) {
    std::vector<AdjudicationDecision> out;
    out.reserve(contexts.size());
    for (const auto& c : contexts) out.push_back(decide(c));
    return out;
}

AdjudicationDecision RuleBasedAdjudicator::decide(const AdjudicationContext& context) {
    const RevisionProposal& p = context.proposal;

    switch (p.trigger_kind) {
        case TriggerKind::SingleSlotConflict: {
            std::set<std::string> values;
            for (const auto& u : p.supporting_updates)
                if (u.slot == context.old_item.slot) values.insert(u.value.value);
            if (values.size() == 1) {
                Proposition replacement{context.old_item.slot, *values.begin(),
                                        Polarity::Assert};
                return {AdjudicationDecision::Verdict::Replace, replacement,
                        "single slot superseded by '" + *values.begin() + "'"};
            }
            return {AdjudicationDecision::Verdict::Unknown, std::nullopt,
                    "single slot conflicted by " + std::to_string(values.size()) +
                        " distinct updates; replacement underdetermined"};
        }
        case TriggerKind::IncompatRule:
            return {AdjudicationDecision::Verdict::Stale, std::nullopt,
                    "incompatible with newer value under rule '" +
                        p.triggering_rule.value_or("?") + "'"};
        case TriggerKind::DependencyRule:
            return {AdjudicationDecision::Verdict::Unknown, std::nullopt,
                    "old default unsafe under rule '" + p.triggering_rule.value_or("?") +
                        "'; replacement underdetermined"};
        case TriggerKind::None:
            break;
    }
    return {AdjudicationDecision::Verdict::Keep, std::nullopt, "no firing condition"};
}

namespace {

class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::string endpoint) {
        // endpoint: http://host:port/path
        const std::string prefix = "http://";
        if (endpoint.rfind(prefix, 0) != 0)
            throw ValidationError("endpoint '" + endpoint + "' is not an http:// descriptor");
        std::string rest = endpoint.substr(prefix.size());
        auto slash = rest.find('/');
        host_ = prefix + (slash == std::string::npos ? rest : rest.substr(0, slash));
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    }

    std::optional<std::string> round_trip(const std::string& request_body,
                                          Duration timeout_sec) override {
        httplib::Client client(host_);
        client.set_connection_timeout(timeout_sec, 0);
        client.set_read_timeout(timeout_sec, 0);
        client.set_write_timeout(timeout_sec, 0);
        auto res = client.Post(path_, request_body, "application/json");
        if (!res || res->status != 200) return std::nullopt;
        return res->body;
    }

private:
    std::string host_;
    std::string path_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(const std::string& endpoint) {
    return std::make_shared<HttpTransport>(endpoint);
}

ExternalAdjudicator::ExternalAdjudicator(AdjudicatorConfig config,
                                         std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.timeout_sec <= 0) throw ValidationError("adjudicator timeout must be > 0");
    if (config_.max_retries < 0) throw ValidationError("adjudicator max_retries must be >= 0");
    if (!transport_) throw ValidationError("external adjudicator requires a transport");
}

std::string ExternalAdjudicator::encode_request(const AdjudicationContext& context) {
    json updates = json::array();
    for (const auto& u : context.proposal.supporting_updates) {
        updates.push_back(json{{"slot", u.slot.str()},
                               {"value", u.value.value},
                               {"timestamp", format_instant(u.timestamp)},
                               {"origin", to_string(u.origin)}});
    }
    json req{{"schema_version", context.schema_version},
             {"old_item",
              json{{"slot", context.old_item.slot.str()},
                   {"value", context.old_item.proposition.value},
                   {"timestamp", format_instant(context.old_item.provenance.timestamp)}}},
             {"updates", std::move(updates)},
             {"session_text", context.session_text.value_or("")},
             {"rationale_hint", context.proposal.rationale}};
    return req.dump();
}

std::optional<AdjudicationDecision> ExternalAdjudicator::parse_response(
    const std::string& body, const SlotRef& old_slot) {
    json res = json::parse(body, nullptr, false);
    if (res.is_discarded() || !res.is_object()) return std::nullopt;
    auto verdict_it = res.find("verdict");
    if (verdict_it == res.end() || !verdict_it->is_string()) return std::nullopt;

    const std::string verdict = verdict_it->get<std::string>();
    AdjudicationDecision decision;
    decision.rationale =
        res.contains("rationale") && res["rationale"].is_string()
            ? res["rationale"].get<std::string>()
            : "";

    if (verdict == "KEEP") {
        decision.verdict = AdjudicationDecision::Verdict::Keep;
    } else if (verdict == "STALE") {
        decision.verdict = AdjudicationDecision::Verdict::Stale;
    } else if (verdict == "UNKNOWN") {
        decision.verdict = AdjudicationDecision::Verdict::Unknown;
    } else if (verdict == "REPLACE") {
        decision.verdict = AdjudicationDecision::Verdict::Replace;
        auto rep = res.find("replacement");
        if (rep == res.end() || !rep->is_object() || !rep->contains("value") ||
            !(*rep)["value"].is_string())
            return std::nullopt;   // REPLACE without a replacement is a parse failure
        decision.replacement =
            make_proposition(old_slot, (*rep)["value"].get<std::string>());
    } else {
        return std::nullopt;       // unknown verdict strings are a parse failure
    }
    return decision;
}

AdjudicationDecision ExternalAdjudicator::decide(const AdjudicationContext& context) {
    const std::string request = encode_request(context);
    std::string failure = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        std::optional<std::string> body;
        try {
            body = transport_->round_trip(request, config_.timeout_sec);
        } catch (const std::exception& e) {
            body.reset();
            failure = std::string("transport threw: ") + e.what();
            continue;
        }
        if (!body) {
            failure = "transport timeout or failure on attempt " + std::to_string(attempt + 1);
            continue;
        }
        auto decision = parse_response(*body, context.old_item.slot);
        if (!decision) {
            failure = "unparsable verdict on attempt " + std::to_string(attempt + 1);
            continue;
        }
        return *decision;
    }
    AdjudicationDecision fallback;
    fallback.verdict = config_.fallback_verdict;
    fallback.rationale = "external adjudicator fallback after " +
                         std::to_string(config_.max_retries + 1) + " attempts: " + failure;
    return fallback;
}

std::unique_ptr<Adjudicator> make_adjudicator(const AdjudicatorConfig& config,
                                              const KnowledgeRuleSet& knowledge,
                                              const StateSchema& schema,
                                              std::shared_ptr<Transport> transport) {
    if (config.kind == AdjudicatorConfig::Kind::RuleBased)
        return std::make_unique<RuleBasedAdjudicator>(knowledge, schema);
    if (!transport) transport = make_http_transport(config.endpoint);
    return std::make_unique<ExternalAdjudicator>(config, std::move(transport));
}

}  // namespace cupmem
