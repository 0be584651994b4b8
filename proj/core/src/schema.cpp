#include "cupmem/schema.hpp"

#include <algorithm>
#include <set>

#include "cupmem/errors.hpp"
#include "cupmem/text.hpp"
#include "json_util.hpp"

namespace cupmem {

using detail::expect_keys;
using detail::json;
using detail::parse_json;
using detail::require_field;
using detail::require_string;

std::string Proposition::str() const {
    return (polarity == Polarity::Deny ? std::string("not ") : std::string()) +
           attribute.str() + "=" + value;
}

Proposition make_proposition(SlotRef attribute, const std::string& raw_value, Polarity polarity) {
    return Proposition{std::move(attribute), normalize_value(raw_value), polarity};
}

KnowledgeRuleSet::KnowledgeRuleSet(std::vector<KnowledgeRule> rules) : rules_(std::move(rules)) {}

const KnowledgeRule* KnowledgeRuleSet::find(const std::string& rule_id) const {
    for (const auto& r : rules_)
        if (r.id == rule_id) return &r;
    return nullptr;
}

namespace {

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

void require_identifier(const std::string& s, const std::string& what) {
    if (!valid_identifier(s))
        throw ValidationError("invalid " + what + " identifier '" + s + "'");
}

std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

StateSchema::StateSchema(std::string version,
                         std::vector<std::string> domains,
                         std::map<std::string, std::vector<SlotDecl>> slots,
                         std::vector<std::pair<std::string, std::string>> dependency_edges)
    : version_(std::move(version)),
      domains_(std::move(domains)),
      slots_(std::move(slots)),
      edges_(std::move(dependency_edges)) {
    if (version_.empty()) throw ValidationError("schema version is empty");
    if (domains_.empty()) throw ValidationError("schema declares zero domains");

    std::set<std::string> seen_domains;
    for (const auto& d : domains_) {
        require_identifier(d, "domain");
        if (!seen_domains.insert(d).second)
            throw ValidationError("duplicate domain '" + d + "'");
    }
    for (const auto& [domain, decls] : slots_) {
        if (!seen_domains.count(domain))
            throw ValidationError("slots declared for unknown domain '" + domain + "'");
        std::set<std::string> seen_slots;
        for (const auto& s : decls) {
            require_identifier(s.name, "slot");
            if (!seen_slots.insert(s.name).second)
                throw ValidationError("duplicate slot '" + s.name + "' in domain '" + domain + "'");
        }
    }
    std::set<std::pair<std::string, std::string>> seen_edges;
    for (const auto& [src, dst] : edges_) {
        if (!seen_domains.count(src))
            throw ValidationError("dependency edge source '" + src + "' is not a declared domain");
        if (!seen_domains.count(dst))
            throw ValidationError("dependency edge target '" + dst + "' is not a declared domain");
        if (src == dst)
            throw ValidationError("self dependency edge on '" + src + "'");
        if (!seen_edges.insert({src, dst}).second)
            throw ValidationError("duplicate dependency edge " + src + " -> " + dst);
    }
}

const std::vector<StateSchema::SlotDecl>& StateSchema::slots_of(const std::string& domain) const {
    auto it = slots_.find(domain);
    if (it == slots_.end()) {
        if (!has_domain(domain)) throw UnknownDomain("domain '" + domain + "' not declared");
        static const std::vector<SlotDecl> empty;
        return empty;
    }
    return it->second;
}

bool StateSchema::has_domain(const std::string& domain) const {
    return std::find(domains_.begin(), domains_.end(), domain) != domains_.end();
}

bool StateSchema::has_slot(const SlotRef& slot) const {
    auto it = slots_.find(slot.domain);
    if (it == slots_.end()) return false;
    for (const auto& s : it->second)
        if (s.name == slot.slot) return true;
    return false;
}

void StateSchema::require_slot(const SlotRef& slot) const {
    if (!has_slot(slot)) throw UnknownSlot("slot '" + slot.str() + "' not declared");
}

Cardinality StateSchema::slot_cardinality(const SlotRef& slot) const {
    auto it = slots_.find(slot.domain);
    if (it != slots_.end())
        for (const auto& s : it->second)
            if (s.name == slot.slot) return s.cardinality;
    throw UnknownSlot("slot '" + slot.str() + "' not declared");
}

std::vector<std::string> StateSchema::dependency_neighbors(const std::string& domain) const {
    if (!has_domain(domain)) throw UnknownDomain("domain '" + domain + "' not declared");
    std::vector<std::string> out;
    for (const auto& [src, dst] : edges_)
        if (src == domain) out.push_back(dst);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint64_t StateSchema::structural_hash() const {
    std::uint64_t h = fnv1a(version_);
    for (const auto& d : domains_) {
        h = fnv1a(d + ";", h);
        for (const auto& s : slots_of(d))
            h = fnv1a(s.name + "#" + to_string(s.cardinality), h);
    }
    for (const auto& [src, dst] : edges_) h = fnv1a(src + ">" + dst, h);
    return h;
}

namespace {

Cardinality parse_cardinality(const std::string& s, const std::string& where) {
    if (s == "single") return Cardinality::Single;
    if (s == "multi") return Cardinality::Multi;
    throw ValidationError("bad cardinality '" + s + "' in " + where + " (expected single|multi)");
}

SlotRef parse_slot_ref(const json& v, const std::string& where) {
    expect_keys(v, {"domain", "slot"}, where);
    return SlotRef{require_string(v, "domain", where), require_string(v, "slot", where)};
}

void require_pattern(const std::string& p, const std::string& where) {
    if (p.empty()) throw ValidationError("empty pattern in " + where);
}

std::vector<std::string> optional_examples(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return {};
    std::vector<std::string> out;
    for (const auto& v : *it) out.push_back(normalize_value(v.get<std::string>()));
    return out;
}

}  // namespace

StateSchema load_schema(const std::string& document) {
    json doc = parse_json(document, "schema document");
    expect_keys(doc, {"version", "domains", "dependency_edges", "knowledge_rules"},
                "schema document");

    std::string version = require_string(doc, "version", "schema document");

    const json& domains_node = require_field(doc, "domains", "schema document");
    if (!domains_node.is_array()) throw ParseError("'domains' is not an array");

    std::vector<std::string> domains;
    std::map<std::string, std::vector<StateSchema::SlotDecl>> slots;
    for (const auto& d : domains_node) {
        expect_keys(d, {"name", "slots"}, "domain");
        std::string name = require_string(d, "name", "domain");
        const json& slots_node = require_field(d, "slots", "domain '" + name + "'");
        if (!slots_node.is_array()) throw ParseError("'slots' of '" + name + "' is not an array");
        std::vector<StateSchema::SlotDecl> decls;
        for (const auto& s : slots_node) {
            expect_keys(s, {"name", "cardinality"}, "slot of '" + name + "'");
            std::string slot_name = require_string(s, "name", "slot");
            std::string card = require_string(s, "cardinality", "slot '" + slot_name + "'");
            decls.push_back({slot_name, parse_cardinality(card, "slot '" + slot_name + "'")});
        }
        domains.push_back(name);
        slots.emplace(std::move(name), std::move(decls));
    }

    std::vector<std::pair<std::string, std::string>> edges;
    if (auto it = doc.find("dependency_edges"); it != doc.end()) {
        if (!it->is_array()) throw ParseError("'dependency_edges' is not an array");
        for (const auto& e : *it) {
            expect_keys(e, {"source", "target"}, "dependency edge");
            edges.emplace_back(require_string(e, "source", "dependency edge"),
                               require_string(e, "target", "dependency edge"));
        }
    }

    return StateSchema(std::move(version), std::move(domains), std::move(slots), std::move(edges));
}

KnowledgeRuleSet load_knowledge(const std::string& document, const StateSchema& schema) {
    json doc = parse_json(document, "knowledge document");
    expect_keys(doc, {"version", "domains", "dependency_edges", "knowledge_rules"},
                "knowledge document");

    auto rules_it = doc.find("knowledge_rules");
    if (rules_it == doc.end()) return KnowledgeRuleSet{};
    if (!rules_it->is_array()) throw ParseError("'knowledge_rules' is not an array");

    std::set<std::string> seen_ids;
    std::vector<KnowledgeRule> rules;
    for (const auto& r : *rules_it) {
        KnowledgeRule rule;
        rule.id = require_string(r, "id", "knowledge rule");
        require_identifier(rule.id, "rule");
        if (!seen_ids.insert(rule.id).second)
            throw ValidationError("duplicate rule id '" + rule.id + "'");

        std::string kind = require_string(r, "kind", "rule '" + rule.id + "'");
        const std::string where = "rule '" + rule.id + "'";
        if (kind == "incompat_same_slot") {
            rule.kind = KnowledgeRule::Kind::IncompatSameSlot;
            expect_keys(r, {"id", "kind", "slot", "patterns", "a_examples", "b_examples"}, where);
            rule.slot = parse_slot_ref(require_field(r, "slot", where), where);
            schema.require_slot(rule.slot);
            const json& pats = require_field(r, "patterns", where);
            if (!pats.is_array() || pats.size() != 2)
                throw ValidationError("'patterns' of " + where + " must hold exactly two patterns");
            rule.pattern_a = pats[0].get<std::string>();
            rule.pattern_b = pats[1].get<std::string>();
            require_pattern(rule.pattern_a, where);
            require_pattern(rule.pattern_b, where);
            rule.source_examples = optional_examples(r, "a_examples");
            rule.target_examples = optional_examples(r, "b_examples");
        } else if (kind == "dependency") {
            rule.kind = KnowledgeRule::Kind::Dependency;
            expect_keys(r,
                        {"id", "kind", "source", "source_pattern", "target", "target_pattern",
                         "source_examples", "target_examples"},
                        where);
            rule.source_slot = parse_slot_ref(require_field(r, "source", where), where);
            rule.target_slot = parse_slot_ref(require_field(r, "target", where), where);
            schema.require_slot(rule.source_slot);
            schema.require_slot(rule.target_slot);
            rule.source_pattern = require_string(r, "source_pattern", where);
            rule.target_pattern = require_string(r, "target_pattern", where);
            require_pattern(rule.source_pattern, where);
            require_pattern(rule.target_pattern, where);
            if (rule.source_slot.domain != rule.target_slot.domain) {
                auto neighbors = schema.dependency_neighbors(rule.source_slot.domain);
                if (std::find(neighbors.begin(), neighbors.end(), rule.target_slot.domain) ==
                    neighbors.end())
                    throw ValidationError(where + " crosses domains without a declared edge " +
                                          rule.source_slot.domain + " -> " +
                                          rule.target_slot.domain);
            }
            rule.source_examples = optional_examples(r, "source_examples");
            rule.target_examples = optional_examples(r, "target_examples");
        } else {
            throw ValidationError("unknown rule kind '" + kind + "' in " + where);
        }
        rules.push_back(std::move(rule));
    }
    return KnowledgeRuleSet(std::move(rules));
}

const char* to_string(Cardinality c) {
    return c == Cardinality::Single ? "single" : "multi";
}

const char* to_string(Polarity p) {
    return p == Polarity::Assert ? "assert" : "deny";
}

const char* to_string(KnowledgeRule::Kind k) {
    return k == KnowledgeRule::Kind::IncompatSameSlot ? "incompat_same_slot" : "dependency";
}

}  // namespace cupmem
