#pragma once
// The typed two-level state space: state domains, local slots with
// cardinalities, dependency edges between domains, and the declarative
// world-knowledge rule set that drives conflict reasoning.
//
// Schemas are immutable after load and safe to share across threads.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cupmem {

struct SlotRef {
    std::string domain;
    std::string slot;

    auto operator<=>(const SlotRef&) const = default;
    std::string str() const { return domain + "/" + slot; }
};

enum class Cardinality { Single, Multi };

enum class Polarity { Assert, Deny };

// A normalized state proposition: slot = value (or its explicit denial,
// which exists only for the conflict oracle's explicitness screening).
struct Proposition {
    SlotRef attribute;
    std::string value;                          // non-empty, lowercase, trimmed
    Polarity polarity = Polarity::Assert;

    auto operator<=>(const Proposition&) const = default;
    std::string str() const;
};

Proposition make_proposition(SlotRef attribute, const std::string& raw_value,
                             Polarity polarity = Polarity::Assert);

struct KnowledgeRule {
    enum class Kind { IncompatSameSlot, Dependency };

    std::string id;
    Kind kind = Kind::Dependency;

    // IncompatSameSlot: two values of one slot are mutually incompatible
    // when one matches pattern_a and the other pattern_b.
    SlotRef slot;
    std::string pattern_a;
    std::string pattern_b;

    // Dependency: an update matching source_pattern on source_slot
    // invalidates beliefs matching target_pattern on target_slot.
    SlotRef source_slot;
    std::string source_pattern;
    SlotRef target_slot;
    std::string target_pattern;

    // Exemplar values for the scenario generator; ignored by the engine.
    std::vector<std::string> source_examples;
    std::vector<std::string> target_examples;
};

class KnowledgeRuleSet {
public:
    KnowledgeRuleSet() = default;
    explicit KnowledgeRuleSet(std::vector<KnowledgeRule> rules);

    const std::vector<KnowledgeRule>& rules() const { return rules_; }
    const KnowledgeRule* find(const std::string& rule_id) const;
    bool empty() const { return rules_.empty(); }

private:
    std::vector<KnowledgeRule> rules_;
};

class StateSchema {
public:
    struct SlotDecl {
        std::string name;
        Cardinality cardinality;
    };

    StateSchema(std::string version,
                std::vector<std::string> domains,
                std::map<std::string, std::vector<SlotDecl>> slots,
                std::vector<std::pair<std::string, std::string>> dependency_edges);

    const std::string& version() const { return version_; }
    const std::vector<std::string>& domains() const { return domains_; }
    const std::vector<SlotDecl>& slots_of(const std::string& domain) const;
    const std::vector<std::pair<std::string, std::string>>& dependency_edges() const {
        return edges_;
    }

    bool has_domain(const std::string& domain) const;
    bool has_slot(const SlotRef& slot) const;
    void require_slot(const SlotRef& slot) const;  // throws UnknownSlot

    Cardinality slot_cardinality(const SlotRef& slot) const;

    // Targets of dependency edges whose source is `domain`, sorted, unique.
    std::vector<std::string> dependency_neighbors(const std::string& domain) const;

    // Order-sensitive structural fingerprint; used to assert immutability.
    std::uint64_t structural_hash() const;

private:
    std::string version_;
    std::vector<std::string> domains_;
    std::map<std::string, std::vector<SlotDecl>> slots_;
    std::vector<std::pair<std::string, std::string>> edges_;
};

// Parses and validates a schema document (see README for the file format).
// Throws ParseError on malformed input, ValidationError naming the
// offending identifier on invariant violations.
StateSchema load_schema(const std::string& document);

// Parses the knowledge_rules section of a document and validates every
// rule against the schema (declared slots, patterns, dependency edges).
KnowledgeRuleSet load_knowledge(const std::string& document, const StateSchema& schema);

// The built-in default: the ten-domain user-state schema with its
// dependency edges and rule set. Parseable by load_schema/load_knowledge.
const std::string& default_schema_document();

const char* to_string(Cardinality c);
const char* to_string(Polarity p);
const char* to_string(KnowledgeRule::Kind k);

}  // namespace cupmem
