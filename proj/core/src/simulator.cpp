#include "cupmem/simulator.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cupmem/errors.hpp"
#include "cupmem/text.hpp"

namespace cupmem {

std::uint64_t RandomStream::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t RandomStream::bounded(std::uint64_t n) {
    if (n == 0) return 0;
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
}

std::int64_t RandomStream::range(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw ValidationError("random range inverted");
    return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint64_t>(hi - lo) + 1));
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    RandomStream r(seed ^ (salt * 0x9e3779b97f4a7c15ull));
    return r.next();
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "the",  "i",     "me",    "my",    "we",    "our",   "us",
        "you",  "your", "it",   "its",   "they",  "their", "them",  "he",    "she",
        "is",   "are",  "was",  "were",  "be",    "been",  "being", "am",    "do",
        "does", "did",  "have", "has",   "had",   "can",   "could", "will",  "would",
        "shall","should","may", "might", "must",  "to",    "of",    "in",    "on",
        "at",   "by",   "for",  "from",  "with",  "about", "into",  "onto",  "over",
        "under","through","around","across","near","off",  "out",   "up",    "down",
        "and",  "or",   "but",  "so",    "if",    "as",    "than",  "then",  "that",
        "this", "these","those","there", "here",  "now",   "not",   "no",    "yet",
        "just", "still","very", "too",   "also",  "again", "most",  "more",  "any",
        "some", "all",  "each", "every", "how",   "what",  "when",  "where", "who",
        "which","why",  "since","given", "after", "before","while", "per",
    };
    return words;
}

}  // namespace

std::vector<std::string> content_tokens(const std::string& text) {
    std::vector<std::string> out;
    for (auto& t : token_set(text))
        if (!stopwords().count(t)) out.push_back(std::move(t));
    return out;
}

namespace {

bool tokens_intersect(const std::vector<std::string>& sorted_a,
                      const std::vector<std::string>& sorted_b) {
    for (const auto& t : sorted_a)
        if (std::binary_search(sorted_b.begin(), sorted_b.end(), t)) return true;
    return false;
}

std::vector<std::string> introduced_tokens(const std::string& new_text,
                                           const std::string& old_text) {
    auto new_tokens = content_tokens(new_text);
    auto old_tokens = content_tokens(old_text);
    std::vector<std::string> out;
    for (const auto& t : new_tokens)
        if (!std::binary_search(old_tokens.begin(), old_tokens.end(), t)) out.push_back(t);
    return out;
}

std::string spoken(const std::string& value) {
    std::string out = value;
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

std::string render(const std::string& tmpl, const std::string& value) {
    std::string out = tmpl;
    const std::string key = "{v}";
    auto pos = out.find(key);
    while (pos != std::string::npos) {
        out.replace(pos, key.size(), spoken(value));
        pos = out.find(key, pos);
    }
    return out;
}

// Utterance and probe templates per slot. The tagged spans are the
// authoritative signal; this text is surface realization around them.
struct SlotVoice {
    std::string old_stmt;
    std::string new_stmt;
    std::string sr;
    std::string pr;
    std::string ipa;
};

const std::map<SlotRef, SlotVoice>& voices() {
    static const std::map<SlotRef, SlotVoice> table = {
        {{"location_and_living", "current_base_location"},
         {"i have been based in {v} for the last few years and i know my neighborhood inside out",
          "just signed a lease and finished setting up utilities at a place in {v}",
          "based on the conversation history, is the user still based in {v}",
          "since the user is based in {v}, suggest a relaxed weekend itinerary of local favorites for them",
          "can you map out a simple route for my saturday errands close to home"}},
        {{"routine_and_transport", "current_commute_mode"},
         {"my daily commute to work is by {v} and i honestly enjoy the ride every morning",
          "switched things up recently, these days i get to the office by {v}",
          "based on the conversation history, does the user still commute by {v}",
          "since the user commutes by {v} every day, assemble a quick maintenance checklist for that routine",
          "i have an in person meeting at headquarters tomorrow morning, what is the best way for me to get there"}},
        {{"weather_and_environment", "current_weather_pattern"},
         {"we have had a {v} here for weeks now and i adjusted my whole setup to it",
          "the {v} rolled in and completely changed the mood outside",
          "based on the conversation history, is the user still dealing with the {v}",
          "since the user is living through a {v}, recommend a way they could prep their balcony",
          "what should i prioritize around the house this weekend"}},
        {{"stable_preferences", "enduring_preference"},
         {"i have kept a {v} lifestyle for years and it genuinely suits me",
          "our {v} has become the highlight at our place lately",
          "based on the conversation history, does the user still keep a {v} lifestyle",
          "since the user keeps a {v} lifestyle, compose a week of recipes that fit it",
          "put together a grocery list for my next few days of meals"}},
        {{"health_and_mobility", "health_linked_adjustment"},
         {"my {v} is going strong and i have not missed a session yet",
          "physician put me under {v} indefinitely",
          "based on the conversation history, is the user still following their {v}",
          "given that the user follows a {v}, map out their sessions for the coming two weeks",
          "sketch a simple daily wellness checklist for me for the month ahead"}},
        {{"work_and_schedule", "standing_commitment_or_availability"},
         {"i protect my {v} no matter what else lands on the calendar",
          "my {v} is the new anchor of the week",
          "based on the conversation history, does the user still keep up their {v}",
          "given that the user protects their {v}, block out matching plans for them next month",
          "help me sketch a plan for my free evenings next week"}},
        {{"current_focus_and_goals", "short_horizon_goal"},
         {"i am steadily putting money aside, the plan is to {v} by early next year",
          "{v} moved to the top of my list",
          "based on the conversation history, is the user still planning to {v}",
          "since the user plans to {v}, draft a simple milestone checklist for them",
          "help me lay out my top priorities for this quarter"}},
        // Source-side voices: only the new-statement template is used.
        {{"health_and_mobility", "functional_limitation"},
         {"my {v} has shaped my routine for a long while",
          "the doctor says my {v} needs at least six more weeks to heal properly",
          "based on the conversation history, does the user still have the {v}",
          "since the user manages a {v}, outline gentle exercises suited to them",
          "draft a light activity plan for my week"}},
        {{"weather_and_environment", "environmental_condition"},
         {"the {v} has been part of daily life here for a long time",
          "been sweeping red grit off the stucco lately and the {v} shows no sign of easing",
          "based on the conversation history, is the user still dealing with the {v}",
          "since the user deals with the {v}, suggest one practical adjustment",
          "what small home fixes should i tackle this month"}},
        {{"work_and_schedule", "work_transition_or_change"},
         {"my {v} has settled into a steady rhythm",
          "started a {v} at work recently and my sleep is catching up slowly",
          "based on the conversation history, is the user still going through the {v}",
          "since the user began a {v}, outline a settling in checklist",
          "help me plan a realistic work week"}},
        {{"finance_and_resources", "financial_constraint"},
         {"the {v} has shaped our budget for a while",
          "we are budgeting hard because the {v} landed on us this spring",
          "based on the conversation history, is the user still dealing with the {v}",
          "since the user faces a {v}, outline one way to ease it",
          "help me review my spending categories"}},
    };
    return table;
}

struct SingleSlotPool {
    SlotRef slot;
    std::vector<std::string> values;
};

const std::vector<SingleSlotPool>& single_slot_pools() {
    static const std::vector<SingleSlotPool> pools = {
        {{"location_and_living", "current_base_location"},
         {"seattle", "portland", "austin", "denver", "chicago", "boston", "miami", "phoenix"}},
        {{"routine_and_transport", "current_commute_mode"},
         {"bicycle", "car", "train", "bus", "subway"}},
        {{"weather_and_environment", "current_weather_pattern"},
         {"steady_rain_spell", "clear_sky_stretch", "snowfall_streak", "gusty_wind_spell"}},
    };
    return pools;
}

Observation single_assertion(const std::string& session_id, Instant t, const Proposition& p) {
    Observation obs;
    obs.session_id = session_id;
    obs.timestamp = t;
    obs.assertions.push_back(p);
    obs.flags.mentions.insert(p.attribute);
    return obs;
}

Probe make_probe(const std::string& id, ProbeDimension dim, std::string text,
                 const Scenario& scenario) {
    Probe p;
    p.id = id;
    p.dimension = dim;
    p.text = std::move(text);
    switch (dim) {
        case ProbeDimension::SR:
            p.intent = "validate_state";
            p.action = "answer_validity";
            p.presupposed = {scenario.old_value};
            break;
        case ProbeDimension::PR:
            p.intent = "follow_up_task";
            p.action = "produce_plan";
            p.presupposed = {scenario.old_value};
            break;
        case ProbeDimension::IPA:
            p.intent = "downstream_task";
            p.action = "produce_recommendation";
            p.basis_slots = {scenario.target_slot};
            break;
    }
    return p;
}

}  // namespace

Scenario generate_scenario(std::uint64_t seed, const StateSchema& schema,
                           const KnowledgeRuleSet& knowledge, ConflictType type) {
    if (type == ConflictType::None)
        throw ValidationError("cannot generate a NONE scenario");

    RandomStream rng(mix_seed(seed, type == ConflictType::TypeI ? 1 : 2));

    struct TypeIVariant {
        SlotRef slot;
        std::vector<std::string> old_pool;
        std::vector<std::string> new_pool;   // empty: draw both from old_pool
        std::optional<std::string> rule_id;
    };

    std::vector<TypeIVariant> type1;
    for (const auto& pool : single_slot_pools()) {
        if (!schema.has_slot(pool.slot) || !voices().count(pool.slot)) continue;
        if (schema.slot_cardinality(pool.slot) != Cardinality::Single) continue;
        type1.push_back({pool.slot, pool.values, {}, std::nullopt});
    }
    for (const auto& rule : knowledge.rules()) {
        if (rule.kind != KnowledgeRule::Kind::IncompatSameSlot) continue;
        if (rule.source_examples.empty() || rule.target_examples.empty()) continue;
        if (!schema.has_slot(rule.slot) || !voices().count(rule.slot)) continue;
        type1.push_back({rule.slot, rule.source_examples, rule.target_examples, rule.id});
    }

    struct TypeIIVariant {
        const KnowledgeRule* rule;
    };
    std::vector<TypeIIVariant> type2;
    for (const auto& rule : knowledge.rules()) {
        if (rule.kind != KnowledgeRule::Kind::Dependency) continue;
        if (rule.source_slot == rule.target_slot) continue;
        if (rule.source_examples.empty() || rule.target_examples.empty()) continue;
        if (!schema.has_slot(rule.source_slot) || !schema.has_slot(rule.target_slot)) continue;
        if (!voices().count(rule.source_slot) || !voices().count(rule.target_slot)) continue;
        bool usable = false;
        for (const auto& s : rule.source_examples)
            for (const auto& t : rule.target_examples)
                if (pattern_match(rule.source_pattern, s) && pattern_match(rule.target_pattern, t))
                    usable = true;
        if (usable) type2.push_back({&rule});
    }

    const int max_attempts = 32;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Scenario sc;
        sc.conflict_type = type;

        if (type == ConflictType::TypeI) {
            if (type1.empty())
                throw GenerationExhausted("no TYPE_I variant is available under this schema");
            const TypeIVariant& v = type1[rng.bounded(type1.size())];
            sc.target_slot = v.slot;
            sc.rule_id = v.rule_id;
            std::string old_value, new_value;
            if (v.new_pool.empty()) {
                const std::size_t oi = rng.bounded(v.old_pool.size());
                const std::size_t ni = (oi + 1 + rng.bounded(v.old_pool.size() - 1)) %
                                       v.old_pool.size();
                old_value = v.old_pool[oi];
                new_value = v.old_pool[ni];
            } else {
                old_value = v.old_pool[rng.bounded(v.old_pool.size())];
                new_value = v.new_pool[rng.bounded(v.new_pool.size())];
            }
            sc.old_value = make_proposition(v.slot, old_value);
            sc.new_value = make_proposition(v.slot, new_value);
        } else {
            if (type2.empty())
                throw GenerationExhausted(
                    "no dependency rule admits TYPE_II generation (empty or unusable rule set)");
            const KnowledgeRule& rule = *type2[rng.bounded(type2.size())].rule;
            std::vector<std::string> sources, targets;
            for (const auto& s : rule.source_examples)
                if (pattern_match(rule.source_pattern, s)) sources.push_back(s);
            for (const auto& t : rule.target_examples)
                if (pattern_match(rule.target_pattern, t)) targets.push_back(t);
            sc.target_slot = rule.target_slot;
            sc.upstream_slot = rule.source_slot;
            sc.rule_id = rule.id;
            sc.old_value = make_proposition(rule.target_slot, targets[rng.bounded(targets.size())]);
            sc.new_value = make_proposition(rule.source_slot, sources[rng.bounded(sources.size())]);
        }

        const SlotVoice& target_voice = voices().at(sc.target_slot);
        const SlotVoice& new_voice =
            voices().at(type == ConflictType::TypeI ? sc.target_slot : *sc.upstream_slot);
        sc.old_text = render(target_voice.old_stmt, sc.old_value.value);
        sc.new_text = render(new_voice.new_stmt, sc.new_value.value);

        char idbuf[64];
        std::snprintf(idbuf, sizeof(idbuf), "scn-t%d-%016llx",
                      type == ConflictType::TypeI ? 1 : 2,
                      static_cast<unsigned long long>(seed));
        sc.id = idbuf;

        sc.gap = days(30) + static_cast<Duration>(rng.bounded(days(150) + 1));
        sc.m_old = single_assertion(sc.id + "-old", 0, sc.old_value);
        sc.m_new = single_assertion(sc.id + "-new", sc.gap, sc.new_value);

        // Oracle validation of the pair at the declared type.
        ConflictWitness w = classify_conflict({sc.m_old, sc.m_new}, 0, 1, knowledge, schema);
        if (w.kind != type || w.target_slot != sc.target_slot) continue;

        sc.probes.sr = make_probe(sc.id + "-sr", ProbeDimension::SR,
                                  render(target_voice.sr, sc.old_value.value), sc);
        sc.probes.pr = make_probe(sc.id + "-pr", ProbeDimension::PR,
                                  render(target_voice.pr, sc.old_value.value), sc);
        sc.probes.ipa = make_probe(sc.id + "-ipa", ProbeDimension::IPA, target_voice.ipa, sc);

        // Zero leakage: nothing the new utterance introduced may appear in
        // the adversarial probe; the implicit probe names neither value.
        auto introduced = introduced_tokens(sc.new_text, sc.old_text);
        auto pr_tokens = content_tokens(sc.probes.pr.text);
        std::sort(introduced.begin(), introduced.end());
        if (tokens_intersect(pr_tokens, introduced)) continue;
        auto ipa_tokens = content_tokens(sc.probes.ipa.text);
        std::sort(ipa_tokens.begin(), ipa_tokens.end());
        if (tokens_intersect(content_tokens(sc.old_value.value), ipa_tokens)) continue;
        if (tokens_intersect(content_tokens(sc.new_value.value), ipa_tokens)) continue;

        sc.ground_truth.old_invalid_after_new = true;
        sc.ground_truth.expected_sr = SrState::NoLongerValid;
        sc.ground_truth.expected_pr = PrState::PremiseRejected;
        if (type == ConflictType::TypeI) sc.ground_truth.expected_replacement = sc.new_value;

        return sc;
    }
    throw GenerationExhausted("no valid scenario after " + std::to_string(max_attempts) +
                              " attempts for seed " + std::to_string(seed));
}

namespace {

Session make_distractor(const std::string& id, const std::string& text,
                        std::optional<TaggedSpan> span) {
    Session s;
    s.session_id = id;
    s.kind = SessionKind::Distractor;
    Turn user{"user", text, {}};
    if (span) user.spans.push_back(*span);
    s.turns.push_back(std::move(user));
    s.turns.push_back(Turn{"assistant", "happy to help with that, noted.", {}});
    return s;
}

}  // namespace

const std::vector<Session>& builtin_distractor_pool() {
    static const std::vector<Session> pool = [] {
        std::vector<Session> out;
        const SlotRef skill{"identity_and_background", "skill_or_language_background"};
        const SlotRef habit{"stable_preferences", "habitual_choice_pattern"};
        const SlotRef focus{"current_focus_and_goals", "current_primary_focus"};

        auto add_span = [&out](const SlotRef& slot, const std::string& value,
                               const std::string& text) {
            out.push_back(make_distractor("pool-" + std::to_string(out.size()), text,
                                          TaggedSpan{slot, value, false, false}));
        };
        auto add_chat = [&out](const std::string& text) {
            out.push_back(
                make_distractor("pool-" + std::to_string(out.size()), text, std::nullopt));
        };

        add_span(skill, "learning_spanish", "been chipping away at learning spanish, any drills you recommend");
        add_span(skill, "pottery_wheel_classes", "my pottery wheel classes are getting serious, glazing is hard");
        add_span(skill, "amateur_astronomy", "amateur astronomy is my thing lately, saturn was stunning");
        add_span(skill, "chess_league_membership", "joined a chess league membership and the openings are humbling");
        add_span(skill, "jazz_piano_practice", "jazz piano practice is slow going but the chords finally click");
        add_span(skill, "archery_lessons", "archery lessons started this season and my grouping is improving");
        add_span(habit, "sunday_meal_prep", "sunday meal prep keeps my fridge sane, need fresh container ideas");
        add_span(habit, "evening_journaling", "evening journaling has become a fixture, prompts would help");
        add_span(habit, "saturday_farmers_market", "the saturday farmers market run is sacred, what is in season");
        add_span(habit, "nightly_reading_hour", "my nightly reading hour needs a new novel, something cozy");
        add_span(habit, "weekly_board_games", "weekly board games with neighbors, we need a four player pick");
        add_span(focus, "photo_archive_cleanup", "deep in a photo archive cleanup, tagging conventions welcome");
        add_span(focus, "balcony_garden_revamp", "my balcony garden revamp needs hardy herbs that forgive neglect");
        add_span(focus, "family_recipe_scanning", "family recipe scanning project continues, grandma wrote tiny");
        add_span(focus, "old_laptop_refurbish", "an old laptop refurbish is underway, which lightweight system");
        add_span(focus, "neighborhood_cleanup_crew", "organizing a neighborhood cleanup crew, checklist suggestions");
        add_chat("any tips for keeping houseplants happy through the winter months");
        add_chat("what is a sensible way to organize thousands of digital photos");
        add_chat("recommend a couple of podcasts that make history feel alive");
        add_chat("ideas for a low effort weeknight dinner rotation would be great");
        add_chat("how do people stay focused when reading dense nonfiction");
        add_chat("what makes a good beginner friendly birdwatching guide");
        add_chat("looking for board game suggestions that play well with two");
        add_chat("what stretches help after sitting at a desk all day");
        return out;
    }();
    return pool;
}

bool distractor_safe(const Scenario& scenario, const Session& candidate,
                     const KnowledgeRuleSet& knowledge, const StateSchema& schema) {
    Observation obs = to_observation(candidate);
    for (const auto& turn : candidate.turns)
        for (const auto& span : turn.spans)
            if (span.slot == scenario.target_slot) return false;

    // The distractor must not invalidate the old belief...
    if (belief_incompatible(scenario.old_value, obs.assertions, knowledge, schema))
        return false;
    // ...and the evidence pair must not invalidate the distractor, nor the
    // distractor the new evidence; otherwise conflict attribution would be
    // ambiguous.
    for (const auto& b : obs.assertions) {
        if (fires_against(b, scenario.old_value, knowledge, schema)) return false;
        for (const auto& u : scenario.m_new.assertions)
            if (fires_against(b, u, knowledge, schema)) return false;
        for (const auto& u : scenario.m_new.assertions)
            if (fires_against(u, b, knowledge, schema)) return false;
        if (fires_against(scenario.old_value, b, knowledge, schema)) return false;
    }
    return true;
}

Haystack build_haystack(const Scenario& scenario, const std::vector<Session>& pool,
                        std::size_t n_sessions, std::uint64_t seed,
                        const KnowledgeRuleSet& knowledge, const StateSchema& schema) {
    if (n_sessions < 2)
        throw ValidationError("haystack needs at least the two evidence sessions");

    for (const auto& s : pool)
        if (!distractor_safe(scenario, s, knowledge, schema))
            throw UnsafeDistractor("pool session '" + s.session_id +
                                   "' interferes with the target belief of scenario " +
                                   scenario.id);

    const std::size_t need = n_sessions - 2;

    // Deduplicate by surface content.
    std::vector<const Session*> unique_pool;
    std::set<std::string> seen;
    for (const auto& s : pool) {
        std::string sig;
        for (const auto& t : s.turns) {
            sig += t.text;
            for (const auto& sp : t.spans) sig += "|" + sp.slot.str() + "=" + sp.value;
        }
        if (seen.insert(sig).second) unique_pool.push_back(&s);
    }
    if (unique_pool.size() < need)
        throw PoolTooSmall("need " + std::to_string(need) + " distractors, pool holds " +
                           std::to_string(unique_pool.size()));

    RandomStream rng(mix_seed(seed, 7));

    // Deterministic partial Fisher-Yates sample without replacement.
    std::vector<std::size_t> idx(unique_pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < need; ++i) {
        std::size_t j = i + rng.bounded(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }

    const std::size_t half = n_sessions / 2;
    const std::size_t old_pos = rng.bounded(half);
    const std::size_t new_pos = half + rng.bounded(n_sessions - half);

    Haystack hs;
    hs.old_index = old_pos;
    hs.new_index = new_pos;

    std::size_t next_distractor = 0;
    for (std::size_t pos = 0; pos < n_sessions; ++pos) {
        char sid[64];
        std::snprintf(sid, sizeof(sid), "%s-s%02zu", scenario.id.c_str(), pos);
        if (pos == old_pos) {
            Session s;
            s.session_id = sid;
            s.kind = SessionKind::OldEvidence;
            s.turns.push_back(Turn{"user", scenario.old_text,
                                   {TaggedSpan{scenario.target_slot, scenario.old_value.value,
                                               false, false}}});
            s.turns.push_back(Turn{"assistant", "thanks for sharing, i will keep that in mind.", {}});
            hs.sessions.push_back(std::move(s));
        } else if (pos == new_pos) {
            Session s;
            s.session_id = sid;
            s.kind = SessionKind::NewEvidence;
            const SlotRef span_slot = scenario.conflict_type == ConflictType::TypeII
                                          ? *scenario.upstream_slot
                                          : scenario.target_slot;
            s.turns.push_back(Turn{
                "user", scenario.new_text,
                {TaggedSpan{span_slot, scenario.new_value.value, false, false}}});
            s.turns.push_back(Turn{"assistant", "understood, noting the update.", {}});
            hs.sessions.push_back(std::move(s));
        } else {
            Session s = *unique_pool[idx[next_distractor++]];
            s.session_id = sid;
            hs.sessions.push_back(std::move(s));
        }
    }
    return hs;
}

void schedule_timestamps(Haystack& haystack, const GapSpec& gap, int target_year,
                         std::uint64_t seed) {
    if (gap.min_gap > gap.max_gap) throw ValidationError("gap spec has min above max");
    if (gap.min_gap < 0) throw ValidationError("gap spec is negative");
    const std::size_t n = haystack.sessions.size();
    if (n < 2 || haystack.old_index >= haystack.new_index || haystack.new_index >= n)
        throw ValidationError("haystack indices are malformed");

    RandomStream rng(mix_seed(seed, 11));
    const Duration g =
        gap.min_gap + static_cast<Duration>(rng.bounded(
                          static_cast<std::uint64_t>(gap.max_gap - gap.min_gap) + 1));

    const std::size_t between = haystack.new_index - haystack.old_index - 1;
    if (g < static_cast<Duration>(between + 1) * 4)
        throw InfeasibleSchedule("gap of " + std::to_string(g) +
                                 "s cannot hold " + std::to_string(between) +
                                 " intermediate sessions");

    const std::size_t pre = haystack.old_index;
    const std::size_t post = n - 1 - haystack.new_index;
    const Instant lo = year_start(target_year) + static_cast<Duration>(pre) * days(3) + hours(9);
    const Instant hi = year_end(target_year) - g - static_cast<Duration>(post) * days(3) -
                       days(31) - hours(9);
    if (hi < lo)
        throw InfeasibleSchedule("gap larger than the representable span of year " +
                                 std::to_string(target_year));

    std::vector<Instant> ts(n, 0);
    const Instant t_old = lo + static_cast<Duration>(rng.bounded(
                                   static_cast<std::uint64_t>(hi - lo) + 1));
    const Instant t_new = t_old + g;
    ts[haystack.old_index] = t_old;
    ts[haystack.new_index] = t_new;

    for (std::size_t i = haystack.old_index; i-- > 0;)
        ts[i] = ts[i + 1] - days(1) - static_cast<Duration>(rng.bounded(days(2)));

    if (between > 0) {
        const Duration seg = g / static_cast<Duration>(between + 1);
        for (std::size_t j = 1; j <= between; ++j) {
            const Duration jitter =
                static_cast<Duration>(rng.bounded(static_cast<std::uint64_t>(seg / 2) + 1)) -
                seg / 4;
            ts[haystack.old_index + j] = t_old + seg * static_cast<Duration>(j) + jitter;
        }
    }

    for (std::size_t i = haystack.new_index + 1; i < n; ++i)
        ts[i] = ts[i - 1] + days(1) + static_cast<Duration>(rng.bounded(days(2)));

    haystack.query_time = ts[n - 1] + days(1) + static_cast<Duration>(rng.bounded(days(29)));

    for (std::size_t i = 0; i + 1 < n; ++i)
        if (ts[i] >= ts[i + 1])
            throw InfeasibleSchedule("schedule is not strictly monotone at index " +
                                     std::to_string(i));
    if (haystack.query_time <= ts[n - 1])
        throw InfeasibleSchedule("query time does not follow the last session");

    for (std::size_t i = 0; i < n; ++i) haystack.sessions[i].timestamp = ts[i];
}

// ---- systems under test ----

EngineSystem::EngineSystem(std::shared_ptr<const StateSchema> schema,
                           const KnowledgeRuleSet& knowledge,
                           std::unique_ptr<Adjudicator> adjudicator, int global_k)
    : schema_(std::move(schema)),
      knowledge_(&knowledge),
      adjudicator_(std::move(adjudicator)),
      store_(schema_) {
    config_.schema = schema_.get();
    config_.knowledge = knowledge_;
    config_.extractor = &extractor_;
    config_.adjudicator = adjudicator_.get();
    config_.global_k = global_k;
}

void EngineSystem::ingest(const Session& session) {
    last_report_ = ingest_session(store_, session, config_);
}

GroundedAnswer EngineSystem::answer(const Probe& probe) {
    trace_.clear();
    for (const auto& [item, score] : store_.retrieve_lexical(tokenize(probe.text), 20)) {
        trace_.push_back(TraceEntry{item->id, item->slot, item->proposition.value, item->status,
                                    item->provenance.session_id, score});
    }
    return answer_query(store_, probe);
}

std::string EngineSystem::memory_fingerprint() const {
    return std::to_string(store_.fingerprint());
}

NaiveSystem::NaiveSystem(std::shared_ptr<const StateSchema> schema)
    : schema_(std::move(schema)) {}

void NaiveSystem::ingest(const Session& session) {
    for (const auto& turn : session.turns) {
        for (const auto& span : turn.spans) {
            if (span.historical || span.negation) continue;
            records_.push_back(Record{next_id_++, span.slot, normalize_value(span.value),
                                      session.session_id, session.timestamp, turn.text});
        }
    }
}

std::vector<std::pair<const NaiveSystem::Record*, double>> NaiveSystem::rank(
    const std::vector<std::string>& terms) const {
    std::vector<std::string> q = terms;
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());

    std::vector<std::pair<const Record*, double>> out;
    for (const auto& r : records_) {
        double score = 0.0;
        if (!q.empty()) {
            auto toks = token_set(r.value + " " + r.text);
            std::size_t hits = 0;
            for (const auto& t : q)
                if (std::binary_search(toks.begin(), toks.end(), t)) ++hits;
            score = static_cast<double>(hits) / static_cast<double>(q.size());
        }
        out.emplace_back(&r, score);
    }
    // Similarity first; insertion order breaks ties, so the first-stored
    // record wins when nothing distinguishes candidates.
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first->id < b.first->id;
    });
    return out;
}

GroundedAnswer NaiveSystem::answer(const Probe& probe) {
    if (!probe.dimension) throw MalformedProbe("probe '" + probe.id + "' has no dimension");

    auto ranked = rank(tokenize(probe.text));
    trace_.clear();
    for (std::size_t i = 0; i < ranked.size() && i < 20; ++i) {
        const Record* r = ranked[i].first;
        trace_.push_back(TraceEntry{r->id, r->slot, r->value, ItemStatus::Active, r->session_id,
                                    ranked[i].second});
    }

    GroundedAnswer answer;
    answer.dimension = probe.dimension;

    switch (*probe.dimension) {
        case ProbeDimension::SR: {
            const Proposition& premise = probe.presupposed.front();
            const Record* match = nullptr;
            const Record* newest_same_slot = nullptr;
            for (const auto& r : records_) {
                if (r.slot == premise.attribute && r.value == premise.value &&
                    (!match || r.timestamp > match->timestamp))
                    match = &r;
                if (r.slot == premise.attribute &&
                    (!newest_same_slot || r.timestamp > newest_same_slot->timestamp))
                    newest_same_slot = &r;
            }
            if (!match)
                answer.sr_state = SrState::Unresolved;
            else if (newest_same_slot && newest_same_slot->value != premise.value)
                answer.sr_state = SrState::NoLongerValid;
            else
                answer.sr_state = SrState::StillValid;
            break;
        }
        case ProbeDimension::PR: {
            // A retrievable premise is a believed premise.
            bool premise_found = false;
            for (const auto& premise : probe.presupposed)
                for (const auto& r : records_)
                    if (r.slot == premise.attribute && r.value == premise.value)
                        premise_found = true;
            answer.pr_state =
                premise_found ? PrState::PremiseFollowed : PrState::PremiseRejected;
            break;
        }
        case ProbeDimension::IPA: {
            for (const auto& slot : probe.basis_slots) {
                IpaChoice choice;
                choice.slot = slot;
                for (const auto& [r, score] : ranked) {
                    if (r->slot == slot) {
                        choice.chosen.push_back(Proposition{slot, r->value, Polarity::Assert});
                        break;
                    }
                }
                choice.unknown = choice.chosen.empty();
                answer.ipa_choices.push_back(std::move(choice));
            }
            break;
        }
    }
    return answer;
}

// ---- evaluation ----

bool score_answer(const GroundedAnswer& answer, const Scenario& scenario,
                  ProbeDimension dimension) {
    switch (dimension) {
        case ProbeDimension::SR:
            return answer.sr_state && *answer.sr_state == scenario.ground_truth.expected_sr;
        case ProbeDimension::PR:
            return answer.pr_state && *answer.pr_state == scenario.ground_truth.expected_pr;
        case ProbeDimension::IPA: {
            const IpaChoice* choice = nullptr;
            for (const auto& c : answer.ipa_choices)
                if (c.slot == scenario.target_slot) choice = &c;
            if (!choice) return false;
            for (const auto& p : choice->chosen)
                if (p == scenario.old_value) return false;   // stale proposition chosen
            if (scenario.ground_truth.expected_replacement) {
                if (choice->unknown) return false;
                for (const auto& p : choice->chosen)
                    if (p == *scenario.ground_truth.expected_replacement) return true;
                return false;
            }
            return true;
        }
    }
    return false;
}

EvalMetrics run_evaluation(const SystemFactory& factory, const std::vector<ScenarioRun>& runs,
                           const EvalConfig& config, std::vector<DimensionTrace>* traces) {
    EvalMetrics metrics;
    metrics.scenarios_total = static_cast<int>(runs.size());
    metrics.trace_depth = config.trace_depth;

    for (const auto& run : runs) {
        const int type_idx = run.scenario.conflict_type == ConflictType::TypeII ? 1 : 0;
        const std::string& old_sid = run.haystack.sessions[run.haystack.old_index].session_id;
        const std::string& new_sid = run.haystack.sessions[run.haystack.new_index].session_id;

        std::array<std::optional<GroundedAnswer>, 3> answers;
        std::array<std::vector<TraceEntry>, 3> dim_traces;
        bool faulted = false;

        std::unique_ptr<SystemUnderTest> sys;
        try {
            sys = factory();
            for (const auto& s : run.haystack.sessions) sys->ingest(s);
        } catch (const std::exception&) {
            faulted = true;
        }

        if (!faulted) {
            // The three probes run against the same frozen memory.
            const std::string fp_before = sys->memory_fingerprint();
            const std::array<const Probe*, 3> probes = {&run.scenario.probes.sr,
                                                        &run.scenario.probes.pr,
                                                        &run.scenario.probes.ipa};
            for (int d = 0; d < 3 && !faulted; ++d) {
                try {
                    answers[d] = sys->answer(*probes[d]);
                    dim_traces[d] = sys->last_retrieval_trace();
                    if (dim_traces[d].size() > config.trace_depth)
                        dim_traces[d].resize(config.trace_depth);
                } catch (const std::exception&) {
                    faulted = true;
                }
            }
            if (!faulted && sys->memory_fingerprint() != fp_before) faulted = true;
        }
        if (faulted) ++metrics.system_faults;

        for (int d = 0; d < 3; ++d) {
            const auto dim = static_cast<ProbeDimension>(d);
            const bool pass =
                !faulted && answers[d] && score_answer(*answers[d], run.scenario, dim);

            metrics.cells[type_idx][d].total += 1;
            if (pass) metrics.cells[type_idx][d].passed += 1;

            if (!faulted && answers[d]) {
                DiagStats& diag = metrics.diagnostics[d];
                diag.answered += 1;
                bool old_in = false, new_in = false;
                for (const auto& e : dim_traces[d]) {
                    if (e.session_id == old_sid) old_in = true;
                    if (e.session_id == new_sid) new_in = true;
                }
                if (new_in) diag.new_retrieved += 1;
                if (old_in && new_in) diag.both_retrieved += 1;
                if (!dim_traces[d].empty()) {
                    if (dim_traces[d].front().session_id == old_sid) diag.old_top1 += 1;
                    if (dim_traces[d].front().session_id == new_sid) diag.new_top1 += 1;
                }
                if (new_in && !pass) diag.failed_with_new += 1;
            }

            if (traces) {
                traces->push_back(DimensionTrace{run.scenario.id, run.scenario.conflict_type,
                                                 dim, pass, faulted, dim_traces[d]});
            }
        }
    }
    return metrics;
}

std::vector<ScenarioRun> generate_suite(const StateSchema& schema,
                                        const KnowledgeRuleSet& knowledge,
                                        const SuiteSpec& spec, std::uint64_t seed) {
    std::vector<ScenarioRun> runs;
    const std::array<std::pair<ConflictType, int>, 2> plan = {
        std::pair{ConflictType::TypeI, spec.type1_count},
        std::pair{ConflictType::TypeII, spec.type2_count}};

    for (const auto& [type, count] : plan) {
        for (int i = 0; i < count; ++i) {
            const std::uint64_t s_seed =
                mix_seed(seed, (type == ConflictType::TypeI ? 0x100000ull : 0x200000ull) +
                                   static_cast<std::uint64_t>(i));
            ScenarioRun run;
            run.scenario = generate_scenario(s_seed, schema, knowledge, type);
            run.haystack = build_haystack(run.scenario, builtin_distractor_pool(),
                                          spec.sessions_per_haystack, mix_seed(s_seed, 101),
                                          knowledge, schema);
            schedule_timestamps(run.haystack, spec.gap, spec.target_year, mix_seed(s_seed, 202));

            // Align the scenario's observation view with the final schedule.
            Session& old_s = run.haystack.sessions[run.haystack.old_index];
            Session& new_s = run.haystack.sessions[run.haystack.new_index];
            run.scenario.m_old.session_id = old_s.session_id;
            run.scenario.m_old.timestamp = old_s.timestamp;
            run.scenario.m_new.session_id = new_s.session_id;
            run.scenario.m_new.timestamp = new_s.timestamp;
            run.scenario.gap = new_s.timestamp - old_s.timestamp;

            runs.push_back(std::move(run));
        }
    }
    return runs;
}

}  // namespace cupmem
