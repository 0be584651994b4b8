#pragma once
// Dialogue sessions: the ingestion currency shared by the write pipeline
// and the scenario simulator. Turns carry structured span annotations;
// the text itself is cosmetic, the tags are authoritative.

#include <string>
#include <vector>

#include "cupmem/conflict.hpp"
#include "cupmem/schema.hpp"
#include "cupmem/time.hpp"

namespace cupmem {

struct TaggedSpan {
    SlotRef slot;
    std::string value;        // normalized; post-transition when the turn narrates a change
    bool historical = false;  // purely historical mention, never a state update
    bool negation = false;    // explicit surface negation/correction of slot=value
};

struct Turn {
    std::string speaker;      // "user" or "assistant"
    std::string text;
    std::vector<TaggedSpan> spans;
};

enum class SessionKind { OldEvidence, NewEvidence, Distractor };

struct Session {
    std::string session_id;
    Instant timestamp = 0;
    SessionKind kind = SessionKind::Distractor;
    std::vector<Turn> turns;
};

// Projects a session onto the oracle's observation view: non-historical
// assertion spans become assertions, negation spans populate the
// explicitness flags, and every tagged attribute is marked as mentioned.
Observation to_observation(const Session& session);

const char* to_string(SessionKind k);

}  // namespace cupmem
