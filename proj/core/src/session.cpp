#include "cupmem/session.hpp"

namespace cupmem {

Observation to_observation(const Session& session) {
    Observation obs;
    obs.session_id = session.session_id;
    obs.timestamp = session.timestamp;
    for (const auto& turn : session.turns) {
        for (const auto& span : turn.spans) {
            obs.flags.mentions.insert(span.slot);
            if (span.negation) {
                obs.flags.explicit_negation_of.push_back(
                    Proposition{span.slot, span.value, Polarity::Assert});
                continue;
            }
            if (span.historical) continue;
            obs.assertions.push_back(Proposition{span.slot, span.value, Polarity::Assert});
        }
    }
    return obs;
}

const char* to_string(SessionKind k) {
    switch (k) {
        case SessionKind::OldEvidence: return "old_evidence";
        case SessionKind::NewEvidence: return "new_evidence";
        case SessionKind::Distractor: return "distractor";
    }
    return "distractor";
}

}  // namespace cupmem
