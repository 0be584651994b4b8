#include "cupmem/revision.hpp"

namespace cupmem {

const char* to_string(LocalAction::Kind k) {
    switch (k) {
        case LocalAction::Kind::Add: return "add";
        case LocalAction::Kind::Refine: return "refine";
        case LocalAction::Kind::Replace: return "replace";
        case LocalAction::Kind::NoOp: return "no_op";
    }
    return "no_op";
}

const char* to_string(AdjudicationDecision::Verdict v) {
    switch (v) {
        case AdjudicationDecision::Verdict::Keep: return "keep";
        case AdjudicationDecision::Verdict::Stale: return "stale";
        case AdjudicationDecision::Verdict::Replace: return "replace";
        case AdjudicationDecision::Verdict::Unknown: return "unknown";
    }
    return "keep";
}

const char* to_string(RevisionCandidate::Tag t) {
    switch (t) {
        case RevisionCandidate::Tag::Direct: return "direct";
        case RevisionCandidate::Tag::Affected: return "affected";
        case RevisionCandidate::Tag::Global: return "global";
    }
    return "direct";
}

}  // namespace cupmem
