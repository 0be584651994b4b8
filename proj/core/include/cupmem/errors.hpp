#pragma once
// Error hierarchy shared by the whole engine.
//
// Every error carries a stable code string (used by tests and the CLI)
// and a category that maps onto the CLI exit-status discipline:
// Domain -> exit 1, Io -> exit 2.

#include <stdexcept>
#include <string>

namespace cupmem {

enum class ErrorCategory { Domain, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message),
          category_(category),
          code_(std::move(code)) {}

    ErrorCategory category() const { return category_; }
    const std::string& code() const { return code_; }

private:
    ErrorCategory category_;
    std::string code_;
};

#define CUPMEM_DEFINE_ERROR(Name, Category)                              \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& message)                        \
            : Error(ErrorCategory::Category, #Name, message) {}          \
    }

// schema
CUPMEM_DEFINE_ERROR(ParseError, Domain);
CUPMEM_DEFINE_ERROR(ValidationError, Domain);
CUPMEM_DEFINE_ERROR(UnknownDomain, Domain);
CUPMEM_DEFINE_ERROR(UnknownSlot, Domain);

// store
CUPMEM_DEFINE_ERROR(SingleSlotOccupied, Domain);
CUPMEM_DEFINE_ERROR(TemporalCausalityViolation, Domain);
CUPMEM_DEFINE_ERROR(AlreadyStale, Domain);
CUPMEM_DEFINE_ERROR(UnknownItem, Domain);
CUPMEM_DEFINE_ERROR(ActiveItemPresent, Domain);
CUPMEM_DEFINE_ERROR(SchemaVersionMismatch, Domain);
CUPMEM_DEFINE_ERROR(IoError, Io);

// write pipeline
CUPMEM_DEFINE_ERROR(ExtractorFailure, Domain);
CUPMEM_DEFINE_ERROR(OutOfOrderSession, Domain);

// readout
CUPMEM_DEFINE_ERROR(MalformedProbe, Domain);

// conflict oracle
CUPMEM_DEFINE_ERROR(IndexError, Domain);

// simulator
CUPMEM_DEFINE_ERROR(GenerationExhausted, Domain);
CUPMEM_DEFINE_ERROR(PoolTooSmall, Domain);
CUPMEM_DEFINE_ERROR(UnsafeDistractor, Domain);
CUPMEM_DEFINE_ERROR(InfeasibleSchedule, Domain);
CUPMEM_DEFINE_ERROR(SystemFault, Domain);

#undef CUPMEM_DEFINE_ERROR

}  // namespace cupmem
