#pragma once

#include <stdexcept>
#include <string>

namespace vb {

// Failure categories surfaced by the library. Each maps to one error
// condition named in the module contracts; CLI exit reporting prints the
// kind alongside the message.
enum class ErrorKind {
    InvalidText,
    TooShort,
    EmptyCorpus,
    EmptyRewrite,
    EmptyRewrites,
    TooFewRewrites,
    NonFinite,
    ProviderError,
    StoreCorrupt,
    StoreUnwritable,
    ParseError,
    DuplicateId,
    TooFewSamples,
    EmptyClass,
    UnlabeledSample,
    ConfigError,
    IoError,
};

const char* to_string(ErrorKind kind);

class VbError : public std::runtime_error {
public:
    VbError(ErrorKind kind, std::string message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Rethrows with sample/stage context prepended, keeping the kind.
    static VbError with_context(const VbError& e, const std::string& context);

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw VbError(kind, message);
}

} // namespace vb
