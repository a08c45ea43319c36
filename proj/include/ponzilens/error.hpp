#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ponzilens {

enum class ErrorCode {
    CompilerNotFound,
    CompileError,
    UnsupportedVersion,
    MalformedAst,
    JsonError,
    InvalidAddress,
    NotVerified,
    RateLimited,
    NetworkError,
    AuthError,
    UnknownGraph,
    UnknownNode,
    NoSpan,
    EmptyInput,
    BackendUnavailable,
    ContextOverflow,
    UnparseableVerdict,
    LabelMismatch,
    InvalidArgument,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the batch runner, the CLI) can map it to a phase or exit status.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message)
        , code_(code)
    {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ponzilens
