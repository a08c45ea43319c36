#include "ponzilens/error.hpp"

namespace ponzilens {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::CompilerNotFound: return "CompilerNotFound";
        case ErrorCode::CompileError: return "CompileError";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::MalformedAst: return "MalformedAst";
        case ErrorCode::JsonError: return "JsonError";
        case ErrorCode::InvalidAddress: return "InvalidAddress";
        case ErrorCode::NotVerified: return "NotVerified";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::NetworkError: return "NetworkError";
        case ErrorCode::AuthError: return "AuthError";
        case ErrorCode::UnknownGraph: return "UnknownGraph";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::NoSpan: return "NoSpan";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::ContextOverflow: return "ContextOverflow";
        case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
        case ErrorCode::LabelMismatch: return "LabelMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace ponzilens
