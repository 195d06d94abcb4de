#include "lemir/errors.hpp"

namespace lemir {

const char* to_string(ProtocolErrorKind kind) noexcept
{
    switch (kind) {
    case ProtocolErrorKind::Malformed: return "malformed message";
    case ProtocolErrorKind::DimensionMismatch: return "dimension mismatch";
    case ProtocolErrorKind::OutOfRange: return "score out of range";
    case ProtocolErrorKind::DuplicateRequestId: return "duplicate request id";
    case ProtocolErrorKind::UnknownRequestId: return "unknown request id";
    case ProtocolErrorKind::VersionMismatch: return "version mismatch";
    }
    return "protocol error";
}

}  // namespace lemir
