#include "stagelink/error.hpp"

namespace stagelink {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::NonUnitQuat: return "NonUnitQuat";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedChannelOrder: return "UnsupportedChannelOrder";
    case ErrorCode::StreamStale: return "StreamStale";
    case ErrorCode::UnknownSourceJoint: return "UnknownSourceJoint";
    case ErrorCode::UnknownTargetJoint: return "UnknownTargetJoint";
    case ErrorCode::DuplicateTarget: return "DuplicateTarget";
    case ErrorCode::TopologyMismatch: return "TopologyMismatch";
    case ErrorCode::UnknownAvatar: return "UnknownAvatar";
    case ErrorCode::DuplicateAvatar: return "DuplicateAvatar";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::BlockedEndpoint: return "BlockedEndpoint";
    case ErrorCode::DuplicateCueId: return "DuplicateCueId";
    case ErrorCode::UnknownActionKind: return "UnknownActionKind";
    case ErrorCode::MalformedAction: return "MalformedAction";
    case ErrorCode::UnknownCue: return "UnknownCue";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::SceneMismatch: return "SceneMismatch";
    case ErrorCode::SocketError: return "SocketError";
    case ErrorCode::AssetMissing: return "AssetMissing";
    }
    return "Unknown";
}

} // namespace stagelink
