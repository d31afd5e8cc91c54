#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stagelink {

enum class ErrorCode {
    InvalidArgument,
    Io,
    // mocap-ingest
    BadMagic,
    Truncated,
    BadLength,
    NonUnitQuat,
    ParseError,
    UnsupportedChannelOrder,
    StreamStale,
    // retarget
    UnknownSourceJoint,
    UnknownTargetJoint,
    DuplicateTarget,
    TopologyMismatch,
    // manipulator / mixer
    UnknownAvatar,
    DuplicateAvatar,
    // stage-world
    DegenerateTarget,
    // pathfinder
    NoPath,
    OutOfBounds,
    BlockedEndpoint,
    // cue-engine
    DuplicateCueId,
    UnknownActionKind,
    MalformedAction,
    UnknownCue,
    // io-bus
    CorruptLog,
    SceneMismatch,
    SocketError,
    // scenario-runner
    AssetMissing,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the core carries one of the codes above. The C API
/// maps them onto sl_status values one to one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace stagelink
