#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stagelink/pose.hpp"

namespace stagelink {

/// One timestamped sample of a source skeleton, as carried by MSTREAM/1.
struct MocapFrame {
    std::uint8_t stream_id = 0;
    std::uint8_t flags = 0;
    std::uint32_t frame_no = 0;
    std::uint64_t timestamp_us = 0;
    Vec3 root_position;
    std::vector<UnitQuat> joint_rotations;

    friend bool operator==(const MocapFrame&, const MocapFrame&) = default;
};

inline constexpr std::size_t kMocapHeaderBytes = 32;
inline constexpr std::size_t kMocapJointBytes = 16;

/// MSTREAM/1, little-endian:
///   0  "MS01"            4 B
///   4  stream_id         u8
///   5  flags             u8
///   6  joint_count       u16
///   8  frame_no          u32
///   12 timestamp_us      u64
///   20 root position     3 x f32
///   32 joints            joint_count x (w, x, y, z) f32
/// Real-valued fields are narrowed to f32.
std::vector<std::uint8_t> encode_frame(const MocapFrame& frame);

/// Inverse of encode_frame. Throws BadMagic, Truncated (short datagram),
/// BadLength (trailing bytes) or NonUnitQuat (any joint norm outside
/// [0.99, 1.01]).
MocapFrame decode_frame(std::span<const std::uint8_t> bytes);

struct BvhClip {
    SkeletonTopology topology;
    std::vector<MocapFrame> frames;
    double frame_time = 0.0;
};

/// Parses ASCII BVH. Joint order is depth-first file order; End Sites are not
/// joints. Rotation channels must appear in ZXY, XYZ or ZYX order and are
/// composed intrinsically in that order. Only root position channels are read.
BvhClip parse_bvh(std::string_view text, std::uint8_t stream_id = 0);
BvhClip load_bvh(const std::filesystem::path& path, std::uint8_t stream_id = 0);

/// Euler channel values (degrees) in file order, one vector per frame, plus
/// root position. Used by the fixture generator.
struct BvhWriteFrame {
    Vec3 root_position;
    /// Per joint: (z, x, y) degrees, written with ZXY channel order.
    std::vector<Vec3> zxy_degrees;
};
std::string write_bvh(const SkeletonTopology& topology, const std::vector<BvhWriteFrame>& frames,
                      double frame_time);

enum class StreamStatus { NoFrame, Frame, Stale };

/// Result of sampling a stream at one instant. A Stale sample still carries
/// the last frame so callers can freeze on it.
struct StreamSample {
    StreamStatus status = StreamStatus::NoFrame;
    std::optional<MocapFrame> frame;
};

inline constexpr std::uint64_t kStaleAfterUs = 500'000;

/// Offline source: a BVH clip clocked from start_us.
class BvhStream {
public:
    BvhStream(BvhClip clip, std::uint64_t start_us, bool loop, double rate_hz = 0.0);

    const SkeletonTopology& topology() const { return clip_.topology; }
    std::uint64_t frame_period_us() const { return period_us_; }
    std::size_t frame_count() const { return clip_.frames.size(); }

    /// Latest frame whose timestamp is <= now_us. Looping keeps frame_no
    /// increasing across wraps.
    StreamSample tick(std::uint64_t now_us) const;

private:
    BvhClip clip_;
    std::uint64_t start_us_;
    bool loop_;
    std::uint64_t period_us_;
};

/// Live source fed by datagrams. Keeps the highest frame_no seen ("hold-last")
/// and reports Stale after kStaleAfterUs without a datagram.
class LiveStream {
public:
    LiveStream(std::uint8_t stream_id, std::size_t joint_count, std::uint64_t stale_after_us = kStaleAfterUs);

    /// Returns false when the frame is dropped (older frame_no, other stream,
    /// joint count mismatch).
    bool push(const MocapFrame& frame, std::uint64_t received_us);

    StreamSample tick(std::uint64_t now_us) const;

    std::uint64_t accepted() const { return accepted_; }
    std::uint64_t dropped() const { return dropped_; }

private:
    std::uint8_t stream_id_;
    std::size_t joint_count_;
    std::uint64_t stale_after_us_;
    std::optional<MocapFrame> latest_;
    std::uint64_t last_rx_us_ = 0;
    std::uint64_t accepted_ = 0;
    std::uint64_t dropped_ = 0;
};

} // namespace stagelink
