#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stagelink/mixer.hpp"
#include "stagelink/pose.hpp"

namespace stagelink {

/// POSEBUS/1 message, little-endian:
///   0  "PB01"        4 B
///   4  tick_no       u64
///   12 avatar_id     u16
///   14 root position 3 x f32
///   26 root rotation 4 x f32 (w, x, y, z)
///   42 joint_count   u16
///   44 joints        joint_count x 4 x f32
struct PoseMessage {
    std::uint64_t tick_no = 0;
    std::uint16_t avatar_id = 0;
    Vec3 position;
    UnitQuat rotation;
    std::vector<UnitQuat> joint_rotations;

    friend bool operator==(const PoseMessage&, const PoseMessage&) = default;
};

inline constexpr std::size_t kPoseHeaderBytes = 44;

PoseMessage make_pose_message(std::uint64_t tick_no, const AvatarOutput& avatar);

std::vector<std::uint8_t> encode_pose_msg(const PoseMessage& msg);
/// Throws BadMagic, Truncated, BadLength (trailing bytes).
PoseMessage decode_pose_msg(std::span<const std::uint8_t> bytes);

/// Destination for encoded pose messages. send() returns false on a drop.
class PoseSink {
public:
    virtual ~PoseSink() = default;
    virtual bool send(std::span<const std::uint8_t> message) = 0;
};

class MemoryPoseSink final : public PoseSink {
public:
    bool send(std::span<const std::uint8_t> message) override {
        messages.emplace_back(message.begin(), message.end());
        return true;
    }
    std::vector<std::vector<std::uint8_t>> messages;
};

/// Blocking UDP sender to one host:port.
class UdpPoseSink final : public PoseSink {
public:
    UdpPoseSink(const std::string& host, std::uint16_t port);
    ~UdpPoseSink() override;
    UdpPoseSink(const UdpPoseSink&) = delete;
    UdpPoseSink& operator=(const UdpPoseSink&) = delete;

    bool send(std::span<const std::uint8_t> message) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Fans each tick out as one message per avatar to every sink, counting
/// drops and tick-order violations.
class PoseBusPublisher {
public:
    void add_sink(std::shared_ptr<PoseSink> sink) { sinks_.push_back(std::move(sink)); }

    void publish(const TickOutput& out);

    std::uint64_t sent() const { return sent_; }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t order_violations() const { return order_violations_; }

private:
    std::vector<std::shared_ptr<PoseSink>> sinks_;
    std::map<std::uint16_t, std::uint64_t> last_tick_;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t order_violations_ = 0;
};

/// Parses "host:port". Throws InvalidArgument.
std::pair<std::string, std::uint16_t> parse_host_port(const std::string& text);

} // namespace stagelink
