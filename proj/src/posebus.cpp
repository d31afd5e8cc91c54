#include "stagelink/posebus.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "bytes.hpp"
#include "stagelink/error.hpp"

namespace stagelink {

namespace {

constexpr std::string_view kPoseMagic = "PB01";

void put_quat(detail::ByteWriter& w, const UnitQuat& q) {
    w.f32(static_cast<float>(q.w()));
    w.f32(static_cast<float>(q.x()));
    w.f32(static_cast<float>(q.y()));
    w.f32(static_cast<float>(q.z()));
}

UnitQuat get_quat(detail::ByteReader& r) {
    const double w = r.f32();
    const double x = r.f32();
    const double y = r.f32();
    const double z = r.f32();
    return {w, x, y, z};
}

} // namespace

PoseMessage make_pose_message(std::uint64_t tick_no, const AvatarOutput& avatar) {
    return {tick_no, avatar.index, avatar.pose.position, avatar.pose.rotation, avatar.pose.joint_rotations};
}

std::vector<std::uint8_t> encode_pose_msg(const PoseMessage& msg) {
    std::vector<std::uint8_t> out;
    out.reserve(kPoseHeaderBytes + 16 * msg.joint_rotations.size());
    detail::ByteWriter w(out);
    w.raw(kPoseMagic);
    w.u64(msg.tick_no);
    w.u16(msg.avatar_id);
    w.f32(static_cast<float>(msg.position.x));
    w.f32(static_cast<float>(msg.position.y));
    w.f32(static_cast<float>(msg.position.z));
    put_quat(w, msg.rotation);
    w.u16(static_cast<std::uint16_t>(msg.joint_rotations.size()));
    for (const UnitQuat& q : msg.joint_rotations) {
        put_quat(w, q);
    }
    return out;
}

PoseMessage decode_pose_msg(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kPoseMagic.data(), 4) != 0) {
        throw Error(ErrorCode::BadMagic, "message does not start with PB01");
    }
    detail::ByteReader r(bytes, ErrorCode::Truncated);
    r.bytes(4);
    PoseMessage m;
    m.tick_no = r.u64();
    m.avatar_id = r.u16();
    const double x = r.f32();
    const double y = r.f32();
    const double z = r.f32();
    m.position = {x, y, z};
    m.rotation = get_quat(r);
    const std::size_t n = r.u16();
    if (r.remaining() < 16 * n) {
        throw Error(ErrorCode::Truncated, "message declares " + std::to_string(n) + " joints");
    }
    if (r.remaining() > 16 * n) {
        throw Error(ErrorCode::BadLength, std::to_string(r.remaining() - 16 * n) + " trailing bytes");
    }
    m.joint_rotations.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.joint_rotations.push_back(get_quat(r));
    }
    return m;
}

struct UdpPoseSink::Impl {
    int fd = -1;
    sockaddr_storage addr{};
    socklen_t addr_len = 0;
};

UdpPoseSink::UdpPoseSink(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw Error(ErrorCode::SocketError, "cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    impl_->fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (impl_->fd < 0) {
        ::freeaddrinfo(res);
        throw Error(ErrorCode::SocketError, std::strerror(errno));
    }
    std::memcpy(&impl_->addr, res->ai_addr, res->ai_addrlen);
    impl_->addr_len = static_cast<socklen_t>(res->ai_addrlen);
    ::freeaddrinfo(res);
}

UdpPoseSink::~UdpPoseSink() {
    if (impl_ && impl_->fd >= 0) {
        ::close(impl_->fd);
    }
}

bool UdpPoseSink::send(std::span<const std::uint8_t> message) {
    const auto n = ::sendto(impl_->fd, message.data(), message.size(), 0,
                            reinterpret_cast<const sockaddr*>(&impl_->addr), impl_->addr_len);
    return n == static_cast<ssize_t>(message.size());
}

void PoseBusPublisher::publish(const TickOutput& out) {
    for (const AvatarOutput& a : out.poses) {
        const auto it = last_tick_.find(a.index);
        if (it != last_tick_.end() && out.tick_no <= it->second) {
            ++order_violations_;
        }
        last_tick_[a.index] = out.tick_no;
        const auto bytes = encode_pose_msg(make_pose_message(out.tick_no, a));
        for (const auto& sink : sinks_) {
            if (sink->send(bytes)) {
                ++sent_;
            } else {
                ++dropped_;
            }
        }
    }
}

std::pair<std::string, std::uint16_t> parse_host_port(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw Error(ErrorCode::InvalidArgument, "expected host:port, got '" + text + "'");
    }
    const std::string host = text.substr(0, colon);
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) {
            port = -1;
        }
    } catch (const std::exception&) {
        port = -1;
    }
    if (port <= 0 || port > 65535) {
        throw Error(ErrorCode::InvalidArgument, "bad port in '" + text + "'");
    }
    return {host, static_cast<std::uint16_t>(port)};
}

} // namespace stagelink
