#include "stagelink/mocap.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bytes.hpp"
#include "stagelink/error.hpp"

namespace stagelink {

namespace {

constexpr std::string_view kMocapMagic = "MS01";

} // namespace

std::vector<std::uint8_t> encode_frame(const MocapFrame& frame) {
    std::vector<std::uint8_t> out;
    out.reserve(kMocapHeaderBytes + kMocapJointBytes * frame.joint_rotations.size());
    detail::ByteWriter w(out);
    w.raw(kMocapMagic);
    w.u8(frame.stream_id);
    w.u8(frame.flags);
    w.u16(static_cast<std::uint16_t>(frame.joint_rotations.size()));
    w.u32(frame.frame_no);
    w.u64(frame.timestamp_us);
    w.f32(static_cast<float>(frame.root_position.x));
    w.f32(static_cast<float>(frame.root_position.y));
    w.f32(static_cast<float>(frame.root_position.z));
    for (const UnitQuat& q : frame.joint_rotations) {
        w.f32(static_cast<float>(q.w()));
        w.f32(static_cast<float>(q.x()));
        w.f32(static_cast<float>(q.y()));
        w.f32(static_cast<float>(q.z()));
    }
    return out;
}

MocapFrame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMocapMagic.data(), 4) != 0) {
        throw Error(ErrorCode::BadMagic, "datagram does not start with MS01");
    }
    if (bytes.size() < kMocapHeaderBytes) {
        throw Error(ErrorCode::Truncated, "datagram shorter than the 32-byte header");
    }
    detail::ByteReader r(bytes, ErrorCode::Truncated);
    r.bytes(4);
    MocapFrame f;
    f.stream_id = r.u8();
    f.flags = r.u8();
    const std::size_t joints = r.u16();
    f.frame_no = r.u32();
    f.timestamp_us = r.u64();
    const std::size_t expected = kMocapHeaderBytes + kMocapJointBytes * joints;
    if (bytes.size() < expected) {
        throw Error(ErrorCode::Truncated, "header declares " + std::to_string(joints) + " joints, need " +
                                              std::to_string(expected) + " bytes, got " +
                                              std::to_string(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw Error(ErrorCode::BadLength, std::to_string(bytes.size() - expected) + " trailing bytes");
    }
    const double px = r.f32();
    const double py = r.f32();
    const double pz = r.f32();
    f.root_position = {px, py, pz};
    f.joint_rotations.reserve(joints);
    for (std::size_t i = 0; i < joints; ++i) {
        const double qw = r.f32();
        const double qx = r.f32();
        const double qy = r.f32();
        const double qz = r.f32();
        const double n = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
        if (!(n >= 0.99 && n <= 1.01)) {
            throw Error(ErrorCode::NonUnitQuat, "joint " + std::to_string(i) + " quaternion norm " + std::to_string(n));
        }
        f.joint_rotations.emplace_back(qw, qx, qy, qz);
    }
    if (!f.root_position.finite()) {
        throw Error(ErrorCode::InvalidArgument, "root position is not finite");
    }
    return f;
}

// --- BVH ---------------------------------------------------------------------

namespace {

class BvhTokenizer {
public:
    explicit BvhTokenizer(std::string_view text) : text_(text) {}

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    std::string_view next() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of file");
        }
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        return text_.substr(start, pos_ - start);
    }

    void expect(std::string_view word) {
        const auto tok = next();
        if (tok != word) {
            fail("expected '" + std::string(word) + "', found '" + std::string(tok) + "'");
        }
    }

    double number() {
        const auto tok = next();
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
            fail("expected a number, found '" + std::string(tok) + "'");
        }
        return v;
    }

    long integer() {
        const auto tok = next();
        long v = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
            fail("expected an integer, found '" + std::string(tok) + "'");
        }
        return v;
    }

    /// Remaining tokens on the current line (used for MOTION rows).
    std::vector<std::string_view> line_tokens() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) {
            ++pos_;
        }
        std::vector<std::string_view> toks;
        while (pos_ < text_.size() && text_[pos_] != '\n') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
            toks.push_back(text_.substr(start, pos_ - start));
            while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) {
                ++pos_;
            }
        }
        return toks;
    }

    /// Moves to the first non-blank line.
    void skip_blank_lines() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            if (text_[pos_] == '\n') {
                ++line_;
            }
            ++pos_;
        }
    }

    int line() const { return line_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_) + ": " + msg);
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            if (text_[pos_] == '\n') {
                ++line_;
            }
            ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

enum class Channel { Xpos, Ypos, Zpos, Xrot, Yrot, Zrot };

struct ParsedJoint {
    std::vector<Channel> channels;
    std::string rotation_order;
};

Channel parse_channel(BvhTokenizer& tok) {
    const auto name = tok.next();
    if (name == "Xposition") return Channel::Xpos;
    if (name == "Yposition") return Channel::Ypos;
    if (name == "Zposition") return Channel::Zpos;
    if (name == "Xrotation") return Channel::Xrot;
    if (name == "Yrotation") return Channel::Yrot;
    if (name == "Zrotation") return Channel::Zrot;
    tok.fail("unknown channel '" + std::string(name) + "'");
}

struct HierarchyParser {
    BvhTokenizer& tok;
    std::vector<Joint> joints;
    std::vector<ParsedJoint> parsed;

    Vec3 offset() {
        tok.expect("OFFSET");
        const double x = tok.number();
        const double y = tok.number();
        const double z = tok.number();
        return {x, y, z};
    }

    void joint_body(std::string name, std::optional<std::size_t> parent) {
        const std::size_t index = joints.size();
        tok.expect("{");
        Joint j{std::move(name), parent, offset()};
        ParsedJoint pj;
        tok.expect("CHANNELS");
        const long n = tok.integer();
        if (n < 0 || n > 6) {
            tok.fail("channel count must be between 0 and 6");
        }
        for (long i = 0; i < n; ++i) {
            const Channel c = parse_channel(tok);
            pj.channels.push_back(c);
            if (c == Channel::Xrot) pj.rotation_order += 'X';
            if (c == Channel::Yrot) pj.rotation_order += 'Y';
            if (c == Channel::Zrot) pj.rotation_order += 'Z';
        }
        const auto& order = pj.rotation_order;
        if (!order.empty() && order != "ZXY" && order != "XYZ" && order != "ZYX") {
            throw Error(ErrorCode::UnsupportedChannelOrder,
                        "line " + std::to_string(tok.line()) + ": joint '" + j.name + "' uses rotation order " + order);
        }
        joints.push_back(std::move(j));
        parsed.push_back(std::move(pj));
        for (;;) {
            const auto kw = tok.next();
            if (kw == "}") {
                return;
            }
            if (kw == "JOINT") {
                joint_body(std::string(tok.next()), index);
            } else if (kw == "End") {
                tok.expect("Site");
                tok.expect("{");
                offset();
                tok.expect("}");
            } else {
                tok.fail("unexpected token '" + std::string(kw) + "' in joint block");
            }
        }
    }
};

UnitQuat axis_rotation(char axis, double degrees) {
    const double r = deg_to_rad(degrees);
    switch (axis) {
    case 'X': return UnitQuat::about_x(r);
    case 'Y': return UnitQuat::about_y(r);
    default: return UnitQuat::about_z(r);
    }
}

} // namespace

BvhClip parse_bvh(std::string_view text, std::uint8_t stream_id) {
    BvhTokenizer tok(text);
    tok.expect("HIERARCHY");
    tok.expect("ROOT");
    HierarchyParser hp{tok, {}, {}};
    hp.joint_body(std::string(tok.next()), std::nullopt);

    if (tok.at_end()) {
        tok.fail("missing MOTION section");
    }
    const auto motion = tok.next();
    if (motion != "MOTION") {
        tok.fail("expected 'MOTION', found '" + std::string(motion) + "'");
    }
    tok.expect("Frames:");
    const long frame_count = tok.integer();
    if (frame_count < 0) {
        tok.fail("negative frame count");
    }
    tok.expect("Frame");
    tok.expect("Time:");
    const double frame_time = tok.number();
    if (frame_time <= 0.0) {
        tok.fail("frame time must be positive");
    }

    std::size_t total_channels = 0;
    for (const auto& pj : hp.parsed) {
        total_channels += pj.channels.size();
    }

    BvhClip clip;
    clip.topology = SkeletonTopology(hp.joints);
    clip.frame_time = frame_time;
    clip.frames.reserve(static_cast<std::size_t>(frame_count));
    for (long fi = 0; fi < frame_count; ++fi) {
        tok.skip_blank_lines();
        const int line = tok.line();
        const auto toks = tok.line_tokens();
        if (toks.size() != total_channels) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected " +
                                                   std::to_string(total_channels) + " values, found " +
                                                   std::to_string(toks.size()));
        }
        std::vector<double> values(toks.size());
        for (std::size_t i = 0; i < toks.size(); ++i) {
            const auto res = std::from_chars(toks[i].data(), toks[i].data() + toks[i].size(), values[i]);
            if (res.ec != std::errc() || res.ptr != toks[i].data() + toks[i].size() || !std::isfinite(values[i])) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line) + ": bad number '" + std::string(toks[i]) + "'");
            }
        }

        MocapFrame f;
        f.stream_id = stream_id;
        f.frame_no = static_cast<std::uint32_t>(fi);
        f.timestamp_us = static_cast<std::uint64_t>(std::llround(static_cast<double>(fi) * frame_time * 1e6));
        f.root_position = hp.joints[0].bind_offset;
        f.joint_rotations.reserve(hp.joints.size());
        std::size_t cursor = 0;
        for (std::size_t ji = 0; ji < hp.parsed.size(); ++ji) {
            UnitQuat q;
            bool has_pos = false;
            Vec3 pos;
            for (const Channel c : hp.parsed[ji].channels) {
                const double v = values[cursor++];
                switch (c) {
                case Channel::Xpos: pos.x = v; has_pos = true; break;
                case Channel::Ypos: pos.y = v; has_pos = true; break;
                case Channel::Zpos: pos.z = v; has_pos = true; break;
                case Channel::Xrot: q = q * axis_rotation('X', v); break;
                case Channel::Yrot: q = q * axis_rotation('Y', v); break;
                case Channel::Zrot: q = q * axis_rotation('Z', v); break;
                }
            }
            if (ji == 0 && has_pos) {
                f.root_position = pos;
            }
            f.joint_rotations.push_back(q);
        }
        clip.frames.push_back(std::move(f));
    }
    return clip;
}

BvhClip load_bvh(const std::filesystem::path& path, std::uint8_t stream_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open BVH file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_bvh(ss.str(), stream_id);
}

std::string write_bvh(const SkeletonTopology& topology, const std::vector<BvhWriteFrame>& frames,
                      double frame_time) {
    std::ostringstream os;
    os << std::setprecision(9);
    os << "HIERARCHY\n";

    std::vector<std::vector<std::size_t>> children(topology.size());
    for (std::size_t i = 1; i < topology.size(); ++i) {
        children[*topology[i].parent].push_back(i);
    }
    // Depth-first file order must equal index order for the round trip to hold.
    std::size_t expected = 0;
    auto emit = [&](auto&& self, std::size_t i, int depth) -> void {
        if (i != expected++) {
            throw Error(ErrorCode::InvalidArgument, "topology is not in depth-first order");
        }
        const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
        const Joint& j = topology[i];
        os << pad << (i == 0 ? "ROOT " : "JOINT ") << j.name << "\n" << pad << "{\n";
        os << pad << "  OFFSET " << j.bind_offset.x << " " << j.bind_offset.y << " " << j.bind_offset.z << "\n";
        if (i == 0) {
            os << pad << "  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation\n";
        } else {
            os << pad << "  CHANNELS 3 Zrotation Xrotation Yrotation\n";
        }
        for (std::size_t c : children[i]) {
            self(self, c, depth + 1);
        }
        if (children[i].empty()) {
            os << pad << "  End Site\n" << pad << "  {\n" << pad << "    OFFSET 0 0.05 0\n" << pad << "  }\n";
        }
        os << pad << "}\n";
    };
    if (!topology.empty()) {
        emit(emit, 0, 0);
    }

    os << "MOTION\nFrames: " << frames.size() << "\nFrame Time: " << frame_time << "\n";
    for (const BvhWriteFrame& f : frames) {
        if (f.zxy_degrees.size() != topology.size()) {
            throw Error(ErrorCode::TopologyMismatch, "frame joint count does not match topology");
        }
        os << f.root_position.x << " " << f.root_position.y << " " << f.root_position.z;
        for (const Vec3& e : f.zxy_degrees) {
            os << " " << e.x << " " << e.y << " " << e.z;
        }
        os << "\n";
    }
    return os.str();
}

// --- streams -----------------------------------------------------------------

BvhStream::BvhStream(BvhClip clip, std::uint64_t start_us, bool loop, double rate_hz)
    : clip_(std::move(clip)), start_us_(start_us), loop_(loop) {
    const double period = rate_hz > 0.0 ? 1.0 / rate_hz : clip_.frame_time;
    period_us_ = static_cast<std::uint64_t>(std::llround(period * 1e6));
    if (period_us_ == 0) {
        throw Error(ErrorCode::InvalidArgument, "frame period rounds to zero microseconds");
    }
}

StreamSample BvhStream::tick(std::uint64_t now_us) const {
    if (now_us < start_us_ || clip_.frames.empty()) {
        return {};
    }
    const std::uint64_t n = clip_.frames.size();
    std::uint64_t index = (now_us - start_us_) / period_us_;
    if (!loop_ && index >= n) {
        index = n - 1;
    }
    MocapFrame f = clip_.frames[index % n];
    f.frame_no = static_cast<std::uint32_t>(index);
    f.timestamp_us = start_us_ + index * period_us_;
    return {StreamStatus::Frame, std::move(f)};
}

LiveStream::LiveStream(std::uint8_t stream_id, std::size_t joint_count, std::uint64_t stale_after_us)
    : stream_id_(stream_id), joint_count_(joint_count), stale_after_us_(stale_after_us) {}

bool LiveStream::push(const MocapFrame& frame, std::uint64_t received_us) {
    if (frame.stream_id != stream_id_ || frame.joint_rotations.size() != joint_count_ ||
        (latest_ && frame.frame_no <= latest_->frame_no)) {
        ++dropped_;
        return false;
    }
    latest_ = frame;
    last_rx_us_ = received_us;
    ++accepted_;
    return true;
}

StreamSample LiveStream::tick(std::uint64_t now_us) const {
    if (!latest_) {
        return {};
    }
    if (now_us > last_rx_us_ && now_us - last_rx_us_ > stale_after_us_) {
        return {StreamStatus::Stale, latest_};
    }
    return {StreamStatus::Frame, latest_};
}

} // namespace stagelink
