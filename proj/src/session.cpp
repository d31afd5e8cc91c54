#include "stagelink/session.hpp"

#include <sstream>

#include "bytes.hpp"
#include "stagelink/error.hpp"
#include "stagelink/scene.hpp"

namespace stagelink {

using detail::ByteReader;
using detail::ByteWriter;

namespace {

constexpr std::string_view kLogMagic = "SLG1";
constexpr std::uint8_t kHeaderRecord = 1;
constexpr std::uint8_t kInputsRecord = 2;
constexpr std::uint8_t kOutputRecord = 3;
constexpr ErrorCode kCorrupt = ErrorCode::CorruptLog;

void put_vec(ByteWriter& w, const Vec3& v) {
    w.f64(v.x);
    w.f64(v.y);
    w.f64(v.z);
}

Vec3 get_vec(ByteReader& r) {
    const double x = r.f64();
    const double y = r.f64();
    const double z = r.f64();
    return {x, y, z};
}

void put_quat(ByteWriter& w, const UnitQuat& q) {
    w.f64(q.w());
    w.f64(q.x());
    w.f64(q.y());
    w.f64(q.z());
}

UnitQuat get_quat(ByteReader& r) {
    const double w = r.f64();
    const double x = r.f64();
    const double y = r.f64();
    const double z = r.f64();
    try {
        return {w, x, y, z};
    } catch (const Error& e) {
        throw Error(kCorrupt, e.what());
    }
}

void put_quats(ByteWriter& w, const std::vector<UnitQuat>& qs) {
    w.u32(static_cast<std::uint32_t>(qs.size()));
    for (const UnitQuat& q : qs) {
        put_quat(w, q);
    }
}

std::vector<UnitQuat> get_quats(ByteReader& r) {
    const std::uint32_t n = r.u32();
    if (r.remaining() < static_cast<std::size_t>(n) * 32) {
        throw Error(kCorrupt, "joint list runs past the record");
    }
    std::vector<UnitQuat> qs;
    qs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        qs.push_back(get_quat(r));
    }
    return qs;
}

void put_ref(ByteWriter& w, const ReferenceTransform& ref) {
    put_vec(w, ref.translation());
    w.f64(ref.yaw());
    w.f64(ref.pitch());
}

ReferenceTransform get_ref(ByteReader& r) {
    const Vec3 t = get_vec(r);
    const double yaw = r.f64();
    const double pitch = r.f64();
    try {
        return {t, yaw, pitch};
    } catch (const Error& e) {
        throw Error(kCorrupt, e.what());
    }
}

void put_watch(ByteWriter& w, const std::optional<WatchTarget>& t) {
    if (!t) {
        w.u8(0);
        return;
    }
    if (const auto* a = std::get_if<WatchAvatar>(&*t)) {
        w.u8(1);
        w.str(a->avatar);
    } else if (const auto* p = std::get_if<WatchPerformer>(&*t)) {
        w.u8(2);
        put_vec(w, p->position);
    } else {
        w.u8(3);
        put_vec(w, std::get<WatchPoint>(*t).position);
    }
}

std::optional<WatchTarget> get_watch(ByteReader& r) {
    switch (r.u8()) {
    case 0: return std::nullopt;
    case 1: return WatchAvatar{r.str()};
    case 2: return WatchPerformer{get_vec(r)};
    case 3: return WatchPoint{get_vec(r)};
    default: throw Error(kCorrupt, "bad watch target tag");
    }
}

void put_frame(ByteWriter& w, const MocapFrame& f) {
    w.u8(f.stream_id);
    w.u8(f.flags);
    w.u32(f.frame_no);
    w.u64(f.timestamp_us);
    put_vec(w, f.root_position);
    put_quats(w, f.joint_rotations);
}

MocapFrame get_frame(ByteReader& r) {
    MocapFrame f;
    f.stream_id = r.u8();
    f.flags = r.u8();
    f.frame_no = r.u32();
    f.timestamp_us = r.u64();
    f.root_position = get_vec(r);
    f.joint_rotations = get_quats(r);
    return f;
}

void put_action(ByteWriter& w, const Action& action) {
    w.u8(static_cast<std::uint8_t>(action.index()));
    std::visit(
        [&w](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, SetRef>) {
                w.str(a.avatar);
                put_ref(w, a.ref);
            } else if constexpr (std::is_same_v<T, SetOwnership>) {
                w.str(a.avatar);
                w.u8(static_cast<std::uint8_t>(a.channel));
                w.u8(static_cast<std::uint8_t>(a.owner.kind));
                w.f64(a.owner.weight);
            } else if constexpr (std::is_same_v<T, StartPath>) {
                w.str(a.avatar);
                w.u32(static_cast<std::uint32_t>(a.goal.col));
                w.u32(static_cast<std::uint32_t>(a.goal.row));
                w.f64(a.speed);
            } else if constexpr (std::is_same_v<T, SetWatch>) {
                w.str(a.avatar);
                put_watch(w, a.target);
            } else {
                w.str(a.cue_id);
                w.u32(a.fire_count);
            }
        },
        action);
}

Action get_action(ByteReader& r) {
    switch (r.u8()) {
    case 0: {
        std::string avatar = r.str();
        return SetRef{std::move(avatar), get_ref(r)};
    }
    case 1: {
        SetOwnership a;
        a.avatar = r.str();
        const auto ch = r.u8();
        const auto kind = r.u8();
        if (ch >= kChannelCount || kind > static_cast<std::uint8_t>(OwnerKind::Blend)) {
            throw Error(kCorrupt, "bad ownership action");
        }
        a.channel = static_cast<ChannelId>(ch);
        a.owner = {static_cast<OwnerKind>(kind), r.f64()};
        return a;
    }
    case 2: {
        StartPath a;
        a.avatar = r.str();
        a.goal.col = static_cast<std::int32_t>(r.u32());
        a.goal.row = static_cast<std::int32_t>(r.u32());
        a.speed = r.f64();
        return a;
    }
    case 3: {
        SetWatch a;
        a.avatar = r.str();
        a.target = get_watch(r);
        return a;
    }
    case 4: {
        CueFired a;
        a.cue_id = r.str();
        a.fire_count = r.u32();
        return a;
    }
    default: throw Error(kCorrupt, "bad action tag");
    }
}

void expect_consumed(const ByteReader& r) {
    if (r.remaining() != 0) {
        throw Error(kCorrupt, std::to_string(r.remaining()) + " unread bytes in record");
    }
}

} // namespace

std::vector<std::uint8_t> serialize_inputs(const TickInputs& in) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.u64(in.tick_no);
    w.u32(static_cast<std::uint32_t>(in.mocap.size()));
    for (const auto& [id, s] : in.mocap) {
        w.u8(id);
        w.u8(static_cast<std::uint8_t>(s.status));
        w.u8(s.frame ? 1 : 0);
        if (s.frame) {
            put_frame(w, *s.frame);
        }
    }
    w.u32(static_cast<std::uint32_t>(in.axes.size()));
    for (const auto& [avatar, a] : in.axes) {
        w.str(avatar);
        w.f64(a.forward);
        w.f64(a.lateral);
        w.f64(a.vertical);
        w.f64(a.yaw_rate);
        w.f64(a.pitch_rate);
        w.u64(a.timestamp_us);
    }
    w.u32(static_cast<std::uint32_t>(in.actions.size()));
    for (const Action& a : in.actions) {
        put_action(w, a);
    }
    return out;
}

TickInputs deserialize_inputs(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, kCorrupt);
    TickInputs in;
    in.tick_no = r.u64();
    for (std::uint32_t n = r.u32(); n > 0; --n) {
        const std::uint8_t id = r.u8();
        StreamSample s;
        const auto status = r.u8();
        if (status > static_cast<std::uint8_t>(StreamStatus::Stale)) {
            throw Error(kCorrupt, "bad stream status");
        }
        s.status = static_cast<StreamStatus>(status);
        if (r.u8()) {
            s.frame = get_frame(r);
        }
        in.mocap.emplace(id, std::move(s));
    }
    for (std::uint32_t n = r.u32(); n > 0; --n) {
        std::string avatar = r.str();
        AxisInput a;
        a.forward = r.f64();
        a.lateral = r.f64();
        a.vertical = r.f64();
        a.yaw_rate = r.f64();
        a.pitch_rate = r.f64();
        a.timestamp_us = r.u64();
        in.axes.emplace(std::move(avatar), a);
    }
    for (std::uint32_t n = r.u32(); n > 0; --n) {
        in.actions.push_back(get_action(r));
    }
    expect_consumed(r);
    return in;
}

std::vector<std::uint8_t> serialize_output(const TickOutput& o) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.u64(o.tick_no);
    w.u32(static_cast<std::uint32_t>(o.poses.size()));
    for (const AvatarOutput& a : o.poses) {
        w.str(a.avatar_id);
        w.u16(a.index);
        put_ref(w, a.ref);
        put_vec(w, a.local_root.position);
        put_quat(w, a.local_root.rotation);
        put_vec(w, a.pose.position);
        put_quat(w, a.pose.rotation);
        put_quats(w, a.pose.joint_rotations);
    }
    w.u32(static_cast<std::uint32_t>(o.events.size()));
    for (const Event& e : o.events) {
        w.u64(e.tick_no);
        w.u8(static_cast<std::uint8_t>(e.kind));
        w.str(e.avatar);
        w.str(e.payload);
    }
    return out;
}

TickOutput deserialize_output(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, kCorrupt);
    TickOutput o;
    o.tick_no = r.u64();
    for (std::uint32_t n = r.u32(); n > 0; --n) {
        AvatarOutput a;
        a.avatar_id = r.str();
        a.index = r.u16();
        a.ref = get_ref(r);
        a.local_root.position = get_vec(r);
        a.local_root.rotation = get_quat(r);
        a.pose.position = get_vec(r);
        a.pose.rotation = get_quat(r);
        a.pose.joint_rotations = get_quats(r);
        o.poses.push_back(std::move(a));
    }
    for (std::uint32_t n = r.u32(); n > 0; --n) {
        Event e;
        e.tick_no = r.u64();
        const auto kind = r.u8();
        if (kind > static_cast<std::uint8_t>(EventKind::ActionRejected)) {
            throw Error(kCorrupt, "bad event kind");
        }
        e.kind = static_cast<EventKind>(kind);
        e.avatar = r.str();
        e.payload = r.str();
        o.events.push_back(std::move(e));
    }
    expect_consumed(r);
    return o;
}

double tick_period(double tick_hz) {
    if (!(tick_hz > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "tick rate must be positive");
    }
    return 1.0 / tick_hz;
}

SessionHeader make_header(const std::string& scene_json, const std::string& cue_json, double tick_hz) {
    return {detail::fnv1a64(scene_json), detail::fnv1a64(cue_json), tick_hz, scene_json, cue_json};
}

std::vector<std::uint8_t> SessionLog::bytes() const {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.raw(kLogMagic);
    auto record = [&](std::uint8_t type, const std::vector<std::uint8_t>& payload) {
        w.u8(type);
        w.u32(static_cast<std::uint32_t>(payload.size()));
        w.raw(payload);
    };
    std::vector<std::uint8_t> head;
    ByteWriter hw(head);
    hw.u64(header.scene_hash);
    hw.u64(header.cue_hash);
    hw.f64(header.tick_hz);
    hw.str(header.scene_json);
    hw.str(header.cue_json);
    record(kHeaderRecord, head);
    for (const SessionRecord& r : records) {
        record(kInputsRecord, r.inputs);
        record(kOutputRecord, r.output);
    }
    return out;
}

void SessionLog::write(const std::filesystem::path& path) const {
    const auto data = bytes();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "short write to " + path.string());
    }
}

SessionLog SessionLog::parse(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, kCorrupt);
    const auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), kLogMagic.data(), 4) != 0) {
        throw Error(kCorrupt, "not a session log");
    }
    auto next = [&r](std::uint8_t expected) {
        const std::uint8_t type = r.u8();
        if (type != expected) {
            throw Error(kCorrupt, "unexpected record type " + std::to_string(type) + " at byte " +
                                      std::to_string(r.position() - 1));
        }
        const std::uint32_t len = r.u32();
        return r.bytes(len);
    };

    SessionLog log;
    {
        ByteReader h(next(kHeaderRecord), kCorrupt);
        log.header.scene_hash = h.u64();
        log.header.cue_hash = h.u64();
        log.header.tick_hz = h.f64();
        log.header.scene_json = h.str();
        log.header.cue_json = h.str();
        expect_consumed(h);
        if (detail::fnv1a64(log.header.scene_json) != log.header.scene_hash ||
            detail::fnv1a64(log.header.cue_json) != log.header.cue_hash) {
            throw Error(kCorrupt, "header hashes do not match the embedded configuration");
        }
    }
    std::optional<std::uint64_t> last;
    while (r.remaining() > 0) {
        SessionRecord rec;
        const auto in = next(kInputsRecord);
        const auto out = next(kOutputRecord);
        rec.inputs.assign(in.begin(), in.end());
        rec.output.assign(out.begin(), out.end());
        if (rec.inputs.size() < 8 || rec.output.size() < 8) {
            throw Error(kCorrupt, "record too short");
        }
        ByteReader ti(in, kCorrupt);
        ByteReader to(out, kCorrupt);
        rec.tick_no = ti.u64();
        if (to.u64() != rec.tick_no) {
            throw Error(kCorrupt, "output record tick does not match its inputs");
        }
        if (last && rec.tick_no <= *last) {
            throw Error(kCorrupt, "tick numbers are not strictly increasing at tick " + std::to_string(rec.tick_no));
        }
        last = rec.tick_no;
        log.records.push_back(std::move(rec));
    }
    return log;
}

SessionLog SessionLog::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(data);
}

void SessionRecorder::record(const TickInputs& inputs, const TickOutput& output) {
    if (!log_.records.empty() && inputs.tick_no <= log_.records.back().tick_no) {
        throw Error(ErrorCode::InvalidArgument, "session records must have increasing tick numbers");
    }
    log_.records.push_back({inputs.tick_no, serialize_inputs(inputs), serialize_output(output)});
}

std::string ReplayVerdict::describe() const {
    if (identical) {
        return "identical (" + std::to_string(ticks_compared) + " ticks)";
    }
    return "diverged at tick " + std::to_string(*first_divergent_tick) + " (after " +
           std::to_string(ticks_compared) + " ticks)";
}

ReplayVerdict replay(const SessionLog& log, const std::optional<std::string>& expected_scene_json) {
    if (expected_scene_json && detail::fnv1a64(*expected_scene_json) != log.header.scene_hash) {
        throw Error(ErrorCode::SceneMismatch, "log was recorded against a different scene");
    }
    const SceneConfig scene = scene_from_resolved_json(log.header.scene_json);
    Mixer mixer = make_mixer(scene, tick_period(log.header.tick_hz));
    ReplayVerdict v;
    for (const SessionRecord& rec : log.records) {
        const TickInputs inputs = deserialize_inputs(rec.inputs);
        const auto produced = serialize_output(mixer.tick(inputs));
        ++v.ticks_compared;
        if (produced != rec.output) {
            v.identical = false;
            v.first_divergent_tick = rec.tick_no;
            break;
        }
    }
    return v;
}

} // namespace stagelink
