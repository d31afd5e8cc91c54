#include "stagelink/mixer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json_util.hpp"
#include "stagelink/error.hpp"

namespace stagelink {

using detail::json;

namespace {

constexpr std::uint8_t kRootJoint = 0;
constexpr std::uint8_t kLimbJoint = 1;
constexpr std::uint8_t kHeadJoint = 2;

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

json ref_json(const ReferenceTransform& r) {
    return {{"pos", detail::to_json(r.translation())}, {"yaw", r.yaw()}, {"pitch", r.pitch()}};
}

/// Share of the manipulator for one root channel this tick.
double manipulator_share(const Owner& o, bool procedural_active) {
    switch (o.kind) {
    case OwnerKind::Manipulator: return 1.0;
    case OwnerKind::Blend: return procedural_active ? 0.0 : o.weight;
    default: return 0.0;
    }
}

/// Mocap value vs. suppressed value under one owner.
double mocap_keep(const Owner& o) {
    switch (o.kind) {
    case OwnerKind::Mocap: return 1.0;
    case OwnerKind::Blend: return 1.0 - o.weight;
    default: return 0.0;
    }
}

UnitQuat resolve_rotation(const Owner& o, const UnitQuat& mocap, const UnitQuat& other) {
    switch (o.kind) {
    case OwnerKind::Mocap: return mocap;
    case OwnerKind::Blend: return slerp(mocap, other, o.weight);
    default: return other;
    }
}

} // namespace

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::OwnershipChanged: return "OwnershipChanged";
    case EventKind::RefSet: return "RefSet";
    case EventKind::PathStarted: return "PathStarted";
    case EventKind::PathFailed: return "PathFailed";
    case EventKind::PathDone: return "PathDone";
    case EventKind::WatchSet: return "WatchSet";
    case EventKind::CueFired: return "CueFired";
    case EventKind::StreamStale: return "StreamStale";
    case EventKind::StreamRecovered: return "StreamRecovered";
    case EventKind::VolumeExceeded: return "VolumeExceeded";
    case EventKind::ActionRejected: return "ActionRejected";
    }
    return "?";
}

Mixer::Mixer(MixerConfig config) : config_(std::move(config)) {
    if (!(config_.dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "tick period must be positive");
    }
    config_.manipulator.validate();
    for (const auto& [id, box] : config_.calibration.c_volumes) {
        box.validate();
    }
}

void Mixer::add_stream(std::uint8_t stream_id, SkeletonTopology topology) {
    if (topology.empty()) {
        throw Error(ErrorCode::InvalidArgument, "stream topology is empty");
    }
    streams_[stream_id] = StreamState{std::move(topology), std::nullopt, false};
}

void Mixer::bind_avatar(AvatarBinding binding) {
    if (ownership_.has_avatar(binding.avatar_id)) {
        throw Error(ErrorCode::DuplicateAvatar, binding.avatar_id);
    }
    if (!streams_.count(binding.stream_id)) {
        throw Error(ErrorCode::InvalidArgument, "avatar '" + binding.avatar_id + "' references unknown stream " +
                                                    std::to_string(binding.stream_id));
    }
    if (binding.topology.empty()) {
        throw Error(ErrorCode::InvalidArgument, "avatar '" + binding.avatar_id + "' has an empty topology");
    }
    AvatarState st;
    st.index = static_cast<std::uint16_t>(avatars_.size());
    const SkeletonTopology& topo = binding.topology;
    st.joint_channel.assign(topo.size(), kLimbJoint);
    st.joint_channel[0] = kRootJoint;
    const std::string head = lower(binding.head_joint);
    for (std::size_t i = 1; i < topo.size(); ++i) {
        if (!st.head_index && lower(topo[i].name) == head) {
            st.head_index = i;
            st.joint_channel[i] = kHeadJoint;
        } else if (st.joint_channel[*topo[i].parent] == kHeadJoint) {
            st.joint_channel[i] = kHeadJoint;
        }
    }
    st.last_position = binding.ref.translation();
    st.binding = std::move(binding);
    ownership_.add_avatar(st.binding.avatar_id);
    avatars_.push_back(std::move(st));
}

const AvatarBinding& Mixer::binding(const std::string& avatar) const {
    for (const auto& a : avatars_) {
        if (a.binding.avatar_id == avatar) {
            return a.binding;
        }
    }
    throw Error(ErrorCode::UnknownAvatar, avatar);
}

Mixer::AvatarState* Mixer::find(const std::string& avatar) {
    for (auto& a : avatars_) {
        if (a.binding.avatar_id == avatar) {
            return &a;
        }
    }
    return nullptr;
}

void Mixer::apply_action(const Action& action, std::uint64_t tick_no, std::vector<Event>& events) {
    auto reject = [&](const std::string& avatar, std::string_view what, std::string_view reason) {
        events.push_back({tick_no, EventKind::ActionRejected, avatar,
                          json{{"action", what}, {"reason", reason}}.dump()});
    };

    if (const auto* a = std::get_if<SetRef>(&action)) {
        AvatarState* av = find(a->avatar);
        if (!av) {
            return reject(a->avatar, "set_ref", "UnknownAvatar");
        }
        av->binding.ref = a->ref;
        events.push_back({tick_no, EventKind::RefSet, a->avatar, ref_json(a->ref).dump()});
    } else if (const auto* a = std::get_if<SetOwnership>(&action)) {
        if (!ownership_.has_avatar(a->avatar)) {
            return reject(a->avatar, "set_ownership", "UnknownAvatar");
        }
        ownership_ = set_ownership(std::move(ownership_), a->avatar, a->channel, a->owner);
        json payload = detail::to_json(a->owner);
        payload["channel"] = std::string(to_string(a->channel));
        events.push_back({tick_no, EventKind::OwnershipChanged, a->avatar, payload.dump()});
    } else if (const auto* a = std::get_if<StartPath>(&action)) {
        AvatarState* av = find(a->avatar);
        if (!av) {
            return reject(a->avatar, "start_path", "UnknownAvatar");
        }
        auto fail = [&](std::string_view reason) {
            events.push_back({tick_no, EventKind::PathFailed, a->avatar,
                              json{{"goal", {a->goal.col, a->goal.row}}, {"reason", reason}}.dump()});
        };
        if (!config_.nav_grid) {
            return fail("no nav grid");
        }
        if (!(a->speed > 0.0)) {
            return fail("speed must be positive");
        }
        try {
            const Cell start = config_.nav_grid->cell_at(av->binding.ref.translation());
            PlannedPath p = plan(*config_.nav_grid, start, a->goal);
            events.push_back({tick_no, EventKind::PathStarted, a->avatar,
                              json{{"goal", {a->goal.col, a->goal.row}},
                                   {"start", {start.col, start.row}},
                                   {"cells", p.cells.size()},
                                   {"length", p.total_length}}
                                  .dump()});
            av->binding.path = ActivePath{std::move(p), a->speed, tick_no};
        } catch (const Error& e) {
            fail(to_string(e.code()));
        }
    } else if (const auto* a = std::get_if<SetWatch>(&action)) {
        AvatarState* av = find(a->avatar);
        if (!av) {
            return reject(a->avatar, "set_watch", "UnknownAvatar");
        }
        if (a->target) {
            if (const auto* w = std::get_if<WatchAvatar>(&*a->target); w && !find(w->avatar)) {
                return reject(a->avatar, "set_watch", "UnknownAvatar");
            }
        }
        av->binding.watch = a->target;
        events.push_back({tick_no, EventKind::WatchSet, a->avatar,
                          a->target ? detail::to_json(*a->target).dump() : std::string("null")});
    } else if (const auto* a = std::get_if<CueFired>(&action)) {
        cue_fire_counts_[a->cue_id] = a->fire_count;
        events.push_back({tick_no, EventKind::CueFired, "", json{{"cue", a->cue_id}, {"count", a->fire_count}}.dump()});
    }
}

std::optional<Vec3> Mixer::watch_position(const WatchTarget& target, const std::map<std::string, Vec3>& roots) const {
    if (const auto* a = std::get_if<WatchAvatar>(&target)) {
        const auto it = roots.find(a->avatar);
        if (it == roots.end()) {
            return std::nullopt;
        }
        return it->second;
    }
    if (const auto* p = std::get_if<WatchPerformer>(&target)) {
        return map_a_to_b(p->position, config_.calibration.a_to_b);
    }
    return std::get<WatchPoint>(target).position;
}

TickOutput Mixer::tick(const TickInputs& in) {
    TickOutput out;
    out.tick_no = in.tick_no;
    const std::uint64_t tick_no = in.tick_no;

    // 1. Ownership changes and cue actions, in the order given.
    for (const Action& a : in.actions) {
        apply_action(a, tick_no, out.events);
    }

    // 2. Input sampling. Missing samples hold the last frame.
    for (auto& [id, st] : streams_) {
        const auto it = in.mocap.find(id);
        if (it == in.mocap.end()) {
            continue;
        }
        const StreamSample& s = it->second;
        if (s.status == StreamStatus::Frame && s.frame && s.frame->joint_rotations.size() == st.topology.size()) {
            st.last = *s.frame;
            if (st.stale) {
                st.stale = false;
                out.events.push_back({tick_no, EventKind::StreamRecovered, "", json{{"stream", id}}.dump()});
            }
        } else if (s.status == StreamStatus::Stale && !st.stale) {
            st.stale = true;
            out.events.push_back({tick_no, EventKind::StreamStale, "", json{{"stream", id}}.dump()});
        }
    }

    // 3. Channel resolution against one table snapshot; nothing below mutates
    //    ownership_.
    const OwnershipTable& table = ownership_;
    const ManipulatorConfig& mcfg = config_.manipulator;
    static const AxisInput kIdle{};

    std::map<std::string, Vec3> roots;
    out.poses.reserve(avatars_.size());
    for (AvatarState& av : avatars_) {
        AvatarBinding& b = av.binding;
        const OwnershipTable::Row& row = table.row(b.avatar_id);
        auto owner = [&row](ChannelId c) -> const Owner& { return row[static_cast<std::size_t>(c)]; };
        if (tracing_) {
            for (ChannelId c : kAllChannels) {
                trace_.push_back({tick_no, av.index, c, owner(c).kind});
            }
        }

        // Retargeted mocap, or bind pose before the first frame.
        const StreamState& stream = streams_.at(b.stream_id);
        RetargetedPose mocap;
        const Vec3 bind_root = b.topology[0].bind_offset;
        if (stream.last) {
            mocap = retarget_pose(*stream.last, stream.topology, b.bone_map, b.topology);
        } else {
            mocap.root.position = bind_root;
            mocap.joint_rotations.assign(b.topology.size(), UnitQuat::identity());
        }

        // Clamp into the reduced acting volume of this stream.
        Vec3 p = mocap.root.position;
        if (const auto vol = config_.calibration.c_volumes.find(b.stream_id);
            vol != config_.calibration.c_volumes.end()) {
            const ClampResult c = clamp_to_volume(p, vol->second);
            if (c.clamped && !av.clamped) {
                out.events.push_back({tick_no, EventKind::VolumeExceeded, b.avatar_id,
                                      json{{"stream", b.stream_id}, {"pos", detail::to_json(p)}}.dump()});
            }
            av.clamped = c.clamped;
            p = c.position;
        }

        // Reference transform: manipulator deltas, then path following.
        const bool path_active = b.path.has_value();
        const Owner& xy = owner(ChannelId::RootXY);
        const Owner& vert = owner(ChannelId::RootVertical);
        const Owner& yaw = owner(ChannelId::RootYaw);
        const Owner& pitch = owner(ChannelId::RootPitch);
        const auto ax = in.axes.find(b.avatar_id);
        const TransformDelta raw = axes_to_delta(ax == in.axes.end() ? kIdle : ax->second.clamped(), mcfg, config_.dt);
        TransformDelta d;
        const double xy_share = manipulator_share(xy, path_active);
        d.d_forward = raw.d_forward * xy_share;
        d.d_lateral = raw.d_lateral * xy_share;
        d.d_vertical = raw.d_vertical * manipulator_share(vert, false);
        d.d_yaw = raw.d_yaw * manipulator_share(yaw, path_active);
        d.d_pitch = raw.d_pitch * manipulator_share(pitch, false);
        if (!(d == TransformDelta{})) {
            b.ref = apply_delta(b.ref, d);
        }
        if (path_active) {
            const double t = static_cast<double>(tick_no - std::min(tick_no, b.path->start_tick)) * config_.dt;
            const FollowState fs = follow(b.path->path, b.path->speed, t);
            const bool drive_xy = xy.kind == OwnerKind::Procedural || xy.kind == OwnerKind::Blend;
            const bool drive_yaw = yaw.kind == OwnerKind::Procedural || yaw.kind == OwnerKind::Blend;
            if (drive_xy || drive_yaw) {
                Vec3 t3 = b.ref.translation();
                double y = b.ref.yaw();
                if (drive_xy) {
                    t3.x = fs.position.x;
                    t3.z = fs.position.z;
                }
                if (drive_yaw && fs.has_heading) {
                    y = fs.yaw;
                }
                b.ref = ReferenceTransform(t3, y, b.ref.pitch());
            }
            if (fs.done) {
                const Cell goal = b.path->path.cells.back();
                out.events.push_back({tick_no, EventKind::PathDone, b.avatar_id,
                                      json{{"goal", {goal.col, goal.row}},
                                           {"pos", detail::to_json(fs.position)}}.dump()});
                b.path.reset();
            }
        }

        // Local root: channels not owned by mocap fall back to bind values.
        RootPose local;
        const double keep_xy = mocap_keep(xy);
        const double keep_v = mocap_keep(vert);
        local.position = {bind_root.x + (p.x - bind_root.x) * keep_xy,
                          bind_root.y + (p.y - bind_root.y) * keep_v,
                          bind_root.z + (p.z - bind_root.z) * keep_xy};
        if (keep_xy == 1.0) {
            local.position.x = p.x;
            local.position.z = p.z;
        }
        if (keep_v == 1.0) {
            local.position.y = p.y;
        }
        if (yaw.kind == OwnerKind::Mocap && pitch.kind == OwnerKind::Mocap) {
            local.rotation = mocap.root.rotation;
        } else {
            const YawSplit split = split_yaw(mocap.root.rotation);
            const UnitQuat yaw_part = resolve_rotation(yaw, UnitQuat::about_y(split.yaw), UnitQuat::identity());
            const UnitQuat rest_part = resolve_rotation(pitch, split.rest, UnitQuat::identity());
            local.rotation = yaw_part * rest_part;
        }

        const RootPose world = compose(b.ref, local);

        AvatarOutput o;
        o.avatar_id = b.avatar_id;
        o.index = av.index;
        o.ref = b.ref;
        o.local_root = local;
        o.pose.position = world.position;
        o.pose.rotation = world.rotation;
        o.pose.joint_rotations = std::move(mocap.joint_rotations);
        o.pose.joint_rotations[0] = local.rotation;
        const Owner& limbs = owner(ChannelId::Limbs);
        const Owner& head = owner(ChannelId::Head);
        for (std::size_t i = 1; i < o.pose.joint_rotations.size(); ++i) {
            const Owner& ow = av.joint_channel[i] == kHeadJoint ? head : limbs;
            o.pose.joint_rotations[i] = resolve_rotation(ow, o.pose.joint_rotations[i], UnitQuat::identity());
        }
        av.last_position = world.position;
        roots[b.avatar_id] = world.position;
        out.poses.push_back(std::move(o));
    }

    // 4. Watch-driven heads, once every root is known.
    for (AvatarState& av : avatars_) {
        const AvatarBinding& b = av.binding;
        const Owner& head = table.get(b.avatar_id, ChannelId::Head);
        if (!av.head_index || !b.watch ||
            (head.kind != OwnerKind::Procedural && head.kind != OwnerKind::Blend)) {
            continue;
        }
        const auto target = watch_position(*b.watch, roots);
        if (!target) {
            continue;
        }
        AvatarOutput& o = out.poses[av.index];
        const std::size_t h = *av.head_index;
        const JointWorld fk = forward_kinematics(b.topology, {o.pose.position, o.pose.rotation}, o.pose.joint_rotations);
        double yaw = 0.0;
        try {
            yaw = look_at_yaw(fk.positions[h], *target);
        } catch (const Error&) {
            continue;  // target straight above/below the head: keep the resolved rotation
        }
        const UnitQuat parent = fk.rotations[*b.topology[h].parent];
        const UnitQuat watch_local = parent.conjugate() * UnitQuat::about_y(yaw);
        if (head.kind == OwnerKind::Blend) {
            const StreamState& stream = streams_.at(b.stream_id);
            UnitQuat mocap_head;
            if (stream.last) {
                mocap_head = retarget_pose(*stream.last, stream.topology, b.bone_map, b.topology).joint_rotations[h];
            }
            o.pose.joint_rotations[h] = slerp(mocap_head, watch_local, head.weight);
        } else {
            o.pose.joint_rotations[h] = watch_local;
        }
    }

    last_tick_no_ = tick_no;
    return out;
}

StateReport Mixer::snapshot() const {
    StateReport r;
    r.last_tick_no = last_tick_no_;
    r.cue_fire_counts = cue_fire_counts_;
    for (const AvatarState& av : avatars_) {
        AvatarReport a;
        a.id = av.binding.avatar_id;
        a.stream_id = av.binding.stream_id;
        a.ref = av.binding.ref;
        a.ownership = ownership_.row(a.id);
        a.watch = av.binding.watch;
        if (av.binding.path) {
            a.path_goal = av.binding.path->path.cells.back();
        }
        a.position = av.last_position;
        r.avatars.push_back(std::move(a));
    }
    return r;
}

std::string report_to_json(const StateReport& report) {
    json j;
    j["type"] = "state";
    j["tick_no"] = report.last_tick_no;
    j["cues"] = json::object();
    for (const auto& [id, n] : report.cue_fire_counts) {
        j["cues"][id] = n;
    }
    j["avatars"] = json::array();
    for (const AvatarReport& a : report.avatars) {
        json aj;
        aj["id"] = a.id;
        aj["stream"] = a.stream_id;
        aj["ref"] = ref_json(a.ref);
        aj["position"] = detail::to_json(a.position);
        json own = json::object();
        for (ChannelId c : kAllChannels) {
            own[std::string(to_string(c))] = detail::to_json(a.ownership[static_cast<std::size_t>(c)]);
        }
        aj["ownership"] = own;
        aj["watch"] = a.watch ? detail::to_json(*a.watch) : json(nullptr);
        aj["path_goal"] = a.path_goal ? json{a.path_goal->col, a.path_goal->row} : json(nullptr);
        j["avatars"].push_back(std::move(aj));
    }
    return j.dump();
}

StateReport report_from_json(std::string_view text) {
    constexpr ErrorCode kErr = ErrorCode::ParseError;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(kErr, e.what());
    }
    try {
        StateReport r;
        r.last_tick_no = j.at("tick_no").get<std::uint64_t>();
        for (const auto& [id, n] : j.at("cues").items()) {
            r.cue_fire_counts[id] = n.get<std::uint32_t>();
        }
        for (const json& aj : j.at("avatars")) {
            AvatarReport a;
            a.id = aj.at("id").get<std::string>();
            a.stream_id = aj.at("stream").get<std::uint8_t>();
            const json& rj = aj.at("ref");
            a.ref = ReferenceTransform(detail::vec3_from(rj.at("pos"), kErr, "/ref/pos"), rj.at("yaw").get<double>(),
                                       rj.at("pitch").get<double>());
            a.position = detail::vec3_from(aj.at("position"), kErr, "/position");
            for (ChannelId c : kAllChannels) {
                const json& oj = aj.at("ownership").at(std::string(to_string(c)));
                const auto kind = parse_owner_kind(oj.at("owner").get<std::string>());
                if (!kind) {
                    throw Error(kErr, "unknown owner");
                }
                a.ownership[static_cast<std::size_t>(c)] =
                    *kind == OwnerKind::Blend ? Owner::blend(oj.at("weight").get<double>()) : Owner{*kind, 0.0};
            }
            if (!aj.at("watch").is_null()) {
                a.watch = detail::watch_from(aj.at("watch"), kErr, "/watch");
            }
            if (!aj.at("path_goal").is_null()) {
                a.path_goal = Cell{aj.at("path_goal")[0].get<int>(), aj.at("path_goal")[1].get<int>()};
            }
            r.avatars.push_back(std::move(a));
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(kErr, e.what());
    }
}

} // namespace stagelink
