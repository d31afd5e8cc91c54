#include "stagelink/manipulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "stagelink/error.hpp"

namespace stagelink {

namespace {

double clamp_axis(double v) { return std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0; }

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

} // namespace

AxisInput AxisInput::clamped() const {
    return {clamp_axis(forward), clamp_axis(lateral), clamp_axis(vertical),
            clamp_axis(yaw_rate), clamp_axis(pitch_rate), timestamp_us};
}

void ManipulatorConfig::validate() const {
    if (!(linear_speed > 0.0 && vertical_speed > 0.0 && yaw_speed > 0.0 && pitch_speed > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "manipulator speeds must be positive");
    }
    if (!(dead_zone >= 0.0 && dead_zone < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "dead zone must lie in [0, 0.5)");
    }
}

double apply_dead_zone(double axis, double dead_zone) {
    const double a = clamp_axis(axis);
    const double mag = std::abs(a);
    if (mag <= dead_zone) {
        return 0.0;
    }
    return std::copysign((mag - dead_zone) / (1.0 - dead_zone), a);
}

TransformDelta axes_to_delta(const AxisInput& input, const ManipulatorConfig& cfg, double dt) {
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    }
    const double dz = cfg.dead_zone;
    TransformDelta d;
    d.d_forward = apply_dead_zone(input.forward, dz) * cfg.linear_speed * dt;
    d.d_lateral = apply_dead_zone(input.lateral, dz) * cfg.linear_speed * dt;
    d.d_vertical = apply_dead_zone(input.vertical, dz) * cfg.vertical_speed * dt;
    d.d_yaw = apply_dead_zone(input.yaw_rate, dz) * cfg.yaw_speed * dt;
    d.d_pitch = apply_dead_zone(input.pitch_rate, dz) * cfg.pitch_speed * dt;
    return d;
}

std::string_view to_string(ChannelId c) {
    switch (c) {
    case ChannelId::RootXY: return "ROOT_XY";
    case ChannelId::RootVertical: return "ROOT_VERTICAL";
    case ChannelId::RootYaw: return "ROOT_YAW";
    case ChannelId::RootPitch: return "ROOT_PITCH";
    case ChannelId::Limbs: return "LIMBS";
    case ChannelId::Head: return "HEAD";
    }
    return "?";
}

std::optional<ChannelId> parse_channel_id(std::string_view s) {
    const std::string u = upper(s);
    for (ChannelId c : kAllChannels) {
        if (u == to_string(c)) {
            return c;
        }
    }
    return std::nullopt;
}

std::string_view to_string(OwnerKind k) {
    switch (k) {
    case OwnerKind::Mocap: return "MOCAP";
    case OwnerKind::Manipulator: return "MANIPULATOR";
    case OwnerKind::Procedural: return "PROCEDURAL";
    case OwnerKind::Blend: return "BLEND";
    }
    return "?";
}

std::optional<OwnerKind> parse_owner_kind(std::string_view s) {
    const std::string u = upper(s);
    for (OwnerKind k : {OwnerKind::Mocap, OwnerKind::Manipulator, OwnerKind::Procedural, OwnerKind::Blend}) {
        if (u == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

Owner Owner::blend(double w) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "blend weight must lie in [0, 1]");
    }
    return {OwnerKind::Blend, w};
}

void OwnershipTable::add_avatar(const std::string& avatar) {
    Row row;
    row.fill(Owner::mocap());
    rows_.emplace(avatar, row);
}

const OwnershipTable::Row& OwnershipTable::row(const std::string& avatar) const {
    const auto it = rows_.find(avatar);
    if (it == rows_.end()) {
        throw Error(ErrorCode::UnknownAvatar, avatar);
    }
    return it->second;
}

const Owner& OwnershipTable::get(const std::string& avatar, ChannelId channel) const {
    return row(avatar)[static_cast<std::size_t>(channel)];
}

OwnershipTable set_ownership(OwnershipTable table, const std::string& avatar, ChannelId channel, Owner owner) {
    const auto it = table.rows_.find(avatar);
    if (it == table.rows_.end()) {
        throw Error(ErrorCode::UnknownAvatar, avatar);
    }
    if (owner.kind == OwnerKind::Blend) {
        owner = Owner::blend(owner.weight);
    } else {
        owner.weight = 0.0;
    }
    it->second[static_cast<std::size_t>(channel)] = owner;
    return table;
}

} // namespace stagelink
