#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "stagelink/pose.hpp"

namespace stagelink {

/// One sample of the manipulator's axes. Components are clamped to [-1, 1].
struct AxisInput {
    double forward = 0.0;
    double lateral = 0.0;
    double vertical = 0.0;
    double yaw_rate = 0.0;
    double pitch_rate = 0.0;
    std::uint64_t timestamp_us = 0;

    AxisInput clamped() const;
    friend bool operator==(const AxisInput&, const AxisInput&) = default;
};

struct ManipulatorConfig {
    double linear_speed = 1.5;          // m/s, natural walking pace
    double vertical_speed = 0.5;        // m/s
    double yaw_speed = kPi / 2.0;       // rad/s
    double pitch_speed = kPi / 4.0;     // rad/s
    double dead_zone = 0.1;

    void validate() const;
};

/// Axis value after dead-zone rescaling: |a| <= dz maps to 0, 1 maps to 1.
double apply_dead_zone(double axis, double dead_zone);

TransformDelta axes_to_delta(const AxisInput& input, const ManipulatorConfig& cfg, double dt);

enum class ChannelId : std::uint8_t { RootXY, RootVertical, RootYaw, RootPitch, Limbs, Head };
inline constexpr std::size_t kChannelCount = 6;
inline constexpr std::array<ChannelId, kChannelCount> kAllChannels = {
    ChannelId::RootXY, ChannelId::RootVertical, ChannelId::RootYaw,
    ChannelId::RootPitch, ChannelId::Limbs, ChannelId::Head};

std::string_view to_string(ChannelId c);
std::optional<ChannelId> parse_channel_id(std::string_view s);

enum class OwnerKind : std::uint8_t { Mocap, Manipulator, Procedural, Blend };

std::string_view to_string(OwnerKind k);
std::optional<OwnerKind> parse_owner_kind(std::string_view s);

/// Control authority over one channel. For Blend, `weight` is the share of
/// the manipulator/procedural side.
struct Owner {
    OwnerKind kind = OwnerKind::Mocap;
    double weight = 0.0;

    static Owner mocap() { return {OwnerKind::Mocap, 0.0}; }
    static Owner manipulator() { return {OwnerKind::Manipulator, 0.0}; }
    static Owner procedural() { return {OwnerKind::Procedural, 0.0}; }
    static Owner blend(double w);

    friend bool operator==(const Owner&, const Owner&) = default;
};

/// Exactly one owner per (avatar, channel). New avatars start all-MOCAP.
class OwnershipTable {
public:
    using Row = std::array<Owner, kChannelCount>;

    void add_avatar(const std::string& avatar);
    bool has_avatar(const std::string& avatar) const { return rows_.count(avatar) != 0; }

    /// Throws UnknownAvatar.
    const Owner& get(const std::string& avatar, ChannelId channel) const;
    const Row& row(const std::string& avatar) const;
    const std::map<std::string, Row>& rows() const { return rows_; }

    friend bool operator==(const OwnershipTable&, const OwnershipTable&) = default;

private:
    friend OwnershipTable set_ownership(OwnershipTable table, const std::string& avatar, ChannelId channel,
                                        Owner owner);
    std::map<std::string, Row> rows_;
};

/// Returns a copy of `table` with one entry replaced. Throws UnknownAvatar.
OwnershipTable set_ownership(OwnershipTable table, const std::string& avatar, ChannelId channel, Owner owner);

} // namespace stagelink
