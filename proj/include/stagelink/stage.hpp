#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "stagelink/pose.hpp"

namespace stagelink {

/// Axis-aligned box in mocaptor-space meters. min < max on every axis.
struct Box {
    Vec3 min;
    Vec3 max;

    void validate() const;
    friend bool operator==(const Box&, const Box&) = default;
};

/// Rigid placement of the physical stage inside the digital scenery.
struct StageToScenery {
    Vec3 translation;
    double yaw = 0.0;

    friend bool operator==(const StageToScenery&, const StageToScenery&) = default;
};

struct StageCalibration {
    /// Reduced acting volume per mocap stream id.
    std::map<std::uint8_t, Box> c_volumes;
    StageToScenery a_to_b;

    friend bool operator==(const StageCalibration&, const StageCalibration&) = default;
};

struct ClampResult {
    Vec3 position;
    bool clamped = false;
};

/// Per-component clamp; the boundary counts as inside.
ClampResult clamp_to_volume(const Vec3& p, const Box& volume);

/// p_B = R(yaw) p_A + translation.
Vec3 map_a_to_b(const Vec3& p_stage, const StageToScenery& calib);

/// Yaw that turns forward (+Z) toward the horizontal projection of
/// target - from. Throws DegenerateTarget when the horizontal distance is
/// <= 1e-6 m.
double look_at_yaw(const Vec3& from, const Vec3& target);

inline constexpr double kDegenerateDistance = 1e-6;

struct WatchAvatar {
    std::string avatar;
    friend bool operator==(const WatchAvatar&, const WatchAvatar&) = default;
};
/// Position on the physical stage (space A); mapped through a_to_b.
struct WatchPerformer {
    Vec3 position;
    friend bool operator==(const WatchPerformer&, const WatchPerformer&) = default;
};
/// Position directly in the digital scenery (space B).
struct WatchPoint {
    Vec3 position;
    friend bool operator==(const WatchPoint&, const WatchPoint&) = default;
};

using WatchTarget = std::variant<WatchAvatar, WatchPerformer, WatchPoint>;

} // namespace stagelink
