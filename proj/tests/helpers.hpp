#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "oracle.hpp"
#include "stagelink/mocap.hpp"
#include "stagelink/pose.hpp"

namespace th {

using namespace stagelink;

constexpr double kPi = std::numbers::pi;
inline double deg(double d) { return d * kPi / 180.0; }

inline std::filesystem::path assets() { return STAGELINK_TEST_ASSETS; }

inline UnitQuat random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
    const double len = std::sqrt(w * w + x * x + y * y + z * z);
    return {w / len, x / len, y / len, z / len};
}

inline Vec3 random_vec(std::mt19937_64& rng, double lim) {
    return {oracle::uniform(rng, -lim, lim), oracle::uniform(rng, -lim, lim), oracle::uniform(rng, -lim, lim)};
}

inline oracle::M3 matrix(const UnitQuat& q) { return oracle::from_quat(q.w(), q.x(), q.y(), q.z()); }
inline oracle::V3 v3(const Vec3& v) { return {v.x, v.y, v.z}; }

// Hips -> Spine -> Head, Head carrying an End Site.
inline const char* kThreeJointBvh = R"(HIERARCHY
ROOT Hips
{
  OFFSET 0 1 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Spine
  {
    OFFSET 0 0.2 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    JOINT Head
    {
      OFFSET 0 0.3 0
      CHANNELS 3 Zrotation Xrotation Yrotation
      End Site
      {
        OFFSET 0 0.1 0
      }
    }
  }
}
MOTION
Frames: 3
Frame Time: 0.01
0 1 0 0 0 0 0 0 0 0 0 0
0.1 1 0.2 0 0 0 90 0 0 0 0 0
0.2 1 0.4 10 20 30 0 0 0 0 45 0
)";

inline SkeletonTopology chain(int n, const std::string& prefix = "J") {
    std::vector<Joint> js;
    for (int i = 0; i < n; ++i) {
        js.push_back({prefix + std::to_string(i), i == 0 ? std::nullopt : std::optional<std::size_t>(i - 1),
                      i == 0 ? Vec3{0, 1, 0} : Vec3{0, 0.1, 0}});
    }
    return SkeletonTopology(std::move(js));
}

inline MocapFrame random_frame(std::mt19937_64& rng, std::size_t joints) {
    MocapFrame f;
    f.stream_id = static_cast<std::uint8_t>(rng());
    f.flags = static_cast<std::uint8_t>(rng());
    f.frame_no = static_cast<std::uint32_t>(rng());
    f.timestamp_us = rng();
    // f32 on the wire: pick values that survive the narrowing
    auto f32 = [&](double lim) { return static_cast<double>(static_cast<float>(oracle::uniform(rng, -lim, lim))); };
    f.root_position = {f32(5), f32(5), f32(5)};
    for (std::size_t i = 0; i < joints; ++i) {
        const UnitQuat q = random_quat(rng);
        f.joint_rotations.emplace_back(static_cast<float>(q.w()), static_cast<float>(q.x()),
                                       static_cast<float>(q.y()), static_cast<float>(q.z()));
    }
    return f;
}

} // namespace th
