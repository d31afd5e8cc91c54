#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stagelink/manipulator.hpp"
#include "stagelink/mixer.hpp"
#include "stagelink/pathfinder.hpp"
#include "stagelink/stage.hpp"

namespace stagelink {

enum class StreamOrigin { Bvh, Udp };

struct StreamConfig {
    std::uint8_t id = 0;
    StreamOrigin origin = StreamOrigin::Bvh;
    SkeletonTopology topology;
    /// Bvh origin only.
    std::filesystem::path bvh_path;
    bool loop = true;
    /// Playback rate in Hz; 0 keeps the file's frame time.
    double rate_hz = 0.0;
};

struct AvatarConfig {
    std::string id;
    std::uint8_t stream = 0;
    SkeletonTopology topology;
    BoneMap bone_map;
    ReferenceTransform ref;
    std::string head_joint = "Head";
};

/// A scene with every referenced file loaded. Serializes to a self-contained
/// JSON document (topologies, bone maps and grid inline) for session logs.
struct SceneConfig {
    StageCalibration calibration;
    std::vector<StreamConfig> streams;
    std::vector<AvatarConfig> avatars;
    std::optional<NavGrid> nav_grid;
    ManipulatorConfig manipulator;
};

/// Scene file (JSON):
///   {"c_volumes": {"<stream>": {"min":[x,y,z], "max":[x,y,z]}},
///    "a_to_b": {"translation":[x,y,z], "yaw_deg": n},
///    "streams": {"<stream>": {"source":"bvh", "bvh": path, "loop": bool, "rate": hz}
///                          | {"source":"udp", "topology": bvh path}},
///    "avatars": [{"id", "stream", "topology"?: bvh path, "bone_map"?: json path,
///                 "ref": {"pos":[...], "yaw_deg", "pitch_deg"}, "head_joint"?}],
///    "nav_grid": path,
///    "manipulator": {"linear_speed", "vertical_speed", "yaw_speed", "pitch_speed", "dead_zone"}}
/// Relative paths resolve against the scene file's directory. Missing files
/// throw AssetMissing.
SceneConfig load_scene(const std::filesystem::path& path);
SceneConfig parse_scene(std::string_view json_text, const std::filesystem::path& base_dir);

std::string scene_to_resolved_json(const SceneConfig& scene);
SceneConfig scene_from_resolved_json(std::string_view text);

/// Builds a mixer with every stream and avatar of the scene bound.
Mixer make_mixer(const SceneConfig& scene, double dt);

} // namespace stagelink
