#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stagelink/mocap.hpp"
#include "stagelink/pose.hpp"

namespace stagelink {

/// Source joint name -> target joint name, validated against both topologies.
class BoneMap {
public:
    BoneMap() = default;
    BoneMap(std::map<std::string, std::string> entries, const SkeletonTopology& src, const SkeletonTopology& dst);

    /// Maps every joint of `topology` onto the same-named joint.
    static BoneMap identity(const SkeletonTopology& topology);

    const std::map<std::string, std::string>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// (source index, target index) pairs resolved at construction.
    const std::vector<std::pair<std::size_t, std::size_t>>& index_pairs() const { return pairs_; }

    friend bool operator==(const BoneMap& a, const BoneMap& b) { return a.entries_ == b.entries_; }

private:
    std::map<std::string, std::string> entries_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

/// Parses {"map": {src_name: dst_name, ...}}. Throws UnknownSourceJoint,
/// UnknownTargetJoint or DuplicateTarget naming the offending joint.
BoneMap load_bone_map(std::string_view json_text, const SkeletonTopology& src, const SkeletonTopology& dst);

std::string bone_map_to_json(const BoneMap& map);

struct RetargetedPose {
    RootPose root;
    std::vector<UnitQuat> joint_rotations;
};

/// Copies each mapped source rotation onto its target joint; unmapped target
/// joints stay in bind pose. Root position comes from the frame, root
/// rotation from the target root joint.
RetargetedPose retarget_pose(const MocapFrame& frame, const SkeletonTopology& src, const BoneMap& map,
                             const SkeletonTopology& dst);

} // namespace stagelink
