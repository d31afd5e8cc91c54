#include "stagelink/retarget.hpp"

#include <set>

#include <json.hpp>

#include "stagelink/error.hpp"

namespace stagelink {

BoneMap::BoneMap(std::map<std::string, std::string> entries, const SkeletonTopology& src,
                 const SkeletonTopology& dst)
    : entries_(std::move(entries)) {
    std::set<std::string_view> targets;
    for (const auto& [from, to] : entries_) {
        const auto si = src.find(from);
        if (!si) {
            throw Error(ErrorCode::UnknownSourceJoint, from);
        }
        const auto di = dst.find(to);
        if (!di) {
            throw Error(ErrorCode::UnknownTargetJoint, to);
        }
        if (!targets.insert(to).second) {
            throw Error(ErrorCode::DuplicateTarget, to);
        }
        pairs_.emplace_back(*si, *di);
    }
}

BoneMap BoneMap::identity(const SkeletonTopology& topology) {
    std::map<std::string, std::string> entries;
    for (const Joint& j : topology.joints()) {
        entries.emplace(j.name, j.name);
    }
    return BoneMap(std::move(entries), topology, topology);
}

BoneMap load_bone_map(std::string_view json_text, const SkeletonTopology& src, const SkeletonTopology& dst) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_object() || !doc.contains("map") || !doc["map"].is_object()) {
        throw Error(ErrorCode::ParseError, "bone map must be an object with a \"map\" object");
    }
    std::map<std::string, std::string> entries;
    for (const auto& [from, to] : doc["map"].items()) {
        if (!to.is_string()) {
            throw Error(ErrorCode::ParseError, "bone map target for '" + from + "' is not a string");
        }
        entries.emplace(from, to.get<std::string>());
    }
    return BoneMap(std::move(entries), src, dst);
}

std::string bone_map_to_json(const BoneMap& map) {
    nlohmann::json doc;
    doc["map"] = nlohmann::json::object();
    for (const auto& [from, to] : map.entries()) {
        doc["map"][from] = to;
    }
    return doc.dump();
}

RetargetedPose retarget_pose(const MocapFrame& frame, const SkeletonTopology& src, const BoneMap& map,
                             const SkeletonTopology& dst) {
    if (frame.joint_rotations.size() != src.size()) {
        throw Error(ErrorCode::TopologyMismatch, "frame carries " + std::to_string(frame.joint_rotations.size()) +
                                                     " joints, source topology has " + std::to_string(src.size()));
    }
    RetargetedPose out;
    out.joint_rotations.assign(dst.size(), UnitQuat::identity());
    for (const auto& [si, di] : map.index_pairs()) {
        out.joint_rotations[di] = frame.joint_rotations[si];
    }
    out.root.position = frame.root_position;
    if (!out.joint_rotations.empty()) {
        out.root.rotation = out.joint_rotations[0];
    }
    return out;
}

} // namespace stagelink
