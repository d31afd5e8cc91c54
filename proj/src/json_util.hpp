#pragma once

// JSON conversions shared by the scene loader, cue sheets, events and
// state reports.

#include <string>

#include <json.hpp>

#include "stagelink/error.hpp"
#include "stagelink/manipulator.hpp"
#include "stagelink/pose.hpp"
#include "stagelink/stage.hpp"

namespace stagelink::detail {

using nlohmann::json;

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

/// Reads a [x, y, z] array; failures throw `code` naming `where`.
inline Vec3 vec3_from(const json& j, ErrorCode code, const std::string& where) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
        throw Error(code, where + ": expected [x, y, z]");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline double number_from(const json& j, ErrorCode code, const std::string& where) {
    if (!j.is_number()) {
        throw Error(code, where + ": expected a number");
    }
    return j.get<double>();
}

inline std::string string_from(const json& j, ErrorCode code, const std::string& where) {
    if (!j.is_string()) {
        throw Error(code, where + ": expected a string");
    }
    return j.get<std::string>();
}

inline const json& member(const json& obj, const char* key, ErrorCode code, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(code, where + "/" + key + ": missing");
    }
    return obj.at(key);
}

inline json to_json(const WatchTarget& t) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, WatchAvatar>) {
                return {{"kind", "avatar"}, {"avatar", v.avatar}};
            } else if constexpr (std::is_same_v<T, WatchPerformer>) {
                return {{"kind", "performer"}, {"pos", to_json(v.position)}};
            } else {
                return {{"kind", "point"}, {"pos", to_json(v.position)}};
            }
        },
        t);
}

inline WatchTarget watch_from(const json& j, ErrorCode code, const std::string& where) {
    const std::string kind = string_from(member(j, "kind", code, where), code, where + "/kind");
    if (kind == "avatar") {
        return WatchAvatar{string_from(member(j, "avatar", code, where), code, where + "/avatar")};
    }
    if (kind == "performer") {
        return WatchPerformer{vec3_from(member(j, "pos", code, where), code, where + "/pos")};
    }
    if (kind == "point") {
        return WatchPoint{vec3_from(member(j, "pos", code, where), code, where + "/pos")};
    }
    throw Error(code, where + "/kind: unknown watch target kind '" + kind + "'");
}

inline json to_json(const Owner& o) {
    json j = {{"owner", std::string(to_string(o.kind))}};
    if (o.kind == OwnerKind::Blend) {
        j["weight"] = o.weight;
    }
    return j;
}

} // namespace stagelink::detail
