#include "stagelink/scene.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "stagelink/error.hpp"
#include "stagelink/mocap.hpp"
#include "stagelink/retarget.hpp"

namespace stagelink {

using detail::json;

namespace {

constexpr ErrorCode kBad = ErrorCode::ParseError;

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::AssetMissing, path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

SkeletonTopology topology_from_bvh(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::AssetMissing, path.string());
    }
    return load_bvh(path).topology;
}

std::uint8_t stream_key(const std::string& key, const std::string& where) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(key, &used);
        if (used != key.size() || v < 0 || v > 255) {
            throw std::out_of_range(key);
        }
        return static_cast<std::uint8_t>(v);
    } catch (const std::exception&) {
        throw Error(kBad, where + ": stream id '" + key + "' must be an integer 0-255");
    }
}

ReferenceTransform ref_from_file(const json& r, const std::string& where) {
    const Vec3 pos = r.contains("pos") ? detail::vec3_from(r["pos"], kBad, where + "/pos") : Vec3{};
    const double yaw = r.contains("yaw_deg") ? detail::number_from(r["yaw_deg"], kBad, where + "/yaw_deg") : 0.0;
    const double pitch =
        r.contains("pitch_deg") ? detail::number_from(r["pitch_deg"], kBad, where + "/pitch_deg") : 0.0;
    return {pos, deg_to_rad(yaw), deg_to_rad(pitch)};
}

ManipulatorConfig manipulator_from(const json& m) {
    ManipulatorConfig c;
    c.linear_speed = m.value("linear_speed", c.linear_speed);
    c.vertical_speed = m.value("vertical_speed", c.vertical_speed);
    c.yaw_speed = m.value("yaw_speed", c.yaw_speed);
    c.pitch_speed = m.value("pitch_speed", c.pitch_speed);
    c.dead_zone = m.value("dead_zone", c.dead_zone);
    c.validate();
    return c;
}

json topology_json(const SkeletonTopology& t) {
    json arr = json::array();
    for (const Joint& j : t.joints()) {
        arr.push_back({{"name", j.name},
                       {"parent", j.parent ? json(*j.parent) : json(nullptr)},
                       {"offset", detail::to_json(j.bind_offset)}});
    }
    return arr;
}

SkeletonTopology topology_from(const json& arr) {
    std::vector<Joint> joints;
    for (const json& j : arr) {
        Joint joint;
        joint.name = j.at("name").get<std::string>();
        if (!j.at("parent").is_null()) {
            joint.parent = j.at("parent").get<std::size_t>();
        }
        joint.bind_offset = detail::vec3_from(j.at("offset"), kBad, "/offset");
        joints.push_back(std::move(joint));
    }
    return SkeletonTopology(std::move(joints));
}

json box_json(const Box& b) { return {{"min", detail::to_json(b.min)}, {"max", detail::to_json(b.max)}}; }

Box box_from(const json& j, const std::string& where) {
    Box b{detail::vec3_from(detail::member(j, "min", kBad, where), kBad, where + "/min"),
          detail::vec3_from(detail::member(j, "max", kBad, where), kBad, where + "/max")};
    b.validate();
    return b;
}

} // namespace

SceneConfig parse_scene(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(kBad, e.what());
    }
    if (!doc.is_object()) {
        throw Error(kBad, "scene must be a JSON object");
    }
    SceneConfig scene;
    if (doc.contains("c_volumes")) {
        for (const auto& [key, box] : doc["c_volumes"].items()) {
            const std::string where = "/c_volumes/" + key;
            scene.calibration.c_volumes[stream_key(key, where)] = box_from(box, where);
        }
    }
    if (doc.contains("a_to_b")) {
        const json& ab = doc["a_to_b"];
        if (ab.contains("translation")) {
            scene.calibration.a_to_b.translation = detail::vec3_from(ab["translation"], kBad, "/a_to_b/translation");
        }
        scene.calibration.a_to_b.yaw =
            deg_to_rad(ab.contains("yaw_deg") ? detail::number_from(ab["yaw_deg"], kBad, "/a_to_b/yaw_deg") : 0.0);
    }
    if (doc.contains("manipulator")) {
        scene.manipulator = manipulator_from(doc["manipulator"]);
    }
    for (const auto& [key, sj] : detail::member(doc, "streams", kBad, "").items()) {
        const std::string where = "/streams/" + key;
        StreamConfig s;
        s.id = stream_key(key, where);
        const std::string source = sj.value("source", std::string("bvh"));
        if (source == "bvh") {
            s.origin = StreamOrigin::Bvh;
            s.bvh_path = resolve(base_dir, detail::string_from(detail::member(sj, "bvh", kBad, where), kBad, where));
            s.topology = topology_from_bvh(s.bvh_path);
            s.loop = sj.value("loop", true);
            s.rate_hz = sj.value("rate", 0.0);
        } else if (source == "udp") {
            s.origin = StreamOrigin::Udp;
            s.topology = topology_from_bvh(
                resolve(base_dir, detail::string_from(detail::member(sj, "topology", kBad, where), kBad, where)));
        } else {
            throw Error(kBad, where + "/source: expected \"bvh\" or \"udp\"");
        }
        scene.streams.push_back(std::move(s));
    }
    const json& avatars = detail::member(doc, "avatars", kBad, "");
    for (std::size_t i = 0; i < avatars.size(); ++i) {
        const std::string where = "/avatars/" + std::to_string(i);
        const json& aj = avatars[i];
        AvatarConfig a;
        a.id = detail::string_from(detail::member(aj, "id", kBad, where), kBad, where + "/id");
        const json& sid = detail::member(aj, "stream", kBad, where);
        if (!sid.is_number_unsigned() || sid.get<unsigned>() > 255) {
            throw Error(kBad, where + "/stream: expected an integer 0-255");
        }
        a.stream = sid.get<std::uint8_t>();
        const StreamConfig* stream = nullptr;
        for (const auto& s : scene.streams) {
            if (s.id == a.stream) {
                stream = &s;
            }
        }
        if (!stream) {
            throw Error(kBad, where + "/stream: no stream " + std::to_string(a.stream));
        }
        a.topology = aj.contains("topology")
                         ? topology_from_bvh(resolve(base_dir, detail::string_from(aj["topology"], kBad, where)))
                         : stream->topology;
        if (aj.contains("bone_map")) {
            const auto path = resolve(base_dir, detail::string_from(aj["bone_map"], kBad, where + "/bone_map"));
            a.bone_map = load_bone_map(read_text(path), stream->topology, a.topology);
        } else {
            a.bone_map = BoneMap::identity(stream->topology);
            if (!(a.topology == stream->topology)) {
                throw Error(kBad, where + ": a bone_map is required when the avatar topology differs from the stream's");
            }
        }
        if (aj.contains("ref")) {
            a.ref = ref_from_file(aj["ref"], where + "/ref");
        }
        a.head_joint = aj.value("head_joint", a.head_joint);
        scene.avatars.push_back(std::move(a));
    }
    if (doc.contains("nav_grid") && !doc["nav_grid"].is_null()) {
        const auto path = resolve(base_dir, detail::string_from(doc["nav_grid"], kBad, "/nav_grid"));
        scene.nav_grid = parse_nav_grid(read_text(path));
    }
    return scene;
}

SceneConfig load_scene(const std::filesystem::path& path) {
    return parse_scene(read_text(path), path.parent_path());
}

std::string scene_to_resolved_json(const SceneConfig& scene) {
    json j;
    j["c_volumes"] = json::object();
    for (const auto& [id, box] : scene.calibration.c_volumes) {
        j["c_volumes"][std::to_string(id)] = box_json(box);
    }
    j["a_to_b"] = {{"translation", detail::to_json(scene.calibration.a_to_b.translation)},
                   {"yaw", scene.calibration.a_to_b.yaw}};
    const ManipulatorConfig& m = scene.manipulator;
    j["manipulator"] = {{"linear_speed", m.linear_speed}, {"vertical_speed", m.vertical_speed},
                        {"yaw_speed", m.yaw_speed},       {"pitch_speed", m.pitch_speed},
                        {"dead_zone", m.dead_zone}};
    j["streams"] = json::array();
    for (const StreamConfig& s : scene.streams) {
        j["streams"].push_back({{"id", s.id},
                                {"source", s.origin == StreamOrigin::Bvh ? "bvh" : "udp"},
                                {"bvh", s.bvh_path.string()},
                                {"loop", s.loop},
                                {"rate", s.rate_hz},
                                {"topology", topology_json(s.topology)}});
    }
    j["avatars"] = json::array();
    for (const AvatarConfig& a : scene.avatars) {
        j["avatars"].push_back({{"id", a.id},
                                {"stream", a.stream},
                                {"topology", topology_json(a.topology)},
                                {"bone_map", json::parse(bone_map_to_json(a.bone_map))["map"]},
                                {"ref",
                                 {{"pos", detail::to_json(a.ref.translation())},
                                  {"yaw", a.ref.yaw()},
                                  {"pitch", a.ref.pitch()}}},
                                {"head_joint", a.head_joint}});
    }
    j["nav_grid"] = scene.nav_grid ? json(format_nav_grid(*scene.nav_grid)) : json(nullptr);
    return j.dump();
}

SceneConfig scene_from_resolved_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        SceneConfig scene;
        for (const auto& [key, box] : j.at("c_volumes").items()) {
            scene.calibration.c_volumes[stream_key(key, "/c_volumes")] = box_from(box, "/c_volumes/" + key);
        }
        scene.calibration.a_to_b.translation = detail::vec3_from(j.at("a_to_b").at("translation"), kBad, "/a_to_b");
        scene.calibration.a_to_b.yaw = j.at("a_to_b").at("yaw").get<double>();
        scene.manipulator = manipulator_from(j.at("manipulator"));
        for (const json& sj : j.at("streams")) {
            StreamConfig s;
            s.id = sj.at("id").get<std::uint8_t>();
            s.origin = sj.at("source").get<std::string>() == "bvh" ? StreamOrigin::Bvh : StreamOrigin::Udp;
            s.bvh_path = sj.at("bvh").get<std::string>();
            s.loop = sj.at("loop").get<bool>();
            s.rate_hz = sj.at("rate").get<double>();
            s.topology = topology_from(sj.at("topology"));
            scene.streams.push_back(std::move(s));
        }
        for (const json& aj : j.at("avatars")) {
            AvatarConfig a;
            a.id = aj.at("id").get<std::string>();
            a.stream = aj.at("stream").get<std::uint8_t>();
            a.topology = topology_from(aj.at("topology"));
            const SkeletonTopology* src = nullptr;
            for (const auto& s : scene.streams) {
                if (s.id == a.stream) {
                    src = &s.topology;
                }
            }
            if (!src) {
                throw Error(kBad, "avatar '" + a.id + "' references a missing stream");
            }
            a.bone_map = load_bone_map(json{{"map", aj.at("bone_map")}}.dump(), *src, a.topology);
            const json& r = aj.at("ref");
            a.ref = ReferenceTransform(detail::vec3_from(r.at("pos"), kBad, "/ref/pos"), r.at("yaw").get<double>(),
                                       r.at("pitch").get<double>());
            a.head_joint = aj.at("head_joint").get<std::string>();
            scene.avatars.push_back(std::move(a));
        }
        if (!j.at("nav_grid").is_null()) {
            scene.nav_grid = parse_nav_grid(j.at("nav_grid").get<std::string>());
        }
        return scene;
    } catch (const json::exception& e) {
        throw Error(kBad, std::string("resolved scene: ") + e.what());
    }
}

Mixer make_mixer(const SceneConfig& scene, double dt) {
    MixerConfig cfg;
    cfg.dt = dt;
    cfg.manipulator = scene.manipulator;
    cfg.calibration = scene.calibration;
    cfg.nav_grid = scene.nav_grid;
    Mixer mixer(std::move(cfg));
    for (const StreamConfig& s : scene.streams) {
        mixer.add_stream(s.id, s.topology);
    }
    for (const AvatarConfig& a : scene.avatars) {
        AvatarBinding b;
        b.avatar_id = a.id;
        b.stream_id = a.stream;
        b.topology = a.topology;
        b.bone_map = a.bone_map;
        b.ref = a.ref;
        b.head_joint = a.head_joint;
        mixer.bind_avatar(std::move(b));
    }
    return mixer;
}

} // namespace stagelink
