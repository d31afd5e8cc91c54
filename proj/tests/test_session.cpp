#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "helpers.hpp"
#include "stagelink/engine.hpp"
#include "stagelink/error.hpp"
#include "stagelink/scene.hpp"
#include "stagelink/session.hpp"

using namespace stagelink;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

std::map<std::uint8_t, BvhStream> streams_of(const SceneConfig& scene) {
    std::map<std::uint8_t, BvhStream> out;
    for (const StreamConfig& s : scene.streams) {
        out.emplace(s.id, BvhStream(load_bvh(s.bvh_path, s.id), 0, s.loop, s.rate_hz));
    }
    return out;
}

void run(Engine& e, const std::map<std::uint8_t, BvhStream>& streams, int ticks) {
    for (int i = 0; i < ticks; ++i) {
        const auto now = static_cast<std::uint64_t>(std::llround(e.next_tick() * 1e6 / e.tick_hz()));
        std::map<std::uint8_t, StreamSample> m;
        for (const auto& [id, s] : streams) {
            m.emplace(id, s.tick(now));
        }
        e.step(std::move(m));
    }
}

SessionLog recorded_walk(int ticks) {
    const SceneConfig scene = load_scene(th::assets() / "scenes/walking.json");
    std::ifstream in(th::assets() / "cues/walking.json");
    const std::string cues((std::istreambuf_iterator<char>(in)), {});
    Engine e(scene, load_cue_sheet(cues), 100.0);
    e.start_recording();
    const auto streams = streams_of(scene);
    AxisInput ax;
    ax.forward = 0.8;
    ax.yaw_rate = -0.4;
    e.set_axes("A1", ax);
    run(e, streams, ticks / 2);
    e.request_fire("RESET");
    e.request_action(SetWatch{"A2", WatchAvatar{"A1"}});
    run(e, streams, ticks - ticks / 2);
    return e.recorder()->log();
}

} // namespace

TEST_CASE("scene/loads the walking scene") {
    const SceneConfig s = load_scene(th::assets() / "scenes/walking.json");
    REQUIRE(s.avatars.size() == 2);
    CHECK(s.avatars[0].id == "A1");
    CHECK(s.avatars[0].topology.size() == 50);
    CHECK(s.avatars[1].topology.size() == 17);
    CHECK(s.avatars[1].head_joint == "pup_head");
    CHECK(s.avatars[0].ref.yaw() == doctest::Approx(th::kPi / 4));
    CHECK(s.calibration.a_to_b.translation == Vec3{0, 0, -3});
    CHECK(s.calibration.c_volumes.at(1).max.z == doctest::Approx(0.8));
    CHECK(s.streams.size() == 2);
    const Mixer m = make_mixer(s, 0.01);
    CHECK(m.avatar_count() == 2);
}

TEST_CASE("scene/resolved json is self contained") {
    const SceneConfig s = load_scene(th::assets() / "scenes/crowd.json");
    const std::string j = scene_to_resolved_json(s);
    const SceneConfig back = scene_from_resolved_json(j);
    CHECK(scene_to_resolved_json(back) == j);
    CHECK(back.nav_grid == s.nav_grid);
    CHECK(back.avatars.size() == 6);
}

TEST_CASE("scene/errors") {
    CHECK(code_of([] { load_scene("/nonexistent/scene.json"); }) == ErrorCode::AssetMissing);
    const auto dir = th::assets() / "scenes";
    CHECK(code_of([&] {
              parse_scene(R"({"streams": {"0": {"source": "bvh", "bvh": "missing.bvh"}}, "avatars": []})", dir);
          }) == ErrorCode::AssetMissing);
    CHECK(code_of([&] { parse_scene("[]", dir); }) == ErrorCode::ParseError);
    CHECK(code_of([&] {
              parse_scene(R"({"streams": {"0": {"source": "bvh", "bvh": "../bvh/walk_a.bvh"}},
                              "avatars": [{"id": "X", "stream": 4}]})", dir);
          }) == ErrorCode::ParseError);
    CHECK(code_of([&] {
              parse_scene(R"({"streams": {"0": {"source": "bvh", "bvh": "../bvh/walk_a.bvh"}},
                              "avatars": [{"id": "X", "stream": 0}, {"id": "X", "stream": 0}]})", dir);
              make_mixer(parse_scene(R"({"streams": {"0": {"source": "bvh", "bvh": "../bvh/walk_a.bvh"}},
                              "avatars": [{"id": "X", "stream": 0}, {"id": "X", "stream": 0}]})", dir), 0.01);
          }) == ErrorCode::DuplicateAvatar);
}

TEST_CASE("session/inputs survive serialization") {
    std::mt19937_64 rng(0x5e55);
    TickInputs in;
    in.tick_no = 42;
    in.mocap[0] = {StreamStatus::Frame, th::random_frame(rng, 5)};
    in.mocap[3] = {StreamStatus::Stale, th::random_frame(rng, 2)};
    in.mocap[7] = {StreamStatus::NoFrame, std::nullopt};
    AxisInput ax;
    ax.forward = 0.3;
    ax.pitch_rate = -0.7;
    in.axes["A1"] = ax;
    in.actions = {SetRef{"A1", ReferenceTransform({1, 2, 3}, 0.4, -0.2)},
                  SetOwnership{"A2", ChannelId::Head, Owner::blend(0.3)},
                  StartPath{"B3", {4, 9}, 1.25},
                  SetWatch{"A1", WatchPerformer{{0, 1.7, 2}}},
                  SetWatch{"A1", WatchAvatar{"A2"}},
                  SetWatch{"A1", std::nullopt},
                  CueFired{"Q1", 3}};
    const TickInputs back = deserialize_inputs(serialize_inputs(in));
    CHECK(back.tick_no == 42);
    CHECK(back.axes == in.axes);
    CHECK(back.actions == in.actions);
    REQUIRE(back.mocap.size() == 3);
    CHECK(back.mocap.at(0).frame == in.mocap.at(0).frame);
    CHECK(back.mocap.at(3).status == StreamStatus::Stale);
    CHECK_FALSE(back.mocap.at(7).frame);
    CHECK(serialize_inputs(back) == serialize_inputs(in));

    auto bytes = serialize_inputs(in);
    bytes.push_back(0);
    CHECK(code_of([&] { deserialize_inputs(bytes); }) == ErrorCode::CorruptLog);
    bytes.resize(bytes.size() / 2);
    CHECK(code_of([&] { deserialize_inputs(bytes); }) == ErrorCode::CorruptLog);
}

TEST_CASE("session/record then replay is identical") {
    const SessionLog log = recorded_walk(400);
    CHECK(log.records.size() == 400);
    CHECK(log.records.front().tick_no == 0);
    const ReplayVerdict v = replay(log);
    CHECK(v.identical);
    CHECK(v.ticks_compared == 400);
    CHECK(v.describe() == "identical (400 ticks)");

    const auto path = std::filesystem::temp_directory_path() / "stagelink_session_test.slog";
    log.write(path);
    const SessionLog back = SessionLog::read(path);
    CHECK(back.bytes() == log.bytes());
    CHECK(replay(back).identical);
    std::filesystem::remove(path);
}

TEST_CASE("session/a changed output byte is caught at its tick") {
    SessionLog log = recorded_walk(200);
    log.records[137].output.back() ^= 0x01;
    const ReplayVerdict v = replay(log);
    CHECK_FALSE(v.identical);
    CHECK(v.first_divergent_tick == std::optional<std::uint64_t>(137));
    CHECK(v.ticks_compared == 138);
    CHECK(v.describe().find("diverged at tick 137") == 0);
}

TEST_CASE("session/corrupt and mismatched logs") {
    const SessionLog log = recorded_walk(50);
    auto bytes = log.bytes();
    CHECK(code_of([&] { SessionLog::parse(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 3)); }) ==
          ErrorCode::CorruptLog);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(code_of([&] { SessionLog::parse(bad_magic); }) == ErrorCode::CorruptLog);

    SessionLog tampered = log;
    tampered.header.scene_json += " ";
    CHECK(code_of([&] { SessionLog::parse(tampered.bytes()); }) == ErrorCode::CorruptLog);

    SessionLog reordered = log;
    std::swap(reordered.records[3], reordered.records[4]);
    CHECK(code_of([&] { SessionLog::parse(reordered.bytes()); }) == ErrorCode::CorruptLog);

    const std::string other = scene_to_resolved_json(load_scene(th::assets() / "scenes/watching.json"));
    CHECK(code_of([&] { replay(log, other); }) == ErrorCode::SceneMismatch);
    CHECK(replay(log, log.header.scene_json).identical);
    CHECK(code_of([] { SessionLog::read("/nonexistent/log.slog"); }) == ErrorCode::Io);
}

TEST_CASE("engine/requests apply at the next tick in order") {
    const SceneConfig scene = load_scene(th::assets() / "scenes/walking.json");
    std::ifstream in(th::assets() / "cues/walking.json");
    const std::string cues((std::istreambuf_iterator<char>(in)), {});
    Engine e(scene, load_cue_sheet(cues), 100.0);
    CHECK_THROWS_AS(e.set_axes("ghost", {}), Error);
    CHECK_THROWS_AS(e.request_ownership("ghost", ChannelId::Head, Owner::mocap()), Error);
    CHECK(code_of([&] { e.request_fire("Q9"); }) == ErrorCode::UnknownCue);

    e.step({});
    // the cue is fired before the ownership request is queued, yet ownership
    // goes first
    e.request_fire("RESET");
    e.request_ownership("A1", ChannelId::RootXY, Owner::manipulator());
    const TickOutput out = e.step({});
    CHECK(out.tick_no == 1);
    std::vector<std::string> order;
    for (const Event& ev : out.events) {
        if (ev.kind == EventKind::OwnershipChanged && ev.avatar == "A1" &&
            ev.payload.find("ROOT_XY") != std::string::npos) {
            order.push_back(ev.payload.find("MANIPULATOR") != std::string::npos ? "request"
                            : ev.payload.find("MOCAP") != std::string::npos      ? "reset"
                                                                                 : "cue");
        }
    }
    // Q1 auto-fires at tick 1 after RESET, so it wins
    const std::vector<std::string> want{"request", "reset", "cue"};
    CHECK(order == want);
    CHECK(e.mixer().ownership().get("A1", ChannelId::RootXY) == Owner::blend(0.5));

    const auto snap = nlohmann::json::parse(e.snapshot_json());
    CHECK(snap["type"] == "state");
    CHECK(snap["next_tick"] == 2);
    CHECK(snap["cues"].size() == 3);
    CHECK(snap["avatars"].size() == 2);
    CHECK_FALSE(e.recent_events().empty());
}
