#include <doctest.h>

#include "helpers.hpp"
#include "stagelink/cue.hpp"
#include "stagelink/error.hpp"

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

const char* kSheet = R"({"cues": [
  {"id": "Q1", "name": "enter", "at_tick": 10, "actions": [
    {"kind": "set_ref", "avatar": "A1", "pos": [1, 0, 2], "yaw_deg": 90},
    {"kind": "set_ownership", "avatar": "A1", "channel": "ROOT_XY", "owner": "BLEND", "weight": 0.25}
  ]},
  {"id": "Q2", "name": "look", "actions": [
    {"kind": "set_watch", "avatar": "A1", "target": {"kind": "point", "pos": [0, 1.6, 3]}},
    {"kind": "set_watch", "avatar": "A2", "target": null},
    {"kind": "start_path", "avatar": "A2", "goal": [4, 5], "speed": 2}
  ]},
  {"id": "Q0", "name": "early", "at_tick": 3, "actions": [
    {"kind": "set_ownership", "avatar": "A2", "channel": "HEAD", "owner": "PROCEDURAL"}
  ]}
]})";

} // namespace

TEST_CASE("cue sheet/parses every action kind") {
    const CueSheet s = load_cue_sheet(kSheet);
    REQUIRE(s.cues().size() == 3);
    const Cue& q1 = *s.find("Q1");
    CHECK(q1.name == "enter");
    CHECK(q1.at_tick == std::optional<std::uint64_t>(10));
    const auto& ref = std::get<SetRef>(q1.actions[0]);
    CHECK(ref.ref.translation() == Vec3{1, 0, 2});
    CHECK(ref.ref.yaw() == doctest::Approx(th::kPi / 2));
    CHECK(std::get<SetOwnership>(q1.actions[1]).owner == Owner::blend(0.25));
    const Cue& q2 = *s.find("Q2");
    CHECK_FALSE(q2.at_tick);
    CHECK(std::get<SetWatch>(q2.actions[0]).target == std::optional<WatchTarget>(WatchPoint{{0, 1.6, 3}}));
    CHECK_FALSE(std::get<SetWatch>(q2.actions[1]).target);
    CHECK(std::get<StartPath>(q2.actions[2]) == StartPath{"A2", {4, 5}, 2.0});
    CHECK(s.find("nope") == nullptr);
    // auto cues ordered by tick
    REQUIRE(s.auto_fire_order().size() == 2);
    CHECK(s.cues()[s.auto_fire_order()[0]].id == "Q0");
}

TEST_CASE("cue sheet/json round trip") {
    const CueSheet s = load_cue_sheet(kSheet);
    const CueSheet back = load_cue_sheet(cue_sheet_to_json(s));
    REQUIRE(back.cues().size() == s.cues().size());
    for (std::size_t i = 0; i < s.cues().size(); ++i) {
        CHECK(back.cues()[i].id == s.cues()[i].id);
        CHECK(back.cues()[i].at_tick == s.cues()[i].at_tick);
        CHECK(back.cues()[i].actions == s.cues()[i].actions);
    }
}

TEST_CASE("cue sheet/errors") {
    CHECK(code_of([] {
              load_cue_sheet(R"({"cues": [{"id": "A", "actions": [{"kind": "set_ownership", "avatar": "x",
                                 "channel": "HEAD", "owner": "MOCAP"}]},
                                {"id": "A", "actions": [{"kind": "set_ownership", "avatar": "x",
                                 "channel": "HEAD", "owner": "MOCAP"}]}]})");
          }) == ErrorCode::DuplicateCueId);
    CHECK(code_of([] {
              load_cue_sheet(R"({"cues": [{"id": "A", "actions": [{"kind": "teleport", "avatar": "x"}]}]})");
          }) == ErrorCode::UnknownActionKind);
    CHECK(code_of([] {
              load_cue_sheet(R"({"cues": [{"id": "A", "actions": [{"kind": "set_ownership", "avatar": "x",
                                 "channel": "TAIL", "owner": "MOCAP"}]}]})");
          }) == ErrorCode::MalformedAction);
    CHECK(code_of([] {
              load_cue_sheet(R"({"cues": [{"id": "A", "actions": [{"kind": "set_ownership", "avatar": "x",
                                 "channel": "HEAD", "owner": "BLEND", "weight": 2}]}]})");
          }) == ErrorCode::MalformedAction);
    CHECK(code_of([] { load_cue_sheet(R"({"cues": [{"id": "A", "actions": []}]})"); }) ==
          ErrorCode::MalformedAction);
    CHECK(code_of([] { load_cue_sheet("{\"cues\": 3}"); }) == ErrorCode::MalformedAction);
    CHECK(code_of([] { load_cue_sheet("not json"); }) == ErrorCode::ParseError);
}

TEST_CASE("cue engine/fire counts and order") {
    CueEngine e(load_cue_sheet(kSheet));
    CHECK(e.fire_count("Q2") == 0);
    const FireResult a = e.fire("Q2", 7);
    CHECK(a.fire_count == 1);
    CHECK(a.tick_no == 7);
    CHECK(e.fire("Q2", 8).fire_count == 2);
    CHECK(e.fire_count("Q2") == 2);
    CHECK(code_of([&] { e.fire("Q9", 1); }) == ErrorCode::UnknownCue);

    const std::vector<Action> acts = a.to_actions();
    REQUIRE(acts.size() == 4);
    CHECK(std::get<CueFired>(acts[0]) == CueFired{"Q2", 1});
    CHECK(std::holds_alternative<SetWatch>(acts[1]));
}

TEST_CASE("cue engine/auto cues fire once at their tick") {
    CueEngine e(load_cue_sheet(kSheet));
    std::vector<std::pair<std::uint64_t, std::string>> fired;
    for (std::uint64_t t = 0; t < 30; ++t) {
        for (const FireResult& r : e.fire_due(t)) {
            fired.emplace_back(t, r.cue_id);
        }
    }
    const std::vector<std::pair<std::uint64_t, std::string>> want{{3, "Q0"}, {10, "Q1"}};
    CHECK(fired == want);
}
