#include <doctest.h>

#include <json.hpp>

#include "helpers.hpp"
#include "stagelink/error.hpp"
#include "stagelink/scenario.hpp"

using namespace stagelink;

namespace {

void require_all_pass(const ScenarioReport& r) {
    for (const AssertionResult& a : r.assertions) {
        INFO(a.name << ": " << a.message);
        CHECK(a.passed);
    }
}

} // namespace

TEST_CASE("scenario/names") {
    CHECK(scenario_names() == std::vector<std::string>{"walking", "watching", "crowd"});
    CHECK_THROWS_AS(run_scenario("juggling"), stagelink::Error);
    ScenarioOptions o;
    o.assets_dir = "/nonexistent";
    try {
        run_scenario("walking", o);
        FAIL("expected AssetMissing");
    } catch (const stagelink::Error& e) {
        CHECK(e.code() == ErrorCode::AssetMissing);
    }
}

TEST_CASE("scenario/walking passes and replays") {
    const ScenarioRun run = run_scenario("walking");
    CHECK(run.report.ticks == 2000);
    CHECK(run.report.failed() == 0);
    require_all_pass(run.report);
    REQUIRE(run.report.find("space_expansion"));
    CHECK(run.report.find("nope") == nullptr);
    CHECK(replay(run.log).identical);
    // the checks depend on the log alone
    const auto again = check_log("walking", run.log);
    REQUIRE(again.size() == run.report.assertions.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].name == run.report.assertions[i].name);
        CHECK(again[i].passed == run.report.assertions[i].passed);
    }
    const auto j = nlohmann::json::parse(run.report.to_json());
    CHECK(j["scenario"] == "walking");
    CHECK(j["assertions"].size() == run.report.assertions.size());
}

TEST_CASE("scenario/walking without the manipulator stays inside the volume") {
    ScenarioOptions o;
    o.manipulator = false;
    const ScenarioRun run = run_scenario("walking", o);
    CHECK_FALSE(run.report.find("space_expansion")->passed);
    CHECK_FALSE(run.report.find("output_exceeds_input")->passed);
    CHECK(run.report.find("input_confined")->passed);
}

TEST_CASE("scenario/watching passes") {
    const ScenarioRun run = run_scenario("watching");
    require_all_pass(run.report);
    CHECK(run.report.find("head_yaw_accuracy"));
    CHECK(run.report.find("watch_switch_same_tick"));
}

TEST_CASE("scenario/crowd drives a group of 6 avatars") {
    const ScenarioRun run = run_scenario("crowd");
    require_all_pass(run.report);
    CHECK(run.report.find("six_poses_per_tick")->passed);
    CHECK(run.report.messages_sent == 6 * run.report.ticks);
    CHECK(run.report.messages_dropped == 0);
    CHECK(run.report.timing.samples == run.report.ticks);
    CHECK(run.report.timing.p99_ms < 10.0);
    CHECK(replay(run.log).identical);
}

TEST_CASE("scenario/same run twice gives the same log") {
    CHECK(run_scenario("watching").log.bytes() == run_scenario("watching").log.bytes());
}

TEST_CASE("timing stats/nearest rank") {
    std::vector<double> d;
    for (int i = 1; i <= 100; ++i) d.push_back(i);
    const TimingStats s = timing_stats(d);
    CHECK(s.mean_ms == doctest::Approx(50.5));
    CHECK(s.p99_ms == 99.0);
    CHECK(s.max_ms == 100.0);
    CHECK(s.samples == 100);
    CHECK(timing_stats({}).samples == 0);
    CHECK(timing_stats({4.0}).p99_ms == 4.0);
}
