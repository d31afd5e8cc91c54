// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failures. argv[1] is the stagelink CLI to drive for the record/replay check.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "helpers.hpp"
#include "stagelink/error.hpp"
#include "stagelink/pathfinder.hpp"
#include "stagelink/posebus.hpp"
#include "stagelink/scenario.hpp"

using namespace stagelink;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

Outcome transform_oracle() {
    std::mt19937_64 rng(20240601);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const ReferenceTransform ref(th::random_vec(rng, 50), oracle::uniform(rng, -th::kPi, th::kPi),
                                     oracle::uniform(rng, -th::kPi / 2, th::kPi / 2));
        const RootPose local{th::random_vec(rng, 3), th::random_quat(rng)};
        const RootPose w = compose(ref, local);
        const oracle::M3 r = oracle::mul(oracle::rot_y(ref.yaw()), oracle::rot_x(ref.pitch()));
        const oracle::M4 m = oracle::homogeneous(r, th::v3(ref.translation()));
        const double p[4] = {local.position.x, local.position.y, local.position.z, 1.0};
        for (int k = 0; k < 3; ++k) {
            double want = 0;
            for (int c = 0; c < 4; ++c) want += m[k][c] * p[c];
            const double got = k == 0 ? w.position.x : k == 1 ? w.position.y : w.position.z;
            worst = std::max(worst, std::abs(got - want));
        }
        worst = std::max(worst, oracle::max_diff(th::matrix(w.rotation), oracle::mul(r, th::matrix(local.rotation))));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 1.0, "1000 cases, max error " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome wire_round_trips() {
    std::mt19937_64 rng(7);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const MocapFrame f = th::random_frame(rng, rng() % 64);
        const auto bytes = encode_frame(f);
        if (!(decode_frame(bytes) == f) || encode_frame(decode_frame(bytes)) != bytes) ++bad;

        PoseMessage m;
        m.tick_no = rng();
        m.avatar_id = static_cast<std::uint16_t>(rng());
        m.position = f.root_position;
        m.rotation = f.joint_rotations.empty() ? UnitQuat() : f.joint_rotations.front();
        m.joint_rotations = f.joint_rotations;
        const auto pb = encode_pose_msg(m);
        if (!(decode_pose_msg(pb) == m) || encode_pose_msg(decode_pose_msg(pb)) != pb) ++bad;
    }
    return {bad == 0, "10000 MSTREAM/1 + 10000 POSEBUS/1 messages, " + std::to_string(bad) + " mismatches"};
}

Outcome astar_vs_bfs() {
    std::mt19937_64 rng(99);
    const auto t0 = Clock::now();
    int mismatches = 0, solvable = 0;
    for (int g = 0; g < 100; ++g) {
        NavGrid grid(20, 20, 0.5, {});
        std::vector<std::vector<bool>> blocked(20, std::vector<bool>(20, false));
        for (int r = 0; r < 20; ++r)
            for (int c = 0; c < 20; ++c)
                if (rng() % 5 == 0) {
                    grid.set_blocked({c, r}, true);
                    blocked[r][c] = true;
                }
        Cell a, b;
        do {
            a = {static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
            b = {static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
        } while (blocked[a.row][a.col] || blocked[b.row][b.col]);
        const auto want = oracle::bfs(blocked, a.col, a.row, b.col, b.row);
        try {
            const PlannedPath p = plan(grid, a, b);
            if (!want || static_cast<int>(p.cells.size()) - 1 != *want) ++mismatches;
            ++solvable;
        } catch (const stagelink::Error& e) {
            if (want || e.code() != ErrorCode::NoPath) ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 5.0, "100 grids (" + std::to_string(solvable) + " solvable), " +
                                               std::to_string(mismatches) + " mismatches, " + fmt(secs) + " s"};
}

std::string run_command(const std::string& cmd, int& status) {
    std::string out;
    FILE* p = popen((cmd + " 2>&1").c_str(), "r");
    if (!p) {
        status = -1;
        return out;
    }
    char buf[512];
    while (std::fgets(buf, sizeof buf, p)) out += buf;
    status = pclose(p);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome record_replay(const std::string& cli) {
    const auto dir = std::filesystem::temp_directory_path();
    std::vector<std::string> logs;
    std::string detail;
    bool ok = true;
    for (int i = 0; i < 2; ++i) {
        const auto log = (dir / ("stagelink_accept_" + std::to_string(i) + ".slog")).string();
        int st = 0;
        run_command(cli + " scenario walking --record " + log, st);
        ok = ok && st == 0;
        const std::string out = run_command(cli + " replay " + log + " --verify", st);
        const bool identical = st == 0 && out.find("identical (2000 ticks)") != std::string::npos;
        ok = ok && identical;
        detail += std::string(i ? ", " : "") + "run " + std::to_string(i + 1) + (identical ? " identical" : " DIVERGED");
        logs.push_back(slurp(log));
        std::filesystem::remove(log);
    }
    const bool same = logs[0] == logs[1] && !logs[0].empty();
    return {ok && same, detail + (same ? ", logs byte-identical" : ", logs differ")};
}

Outcome crowd(const ScenarioRun& run) {
    const auto* six = run.report.find("six_poses_per_tick");
    const auto* fan = run.report.find("fanout_independence");
    return {six && six->passed && fan && fan->passed && run.report.failed() == 0 && run.report.messages_dropped == 0,
            std::string("fanout independence ") + (fan && fan->passed ? "held" : "BROKEN") + ", " +
                std::to_string(run.report.messages_sent) + " poses over " + std::to_string(run.report.ticks) +
                " ticks, " + std::to_string(run.report.failed()) + " failed assertions, " +
                std::to_string(run.report.messages_dropped) + " dropped"};
}

Outcome expansion(const ScenarioRun& with) {
    ScenarioOptions o;
    o.manipulator = false;
    const ScenarioRun without = run_scenario("walking", o);
    const auto* a = with.report.find("space_expansion");
    const auto* b = without.report.find("space_expansion");
    const auto* c = with.report.find("output_exceeds_input");
    const bool ok = a && a->passed && c && c->passed && b && !b->passed;
    return {ok, "with manipulator: " + (a ? a->message : "?") + "; without: " + (b ? b->message : "?")};
}

Outcome watch_accuracy(const ScenarioRun& walking) {
    const ScenarioRun watching = run_scenario("watching");
    const auto* a = watching.report.find("head_yaw_accuracy");
    const auto* s = watching.report.find("watch_switch_same_tick");
    const auto* w = walking.report.find("head_yaw_accuracy");
    const bool ok = a && a->passed && s && s->passed && w && w->passed;
    return {ok, "watching: " + (a ? a->message : "?") + "; walking: " + (w ? w->message : "?")};
}

Outcome timing(const ScenarioRun& run) {
    const TimingStats& t = run.report.timing;
    return {t.samples > 0 && t.mean_ms < 10.0 && t.p99_ms < 10.0,
            "mean " + fmt(t.mean_ms) + " ms, p99 " + fmt(t.p99_ms) + " ms over " + std::to_string(t.samples) +
                " ticks"};
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "stagelink";
    int failures = 0;
    auto report = [&](const char* name, const std::function<Outcome()>& f) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.ok ? 0 : 1;
        std::cout << (o.ok ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    };

    const ScenarioRun walking = run_scenario("walking");
    const ScenarioRun crowd_run = run_scenario("crowd");

    report("transform-oracle", transform_oracle);
    report("wire-round-trip", wire_round_trips);
    report("astar-matches-bfs", astar_vs_bfs);
    report("record-replay-identical", [&] { return record_replay(cli); });
    report("crowd-six-avatars", [&] { return crowd(crowd_run); });
    report("space-expansion", [&] { return expansion(walking); });
    report("watch-accuracy", [&] { return watch_accuracy(walking); });
    report("realtime-budget", [&] { return timing(crowd_run); });
    return failures;
}
