#include "stagelink/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "json_util.hpp"
#include "stagelink/engine.hpp"
#include "stagelink/error.hpp"
#include "stagelink/posebus.hpp"

#ifndef STAGELINK_SOURCE_ASSETS
#define STAGELINK_SOURCE_ASSETS "assets"
#endif

namespace stagelink {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWatchTolerance = 1e-6;
constexpr double kFanoutTolerance = 1e-9;
constexpr double kInputBox = 2.0;
constexpr double kExpansion = 6.0;
constexpr double kBudgetMs = 10.0;

struct Shape {
    std::string_view name;
    std::uint64_t ticks;
};

constexpr Shape kShapes[] = {{"walking", 2000}, {"watching", 1500}, {"crowd", 3000}};

const Shape& shape_for(std::string_view name) {
    for (const Shape& s : kShapes) {
        if (s.name == name) {
            return s;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + std::string(name) + "'");
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) {
        throw Error(ErrorCode::AssetMissing, p.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool in_range(std::uint64_t t, std::uint64_t lo, std::uint64_t hi) { return t >= lo && t < hi; }

// --- scripted manipulator input -----------------------------------------------

AxisInput walking_axes(std::uint64_t t, const std::string& avatar) {
    AxisInput a;
    if (avatar == "A1") {
        if (in_range(t, 100, 1100) || in_range(t, 1300, 1700)) a.forward = 1.0;
        if (in_range(t, 1150, 1250)) a.yaw_rate = 1.0;
    } else if (avatar == "A2") {
        if (in_range(t, 300, 1300) || in_range(t, 1500, 1800)) a.forward = 1.0;
        if (in_range(t, 1350, 1450)) a.yaw_rate = -1.0;
    }
    return a;
}

AxisInput watching_axes(std::uint64_t t, const std::string& avatar) {
    AxisInput a;
    if (avatar == "W1" && in_range(t, 200, 1400)) a.yaw_rate = 0.3;
    if (avatar == "W2" && in_range(t, 300, 1300)) a.forward = 0.5;
    return a;
}

AxisInput crowd_axes(std::uint64_t t, const std::string& avatar, std::size_t i) {
    AxisInput a;
    if (avatar == "B3") {
        return a;
    }
    const double tt = static_cast<double>(t);
    a.forward = 0.6 * std::sin(2 * kPi * tt / (800.0 + 100.0 * static_cast<double>(i)));
    a.yaw_rate = 0.4 * std::cos(2 * kPi * tt / (600.0 + 50.0 * static_cast<double>(i)));
    return a;
}

AxisInput script(std::string_view name, std::uint64_t t, const std::string& avatar, std::size_t i) {
    if (name == "walking") return walking_axes(t, avatar);
    if (name == "watching") return watching_axes(t, avatar);
    return crowd_axes(t, avatar, i);
}

// Receiver-side check of the pose bus: every message decodes and each avatar's
// ticks strictly increase.
class CheckingSink final : public PoseSink {
public:
    bool send(std::span<const std::uint8_t> message) override {
        try {
            const PoseMessage m = decode_pose_msg(message);
            const auto it = last_.find(m.avatar_id);
            if (it != last_.end() && m.tick_no <= it->second) {
                ++out_of_order;
            }
            last_[m.avatar_id] = m.tick_no;
            ++received;
        } catch (const Error&) {
            ++undecodable;
        }
        return true;
    }
    std::uint64_t received = 0;
    std::uint64_t out_of_order = 0;
    std::uint64_t undecodable = 0;

private:
    std::map<std::uint16_t, std::uint64_t> last_;
};

AssertionResult make(std::string name, bool ok, std::string message) {
    return {std::move(name), ok, std::move(message)};
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

// --- log decoding ----------------------------------------------------------------

struct Decoded {
    SceneConfig scene;
    std::vector<TickInputs> inputs;
    std::vector<TickOutput> outputs;
};

Decoded decode(const SessionLog& log) {
    Decoded d;
    d.scene = scene_from_resolved_json(log.header.scene_json);
    d.inputs.reserve(log.records.size());
    d.outputs.reserve(log.records.size());
    for (const SessionRecord& r : log.records) {
        d.inputs.push_back(deserialize_inputs(r.inputs));
        d.outputs.push_back(deserialize_output(r.output));
    }
    return d;
}

const AvatarOutput* pose_of(const TickOutput& out, std::string_view id) {
    for (const AvatarOutput& a : out.poses) {
        if (a.avatar_id == id) {
            return &a;
        }
    }
    return nullptr;
}

std::string lower(std::string s) {
    for (char& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

std::optional<std::size_t> head_of(const AvatarConfig& a) {
    const std::string want = lower(a.head_joint);
    for (std::size_t i = 1; i < a.topology.size(); ++i) {
        if (lower(a.topology[i].name) == want) {
            return i;
        }
    }
    return std::nullopt;
}

// Ownership and watch targets as the log's events say they evolved.
class StateTracker {
public:
    explicit StateTracker(const SceneConfig& scene) {
        for (const AvatarConfig& a : scene.avatars) {
            table_.add_avatar(a.id);
        }
    }

    void apply(const std::vector<Event>& events) {
        for (const Event& e : events) {
            if (e.kind == EventKind::OwnershipChanged) {
                const json p = json::parse(e.payload);
                const auto ch = parse_channel_id(p.at("channel").get<std::string>());
                const auto kind = parse_owner_kind(p.at("owner").get<std::string>());
                if (!ch || !kind) {
                    throw Error(ErrorCode::CorruptLog, "bad ownership event payload " + e.payload);
                }
                Owner o{*kind, p.value("weight", 0.0)};
                table_ = set_ownership(std::move(table_), e.avatar, *ch, o);
            } else if (e.kind == EventKind::WatchSet) {
                const json p = json::parse(e.payload);
                if (p.is_null()) {
                    watch_.erase(e.avatar);
                } else {
                    watch_[e.avatar] = detail::watch_from(p, ErrorCode::CorruptLog, "/watch");
                }
            }
        }
    }

    const Owner& owner(const std::string& avatar, ChannelId c) const { return table_.get(avatar, c); }
    const OwnershipTable::Row& row(const std::string& avatar) const { return table_.row(avatar); }
    const WatchTarget* watch(const std::string& avatar) const {
        const auto it = watch_.find(avatar);
        return it == watch_.end() ? nullptr : &it->second;
    }

private:
    OwnershipTable table_;
    std::map<std::string, WatchTarget> watch_;
};

// Head yaw error on every tick an avatar is watching with a procedural head.
struct WatchCheck {
    std::uint64_t ticks_checked = 0;
    double max_error = 0.0;
    std::uint64_t switches = 0;
    std::uint64_t switches_checked = 0;
    double max_switch_error = 0.0;
};

WatchCheck check_watch(const Decoded& d) {
    WatchCheck wc;
    StateTracker st(d.scene);
    for (const TickOutput& out : d.outputs) {
        st.apply(out.events);
        std::map<std::string, bool> switched;
        for (const Event& e : out.events) {
            if (e.kind == EventKind::WatchSet && e.payload != "null") {
                switched[e.avatar] = true;
                ++wc.switches;
            }
        }
        for (const AvatarConfig& ac : d.scene.avatars) {
            const WatchTarget* target = st.watch(ac.id);
            const OwnerKind hk = st.owner(ac.id, ChannelId::Head).kind;
            const auto h = head_of(ac);
            if (!target || hk != OwnerKind::Procedural || !h) {
                continue;
            }
            Vec3 tp;
            if (const auto* wa = std::get_if<WatchAvatar>(target)) {
                const AvatarOutput* other = pose_of(out, wa->avatar);
                if (!other) {
                    continue;
                }
                tp = other->pose.position;
            } else if (const auto* wp = std::get_if<WatchPerformer>(target)) {
                tp = map_a_to_b(wp->position, d.scene.calibration.a_to_b);
            } else {
                tp = std::get<WatchPoint>(*target).position;
            }
            const AvatarOutput* me = pose_of(out, ac.id);
            const JointWorld fk =
                forward_kinematics(ac.topology, {me->pose.position, me->pose.rotation}, me->pose.joint_rotations);
            double want = 0.0;
            try {
                want = look_at_yaw(fk.positions[*h], tp);
            } catch (const Error&) {
                continue;
            }
            const double err = std::abs(wrap_angle(split_yaw(fk.rotations[*h]).yaw - want));
            ++wc.ticks_checked;
            wc.max_error = std::max(wc.max_error, err);
            if (switched.count(ac.id)) {
                ++wc.switches_checked;
                wc.max_switch_error = std::max(wc.max_switch_error, err);
            }
        }
    }
    return wc;
}

std::vector<AssertionResult> watch_assertions(const Decoded& d, std::uint64_t min_switches) {
    const WatchCheck wc = check_watch(d);
    std::vector<AssertionResult> r;
    r.push_back(make("head_yaw_accuracy", wc.ticks_checked > 0 && wc.max_error < kWatchTolerance,
                     "max error " + fmt(wc.max_error) + " rad over " + std::to_string(wc.ticks_checked) +
                         " watched avatar-ticks"));
    r.push_back(make("watch_switch_same_tick",
                     wc.switches >= min_switches && wc.switches_checked == wc.switches &&
                         wc.max_switch_error < kWatchTolerance,
                     std::to_string(wc.switches_checked) + "/" + std::to_string(wc.switches) +
                         " switches settled on their tick, max error " + fmt(wc.max_switch_error) + " rad"));
    return r;
}

struct Extent {
    double min_x = 1e300, max_x = -1e300, min_z = 1e300, max_z = -1e300;
    void add(const Vec3& p) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_z = std::min(min_z, p.z);
        max_z = std::max(max_z, p.z);
    }
    double size() const { return std::max(max_x - min_x, max_z - min_z); }
};

double cross2(double ax, double az, double bx, double bz) { return ax * bz - az * bx; }

bool segments_cross(const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2) {
    const double d1 = cross2(q2.x - q1.x, q2.z - q1.z, p1.x - q1.x, p1.z - q1.z);
    const double d2 = cross2(q2.x - q1.x, q2.z - q1.z, p2.x - q1.x, p2.z - q1.z);
    const double d3 = cross2(p2.x - p1.x, p2.z - p1.z, q1.x - p1.x, q1.z - p1.z);
    const double d4 = cross2(p2.x - p1.x, p2.z - p1.z, q2.x - p1.x, q2.z - p1.z);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

std::uint64_t crossings(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    std::uint64_t n = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        const double ax0 = std::min(a[i - 1].x, a[i].x), ax1 = std::max(a[i - 1].x, a[i].x);
        const double az0 = std::min(a[i - 1].z, a[i].z), az1 = std::max(a[i - 1].z, a[i].z);
        for (std::size_t j = 1; j < b.size(); ++j) {
            if (std::max(b[j - 1].x, b[j].x) < ax0 || std::min(b[j - 1].x, b[j].x) > ax1 ||
                std::max(b[j - 1].z, b[j].z) < az0 || std::min(b[j - 1].z, b[j].z) > az1) {
                continue;
            }
            if (segments_cross(a[i - 1], a[i], b[j - 1], b[j])) {
                ++n;
            }
        }
    }
    return n;
}

std::vector<AssertionResult> check_walking(const Decoded& d) {
    std::vector<AssertionResult> r;
    std::map<std::uint8_t, Extent> input;
    for (const TickInputs& in : d.inputs) {
        for (const auto& [id, s] : in.mocap) {
            if (s.frame) {
                input[id].add(s.frame->root_position);
            }
        }
    }
    double input_size = 0.0;
    for (const auto& [id, e] : input) {
        input_size = std::max(input_size, e.size());
    }
    r.push_back(make("input_confined", !input.empty() && input_size <= kInputBox,
                     "largest mocap root extent " + fmt(input_size) + " m"));

    std::map<std::string, std::vector<Vec3>> track;
    for (const TickOutput& out : d.outputs) {
        for (const AvatarOutput& a : out.poses) {
            track[a.avatar_id].push_back(a.pose.position);
        }
    }
    double min_disp = 1e300;
    double min_extent = 1e300;
    std::string detail;
    for (const auto& [id, pts] : track) {
        double disp = 0.0;
        Extent e;
        for (const Vec3& p : pts) {
            const double dx = p.x - pts.front().x;
            const double dz = p.z - pts.front().z;
            disp = std::max(disp, std::sqrt(dx * dx + dz * dz));
            e.add(p);
        }
        min_disp = std::min(min_disp, disp);
        min_extent = std::min(min_extent, e.size());
        detail += (detail.empty() ? "" : ", ") + id + " " + fmt(disp) + " m";
    }
    if (track.empty()) {
        min_disp = min_extent = 0.0;
    }
    r.push_back(make("space_expansion", min_disp > kExpansion, "max root displacement: " + detail));
    r.push_back(make("output_exceeds_input", min_extent > input_size,
                     "output extent " + fmt(min_extent) + " m vs input " + fmt(input_size) + " m"));

    std::uint64_t cross = 0;
    if (track.count("A1") && track.count("A2")) {
        cross = crossings(track["A1"], track["A2"]);
    }
    r.push_back(make("trajectories_interlace", cross >= 1, std::to_string(cross) + " crossing(s)"));
    for (AssertionResult& w : watch_assertions(d, 2)) {
        r.push_back(std::move(w));
    }
    return r;
}

std::vector<AssertionResult> check_watching(const Decoded& d) { return watch_assertions(d, 3); }

// Largest component difference, sign-insensitive (q and -q are one rotation).
double quat_distance(const UnitQuat& a, const UnitQuat& b) {
    double plus = 0.0, minus = 0.0;
    const double av[] = {a.w(), a.x(), a.y(), a.z()};
    const double bv[] = {b.w(), b.x(), b.y(), b.z()};
    for (int i = 0; i < 4; ++i) {
        plus = std::max(plus, std::abs(av[i] - bv[i]));
        minus = std::max(minus, std::abs(av[i] + bv[i]));
    }
    return std::min(plus, minus);
}

bool same_root_owners(const OwnershipTable::Row& a, const OwnershipTable::Row& b) {
    for (ChannelId c : {ChannelId::RootXY, ChannelId::RootVertical, ChannelId::RootYaw, ChannelId::RootPitch}) {
        if (!(a[static_cast<std::size_t>(c)] == b[static_cast<std::size_t>(c)])) {
            return false;
        }
    }
    return true;
}

std::vector<AssertionResult> check_crowd(const Decoded& d, std::uint64_t expected_ticks) {
    std::vector<AssertionResult> r;
    std::uint64_t bad_counts = 0;
    for (const TickOutput& out : d.outputs) {
        if (out.poses.size() != 6) {
            ++bad_counts;
        }
    }
    r.push_back(make("six_poses_per_tick",
                     d.scene.avatars.size() == 6 && d.outputs.size() == expected_ticks && bad_counts == 0,
                     std::to_string(d.outputs.size()) + " ticks, " + std::to_string(bad_counts) +
                         " with a pose count other than 6"));

    StateTracker st(d.scene);
    std::uint64_t limb_mismatch = 0, root_mismatch = 0, compose_mismatch = 0, root_pairs = 0;
    double compose_err = 0.0;
    for (const TickOutput& out : d.outputs) {
        st.apply(out.events);
        for (const AvatarOutput& a : out.poses) {
            const RootPose w = compose(a.ref, a.local_root);
            const double e = std::max((w.position - a.pose.position).norm(), quat_distance(w.rotation, a.pose.rotation));
            compose_err = std::max(compose_err, e);
            if (e > kFanoutTolerance) {
                ++compose_mismatch;
            }
        }
        for (std::size_t i = 0; i < d.scene.avatars.size(); ++i) {
            for (std::size_t j = i + 1; j < d.scene.avatars.size(); ++j) {
                const AvatarConfig& x = d.scene.avatars[i];
                const AvatarConfig& y = d.scene.avatars[j];
                if (x.stream != y.stream) {
                    continue;
                }
                const AvatarOutput* px = pose_of(out, x.id);
                const AvatarOutput* py = pose_of(out, y.id);
                const auto& rx = st.row(x.id);
                const auto& ry = st.row(y.id);
                const auto limbs = static_cast<std::size_t>(ChannelId::Limbs);
                const auto head = static_cast<std::size_t>(ChannelId::Head);
                if (rx[limbs] == ry[limbs] && rx[head] == ry[head] &&
                    !std::equal(px->pose.joint_rotations.begin() + 1, px->pose.joint_rotations.end(),
                                py->pose.joint_rotations.begin() + 1, py->pose.joint_rotations.end())) {
                    ++limb_mismatch;
                }
                if (same_root_owners(rx, ry)) {
                    ++root_pairs;
                    if (!(px->local_root.position == py->local_root.position) ||
                        !(px->local_root.rotation == py->local_root.rotation)) {
                        ++root_mismatch;
                    }
                }
            }
        }
    }
    r.push_back(make("fanout_independence", limb_mismatch == 0 && root_mismatch == 0 && compose_mismatch == 0,
                     std::to_string(limb_mismatch) + " limb and " + std::to_string(root_mismatch) + "/" +
                         std::to_string(root_pairs) + " local-root mismatches within stream groups; max |world - "
                         "compose(ref, local)| " + fmt(compose_err)));

    bool started = false, done = false;
    for (const TickOutput& out : d.outputs) {
        for (const Event& e : out.events) {
            started |= e.kind == EventKind::PathStarted && e.avatar == "B3";
            done |= e.kind == EventKind::PathDone && e.avatar == "B3";
        }
    }
    r.push_back(make("golem_path", started && done,
                     std::string("B3 path ") + (started ? "started" : "never started") +
                         (done ? " and reached its goal" : ", goal not reached")));
    return r;
}

} // namespace

TimingStats timing_stats(std::vector<double> ms) {
    TimingStats t;
    if (ms.empty()) {
        return t;
    }
    t.samples = ms.size();
    double sum = 0.0;
    for (double v : ms) {
        sum += v;
    }
    t.mean_ms = sum / static_cast<double>(ms.size());
    std::sort(ms.begin(), ms.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(ms.size())));
    t.p99_ms = ms[std::max<std::size_t>(rank, 1) - 1];
    t.max_ms = ms.back();
    return t;
}

std::size_t ScenarioReport::failed() const {
    return static_cast<std::size_t>(
        std::count_if(assertions.begin(), assertions.end(), [](const AssertionResult& a) { return !a.passed; }));
}

const AssertionResult* ScenarioReport::find(std::string_view name) const {
    for (const AssertionResult& a : assertions) {
        if (a.name == name) {
            return &a;
        }
    }
    return nullptr;
}

std::string ScenarioReport::to_json() const {
    json j;
    j["scenario"] = scenario;
    j["ticks"] = ticks;
    j["passed"] = assertions.size() - failed();
    j["failed"] = failed();
    auto list = json::array();
    for (const AssertionResult& a : assertions) {
        list.push_back({{"name", a.name}, {"passed", a.passed}, {"message", a.message}});
    }
    j["assertions"] = std::move(list);
    j["timing"] = {{"mean_ms", timing.mean_ms},
                   {"p99_ms", timing.p99_ms},
                   {"max_ms", timing.max_ms},
                   {"samples", timing.samples}};
    j["posebus"] = {{"sent", messages_sent}, {"dropped", messages_dropped}};
    return j.dump(2);
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"walking", "watching", "crowd"};
    return names;
}

std::filesystem::path default_assets_dir() {
    if (const char* env = std::getenv("STAGELINK_ASSETS"); env && *env) {
        return env;
    }
    return STAGELINK_SOURCE_ASSETS;
}

std::vector<AssertionResult> check_log(std::string_view name, const SessionLog& log) {
    const Shape& shape = shape_for(name);
    const Decoded d = decode(log);
    if (name == "walking") return check_walking(d);
    if (name == "watching") return check_watching(d);
    return check_crowd(d, shape.ticks);
}

ScenarioRun run_scenario(std::string_view name, const ScenarioOptions& options) {
    const Shape& shape = shape_for(name);
    const std::filesystem::path dir = options.assets_dir.empty() ? default_assets_dir() : options.assets_dir;
    const std::string file = std::string(name) + ".json";
    SceneConfig scene = load_scene(dir / "scenes" / file);
    CueSheet cues = load_cue_sheet(read_text(dir / "cues" / file));

    std::map<std::uint8_t, BvhStream> streams;
    for (const StreamConfig& s : scene.streams) {
        if (s.origin != StreamOrigin::Bvh) {
            throw Error(ErrorCode::InvalidArgument, "scenarios need BVH streams; stream " + std::to_string(s.id) +
                                                        " is live");
        }
        streams.emplace(s.id, BvhStream(load_bvh(s.bvh_path, s.id), 0, s.loop, s.rate_hz));
    }
    std::vector<std::string> ids;
    for (const AvatarConfig& a : scene.avatars) {
        ids.push_back(a.id);
    }

    Engine engine(std::move(scene), std::move(cues), options.tick_hz);
    engine.start_recording();

    PoseBusPublisher bus;
    auto checker = std::make_shared<CheckingSink>();
    bus.add_sink(checker);
    for (const auto& [host, port] : options.posebus_targets) {
        bus.add_sink(std::make_shared<UdpPoseSink>(host, port));
    }

    std::vector<double> durations;
    durations.reserve(shape.ticks);
    using Clock = std::chrono::steady_clock;
    for (std::uint64_t t = 0; t < shape.ticks; ++t) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            engine.set_axes(ids[i], options.manipulator ? script(name, t, ids[i], i) : AxisInput{});
        }
        const auto now_us = static_cast<std::uint64_t>(std::llround(static_cast<double>(t) * 1e6 / options.tick_hz));
        const auto t0 = Clock::now();
        std::map<std::uint8_t, StreamSample> samples;
        for (const auto& [id, s] : streams) {
            samples.emplace(id, s.tick(now_us));
        }
        const TickOutput out = engine.step(std::move(samples));
        bus.publish(out);
        durations.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }

    ScenarioRun run;
    run.log = engine.recorder()->log();
    ScenarioReport& rep = run.report;
    rep.scenario = std::string(name);
    rep.ticks = shape.ticks;
    rep.assertions = check_log(name, run.log);
    rep.timing = timing_stats(std::move(durations));
    rep.messages_sent = bus.sent();
    rep.messages_dropped = bus.dropped();

    if (name == "crowd") {
        const std::uint64_t expected = shape.ticks * 6;
        rep.assertions.push_back(make("posebus_delivery",
                                      checker->received == expected && bus.dropped() == 0 &&
                                          checker->undecodable == 0,
                                      std::to_string(checker->received) + "/" + std::to_string(expected) +
                                          " messages, " + std::to_string(bus.dropped()) + " dropped"));
        rep.assertions.push_back(make("posebus_tick_order",
                                      checker->out_of_order == 0 && bus.order_violations() == 0,
                                      std::to_string(checker->out_of_order) + " out-of-order messages"));
        rep.assertions.push_back(make("realtime_budget",
                                      rep.timing.mean_ms < kBudgetMs && rep.timing.p99_ms < kBudgetMs,
                                      "mean " + fmt(rep.timing.mean_ms) + " ms, p99 " + fmt(rep.timing.p99_ms) +
                                          " ms"));
    }
    return run;
}

std::uint64_t play_bvh(const std::filesystem::path& path, const std::string& host, std::uint16_t port, double rate_hz,
                       std::uint32_t repeats, std::uint8_t stream_id, const std::atomic<bool>* stop) {
    if (!(rate_hz > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "rate must be positive");
    }
    const BvhClip clip = load_bvh(path, stream_id);
    if (clip.frames.empty()) {
        throw Error(ErrorCode::ParseError, path.string() + ": no frames");
    }
    UdpPoseSink sink(host, port);
    using Clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / rate_hz));
    const auto start = Clock::now();
    std::uint64_t sent = 0;
    for (std::uint32_t rep = 0; repeats == 0 || rep < repeats; ++rep) {
        for (const MocapFrame& f : clip.frames) {
            if (stop && stop->load()) {
                return sent;
            }
            MocapFrame out = f;
            out.frame_no = static_cast<std::uint32_t>(sent);
            out.timestamp_us = static_cast<std::uint64_t>(std::llround(static_cast<double>(sent) * 1e6 / rate_hz));
            std::this_thread::sleep_until(start + period * static_cast<long>(sent));
            if (!sink.send(encode_frame(out))) {
                throw Error(ErrorCode::SocketError, "send to " + host + ":" + std::to_string(port) + " failed");
            }
            ++sent;
        }
    }
    return sent;
}

} // namespace stagelink
