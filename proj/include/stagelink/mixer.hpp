#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stagelink/manipulator.hpp"
#include "stagelink/mocap.hpp"
#include "stagelink/pathfinder.hpp"
#include "stagelink/pose.hpp"
#include "stagelink/retarget.hpp"
#include "stagelink/stage.hpp"

namespace stagelink {

// --- actions: everything that mutates mixer state between ticks ---------------

struct SetRef {
    std::string avatar;
    ReferenceTransform ref;
    friend bool operator==(const SetRef&, const SetRef&) = default;
};

struct SetOwnership {
    std::string avatar;
    ChannelId channel = ChannelId::RootXY;
    Owner owner;
    friend bool operator==(const SetOwnership&, const SetOwnership&) = default;
};

struct StartPath {
    std::string avatar;
    Cell goal;
    double speed = 1.5;
    friend bool operator==(const StartPath&, const StartPath&) = default;
};

struct SetWatch {
    std::string avatar;
    std::optional<WatchTarget> target;
    friend bool operator==(const SetWatch&, const SetWatch&) = default;
};

/// Marks that a cue fired; its actions follow it in the same list.
struct CueFired {
    std::string cue_id;
    std::uint32_t fire_count = 0;
    friend bool operator==(const CueFired&, const CueFired&) = default;
};

using Action = std::variant<SetRef, SetOwnership, StartPath, SetWatch, CueFired>;

/// Everything one tick consumes. Actions apply in list order at the tick
/// boundary, before any channel resolves.
struct TickInputs {
    std::uint64_t tick_no = 0;
    std::map<std::uint8_t, StreamSample> mocap;
    std::map<std::string, AxisInput> axes;
    std::vector<Action> actions;
};

enum class EventKind : std::uint8_t {
    OwnershipChanged,
    RefSet,
    PathStarted,
    PathFailed,
    PathDone,
    WatchSet,
    CueFired,
    StreamStale,
    StreamRecovered,
    VolumeExceeded,
    ActionRejected,
};

std::string_view to_string(EventKind k);

struct Event {
    std::uint64_t tick_no = 0;
    EventKind kind = EventKind::RefSet;
    std::string avatar;
    /// Compact JSON.
    std::string payload;

    friend bool operator==(const Event&, const Event&) = default;
};

struct AvatarOutput {
    std::string avatar_id;
    std::uint16_t index = 0;
    /// Reference transform in force for this tick.
    ReferenceTransform ref;
    /// Mocap-local root after clamping and channel suppression.
    RootPose local_root;
    WorldPose pose;
};

struct TickOutput {
    std::uint64_t tick_no = 0;
    std::vector<AvatarOutput> poses;
    std::vector<Event> events;
};

struct ActivePath {
    PlannedPath path;
    double speed = 1.5;
    std::uint64_t start_tick = 0;
};

struct AvatarBinding {
    std::string avatar_id;
    std::uint8_t stream_id = 0;
    SkeletonTopology topology;
    BoneMap bone_map;
    ReferenceTransform ref;
    std::optional<WatchTarget> watch;
    std::optional<ActivePath> path;
    /// Root of the HEAD channel subtree; absent joints leave HEAD inert.
    std::string head_joint = "Head";
};

struct MixerConfig {
    double dt = 0.01;
    ManipulatorConfig manipulator;
    StageCalibration calibration;
    std::optional<NavGrid> nav_grid;
};

/// One resolved (avatar, channel) per tick, recorded when tracing is on.
struct ChannelWrite {
    std::uint64_t tick_no = 0;
    std::uint16_t avatar_index = 0;
    ChannelId channel = ChannelId::RootXY;
    OwnerKind source = OwnerKind::Mocap;
};

struct AvatarReport {
    std::string id;
    std::uint8_t stream_id = 0;
    ReferenceTransform ref;
    OwnershipTable::Row ownership;
    std::optional<WatchTarget> watch;
    std::optional<Cell> path_goal;
    Vec3 position;

    friend bool operator==(const AvatarReport&, const AvatarReport&) = default;
};

/// Console feed: JSON-serializable summary of the mixer.
struct StateReport {
    std::uint64_t last_tick_no = 0;
    std::vector<AvatarReport> avatars;
    std::map<std::string, std::uint32_t> cue_fire_counts;

    friend bool operator==(const StateReport&, const StateReport&) = default;
};

std::string report_to_json(const StateReport& report);
/// Throws ParseError.
StateReport report_from_json(std::string_view text);

/// The per-tick puppeteering core. A Mixer is a plain value: copying it
/// snapshots the whole state.
class Mixer {
public:
    explicit Mixer(MixerConfig config);

    void add_stream(std::uint8_t stream_id, SkeletonTopology topology);
    /// Throws DuplicateAvatar, or InvalidArgument for an unknown stream.
    void bind_avatar(AvatarBinding binding);

    TickOutput tick(const TickInputs& inputs);

    StateReport snapshot() const;

    const OwnershipTable& ownership() const { return ownership_; }
    const MixerConfig& config() const { return config_; }
    std::size_t avatar_count() const { return avatars_.size(); }
    const AvatarBinding& binding(const std::string& avatar) const;
    std::uint64_t last_tick_no() const { return last_tick_no_; }

    void set_tracing(bool on) { tracing_ = on; }
    const std::vector<ChannelWrite>& trace() const { return trace_; }
    void clear_trace() { trace_.clear(); }

private:
    struct StreamState {
        SkeletonTopology topology;
        std::optional<MocapFrame> last;
        bool stale = false;
    };

    struct AvatarState {
        AvatarBinding binding;
        std::uint16_t index = 0;
        std::vector<std::uint8_t> joint_channel;  // 0 root, 1 limbs, 2 head
        std::optional<std::size_t> head_index;
        bool clamped = false;
        Vec3 last_position;
    };

    AvatarState* find(const std::string& avatar);
    void apply_action(const Action& action, std::uint64_t tick_no, std::vector<Event>& events);
    std::optional<Vec3> watch_position(const WatchTarget& target, const std::map<std::string, Vec3>& roots) const;

    MixerConfig config_;
    std::map<std::uint8_t, StreamState> streams_;
    std::vector<AvatarState> avatars_;
    OwnershipTable ownership_;
    std::map<std::string, std::uint32_t> cue_fire_counts_;
    std::uint64_t last_tick_no_ = 0;
    bool tracing_ = false;
    std::vector<ChannelWrite> trace_;
};

} // namespace stagelink
