#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stagelink/cue.hpp"
#include "stagelink/mixer.hpp"
#include "stagelink/scene.hpp"
#include "stagelink/session.hpp"

namespace stagelink {

/// Mixer plus cue engine plus the control-plane queue. All calls happen on
/// the tick thread; requests made between ticks apply at the next tick in the
/// order: ownership changes, fired cues, due auto cues.
class Engine {
public:
    Engine(SceneConfig scene, std::optional<CueSheet> cues, double tick_hz);

    /// Latest value wins until replaced. Throws UnknownAvatar.
    void set_axes(const std::string& avatar, const AxisInput& axes);
    /// Throws UnknownAvatar.
    void request_ownership(const std::string& avatar, ChannelId channel, Owner owner);
    /// Throws UnknownCue.
    void request_fire(const std::string& cue_id);
    /// Queues an arbitrary action (watch targets from the control channel).
    void request_action(Action action);

    TickOutput step(std::map<std::uint8_t, StreamSample> mocap);

    std::uint64_t next_tick() const { return next_tick_; }
    double tick_hz() const { return tick_hz_; }
    const Mixer& mixer() const { return mixer_; }
    Mixer& mixer() { return mixer_; }
    const SceneConfig& scene() const { return scene_; }
    const CueEngine& cues() const { return cues_; }

    /// Console state message: mixer report plus the cue list.
    std::string snapshot_json() const;

    /// Most recent events, oldest first (bounded).
    const std::deque<Event>& recent_events() const { return recent_; }

    /// Starts recording every tick from now on.
    void start_recording();
    const SessionRecorder* recorder() const { return recorder_.get(); }

private:
    SceneConfig scene_;
    double tick_hz_;
    Mixer mixer_;
    CueEngine cues_;
    bool has_cues_ = false;
    std::uint64_t next_tick_ = 0;
    std::map<std::string, AxisInput> axes_;
    std::vector<Action> pending_ownership_;
    std::vector<std::string> pending_fires_;
    std::vector<Action> pending_other_;
    std::deque<Event> recent_;
    std::unique_ptr<SessionRecorder> recorder_;
};

} // namespace stagelink
