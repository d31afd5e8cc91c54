#include "stagelink/engine.hpp"

#include <json.hpp>

#include "stagelink/error.hpp"

namespace stagelink {

namespace {
constexpr std::size_t kRecentEvents = 64;
}

Engine::Engine(SceneConfig scene, std::optional<CueSheet> cues, double tick_hz)
    : scene_(std::move(scene)),
      tick_hz_(tick_hz),
      mixer_(make_mixer(scene_, tick_period(tick_hz))),
      cues_(cues ? CueEngine(*cues) : CueEngine()),
      has_cues_(cues.has_value()) {}

void Engine::set_axes(const std::string& avatar, const AxisInput& axes) {
    if (!mixer_.ownership().has_avatar(avatar)) {
        throw Error(ErrorCode::UnknownAvatar, avatar);
    }
    axes_[avatar] = axes;
}

void Engine::request_ownership(const std::string& avatar, ChannelId channel, Owner owner) {
    if (!mixer_.ownership().has_avatar(avatar)) {
        throw Error(ErrorCode::UnknownAvatar, avatar);
    }
    pending_ownership_.push_back(SetOwnership{avatar, channel, owner});
}

void Engine::request_fire(const std::string& cue_id) {
    if (cues_.sheet().find(cue_id) == nullptr) {
        throw Error(ErrorCode::UnknownCue, cue_id);
    }
    pending_fires_.push_back(cue_id);
}

void Engine::request_action(Action action) { pending_other_.push_back(std::move(action)); }

TickOutput Engine::step(std::map<std::uint8_t, StreamSample> mocap) {
    TickInputs in;
    in.tick_no = next_tick_;
    in.mocap = std::move(mocap);
    in.axes = axes_;
    in.actions = std::move(pending_ownership_);
    pending_ownership_.clear();
    for (const std::string& id : pending_fires_) {
        for (Action& a : cues_.fire(id, in.tick_no).to_actions()) {
            in.actions.push_back(std::move(a));
        }
    }
    pending_fires_.clear();
    for (const FireResult& r : cues_.fire_due(in.tick_no)) {
        for (Action& a : r.to_actions()) {
            in.actions.push_back(std::move(a));
        }
    }
    for (Action& a : pending_other_) {
        in.actions.push_back(std::move(a));
    }
    pending_other_.clear();

    TickOutput out = mixer_.tick(in);
    if (recorder_) {
        recorder_->record(in, out);
    }
    for (const Event& e : out.events) {
        recent_.push_back(e);
        if (recent_.size() > kRecentEvents) {
            recent_.pop_front();
        }
    }
    ++next_tick_;
    return out;
}

std::string Engine::snapshot_json() const {
    auto doc = nlohmann::json::parse(report_to_json(mixer_.snapshot()));
    auto list = nlohmann::json::array();
    for (const Cue& c : cues_.sheet().cues()) {
        nlohmann::json j{{"id", c.id}, {"name", c.name}, {"fire_count", cues_.fire_count(c.id)}};
        j["at_tick"] = c.at_tick ? nlohmann::json(*c.at_tick) : nlohmann::json(nullptr);
        list.push_back(std::move(j));
    }
    doc["cues"] = std::move(list);
    doc["next_tick"] = next_tick_;
    return doc.dump();
}

void Engine::start_recording() {
    const std::string cue_json = has_cues_ ? cue_sheet_to_json(cues_.sheet()) : std::string();
    recorder_ = std::make_unique<SessionRecorder>(make_header(scene_to_resolved_json(scene_), cue_json, tick_hz_));
}

} // namespace stagelink
