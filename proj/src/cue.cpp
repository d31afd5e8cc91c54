#include "stagelink/cue.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"
#include "stagelink/error.hpp"

namespace stagelink {

using detail::json;

CueSheet::CueSheet(std::vector<Cue> cues) : cues_(std::move(cues)) {
    std::set<std::string_view> ids;
    for (std::size_t i = 0; i < cues_.size(); ++i) {
        if (!ids.insert(cues_[i].id).second) {
            throw Error(ErrorCode::DuplicateCueId, cues_[i].id);
        }
        if (cues_[i].actions.empty()) {
            throw Error(ErrorCode::MalformedAction, "/cues/" + std::to_string(i) + "/actions: must not be empty");
        }
        if (cues_[i].at_tick) {
            auto_order_.push_back(i);
        }
    }
    std::stable_sort(auto_order_.begin(), auto_order_.end(),
                     [this](std::size_t a, std::size_t b) { return *cues_[a].at_tick < *cues_[b].at_tick; });
}

const Cue* CueSheet::find(std::string_view id) const {
    for (const Cue& c : cues_) {
        if (c.id == id) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

constexpr ErrorCode kBad = ErrorCode::MalformedAction;

CueAction parse_action(const json& a, const std::string& where) {
    const std::string kind = detail::string_from(detail::member(a, "kind", kBad, where), kBad, where + "/kind");
    const std::string avatar =
        detail::string_from(detail::member(a, "avatar", kBad, where), kBad, where + "/avatar");
    if (kind == "set_ref") {
        const Vec3 pos = detail::vec3_from(detail::member(a, "pos", kBad, where), kBad, where + "/pos");
        const double yaw = a.contains("yaw_deg") ? detail::number_from(a["yaw_deg"], kBad, where + "/yaw_deg") : 0.0;
        const double pitch =
            a.contains("pitch_deg") ? detail::number_from(a["pitch_deg"], kBad, where + "/pitch_deg") : 0.0;
        if (pitch < -90.0 || pitch > 90.0) {
            throw Error(kBad, where + "/pitch_deg: must lie in [-90, 90]");
        }
        return SetRef{avatar, ReferenceTransform(pos, deg_to_rad(yaw), deg_to_rad(pitch))};
    }
    if (kind == "set_ownership") {
        const std::string ch =
            detail::string_from(detail::member(a, "channel", kBad, where), kBad, where + "/channel");
        const auto channel = parse_channel_id(ch);
        if (!channel) {
            throw Error(kBad, where + "/channel: unknown channel '" + ch + "'");
        }
        const std::string ow = detail::string_from(detail::member(a, "owner", kBad, where), kBad, where + "/owner");
        const auto owner = parse_owner_kind(ow);
        if (!owner) {
            throw Error(kBad, where + "/owner: unknown owner '" + ow + "'");
        }
        Owner o{*owner, 0.0};
        if (*owner == OwnerKind::Blend) {
            const double w = detail::number_from(detail::member(a, "weight", kBad, where), kBad, where + "/weight");
            if (!(w >= 0.0 && w <= 1.0)) {
                throw Error(kBad, where + "/weight: must lie in [0, 1]");
            }
            o.weight = w;
        }
        return SetOwnership{avatar, *channel, o};
    }
    if (kind == "start_path") {
        const json& g = detail::member(a, "goal", kBad, where);
        if (!g.is_array() || g.size() != 2 || !g[0].is_number_integer() || !g[1].is_number_integer()) {
            throw Error(kBad, where + "/goal: expected [col, row]");
        }
        const double speed = a.contains("speed") ? detail::number_from(a["speed"], kBad, where + "/speed") : 1.5;
        if (!(speed > 0.0)) {
            throw Error(kBad, where + "/speed: must be positive");
        }
        return StartPath{avatar, Cell{g[0].get<int>(), g[1].get<int>()}, speed};
    }
    if (kind == "set_watch") {
        const json& t = detail::member(a, "target", kBad, where);
        SetWatch sw{avatar, std::nullopt};
        if (!t.is_null()) {
            sw.target = detail::watch_from(t, kBad, where + "/target");
        }
        return sw;
    }
    throw Error(ErrorCode::UnknownActionKind, where + "/kind: '" + kind + "'");
}

json action_json(const CueAction& action) {
    return std::visit(
        [](const auto& a) -> json {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, SetRef>) {
                return {{"kind", "set_ref"},
                        {"avatar", a.avatar},
                        {"pos", detail::to_json(a.ref.translation())},
                        {"yaw_deg", rad_to_deg(a.ref.yaw())},
                        {"pitch_deg", rad_to_deg(a.ref.pitch())}};
            } else if constexpr (std::is_same_v<T, SetOwnership>) {
                json j = detail::to_json(a.owner);
                j["kind"] = "set_ownership";
                j["avatar"] = a.avatar;
                j["channel"] = std::string(to_string(a.channel));
                return j;
            } else if constexpr (std::is_same_v<T, StartPath>) {
                return {{"kind", "start_path"}, {"avatar", a.avatar}, {"goal", {a.goal.col, a.goal.row}},
                        {"speed", a.speed}};
            } else {
                return {{"kind", "set_watch"},
                        {"avatar", a.avatar},
                        {"target", a.target ? detail::to_json(*a.target) : json(nullptr)}};
            }
        },
        action);
}

} // namespace

CueSheet load_cue_sheet(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    const json& cues = detail::member(doc, "cues", kBad, "");
    if (!cues.is_array()) {
        throw Error(kBad, "/cues: expected an array");
    }
    std::vector<Cue> out;
    for (std::size_t i = 0; i < cues.size(); ++i) {
        const std::string where = "/cues/" + std::to_string(i);
        const json& c = cues[i];
        Cue cue;
        cue.id = detail::string_from(detail::member(c, "id", kBad, where), kBad, where + "/id");
        cue.name = c.contains("name") ? detail::string_from(c["name"], kBad, where + "/name") : cue.id;
        if (c.contains("at_tick") && !c["at_tick"].is_null()) {
            if (!c["at_tick"].is_number_unsigned()) {
                throw Error(kBad, where + "/at_tick: expected a non-negative integer");
            }
            cue.at_tick = c["at_tick"].get<std::uint64_t>();
        }
        const json& actions = detail::member(c, "actions", kBad, where);
        if (!actions.is_array()) {
            throw Error(kBad, where + "/actions: expected an array");
        }
        for (std::size_t k = 0; k < actions.size(); ++k) {
            cue.actions.push_back(parse_action(actions[k], where + "/actions/" + std::to_string(k)));
        }
        out.push_back(std::move(cue));
    }
    return CueSheet(std::move(out));
}

std::string cue_sheet_to_json(const CueSheet& sheet) {
    json cues = json::array();
    for (const Cue& c : sheet.cues()) {
        json cj = {{"id", c.id}, {"name", c.name}};
        if (c.at_tick) {
            cj["at_tick"] = *c.at_tick;
        }
        cj["actions"] = json::array();
        for (const CueAction& a : c.actions) {
            cj["actions"].push_back(action_json(a));
        }
        cues.push_back(std::move(cj));
    }
    return json{{"cues", cues}}.dump();
}

std::vector<Action> FireResult::to_actions() const {
    std::vector<Action> out;
    out.reserve(actions.size() + 1);
    out.emplace_back(CueFired{cue_id, fire_count});
    for (const CueAction& a : actions) {
        std::visit([&out](const auto& v) { out.emplace_back(v); }, a);
    }
    return out;
}

CueEngine::CueEngine(CueSheet sheet) : sheet_(std::move(sheet)) {}

FireResult CueEngine::fire(std::string_view cue_id, std::uint64_t tick_no) {
    const Cue* cue = sheet_.find(cue_id);
    if (!cue) {
        throw Error(ErrorCode::UnknownCue, std::string(cue_id));
    }
    auto it = counts_.find(cue_id);
    if (it == counts_.end()) {
        it = counts_.emplace(std::string(cue_id), 0).first;
    }
    return {cue->id, ++it->second, tick_no, cue->actions};
}

std::vector<FireResult> CueEngine::fire_due(std::uint64_t tick_no) {
    std::vector<FireResult> out;
    for (std::size_t i : sheet_.auto_fire_order()) {
        const Cue& c = sheet_.cues()[i];
        if (*c.at_tick == tick_no) {
            out.push_back(fire(c.id, tick_no));
        } else if (*c.at_tick > tick_no) {
            break;
        }
    }
    return out;
}

std::uint32_t CueEngine::fire_count(std::string_view cue_id) const {
    const auto it = counts_.find(cue_id);
    return it == counts_.end() ? 0 : it->second;
}

} // namespace stagelink
