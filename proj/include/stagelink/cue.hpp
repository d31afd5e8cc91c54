#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stagelink/mixer.hpp"

namespace stagelink {

/// The subset of mixer actions a cue may carry.
using CueAction = std::variant<SetRef, SetOwnership, StartPath, SetWatch>;

struct Cue {
    std::string id;
    std::string name;
    std::optional<std::uint64_t> at_tick;
    std::vector<CueAction> actions;
};

class CueSheet {
public:
    CueSheet() = default;
    /// Throws DuplicateCueId or MalformedAction (empty action list).
    explicit CueSheet(std::vector<Cue> cues);

    const std::vector<Cue>& cues() const { return cues_; }
    const Cue* find(std::string_view id) const;
    /// Indices of auto-fire cues, by at_tick then sheet order.
    const std::vector<std::size_t>& auto_fire_order() const { return auto_order_; }

private:
    std::vector<Cue> cues_;
    std::vector<std::size_t> auto_order_;
};

/// Schema:
///   {"cues":[{"id","name","at_tick"?,"actions":[
///     {"kind":"set_ref","avatar","pos":[x,y,z],"yaw_deg","pitch_deg"} |
///     {"kind":"set_ownership","avatar","channel","owner","weight"?} |
///     {"kind":"start_path","avatar","goal":[col,row],"speed"} |
///     {"kind":"set_watch","avatar","target":{"kind":"avatar"|"performer"|"point",...}|null}]}]}
/// Throws ParseError, DuplicateCueId, UnknownActionKind, or MalformedAction
/// carrying a JSON pointer into the document.
CueSheet load_cue_sheet(std::string_view json_text);

std::string cue_sheet_to_json(const CueSheet& sheet);

/// Actions produced by one firing, stamped with the tick they apply at.
struct FireResult {
    std::string cue_id;
    std::uint32_t fire_count = 0;
    std::uint64_t tick_no = 0;
    std::vector<CueAction> actions;

    /// CueFired marker followed by the cue's actions, ready for TickInputs.
    std::vector<Action> to_actions() const;
};

class CueEngine {
public:
    CueEngine() = default;
    explicit CueEngine(CueSheet sheet);

    const CueSheet& sheet() const { return sheet_; }

    /// Fires a cue; cues are re-runnable and each firing bumps the count.
    /// Throws UnknownCue.
    FireResult fire(std::string_view cue_id, std::uint64_t tick_no);

    /// Fires every auto cue scheduled for exactly `tick_no`, in order.
    std::vector<FireResult> fire_due(std::uint64_t tick_no);

    std::uint32_t fire_count(std::string_view cue_id) const;

private:
    CueSheet sheet_;
    std::map<std::string, std::uint32_t, std::less<>> counts_;
};

} // namespace stagelink
