#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "stagelink/mixer.hpp"

namespace stagelink {

/// Binary form of one tick's inputs/outputs. Reals are stored as f64 so a
/// replay can be compared bit for bit.
std::vector<std::uint8_t> serialize_inputs(const TickInputs& inputs);
TickInputs deserialize_inputs(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_output(const TickOutput& output);
TickOutput deserialize_output(std::span<const std::uint8_t> bytes);

struct SessionHeader {
    std::uint64_t scene_hash = 0;
    std::uint64_t cue_hash = 0;
    double tick_hz = 100.0;
    /// Self-contained scene (scene_to_resolved_json).
    std::string scene_json;
    /// Cue sheet JSON, empty when none was loaded.
    std::string cue_json;
};

struct SessionRecord {
    std::uint64_t tick_no = 0;
    std::vector<std::uint8_t> inputs;
    std::vector<std::uint8_t> output;
};

/// Session log file:
///   "SLG1", then records of (type u8, length u32, payload). Type 1 is the
///   header, then alternating 2 (inputs) and 3 (output) per tick, with
///   strictly increasing tick numbers.
struct SessionLog {
    SessionHeader header;
    std::vector<SessionRecord> records;

    /// Throws CorruptLog.
    static SessionLog read(const std::filesystem::path& path);
    static SessionLog parse(std::span<const std::uint8_t> bytes);
    void write(const std::filesystem::path& path) const;
    std::vector<std::uint8_t> bytes() const;
};

SessionHeader make_header(const std::string& scene_json, const std::string& cue_json, double tick_hz);

/// Accumulates a session in memory; write() dumps it.
class SessionRecorder {
public:
    explicit SessionRecorder(SessionHeader header) { log_.header = std::move(header); }

    /// Throws InvalidArgument when tick numbers stop increasing.
    void record(const TickInputs& inputs, const TickOutput& output);

    const SessionLog& log() const { return log_; }
    void write(const std::filesystem::path& path) const { log_.write(path); }

private:
    SessionLog log_;
};

struct ReplayVerdict {
    bool identical = true;
    std::uint64_t ticks_compared = 0;
    std::optional<std::uint64_t> first_divergent_tick;

    std::string describe() const;
};

/// Re-runs the mixer on the logged inputs and compares each output record
/// byte for byte. When `expected_scene_json` is given, a header whose scene
/// hash differs is refused with SceneMismatch.
ReplayVerdict replay(const SessionLog& log, const std::optional<std::string>& expected_scene_json = std::nullopt);

double tick_period(double tick_hz);

} // namespace stagelink
