#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stagelink/session.hpp"

namespace stagelink {

struct ScenarioOptions {
    /// Root holding bvh/, scenes/, cues/, maps/. Empty uses default_assets_dir().
    std::filesystem::path assets_dir;
    double tick_hz = 100.0;
    /// false zeroes every scripted manipulator axis (negative control).
    bool manipulator = true;
    /// Extra POSEBUS/1 UDP destinations.
    std::vector<std::pair<std::string, std::uint16_t>> posebus_targets;
};

struct AssertionResult {
    std::string name;
    bool passed = false;
    std::string message;
};

struct TimingStats {
    double mean_ms = 0.0;
    double p99_ms = 0.0;
    double max_ms = 0.0;
    std::uint64_t samples = 0;
};

/// Nearest-rank percentile statistics over per-tick durations.
TimingStats timing_stats(std::vector<double> durations_ms);

struct ScenarioReport {
    std::string scenario;
    std::uint64_t ticks = 0;
    std::vector<AssertionResult> assertions;
    TimingStats timing;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_dropped = 0;

    std::size_t failed() const;
    const AssertionResult* find(std::string_view name) const;
    std::string to_json() const;
};

struct ScenarioRun {
    ScenarioReport report;
    SessionLog log;
};

const std::vector<std::string>& scenario_names();

/// STAGELINK_ASSETS if set, else the assets/ directory of the source tree.
std::filesystem::path default_assets_dir();

/// Runs a scripted scenario on a simulated clock (tick n samples the BVH
/// streams at n / tick_hz) and checks it. Throws InvalidArgument for an
/// unknown name, AssetMissing for missing files.
ScenarioRun run_scenario(std::string_view name, const ScenarioOptions& options = {});

/// The log-derived assertions of a scenario. Pure: depends only on the log.
std::vector<AssertionResult> check_log(std::string_view name, const SessionLog& log);

/// Streams a BVH file as MSTREAM/1 datagrams, one per frame, at rate_hz.
/// repeats = 0 loops until `stop` is set. Returns the number of datagrams
/// sent. Throws ParseError, SocketError.
std::uint64_t play_bvh(const std::filesystem::path& path, const std::string& host, std::uint16_t port,
                       double rate_hz, std::uint32_t repeats = 1, std::uint8_t stream_id = 0,
                       const std::atomic<bool>* stop = nullptr);

} // namespace stagelink
