#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stagelink/cue.hpp"
#include "stagelink/scene.hpp"

namespace stagelink {

struct ServerConfig {
    std::string bind_host = "127.0.0.1";
    /// 0 picks an ephemeral port; the bound port is reported by Server.
    std::uint16_t mocap_port = 7000;
    std::uint16_t control_port = 7002;
    std::uint16_t ws_port = 7003;
    std::vector<std::pair<std::string, std::uint16_t>> posebus_targets = {{"127.0.0.1", 7001}};
    double tick_hz = 100.0;
    double state_hz = 10.0;
    /// Written when the server stops.
    std::optional<std::filesystem::path> record_path;
};

/// Applies one control message to an engine and returns the JSON reply:
/// {"type":"ack","of":<type>} or {"type":"error","code","message"}.
/// Sets `subscribe` when the message asks for state pushes.
class Engine;
std::string handle_control_message(Engine& engine, const std::string& text, bool& subscribe);

/// Live engine: UDP mocap in, fixed-rate tick loop, POSEBUS/1 out, JSON control
/// over TCP (newline-delimited) and WebSocket. Everything runs on one I/O
/// thread started by start().
class Server {
public:
    Server(SceneConfig scene, std::optional<CueSheet> cues, ServerConfig config);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds every socket and starts the I/O thread. Throws SocketError.
    void start();
    /// Stops ticking, closes sockets, joins the thread, writes the recording.
    void stop();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();

    std::uint16_t mocap_port() const;
    std::uint16_t control_port() const;
    std::uint16_t ws_port() const;

    std::uint64_t ticks() const;
    std::uint64_t poses_sent() const;
    std::uint64_t poses_dropped() const;
    std::string snapshot_json() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace stagelink
