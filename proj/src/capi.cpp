#include "stagelink/stagelink.h"

#include <atomic>
#include <cmath>
#include <csignal>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <pthread.h>

#include "stagelink/engine.hpp"
#include "stagelink/error.hpp"
#include "stagelink/posebus.hpp"
#include "stagelink/scenario.hpp"
#include "stagelink/server.hpp"
#include "stagelink/session.hpp"

using namespace stagelink;

struct sl_report {
    ScenarioReport report;
    std::string json;
};

struct sl_engine {
    Engine engine;
    std::map<std::uint8_t, BvhStream> streams;
};

struct sl_server {
    Server server;
};

namespace {

thread_local std::string g_last_error;
std::atomic<bool> g_play_cancel{false};

sl_status fail(sl_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

sl_status status_of(ErrorCode c) { return static_cast<sl_status>(static_cast<int>(c) + 1); }

// Runs f, turning exceptions into status codes.
template <class F>
sl_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return SL_OK;
    } catch (const Error& e) {
        return fail(status_of(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail(SL_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SL_ERR_INTERNAL, "unknown exception");
    }
}

std::string read_text(const char* path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::AssetMissing, path);
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) {
        throw std::bad_alloc();
    }
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

std::optional<CueSheet> cues_from(const char* path) {
    if (!path) {
        return std::nullopt;
    }
    return load_cue_sheet(read_text(path));
}

double hz_or_default(double hz) { return hz > 0.0 ? hz : 100.0; }

sigset_t stop_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    return set;
}

} // namespace

extern "C" {

const char* sl_version(void) { return "0.1.0"; }

const char* sl_status_name(sl_status status) {
    if (status == SL_OK) {
        return "Ok";
    }
    if (status == SL_ERR_INTERNAL) {
        return "Internal";
    }
    const int i = static_cast<int>(status) - 1;
    if (i < 0 || i > static_cast<int>(ErrorCode::AssetMissing)) {
        return "?";
    }
    return to_string(static_cast<ErrorCode>(i)).data();
}

const char* sl_last_error(void) { return g_last_error.c_str(); }

void sl_free(char* text) { std::free(text); }

void sl_scenario_options_init(sl_scenario_options* o) {
    if (o) {
        *o = {nullptr, 100.0, 1, nullptr, nullptr};
    }
}

sl_status sl_scenario_run(const char* name, const sl_scenario_options* options, sl_report** out) {
    if (!name || !out) {
        return fail(SL_ERR_INVALID_ARGUMENT, "name and out are required");
    }
    return guarded([&] {
        sl_scenario_options defaults;
        sl_scenario_options_init(&defaults);
        const sl_scenario_options& o = options ? *options : defaults;
        ScenarioOptions so;
        if (o.assets_dir) {
            so.assets_dir = o.assets_dir;
        }
        so.tick_hz = hz_or_default(o.tick_hz);
        so.manipulator = o.manipulator != 0;
        if (o.posebus_target) {
            so.posebus_targets.push_back(parse_host_port(o.posebus_target));
        }
        ScenarioRun run = run_scenario(name, so);
        if (o.record_path) {
            run.log.write(o.record_path);
        }
        auto r = std::make_unique<sl_report>();
        r->report = std::move(run.report);
        r->json = r->report.to_json();
        *out = r.release();
    });
}

sl_status sl_scenario_check_log(const char* name, const char* log_path, sl_report** out) {
    if (!name || !log_path || !out) {
        return fail(SL_ERR_INVALID_ARGUMENT, "name, log_path and out are required");
    }
    return guarded([&] {
        const SessionLog log = SessionLog::read(log_path);
        auto r = std::make_unique<sl_report>();
        r->report.scenario = name;
        r->report.ticks = log.records.size();
        r->report.assertions = check_log(name, log);
        r->json = r->report.to_json();
        *out = r.release();
    });
}

size_t sl_report_failed(const sl_report* r) { return r ? r->report.failed() : 0; }
size_t sl_report_assertions(const sl_report* r) { return r ? r->report.assertions.size() : 0; }
const char* sl_report_json(const sl_report* r) { return r ? r->json.c_str() : ""; }
void sl_report_free(sl_report* r) { delete r; }

sl_status sl_log_read_info(const char* log_path, sl_log_info* out) {
    if (!log_path || !out) {
        return fail(SL_ERR_INVALID_ARGUMENT, "log_path and out are required");
    }
    return guarded([&] {
        const SessionLog log = SessionLog::read(log_path);
        *out = {log.records.size(),
                log.header.tick_hz,
                log.header.scene_hash,
                log.header.cue_hash,
                log.records.empty() ? 0 : log.records.front().tick_no,
                log.records.empty() ? 0 : log.records.back().tick_no};
    });
}

sl_status sl_replay_verify(const char* log_path, const char* scene_path, sl_replay_result* out) {
    if (!log_path || !out) {
        return fail(SL_ERR_INVALID_ARGUMENT, "log_path and out are required");
    }
    return guarded([&] {
        const SessionLog log = SessionLog::read(log_path);
        std::optional<std::string> expected;
        if (scene_path) {
            expected = scene_to_resolved_json(load_scene(scene_path));
        }
        const ReplayVerdict v = replay(log, expected);
        *out = {v.identical ? 1 : 0, v.ticks_compared, v.first_divergent_tick ? 1 : 0,
                v.first_divergent_tick.value_or(0)};
    });
}

sl_status sl_play_bvh(const char* bvh_path, const char* host_port, double rate_hz, uint32_t repeats,
                      uint64_t* frames_sent) {
    if (!bvh_path || !host_port) {
        return fail(SL_ERR_INVALID_ARGUMENT, "bvh_path and host_port are required");
    }
    return guarded([&] {
        g_play_cancel = false;
        const auto [host, port] = parse_host_port(host_port);
        const std::uint64_t n = play_bvh(bvh_path, host, port, rate_hz, repeats, 0, &g_play_cancel);
        if (frames_sent) {
            *frames_sent = n;
        }
    });
}

void sl_play_cancel(void) { g_play_cancel = true; }

sl_status sl_engine_create(const char* scene_path, const char* cue_path, double tick_hz, sl_engine** out) {
    if (!scene_path || !out) {
        return fail(SL_ERR_INVALID_ARGUMENT, "scene_path and out are required");
    }
    return guarded([&] {
        SceneConfig scene = load_scene(scene_path);
        std::map<std::uint8_t, BvhStream> streams;
        for (const StreamConfig& s : scene.streams) {
            if (s.origin == StreamOrigin::Bvh) {
                streams.emplace(s.id, BvhStream(load_bvh(s.bvh_path, s.id), 0, s.loop, s.rate_hz));
            }
        }
        *out = new sl_engine{Engine(std::move(scene), cues_from(cue_path), hz_or_default(tick_hz)),
                             std::move(streams)};
    });
}

void sl_engine_destroy(sl_engine* e) { delete e; }

sl_status sl_engine_control(sl_engine* e, const char* message, char** reply) {
    if (!e || !message || !reply) {
        return fail(SL_ERR_INVALID_ARGUMENT, "engine, message and reply are required");
    }
    return guarded([&] {
        bool subscribe = false;
        *reply = dup(handle_control_message(e->engine, message, subscribe));
    });
}

sl_status sl_engine_step(sl_engine* e, uint32_t ticks) {
    if (!e) {
        return fail(SL_ERR_INVALID_ARGUMENT, "engine is required");
    }
    return guarded([&] {
        for (uint32_t i = 0; i < ticks; ++i) {
            const auto now_us = static_cast<std::uint64_t>(
                std::llround(static_cast<double>(e->engine.next_tick()) * 1e6 / e->engine.tick_hz()));
            std::map<std::uint8_t, StreamSample> samples;
            for (const auto& [id, s] : e->streams) {
                samples.emplace(id, s.tick(now_us));
            }
            e->engine.step(std::move(samples));
        }
    });
}

sl_status sl_engine_snapshot(const sl_engine* e, char** json) {
    if (!e || !json) {
        return fail(SL_ERR_INVALID_ARGUMENT, "engine and json are required");
    }
    return guarded([&] { *json = dup(e->engine.snapshot_json()); });
}

uint64_t sl_engine_tick(const sl_engine* e) { return e ? e->engine.next_tick() : 0; }

void sl_server_options_init(sl_server_options* o) {
    if (o) {
        *o = {nullptr, 7000, 7002, 7003, "127.0.0.1:7001", 100.0, nullptr};
    }
}

sl_status sl_server_create(const char* scene_path, const char* cue_path, const sl_server_options* options,
                           sl_server** out) {
    if (!scene_path || !out) {
        return fail(SL_ERR_INVALID_ARGUMENT, "scene_path and out are required");
    }
    return guarded([&] {
        sl_server_options defaults;
        sl_server_options_init(&defaults);
        const sl_server_options& o = options ? *options : defaults;
        ServerConfig cfg;
        if (o.bind_host) {
            cfg.bind_host = o.bind_host;
        }
        cfg.mocap_port = o.mocap_port;
        cfg.control_port = o.control_port;
        cfg.ws_port = o.ws_port;
        cfg.posebus_targets.clear();
        if (o.posebus_target) {
            cfg.posebus_targets.push_back(parse_host_port(o.posebus_target));
        }
        cfg.tick_hz = hz_or_default(o.tick_hz);
        if (o.record_path) {
            cfg.record_path = o.record_path;
        }
        *out = new sl_server{Server(load_scene(scene_path), cues_from(cue_path), std::move(cfg))};
    });
}

sl_status sl_server_start(sl_server* s) {
    if (!s) {
        return fail(SL_ERR_INVALID_ARGUMENT, "server is required");
    }
    // The I/O thread inherits a mask without the stop signals, so they reach
    // whoever waits in sl_server_run_until_signal.
    const sigset_t set = stop_signals();
    sigset_t old;
    pthread_sigmask(SIG_BLOCK, &set, &old);
    const sl_status st = guarded([&] { s->server.start(); });
    pthread_sigmask(SIG_SETMASK, &old, nullptr);
    return st;
}

sl_status sl_server_ports(const sl_server* s, uint16_t* mocap, uint16_t* control, uint16_t* ws) {
    if (!s) {
        return fail(SL_ERR_INVALID_ARGUMENT, "server is required");
    }
    return guarded([&] {
        if (mocap) *mocap = s->server.mocap_port();
        if (control) *control = s->server.control_port();
        if (ws) *ws = s->server.ws_port();
    });
}

sl_status sl_server_run_until_signal(sl_server* s) {
    if (!s) {
        return fail(SL_ERR_INVALID_ARGUMENT, "server is required");
    }
    const sigset_t set = stop_signals();
    sigset_t old;
    pthread_sigmask(SIG_BLOCK, &set, &old);
    int sig = 0;
    sigwait(&set, &sig);
    pthread_sigmask(SIG_SETMASK, &old, nullptr);
    return guarded([&] { s->server.stop(); });
}

sl_status sl_server_stop(sl_server* s) {
    if (!s) {
        return fail(SL_ERR_INVALID_ARGUMENT, "server is required");
    }
    return guarded([&] { s->server.stop(); });
}

uint64_t sl_server_ticks(const sl_server* s) { return s ? s->server.ticks() : 0; }

void sl_server_destroy(sl_server* s) { delete s; }

} // extern "C"
