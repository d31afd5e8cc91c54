#ifndef STAGELINK_STAGELINK_H
#define STAGELINK_STAGELINK_H

/* C interface to the stagelink engine. Every call returns an sl_status; on
 * failure sl_last_error() holds a message for the calling thread. Strings
 * returned through char** belong to the caller and go back via sl_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SL_API __declspec(dllexport)
#else
#define SL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status {
    SL_OK = 0,
    SL_ERR_INVALID_ARGUMENT,
    SL_ERR_IO,
    SL_ERR_BAD_MAGIC,
    SL_ERR_TRUNCATED,
    SL_ERR_BAD_LENGTH,
    SL_ERR_NON_UNIT_QUAT,
    SL_ERR_PARSE,
    SL_ERR_UNSUPPORTED_CHANNEL_ORDER,
    SL_ERR_STREAM_STALE,
    SL_ERR_UNKNOWN_SOURCE_JOINT,
    SL_ERR_UNKNOWN_TARGET_JOINT,
    SL_ERR_DUPLICATE_TARGET,
    SL_ERR_TOPOLOGY_MISMATCH,
    SL_ERR_UNKNOWN_AVATAR,
    SL_ERR_DUPLICATE_AVATAR,
    SL_ERR_DEGENERATE_TARGET,
    SL_ERR_NO_PATH,
    SL_ERR_OUT_OF_BOUNDS,
    SL_ERR_BLOCKED_ENDPOINT,
    SL_ERR_DUPLICATE_CUE_ID,
    SL_ERR_UNKNOWN_ACTION_KIND,
    SL_ERR_MALFORMED_ACTION,
    SL_ERR_UNKNOWN_CUE,
    SL_ERR_CORRUPT_LOG,
    SL_ERR_SCENE_MISMATCH,
    SL_ERR_SOCKET,
    SL_ERR_ASSET_MISSING,
    SL_ERR_INTERNAL = 100
} sl_status;

SL_API const char* sl_version(void);
SL_API const char* sl_status_name(sl_status status);
/* Message of the last failed call on this thread; "" after a success. */
SL_API const char* sl_last_error(void);
SL_API void sl_free(char* text);

/* --- scenarios ------------------------------------------------------------ */

typedef struct sl_scenario_options {
    const char* assets_dir;     /* NULL: built-in asset directory */
    double tick_hz;             /* <= 0: 100 */
    int manipulator;            /* 0 zeroes the scripted manipulator input */
    const char* record_path;    /* NULL: no session log */
    const char* posebus_target; /* "host:port" or NULL */
} sl_scenario_options;

SL_API void sl_scenario_options_init(sl_scenario_options* options);

typedef struct sl_report sl_report;

/* Runs walking, watching or crowd. A report is produced even when assertions
 * fail; check sl_report_failed. */
SL_API sl_status sl_scenario_run(const char* name, const sl_scenario_options* options, sl_report** out);
/* Re-checks the log-derived assertions of a recorded scenario offline. */
SL_API sl_status sl_scenario_check_log(const char* name, const char* log_path, sl_report** out);
SL_API size_t sl_report_failed(const sl_report* report);
SL_API size_t sl_report_assertions(const sl_report* report);
/* Pretty-printed JSON; valid until sl_report_free. */
SL_API const char* sl_report_json(const sl_report* report);
SL_API void sl_report_free(sl_report* report);

/* --- session logs ------------------------------------------------------------ */

typedef struct sl_log_info {
    uint64_t ticks;
    double tick_hz;
    uint64_t scene_hash;
    uint64_t cue_hash;
    uint64_t first_tick;
    uint64_t last_tick;
} sl_log_info;

SL_API sl_status sl_log_read_info(const char* log_path, sl_log_info* out);

typedef struct sl_replay_result {
    int identical;
    uint64_t ticks_compared;
    int diverged;
    uint64_t first_divergent_tick;
} sl_replay_result;

/* scene_path may be NULL; otherwise a log recorded against another scene is
 * refused with SL_ERR_SCENE_MISMATCH. */
SL_API sl_status sl_replay_verify(const char* log_path, const char* scene_path, sl_replay_result* out);

/* --- BVH player ---------------------------------------------------------------- */

/* repeats: 1 plays once, 0 loops until sl_play_cancel. */
SL_API sl_status sl_play_bvh(const char* bvh_path, const char* host_port, double rate_hz, uint32_t repeats,
                             uint64_t* frames_sent);
SL_API void sl_play_cancel(void);

/* --- in-process engine ---------------------------------------------------------- */

typedef struct sl_engine sl_engine;

/* cue_path may be NULL. BVH streams are sampled on the engine's own clock
 * (tick n at n / tick_hz). */
SL_API sl_status sl_engine_create(const char* scene_path, const char* cue_path, double tick_hz, sl_engine** out);
SL_API void sl_engine_destroy(sl_engine* engine);
/* One control message (same grammar as the TCP/WebSocket channel); *reply is
 * the JSON answer. */
SL_API sl_status sl_engine_control(sl_engine* engine, const char* message, char** reply);
SL_API sl_status sl_engine_step(sl_engine* engine, uint32_t ticks);
SL_API sl_status sl_engine_snapshot(const sl_engine* engine, char** json);
SL_API uint64_t sl_engine_tick(const sl_engine* engine);

/* --- live server ------------------------------------------------------------------ */

typedef struct sl_server_options {
    const char* bind_host;      /* NULL: 127.0.0.1 */
    uint16_t mocap_port;        /* 0: ephemeral */
    uint16_t control_port;
    uint16_t ws_port;
    const char* posebus_target; /* "host:port", NULL: none */
    double tick_hz;             /* <= 0: 100 */
    const char* record_path;    /* NULL: no recording */
} sl_server_options;

SL_API void sl_server_options_init(sl_server_options* options);

typedef struct sl_server sl_server;

SL_API sl_status sl_server_create(const char* scene_path, const char* cue_path, const sl_server_options* options,
                                  sl_server** out);
SL_API sl_status sl_server_start(sl_server* server);
SL_API sl_status sl_server_ports(const sl_server* server, uint16_t* mocap, uint16_t* control, uint16_t* ws);
/* Blocks until SIGINT or SIGTERM, then stops the server. */
SL_API sl_status sl_server_run_until_signal(sl_server* server);
SL_API sl_status sl_server_stop(sl_server* server);
SL_API uint64_t sl_server_ticks(const sl_server* server);
SL_API void sl_server_destroy(sl_server* server);

#ifdef __cplusplus
}
#endif

#endif
