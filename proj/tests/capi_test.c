/* Exercises the shared library through its C header only. */
#include <stdio.h>
#include <string.h>

#include "stagelink/stagelink.h"

static int failures = 0;

#define EXPECT(cond)                                                              \
    do {                                                                          \
        if (!(cond)) {                                                            \
            fprintf(stderr, "%s:%d: %s (last error: %s)\n", __FILE__, __LINE__, #cond, \
                    sl_last_error());                                             \
            ++failures;                                                           \
        }                                                                         \
    } while (0)

/* Rotates through a few buffers so one call can take two paths. */
static const char* asset(const char* rel) {
    static char buf[4][4096];
    static int next = 0;
    char* b = buf[next++ % 4];
    snprintf(b, sizeof buf[0], "%s/%s", STAGELINK_TEST_ASSETS, rel);
    return b;
}

static void scenarios(void) {
    sl_scenario_options o;
    sl_report* r = NULL;
    const char* log = "capi_test_walking.slog";
    sl_replay_result res;
    sl_log_info info;

    sl_scenario_options_init(&o);
    o.record_path = log;
    EXPECT(sl_scenario_run("walking", &o, &r) == SL_OK);
    EXPECT(sl_report_failed(r) == 0);
    EXPECT(sl_report_assertions(r) == 6);
    EXPECT(strstr(sl_report_json(r), "\"walking\"") != NULL);
    sl_report_free(r);

    EXPECT(sl_log_read_info(log, &info) == SL_OK);
    EXPECT(info.ticks == 2000);
    EXPECT(info.tick_hz == 100.0);
    EXPECT(sl_replay_verify(log, NULL, &res) == SL_OK);
    EXPECT(res.identical == 1 && res.diverged == 0 && res.ticks_compared == 2000);
    EXPECT(sl_replay_verify(log, asset("scenes/crowd.json"), &res) == SL_ERR_SCENE_MISMATCH);
    EXPECT(strlen(sl_last_error()) > 0);

    EXPECT(sl_scenario_check_log("walking", log, &r) == SL_OK);
    EXPECT(sl_report_failed(r) == 0);
    sl_report_free(r);
    remove(log);

    o.record_path = NULL;
    o.manipulator = 0;
    EXPECT(sl_scenario_run("walking", &o, &r) == SL_OK);
    EXPECT(sl_report_failed(r) > 0);
    sl_report_free(r);

    EXPECT(sl_scenario_run("juggling", NULL, &r) == SL_ERR_INVALID_ARGUMENT);
    EXPECT(sl_scenario_run(NULL, NULL, &r) == SL_ERR_INVALID_ARGUMENT);
    EXPECT(sl_replay_verify("/nonexistent.slog", NULL, &res) == SL_ERR_IO);
}

static void engine(void) {
    sl_engine* e = NULL;
    char* reply = NULL;
    char* snap = NULL;

    EXPECT(sl_engine_create(asset("scenes/nope.json"), NULL, 100.0, &e) == SL_ERR_ASSET_MISSING);
    EXPECT(sl_engine_create(asset("scenes/walking.json"), asset("cues/walking.json"), 0.0, &e) == SL_OK);
    EXPECT(sl_engine_tick(e) == 0);

    EXPECT(sl_engine_control(e, "{\"type\":\"axes\",\"avatar\":\"A1\",\"forward\":1}", &reply) == SL_OK);
    EXPECT(strstr(reply, "\"ack\"") != NULL);
    sl_free(reply);
    EXPECT(sl_engine_control(e, "{\"type\":\"fire_cue\",\"id\":\"ZZ\"}", &reply) == SL_OK);
    EXPECT(strstr(reply, "UnknownCue") != NULL);
    sl_free(reply);

    EXPECT(sl_engine_step(e, 150) == SL_OK);
    EXPECT(sl_engine_tick(e) == 150);
    EXPECT(sl_engine_snapshot(e, &snap) == SL_OK);
    EXPECT(strstr(snap, "\"A2\"") != NULL);
    EXPECT(strstr(snap, "\"RESET\"") != NULL);
    sl_free(snap);
    sl_engine_destroy(e);
}

static void server(void) {
    sl_server_options o;
    sl_server* s = NULL;
    uint16_t mocap = 0, control = 0, ws = 0;

    sl_server_options_init(&o);
    EXPECT(o.mocap_port == 7000 && o.control_port == 7002 && o.ws_port == 7003);
    o.mocap_port = 0;
    o.control_port = 0;
    o.ws_port = 0;
    o.posebus_target = NULL;
    EXPECT(sl_server_create(asset("scenes/watching.json"), asset("cues/watching.json"), &o, &s) == SL_OK);
    EXPECT(sl_server_start(s) == SL_OK);
    EXPECT(sl_server_ports(s, &mocap, &control, &ws) == SL_OK);
    EXPECT(mocap != 0 && control != 0 && ws != 0);
    EXPECT(sl_server_stop(s) == SL_OK);
    sl_server_destroy(s);

    o.posebus_target = "nohostport";
    EXPECT(sl_server_create(asset("scenes/watching.json"), NULL, &o, &s) == SL_ERR_INVALID_ARGUMENT);
}

int main(void) {
    EXPECT(strcmp(sl_version(), "0.1.0") == 0);
    EXPECT(strcmp(sl_status_name(SL_OK), "Ok") == 0);
    EXPECT(strcmp(sl_status_name(SL_ERR_UNKNOWN_CUE), "UnknownCue") == 0);
    EXPECT(strcmp(sl_status_name(SL_ERR_ASSET_MISSING), "AssetMissing") == 0);
    EXPECT(strcmp(sl_status_name(SL_ERR_INTERNAL), "Internal") == 0);
    EXPECT(strcmp(sl_status_name((sl_status)77), "?") == 0);
    scenarios();
    engine();
    server();
    if (failures) {
        fprintf(stderr, "%d failure(s)\n", failures);
        return 1;
    }
    puts("capi: all checks passed");
    return 0;
}
