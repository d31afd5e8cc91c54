// stagelink command line: live engine, scripted scenarios, BVH player, replay.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stagelink/stagelink.h"

namespace {

double env_tick_hz() {
    if (const char* v = std::getenv("STAGELINK_TICK_HZ"); v && *v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            std::cerr << "ignoring STAGELINK_TICK_HZ=" << v << "\n";
        }
    }
    return 100.0;
}

int report_error(sl_status st) {
    std::cerr << "error: " << sl_status_name(st) << ": " << sl_last_error() << "\n";
    return 2;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int print_report(sl_report* rep, bool as_json) {
    if (as_json) {
        std::cout << sl_report_json(rep) << "\n";
    } else {
        const auto j = nlohmann::json::parse(sl_report_json(rep));
        std::cout << "scenario " << j["scenario"].get<std::string>() << ": " << j["ticks"] << " ticks\n";
        for (const auto& a : j["assertions"]) {
            std::cout << (a["passed"].get<bool>() ? "  PASS " : "  FAIL ") << a["name"].get<std::string>() << ": "
                      << a["message"].get<std::string>() << "\n";
        }
        if (j.contains("timing") && j["timing"]["samples"].get<std::uint64_t>() > 0) {
            std::cout << "  timing: mean " << j["timing"]["mean_ms"].get<double>() << " ms, p99 "
                      << j["timing"]["p99_ms"].get<double>() << " ms\n";
        }
        std::cout << (sl_report_failed(rep) == 0 ? "ok" : "FAILED") << " (" << sl_report_failed(rep) << " of "
                  << sl_report_assertions(rep) << " failed)\n";
    }
    const int rc = sl_report_failed(rep) == 0 ? 0 : 1;
    sl_report_free(rep);
    return rc;
}

void on_play_signal(int) { sl_play_cancel(); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stagelink: mocap puppeteering engine"};
    app.require_subcommand(1);
    double tick_hz = env_tick_hz();
    app.add_option("--tick-hz", tick_hz, "Tick rate (default $STAGELINK_TICK_HZ or 100)");

    // run
    auto* run = app.add_subcommand("run", "Run the live engine");
    std::string scene, cues, listen = "127.0.0.1", posebus = "127.0.0.1:7001", record;
    std::uint16_t mocap_port = 7000, control_port = 7002, ws_port = 7003;
    run->add_option("--scene", scene, "Scene file")->required()->check(CLI::ExistingFile);
    run->add_option("--cues", cues, "Cue sheet")->check(CLI::ExistingFile);
    run->add_option("--listen", listen, "Bind address");
    run->add_option("--mocap", mocap_port, "UDP port for MSTREAM/1");
    run->add_option("--posebus", posebus, "POSEBUS/1 destination host:port");
    run->add_option("--control", control_port, "TCP control port");
    run->add_option("--ws", ws_port, "WebSocket control port");
    run->add_option("--record", record, "Write a session log on exit");

    // scenario
    auto* scen = app.add_subcommand("scenario", "Run a scripted, self-checking scenario");
    std::string scen_name, assets, scen_record, scen_posebus;
    bool no_manip = false, as_json = false;
    scen->add_option("name", scen_name, "walking | watching | crowd")
        ->required()
        ->check(CLI::IsMember({"walking", "watching", "crowd"}));
    scen->add_option("--record", scen_record, "Session log to write");
    scen->add_option("--assets", assets, "Asset directory");
    scen->add_option("--posebus", scen_posebus, "Also send poses to host:port");
    scen->add_flag("--no-manipulator", no_manip, "Zero the scripted manipulator input");
    scen->add_flag("--json", as_json, "Print the report as JSON");

    // play
    auto* play = app.add_subcommand("play", "Stream a BVH file as MSTREAM/1");
    std::string bvh, to;
    double rate = 100.0;
    bool loop = false;
    play->add_option("--bvh", bvh, "BVH file")->required()->check(CLI::ExistingFile);
    play->add_option("--to", to, "Destination host:port")->required();
    play->add_option("--rate", rate, "Frames per second")->check(CLI::PositiveNumber);
    play->add_flag("--loop", loop, "Loop until interrupted");

    // replay
    auto* rep = app.add_subcommand("replay", "Inspect or verify a session log");
    std::string log, rep_scene, check;
    bool verify = false;
    rep->add_option("log", log, "Session log")->required()->check(CLI::ExistingFile);
    rep->add_flag("--verify", verify, "Re-run the mixer and compare every tick");
    rep->add_option("--scene", rep_scene, "Refuse logs recorded against another scene");
    rep->add_option("--check", check, "Re-check a scenario's assertions on the log")
        ->check(CLI::IsMember({"walking", "watching", "crowd"}));

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        sl_server_options o;
        sl_server_options_init(&o);
        o.bind_host = listen.c_str();
        o.mocap_port = mocap_port;
        o.control_port = control_port;
        o.ws_port = ws_port;
        o.posebus_target = opt(posebus);
        o.tick_hz = tick_hz;
        o.record_path = opt(record);
        sl_server* server = nullptr;
        if (const sl_status st = sl_server_create(scene.c_str(), opt(cues), &o, &server); st != SL_OK) {
            return report_error(st);
        }
        if (const sl_status st = sl_server_start(server); st != SL_OK) {
            sl_server_destroy(server);
            return report_error(st);
        }
        std::uint16_t m = 0, c = 0, w = 0;
        sl_server_ports(server, &m, &c, &w);
        std::cout << "stagelink running: mocap udp " << m << ", control tcp " << c << ", ws " << w << ", posebus "
                  << posebus << " (ctrl-c to stop)" << std::endl;
        const sl_status st = sl_server_run_until_signal(server);
        std::cout << "stopped after " << sl_server_ticks(server) << " ticks\n";
        sl_server_destroy(server);
        return st == SL_OK ? 0 : report_error(st);
    }

    if (*scen) {
        sl_scenario_options o;
        sl_scenario_options_init(&o);
        o.assets_dir = opt(assets);
        o.tick_hz = tick_hz;
        o.manipulator = no_manip ? 0 : 1;
        o.record_path = opt(scen_record);
        o.posebus_target = opt(scen_posebus);
        sl_report* report = nullptr;
        if (const sl_status st = sl_scenario_run(scen_name.c_str(), &o, &report); st != SL_OK) {
            return report_error(st);
        }
        if (!scen_record.empty() && !as_json) {
            std::cout << "recorded " << scen_record << "\n";
        }
        return print_report(report, as_json);
    }

    if (*play) {
        std::signal(SIGINT, on_play_signal);
        std::signal(SIGTERM, on_play_signal);
        std::uint64_t sent = 0;
        if (const sl_status st = sl_play_bvh(bvh.c_str(), to.c_str(), rate, loop ? 0 : 1, &sent); st != SL_OK) {
            return report_error(st);
        }
        std::cout << "sent " << sent << " frames\n";
        return 0;
    }

    sl_log_info info{};
    if (const sl_status st = sl_log_read_info(log.c_str(), &info); st != SL_OK) {
        return report_error(st);
    }
    std::printf("%s: %llu ticks (%llu..%llu) at %g Hz, scene %016llx, cues %016llx\n", log.c_str(),
                static_cast<unsigned long long>(info.ticks), static_cast<unsigned long long>(info.first_tick),
                static_cast<unsigned long long>(info.last_tick), info.tick_hz,
                static_cast<unsigned long long>(info.scene_hash), static_cast<unsigned long long>(info.cue_hash));
    int rc = 0;
    if (verify) {
        sl_replay_result r{};
        if (const sl_status st = sl_replay_verify(log.c_str(), opt(rep_scene), &r); st != SL_OK) {
            return report_error(st);
        }
        if (r.identical) {
            std::printf("identical (%llu ticks)\n", static_cast<unsigned long long>(r.ticks_compared));
        } else {
            std::printf("diverged at tick %llu\n", static_cast<unsigned long long>(r.first_divergent_tick));
            rc = 1;
        }
    }
    if (!check.empty()) {
        sl_report* report = nullptr;
        if (const sl_status st = sl_scenario_check_log(check.c_str(), log.c_str(), &report); st != SL_OK) {
            return report_error(st);
        }
        rc = std::max(rc, print_report(report, false));
    }
    return rc;
}
