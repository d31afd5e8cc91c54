// Regenerates the synthetic assets under assets/. Output is deterministic;
// the committed files were produced by this program.
//
//   make_fixtures <assets-dir>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

#include <json.hpp>

#include "stagelink/mocap.hpp"
#include "stagelink/pathfinder.hpp"

using namespace stagelink;

namespace {

constexpr double kPi = std::numbers::pi;

struct Builder {
    std::vector<Joint> joints;
    std::size_t add(std::string name, std::optional<std::size_t> parent, Vec3 offset) {
        joints.push_back({std::move(name), parent, offset});
        return joints.size() - 1;
    }
};

void add_arm(Builder& b, std::size_t chest, const std::string& side, double s) {
    const auto shoulder = b.add(side + "Shoulder", chest, {0.05 * s, 0.1, 0.0});
    const auto arm = b.add(side + "Arm", shoulder, {0.12 * s, 0.0, 0.0});
    const auto fore = b.add(side + "ForeArm", arm, {0.28 * s, 0.0, 0.0});
    const auto hand = b.add(side + "Hand", fore, {0.25 * s, 0.0, 0.0});
    const char* fingers[] = {"Thumb", "Index", "Middle", "Ring", "Pinky"};
    for (int f = 0; f < 5; ++f) {
        const double z = 0.03 - 0.015 * f;
        auto j = b.add(side + "Hand" + fingers[f] + "1", hand, {0.04 * s, 0.0, z});
        j = b.add(side + "Hand" + fingers[f] + "2", j, {0.03 * s, 0.0, 0.0});
        b.add(side + "Hand" + fingers[f] + "3", j, {0.025 * s, 0.0, 0.0});
    }
}

void add_leg(Builder& b, std::size_t hips, const std::string& side, double s) {
    const auto up = b.add(side + "UpLeg", hips, {0.1 * s, -0.05, 0.0});
    const auto leg = b.add(side + "Leg", up, {0.0, -0.42, 0.0});
    b.add(side + "Foot", leg, {0.0, -0.42, 0.0});
}

SkeletonTopology humanoid() {
    Builder b;
    const auto hips = b.add("Hips", std::nullopt, {0.0, 0.95, 0.0});
    const auto spine = b.add("Spine", hips, {0.0, 0.1, 0.0});
    const auto spine1 = b.add("Spine1", spine, {0.0, 0.12, 0.0});
    const auto spine2 = b.add("Spine2", spine1, {0.0, 0.12, 0.0});
    const auto neck = b.add("Neck", spine2, {0.0, 0.15, 0.0});
    b.add("Head", neck, {0.0, 0.1, 0.0});
    add_arm(b, spine2, "Left", 1.0);
    add_arm(b, spine2, "Right", -1.0);
    add_leg(b, hips, "Left", 1.0);
    add_leg(b, hips, "Right", -1.0);
    return SkeletonTopology(std::move(b.joints));
}

SkeletonTopology puppet() {
    Builder b;
    const auto root = b.add("pup_root", std::nullopt, {0.0, 1.0, 0.0});
    const auto spine = b.add("pup_spine", root, {0.0, 0.15, 0.0});
    const auto chest = b.add("pup_chest", spine, {0.0, 0.2, 0.0});
    const auto neck = b.add("pup_neck", chest, {0.0, 0.15, 0.0});
    b.add("pup_head", neck, {0.0, 0.12, 0.0});
    for (const auto& [side, s] : {std::pair{"l", 1.0}, std::pair{"r", -1.0}}) {
        const auto up = b.add(std::string("pup_") + side + "_upperarm", chest, {0.18 * s, 0.1, 0.0});
        const auto fore = b.add(std::string("pup_") + side + "_forearm", up, {0.3 * s, 0.0, 0.0});
        b.add(std::string("pup_") + side + "_hand", fore, {0.26 * s, 0.0, 0.0});
    }
    for (const auto& [side, s] : {std::pair{"l", 1.0}, std::pair{"r", -1.0}}) {
        const auto thigh = b.add(std::string("pup_") + side + "_thigh", root, {0.11 * s, -0.05, 0.0});
        const auto shin = b.add(std::string("pup_") + side + "_shin", thigh, {0.0, -0.45, 0.0});
        b.add(std::string("pup_") + side + "_foot", shin, {0.0, -0.45, 0.0});
    }
    return SkeletonTopology(std::move(b.joints));
}

// Walk in place along local z: 4 s back-and-forth loop, 1 Hz gait.
std::string walk_clip(const SkeletonTopology& topo, double amplitude, double phase) {
    constexpr int kFrames = 400;
    constexpr double kFrameTime = 0.01;
    std::vector<BvhWriteFrame> frames;
    for (int i = 0; i < kFrames; ++i) {
        const double t = i * kFrameTime;
        const double loop = 2 * kPi * t / 4.0 + phase;
        const double gait = 2 * kPi * t + phase;
        BvhWriteFrame f;
        f.root_position = {0.12 * std::sin(loop * 2.0), 0.95 + 0.02 * std::sin(2 * gait), amplitude * std::sin(loop)};
        f.zxy_degrees.assign(topo.size(), Vec3{});
        auto set = [&](const char* name, Vec3 zxy) { f.zxy_degrees[*topo.find(name)] = zxy; };
        set("Hips", {3.0 * std::sin(gait), 0.0, 0.0});
        set("Spine", {0.0, 2.0 * std::sin(2 * gait), 0.0});
        set("Spine2", {-2.0 * std::sin(gait), 0.0, 4.0 * std::sin(gait)});
        set("Neck", {0.0, 3.0 * std::sin(2 * gait + 0.5), 0.0});
        set("Head", {0.0, 2.0 * std::sin(gait), 6.0 * std::sin(0.5 * gait)});
        set("LeftUpLeg", {0.0, 25.0 * std::sin(gait), 0.0});
        set("RightUpLeg", {0.0, -25.0 * std::sin(gait), 0.0});
        set("LeftLeg", {0.0, 20.0 * (1.0 + std::sin(gait + 1.2)), 0.0});
        set("RightLeg", {0.0, 20.0 * (1.0 + std::sin(gait + 1.2 + kPi)), 0.0});
        set("LeftFoot", {0.0, 10.0 * std::sin(gait + 2.0), 0.0});
        set("RightFoot", {0.0, -10.0 * std::sin(gait + 2.0), 0.0});
        set("LeftArm", {-70.0, -20.0 * std::sin(gait), 0.0});
        set("RightArm", {70.0, 20.0 * std::sin(gait), 0.0});
        set("LeftForeArm", {0.0, 0.0, 15.0 + 10.0 * std::sin(gait)});
        set("RightForeArm", {0.0, 0.0, -15.0 - 10.0 * std::sin(gait)});
        for (const char* side : {"Left", "Right"}) {
            for (const char* finger : {"Thumb", "Index", "Middle", "Ring", "Pinky"}) {
                for (int k = 1; k <= 3; ++k) {
                    const std::string name = std::string(side) + "Hand" + finger + std::to_string(k);
                    f.zxy_degrees[*topo.find(name)] = {0.0, 0.0, 10.0 + 5.0 * std::sin(gait + k)};
                }
            }
        }
        frames.push_back(std::move(f));
    }
    return write_bvh(topo, frames, kFrameTime);
}

void save(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p) << text;
    std::cout << "wrote " << p.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <assets-dir>\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    const SkeletonTopology human = humanoid();
    save(dir / "bvh/walk_a.bvh", walk_clip(human, 0.9, 0.0));
    save(dir / "bvh/walk_b.bvh", walk_clip(human, 0.95, 1.3));

    const SkeletonTopology pup = puppet();
    BvhWriteFrame rest;
    rest.root_position = pup[0].bind_offset;
    rest.zxy_degrees.assign(pup.size(), Vec3{});
    save(dir / "bvh/puppet.bvh", write_bvh(pup, {rest}, 0.01));

    const nlohmann::json map = {{"map",
                                 {{"Hips", "pup_root"},
                                  {"Spine", "pup_spine"},
                                  {"Spine2", "pup_chest"},
                                  {"Neck", "pup_neck"},
                                  {"Head", "pup_head"},
                                  {"LeftArm", "pup_l_upperarm"},
                                  {"LeftForeArm", "pup_l_forearm"},
                                  {"LeftHand", "pup_l_hand"},
                                  {"RightArm", "pup_r_upperarm"},
                                  {"RightForeArm", "pup_r_forearm"},
                                  {"RightHand", "pup_r_hand"},
                                  {"LeftUpLeg", "pup_l_thigh"},
                                  {"LeftLeg", "pup_l_shin"},
                                  {"LeftFoot", "pup_l_foot"},
                                  {"RightUpLeg", "pup_r_thigh"},
                                  {"RightLeg", "pup_r_shin"},
                                  {"RightFoot", "pup_r_foot"}}}};
    save(dir / "maps/humanoid_to_puppet.json", map.dump(2) + "\n");

    // 24 x 16 cells of 0.5 m centred on the stage, two pillars and a wall.
    NavGrid grid(24, 16, 0.5, {-5.75, 0.0, -3.75});
    for (int row = 2; row < 12; ++row) {
        grid.set_blocked({11, row}, true);
    }
    for (int c = 4; c < 7; ++c) {
        for (int r = 9; r < 12; ++r) {
            grid.set_blocked({c, r}, true);
        }
    }
    for (int c = 17; c < 19; ++c) {
        for (int r = 3; r < 6; ++r) {
            grid.set_blocked({c, r}, true);
        }
    }
    save(dir / "maps/stage.grid", format_nav_grid(grid));
    return 0;
}
