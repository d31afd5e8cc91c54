#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "stagelink/error.hpp"
#include "stagelink/manipulator.hpp"

using namespace stagelink;

TEST_CASE("axes/zero input moves nothing") {
    const TransformDelta d = axes_to_delta({}, ManipulatorConfig(), 0.01);
    CHECK(d.d_forward == 0.0);
    CHECK(d.d_lateral == 0.0);
    CHECK(d.d_vertical == 0.0);
    CHECK(d.d_yaw == 0.0);
    CHECK(d.d_pitch == 0.0);
}

TEST_CASE("axes/full forward for one tick at 100 Hz") {
    AxisInput in;
    in.forward = 1.0;
    const TransformDelta d = axes_to_delta(in, ManipulatorConfig(), 0.01);
    CHECK(d.d_forward == doctest::Approx(0.015));
    CHECK(d.d_yaw == 0.0);
}

TEST_CASE("axes/dead zone") {
    CHECK(apply_dead_zone(0.05, 0.1) == 0.0);
    CHECK(apply_dead_zone(-0.1, 0.1) == 0.0);
    CHECK(apply_dead_zone(1.0, 0.1) == doctest::Approx(1.0));
    CHECK(apply_dead_zone(-1.0, 0.1) == doctest::Approx(-1.0));
    CHECK(apply_dead_zone(0.55, 0.1) == doctest::Approx(0.5));
    CHECK(apply_dead_zone(7.0, 0.1) == doctest::Approx(1.0));

    double prev = -2;
    for (int i = 0; i <= 400; ++i) {
        const double a = -1.0 + i * 0.005;
        const double v = apply_dead_zone(a, 0.2);
        CHECK(v >= prev);
        CHECK(std::abs(v) <= 1.0);
        prev = v;
    }
}

TEST_CASE("axes/config validation") {
    ManipulatorConfig c;
    c.linear_speed = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.dead_zone = 0.5;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(axes_to_delta({}, ManipulatorConfig(), 0.0), Error);
}

TEST_CASE("channel and owner names") {
    for (ChannelId c : kAllChannels) {
        CHECK(parse_channel_id(to_string(c)) == c);
    }
    CHECK(parse_channel_id("ROOT_XY") == ChannelId::RootXY);
    CHECK_FALSE(parse_channel_id("TAIL"));
    CHECK(parse_owner_kind("BLEND") == OwnerKind::Blend);
    CHECK_FALSE(parse_owner_kind("robot"));
    CHECK_THROWS_AS(Owner::blend(1.5), Error);
    CHECK_THROWS_AS(Owner::blend(-0.1), Error);
}

TEST_CASE("ownership/new avatars start all mocap") {
    OwnershipTable t;
    t.add_avatar("A1");
    for (ChannelId c : kAllChannels) {
        CHECK(t.get("A1", c) == Owner::mocap());
    }
    CHECK_THROWS_AS(t.get("nobody", ChannelId::Head), Error);
}

TEST_CASE("ownership/set is pure and idempotent") {
    OwnershipTable t;
    t.add_avatar("A1");
    t.add_avatar("A2");
    const OwnershipTable u = set_ownership(t, "A1", ChannelId::RootYaw, Owner::manipulator());
    CHECK(t.get("A1", ChannelId::RootYaw) == Owner::mocap());
    CHECK(u.get("A1", ChannelId::RootYaw) == Owner::manipulator());
    CHECK(u.get("A2", ChannelId::RootYaw) == Owner::mocap());
    CHECK(set_ownership(u, "A1", ChannelId::RootYaw, Owner::manipulator()) == u);

    const OwnershipTable b = set_ownership(u, "A2", ChannelId::RootXY, Owner::blend(0.5));
    CHECK(b.get("A2", ChannelId::RootXY).kind == OwnerKind::Blend);
    CHECK(b.get("A2", ChannelId::RootXY).weight == 0.5);
    CHECK_THROWS_AS(set_ownership(t, "ghost", ChannelId::Head, Owner::procedural()), Error);
}

TEST_CASE("ownership/exactly one owner per channel under random edits") {
    std::mt19937_64 rng(0x0e1);
    OwnershipTable t;
    const std::vector<std::string> avatars{"a", "b", "c"};
    for (const auto& a : avatars) {
        t.add_avatar(a);
    }
    std::map<std::pair<std::string, int>, Owner> model;
    for (int i = 0; i < 2000; ++i) {
        const std::string& a = avatars[rng() % 3];
        const auto ch = kAllChannels[rng() % kChannelCount];
        Owner o;
        switch (rng() % 4) {
        case 0: o = Owner::mocap(); break;
        case 1: o = Owner::manipulator(); break;
        case 2: o = Owner::procedural(); break;
        default: o = Owner::blend(oracle::uniform(rng, 0, 1)); break;
        }
        t = set_ownership(std::move(t), a, ch, o);
        model[{a, static_cast<int>(ch)}] = o;
    }
    for (const auto& a : avatars) {
        for (ChannelId c : kAllChannels) {
            const auto it = model.find({a, static_cast<int>(c)});
            CHECK(t.get(a, c) == (it == model.end() ? Owner::mocap() : it->second));
        }
    }
    CHECK(t.rows().size() == 3);
}
