#include <doctest.h>

#include "helpers.hpp"
#include "stagelink/error.hpp"
#include "stagelink/stage.hpp"

using namespace stagelink;

TEST_CASE("clamp/inside point unchanged") {
    const Box b{{-1, 0, -1}, {1, 2.5, 1}};
    const ClampResult r = clamp_to_volume({0.5, 1, -0.5}, b);
    CHECK_FALSE(r.clamped);
    CHECK(r.position == Vec3{0.5, 1, -0.5});
}

TEST_CASE("clamp/outside point lands on the face") {
    const Box b{{-1, 0, -1}, {1, 2.5, 1}};
    const ClampResult r = clamp_to_volume({3, -1, 0.2}, b);
    CHECK(r.clamped);
    CHECK(r.position == Vec3{1, 0, 0.2});
}

TEST_CASE("clamp/result is always inside and idempotent") {
    std::mt19937_64 rng(0xc1a);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 a = th::random_vec(rng, 3), c = th::random_vec(rng, 3);
        const Box b{{std::min(a.x, c.x) - 0.01, std::min(a.y, c.y) - 0.01, std::min(a.z, c.z) - 0.01},
                    {std::max(a.x, c.x), std::max(a.y, c.y), std::max(a.z, c.z)}};
        const ClampResult r = clamp_to_volume(th::random_vec(rng, 6), b);
        CHECK(r.position.x >= b.min.x);
        CHECK(r.position.x <= b.max.x);
        CHECK(r.position.y >= b.min.y);
        CHECK(r.position.y <= b.max.y);
        CHECK(r.position.z >= b.min.z);
        CHECK(r.position.z <= b.max.z);
        const ClampResult again = clamp_to_volume(r.position, b);
        CHECK_FALSE(again.clamped);
        CHECK(again.position == r.position);
    }
}

TEST_CASE("clamp/box validation") {
    CHECK_THROWS_AS((Box{{1, 0, 0}, {0, 1, 1}}.validate()), Error);
    CHECK_NOTHROW((Box{{0, 0, 0}, {1, 1, 1}}.validate()));
}

TEST_CASE("a to b/translation only") {
    const Vec3 p = map_a_to_b({1, 0, 0}, {{0, 0, -3}, 0.0});
    CHECK(p == Vec3{1, 0, -3});
}

TEST_CASE("a to b/yaw against oracle") {
    const Vec3 p = map_a_to_b({1, 0, 2}, {{0, 0, 0}, th::deg(90)});
    CHECK(p.x == doctest::Approx(2.0));
    CHECK(p.z == doctest::Approx(-1.0));
    std::mt19937_64 rng(0xab);
    for (int i = 0; i < 300; ++i) {
        const StageToScenery cal{th::random_vec(rng, 10), oracle::uniform(rng, -3.2, 3.2)};
        const Vec3 a = th::random_vec(rng, 5);
        const auto want = oracle::mul(oracle::rot_y(cal.yaw), th::v3(a));
        const Vec3 b = map_a_to_b(a, cal);
        CHECK(std::abs(b.x - want[0] - cal.translation.x) < 1e-12);
        CHECK(std::abs(b.y - want[1] - cal.translation.y) < 1e-12);
        CHECK(std::abs(b.z - want[2] - cal.translation.z) < 1e-12);
    }
}

TEST_CASE("look at/examples") {
    CHECK(look_at_yaw({0, 0, 0}, {0, 5, 3}) == 0.0);
    CHECK(look_at_yaw({0, 0, 0}, {2, 0, 0}) == doctest::Approx(th::kPi / 2));
    CHECK(look_at_yaw({1, 0, 1}, {1, 0, -4}) == doctest::Approx(th::kPi));
    CHECK_THROWS_AS(look_at_yaw({1, 0, 1}, {1, 3, 1}), Error);
}

TEST_CASE("look at/rotated forward points at target") {
    std::mt19937_64 rng(0x100c);
    for (int i = 0; i < 500; ++i) {
        const Vec3 from = th::random_vec(rng, 5), to = th::random_vec(rng, 5);
        if (std::hypot(to.x - from.x, to.z - from.z) < 1e-3) continue;
        const double yaw = look_at_yaw(from, to);
        const auto f = oracle::mul(oracle::rot_y(yaw), oracle::V3{0, 0, 1});
        const double dx = to.x - from.x, dz = to.z - from.z, n = std::hypot(dx, dz);
        CHECK(std::abs(f[0] - dx / n) < 1e-12);
        CHECK(std::abs(f[2] - dz / n) < 1e-12);
    }
}

TEST_CASE("a to b/is rigid") {
    std::mt19937_64 rng(0x121d);
    for (int i = 0; i < 500; ++i) {
        const StageToScenery cal{th::random_vec(rng, 10), oracle::uniform(rng, -3.2, 3.2)};
        const Vec3 p = th::random_vec(rng, 5), q = th::random_vec(rng, 5);
        CHECK(std::abs((map_a_to_b(p, cal) - map_a_to_b(q, cal)).norm() - (p - q).norm()) < 1e-9);
    }
}
