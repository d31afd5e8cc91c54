#include <doctest.h>

#include "helpers.hpp"
#include "stagelink/error.hpp"
#include "stagelink/pathfinder.hpp"

using namespace stagelink;

namespace {

std::vector<std::vector<bool>> blocked_of(const NavGrid& g) {
    std::vector<std::vector<bool>> b(g.height(), std::vector<bool>(g.width()));
    for (int r = 0; r < g.height(); ++r)
        for (int c = 0; c < g.width(); ++c)
            b[r][c] = g.blocked({c, r});
    return b;
}

bool connected_steps(const NavGrid& g, const PlannedPath& p) {
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
        if (g.blocked(p.cells[i])) return false;
        if (i > 0 && std::abs(p.cells[i].col - p.cells[i - 1].col) + std::abs(p.cells[i].row - p.cells[i - 1].row) != 1)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("nav grid/parse and format round trip") {
    const NavGrid g = parse_nav_grid("4 3 0.5 1 0 2\n....\n.##.\n...#\n");
    CHECK(g.width() == 4);
    CHECK(g.height() == 3);
    CHECK(g.blocked({1, 1}));
    CHECK(g.blocked({3, 2}));
    CHECK_FALSE(g.blocked({0, 0}));
    CHECK(g.blocked_count() == 3);
    CHECK(g.center({2, 1}) == Vec3{2, 0, 2.5});
    CHECK(g.cell_at({2.1, 0, 2.6}) == Cell{2, 1});
    CHECK(parse_nav_grid(format_nav_grid(g)) == g);
    CHECK_THROWS_AS(parse_nav_grid("2 2 1 0 0 0\n..\n"), Error);
    CHECK_THROWS_AS(parse_nav_grid("2 1 1 0 0 0\n.x\n"), Error);
    CHECK_THROWS_AS(parse_nav_grid("2 1 1 0 0 0\n...\n"), Error);
}

TEST_CASE("plan/straight line on an open grid") {
    const NavGrid g(5, 5, 0.5, {});
    const PlannedPath p = plan(g, {0, 2}, {3, 2});
    CHECK(p.waypoints.size() == 4);
    CHECK(p.total_length == doctest::Approx(1.5));
    CHECK(p.cells.front() == Cell{0, 2});
    CHECK(p.cells.back() == Cell{3, 2});
    CHECK(plan(g, {1, 1}, {1, 1}).waypoints.size() == 1);
}

TEST_CASE("plan/endpoint errors") {
    NavGrid g(5, 5, 1.0, {});
    g.set_blocked({2, 2}, true);
    try {
        plan(g, {2, 2}, {0, 0});
        FAIL("expected BlockedEndpoint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BlockedEndpoint);
    }
    CHECK_THROWS_AS(plan(g, {0, 0}, {9, 0}), Error);
    for (int r = 0; r < 5; ++r) g.set_blocked({3, r}, true);
    try {
        plan(g, {0, 0}, {4, 4});
        FAIL("expected NoPath");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoPath);
    }
}

TEST_CASE("plan/matches breadth-first search on random grids") {
    std::mt19937_64 rng(0xa5a5);
    int solved = 0;
    for (int n = 0; n < 200; ++n) {
        NavGrid g(3 + rng() % 18, 3 + rng() % 18, 1.0, {});
        for (int r = 0; r < g.height(); ++r)
            for (int c = 0; c < g.width(); ++c)
                if (rng() % 100 < 25) g.set_blocked({c, r}, true);
        const Cell a{static_cast<int>(rng() % g.width()), static_cast<int>(rng() % g.height())};
        const Cell b{static_cast<int>(rng() % g.width()), static_cast<int>(rng() % g.height())};
        g.set_blocked(a, false);
        g.set_blocked(b, false);
        const auto want = oracle::bfs(blocked_of(g), a.col, a.row, b.col, b.row);
        if (!want) {
            CHECK_THROWS_AS(plan(g, a, b), Error);
            continue;
        }
        const PlannedPath p = plan(g, a, b);
        CHECK(static_cast<int>(p.cells.size()) - 1 == *want);
        CHECK(connected_steps(g, p));
        CHECK(plan(g, a, b) == p);
        ++solved;
    }
    CHECK(solved > 100);
}

TEST_CASE("plan/committed stage grid routes around the wall") {
    const NavGrid g = load_nav_grid(th::assets() / "maps/stage.grid");
    CHECK(g.width() == 24);
    CHECK(g.height() == 16);
    const PlannedPath p = plan(g, g.cell_at({-4.75, 0, -2.75}), {20, 13});
    CHECK(connected_steps(g, p));
    CHECK(static_cast<int>(p.cells.size()) - 1 ==
          *oracle::bfs(blocked_of(g), p.cells.front().col, p.cells.front().row, 20, 13));
}

TEST_CASE("follow/along a path") {
    const NavGrid g(5, 5, 1.0, {});
    const PlannedPath p = plan(g, {0, 0}, {0, 3});
    const FollowState s0 = follow(p, 1.5, 0.0);
    CHECK(s0.position == p.waypoints.front());
    CHECK_FALSE(s0.done);
    CHECK(s0.yaw == doctest::Approx(0.0));

    const FollowState mid = follow(p, 1.5, 1.0);
    CHECK(mid.position.z == doctest::Approx(1.5));
    CHECK_FALSE(mid.done);

    const FollowState end = follow(p, 1.5, 2.0);
    CHECK(end.done);
    CHECK(end.position == p.waypoints.back());
    CHECK(follow(p, 1.5, 50.0).position == p.waypoints.back());

    const PlannedPath east = plan(g, {0, 0}, {3, 0});
    CHECK(follow(east, 1.0, 0.5).yaw == doctest::Approx(th::kPi / 2));
    CHECK_FALSE(follow(plan(g, {1, 1}, {1, 1}), 1.0, 0.0).has_heading);
    CHECK_THROWS_AS(follow(p, 0.0, 1.0), Error);
}

TEST_CASE("follow/distance travelled never exceeds speed times time") {
    const NavGrid g = load_nav_grid(th::assets() / "maps/stage.grid");
    const PlannedPath p = plan(g, {0, 0}, {20, 13});
    Vec3 prev = p.waypoints.front();
    for (int i = 1; i <= 2000; ++i) {
        const FollowState s = follow(p, 1.5, i * 0.01);
        CHECK((s.position - prev).norm() <= 1.5 * 0.01 + 1e-12);
        prev = s.position;
    }
    CHECK(follow(p, 1.5, p.total_length / 1.5).done);
}
