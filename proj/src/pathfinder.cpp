#include "stagelink/pathfinder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

#include "stagelink/error.hpp"

namespace stagelink {

NavGrid::NavGrid(int width, int height, double cell_size, const Vec3& origin)
    : width_(width), height_(height), cell_size_(cell_size), origin_(origin) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "grid must be at least 1x1");
    }
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw Error(ErrorCode::InvalidArgument, "cell size must be positive");
    }
    blocked_.assign(static_cast<std::size_t>(width) * height, 0);
}

void NavGrid::set_blocked(Cell c, bool value) {
    if (!in_bounds(c)) {
        throw Error(ErrorCode::OutOfBounds, "cell (" + std::to_string(c.col) + "," + std::to_string(c.row) + ")");
    }
    blocked_[index(c)] = value ? 1 : 0;
}

std::size_t NavGrid::blocked_count() const {
    return static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), std::uint8_t{1}));
}

Vec3 NavGrid::center(Cell c) const {
    return origin_ + Vec3{c.col * cell_size_, 0.0, c.row * cell_size_};
}

Cell NavGrid::cell_at(const Vec3& p) const {
    const int col = static_cast<int>(std::lround((p.x - origin_.x) / cell_size_));
    const int row = static_cast<int>(std::lround((p.z - origin_.z) / cell_size_));
    return {std::clamp(col, 0, width_ - 1), std::clamp(row, 0, height_ - 1)};
}

NavGrid parse_nav_grid(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string header;
    if (!std::getline(in, header)) {
        throw Error(ErrorCode::ParseError, "line 1: empty grid file");
    }
    std::istringstream hs(header);
    int cols = 0;
    int rows = 0;
    double cell = 0.0;
    Vec3 origin;
    if (!(hs >> cols >> rows >> cell >> origin.x >> origin.y >> origin.z)) {
        throw Error(ErrorCode::ParseError, "line 1: expected 'cols rows cell_size origin_x origin_y origin_z'");
    }
    NavGrid grid(cols, rows, cell, origin);
    for (int r = 0; r < rows; ++r) {
        std::string line;
        if (!std::getline(in, line)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(r + 2) + ": missing grid row");
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (static_cast<int>(line.size()) != cols) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(r + 2) + ": expected " +
                                                   std::to_string(cols) + " cells");
        }
        for (int c = 0; c < cols; ++c) {
            if (line[c] == '#') {
                grid.set_blocked({c, r}, true);
            } else if (line[c] != '.') {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(r + 2) + ": bad cell '" +
                                                       std::string(1, line[c]) + "'");
            }
        }
    }
    return grid;
}

NavGrid load_nav_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open grid file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_nav_grid(ss.str());
}

std::string format_nav_grid(const NavGrid& grid) {
    std::ostringstream os;
    os.precision(17);
    os << grid.width() << " " << grid.height() << " " << grid.cell_size() << " " << grid.origin().x << " "
       << grid.origin().y << " " << grid.origin().z << "\n";
    for (int r = 0; r < grid.height(); ++r) {
        for (int c = 0; c < grid.width(); ++c) {
            os << (grid.blocked({c, r}) ? '#' : '.');
        }
        os << "\n";
    }
    return os.str();
}

PlannedPath plan(const NavGrid& grid, Cell start, Cell goal) {
    for (const Cell c : {start, goal}) {
        if (!grid.in_bounds(c)) {
            throw Error(ErrorCode::OutOfBounds, "cell (" + std::to_string(c.col) + "," + std::to_string(c.row) + ")");
        }
        if (grid.blocked(c)) {
            throw Error(ErrorCode::BlockedEndpoint,
                        "cell (" + std::to_string(c.col) + "," + std::to_string(c.row) + ") is blocked");
        }
    }

    const int w = grid.width();
    const std::size_t n = static_cast<std::size_t>(w) * grid.height();
    auto idx = [w](Cell c) { return static_cast<std::size_t>(c.row) * w + c.col; };
    auto heuristic = [goal](Cell c) { return std::abs(c.col - goal.col) + std::abs(c.row - goal.row); };

    constexpr int kUnseen = std::numeric_limits<int>::max();
    std::vector<int> g(n, kUnseen);
    std::vector<std::size_t> came_from(n, n);
    std::vector<std::uint8_t> closed(n, 0);

    // (f, h, row, col); smallest first.
    using Key = std::tuple<int, int, int, int>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> open;
    g[idx(start)] = 0;
    open.emplace(heuristic(start), heuristic(start), start.row, start.col);

    // Neighbor offsets sorted by (row, col).
    constexpr std::array<std::pair<int, int>, 4> kSteps = {{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

    bool found = false;
    while (!open.empty()) {
        const auto [f, h, row, col] = open.top();
        open.pop();
        const Cell cur{col, row};
        const std::size_t ci = idx(cur);
        if (closed[ci]) {
            continue;
        }
        closed[ci] = 1;
        if (cur == goal) {
            found = true;
            break;
        }
        for (const auto& [dr, dc] : kSteps) {
            const Cell nb{col + dc, row + dr};
            if (!grid.in_bounds(nb) || grid.blocked(nb)) {
                continue;
            }
            const std::size_t ni = idx(nb);
            const int cand = g[ci] + 1;
            if (closed[ni] || cand >= g[ni]) {
                continue;
            }
            g[ni] = cand;
            came_from[ni] = ci;
            const int nh = heuristic(nb);
            open.emplace(cand + nh, nh, nb.row, nb.col);
        }
    }
    if (!found) {
        throw Error(ErrorCode::NoPath, "no route from (" + std::to_string(start.col) + "," + std::to_string(start.row) +
                                           ") to (" + std::to_string(goal.col) + "," + std::to_string(goal.row) + ")");
    }

    PlannedPath path;
    for (std::size_t at = idx(goal); at != n; at = came_from[at]) {
        path.cells.push_back({static_cast<int>(at % w), static_cast<int>(at / w)});
    }
    std::reverse(path.cells.begin(), path.cells.end());
    path.waypoints.reserve(path.cells.size());
    for (const Cell c : path.cells) {
        path.waypoints.push_back(grid.center(c));
    }
    path.total_length = static_cast<double>(path.cells.size() - 1) * grid.cell_size();
    return path;
}

FollowState follow(const PlannedPath& path, double speed, double t) {
    if (!(speed > 0.0) || !(t >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "follow needs speed > 0 and t >= 0");
    }
    if (path.waypoints.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty path");
    }
    FollowState s;
    const auto& wp = path.waypoints;
    if (wp.size() == 1) {
        s.position = wp.front();
        s.done = true;
        return s;
    }
    const double travelled = std::min(speed * t, path.total_length);
    double walked = 0.0;
    for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
        const Vec3 seg = wp[i + 1] - wp[i];
        const double len = seg.norm();
        const bool last = i + 2 == wp.size();
        if (travelled < walked + len || last) {
            const double u = len > 0.0 ? std::clamp((travelled - walked) / len, 0.0, 1.0) : 1.0;
            s.position = lerp(wp[i], wp[i + 1], u);
            s.yaw = std::atan2(seg.x, seg.z);
            s.has_heading = true;
            break;
        }
        walked += len;
    }
    s.done = travelled >= path.total_length;
    if (s.done) {
        s.position = wp.back();
    }
    return s;
}

} // namespace stagelink
