#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stagelink/pose.hpp"

namespace stagelink {

struct Cell {
    int col = 0;
    int row = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Uniform grid over the scenery floor. Columns run along +X, rows along +Z;
/// `origin` is the center of cell (0, 0).
class NavGrid {
public:
    NavGrid() = default;
    NavGrid(int width, int height, double cell_size, const Vec3& origin);

    int width() const { return width_; }
    int height() const { return height_; }
    double cell_size() const { return cell_size_; }
    const Vec3& origin() const { return origin_; }

    bool in_bounds(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_; }
    bool blocked(Cell c) const { return blocked_[index(c)] != 0; }
    void set_blocked(Cell c, bool value);
    std::size_t blocked_count() const;

    Vec3 center(Cell c) const;
    /// Nearest cell to a scenery position, clamped into the grid.
    Cell cell_at(const Vec3& p) const;

    friend bool operator==(const NavGrid&, const NavGrid&) = default;

private:
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

    int width_ = 1;
    int height_ = 1;
    double cell_size_ = 1.0;
    Vec3 origin_;
    std::vector<std::uint8_t> blocked_ = std::vector<std::uint8_t>(1, 0);
};

/// ASCII grid: header "cols rows cell_size origin_x origin_y origin_z" then one
/// line per row of '.' (free) and '#' (blocked). First grid line is row 0.
NavGrid parse_nav_grid(std::string_view text);
NavGrid load_nav_grid(const std::filesystem::path& path);
std::string format_nav_grid(const NavGrid& grid);

struct PlannedPath {
    std::vector<Vec3> waypoints;
    std::vector<Cell> cells;
    double total_length = 0.0;

    friend bool operator==(const PlannedPath&, const PlannedPath&) = default;
};

/// A* over the 4-connected grid with unit step cost and Manhattan heuristic.
/// Neighbors expand in (row, col) order and open-set ties break on
/// (f, h, row, col), so the result is reproducible.
/// Throws OutOfBounds, BlockedEndpoint or NoPath.
PlannedPath plan(const NavGrid& grid, Cell start, Cell goal);

struct FollowState {
    Vec3 position;
    double yaw = 0.0;
    /// False for single-waypoint paths, which carry no direction.
    bool has_heading = false;
    bool done = false;
};

/// Arc-length position along the path at distance min(speed * t, length).
/// Heading follows the outgoing segment; the last segment's heading is held
/// at the end.
FollowState follow(const PlannedPath& path, double speed, double t);

} // namespace stagelink
