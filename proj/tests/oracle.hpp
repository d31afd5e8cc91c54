#pragma once

// Reference implementations the tests compare against. Nothing here calls into
// the library's math: rotations are plain 3x3 matrices, transforms are 4x4
// homogeneous matrices, paths come from breadth-first search.

#include <array>
#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using M3 = std::array<std::array<double, 3>, 3>;
using M4 = std::array<std::array<double, 4>, 4>;
using V3 = std::array<double, 3>;

inline M3 identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline M3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}
inline M3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}
inline M3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

inline M3 mul(const M3& a, const M3& b) {
    M3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                r[i][j] += a[i][k] * b[k][j];
    return r;
}

inline V3 mul(const M3& a, const V3& v) {
    V3 r{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            r[i] += a[i][k] * v[k];
    return r;
}

inline M4 mul(const M4& a, const M4& b) {
    M4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                r[i][j] += a[i][k] * b[k][j];
    return r;
}

inline M4 homogeneous(const M3& r, const V3& t) {
    M4 m{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            m[i][j] = r[i][j];
        m[i][3] = t[i];
    }
    m[3][3] = 1.0;
    return m;
}

// Rotation matrix of a (w, x, y, z) quaternion, normalizing first.
inline M3 from_quat(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n, x /= n, y /= n, z /= n;
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
             {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
             {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

inline double max_diff(const M3& a, const M3& b) {
    double d = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            d = std::max(d, std::abs(a[i][j] - b[i][j]));
    return d;
}

// Euler angles in degrees, composed intrinsically in the given channel order
// ("ZXY" means Rz * Rx * Ry).
inline M3 euler(const char* order, const V3& xyz_deg) {
    constexpr double k = 3.14159265358979323846 / 180.0;
    M3 r = identity3();
    for (const char* c = order; *c; ++c) {
        switch (*c) {
        case 'X': r = mul(r, rot_x(xyz_deg[0] * k)); break;
        case 'Y': r = mul(r, rot_y(xyz_deg[1] * k)); break;
        case 'Z': r = mul(r, rot_z(xyz_deg[2] * k)); break;
        }
    }
    return r;
}

// Shortest 4-connected path length in cells (steps), or nullopt.
inline std::optional<int> bfs(const std::vector<std::vector<bool>>& blocked, int c0, int r0, int c1, int r1) {
    const int rows = static_cast<int>(blocked.size());
    const int cols = static_cast<int>(blocked[0].size());
    if (blocked[r0][c0] || blocked[r1][c1]) return std::nullopt;
    std::vector<std::vector<int>> dist(rows, std::vector<int>(cols, -1));
    std::deque<std::pair<int, int>> q{{c0, r0}};
    dist[r0][c0] = 0;
    while (!q.empty()) {
        auto [c, r] = q.front();
        q.pop_front();
        if (c == c1 && r == r1) return dist[r][c];
        const int dc[] = {1, -1, 0, 0}, dr[] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const int nc = c + dc[i], nr = r + dr[i];
            if (nc < 0 || nr < 0 || nc >= cols || nr >= rows || blocked[nr][nc] || dist[nr][nc] >= 0) continue;
            dist[nr][nc] = dist[r][c] + 1;
            q.emplace_back(nc, nr);
        }
    }
    return std::nullopt;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace oracle
