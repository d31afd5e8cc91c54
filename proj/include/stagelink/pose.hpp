#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace stagelink {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Right-handed, Y up, forward = +Z, meters.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend Vec3 operator*(double s, const Vec3& a) { return a * s; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
    bool finite() const;
};

Vec3 lerp(const Vec3& a, const Vec3& b, double t);

/// Rotation quaternion stored (w, x, y, z). Construction renormalizes when the
/// norm drifts more than 1e-6 from 1; otherwise components are kept bit-exact.
class UnitQuat {
public:
    constexpr UnitQuat() = default;
    UnitQuat(double w, double x, double y, double z);

    static UnitQuat identity() { return {}; }
    static UnitQuat from_axis_angle(const Vec3& axis, double radians);
    static UnitQuat about_x(double radians);
    static UnitQuat about_y(double radians);
    static UnitQuat about_z(double radians);

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    double norm() const;

    UnitQuat conjugate() const;
    Vec3 rotate(const Vec3& v) const;

    friend UnitQuat operator*(const UnitQuat& a, const UnitQuat& b);
    friend bool operator==(const UnitQuat&, const UnitQuat&) = default;

private:
    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

/// Shortest-arc spherical interpolation; t = 0 gives a, t = 1 gives b.
UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double t);

/// Angle of the rotation taking a to b, in [0, pi].
double angle_between(const UnitQuat& a, const UnitQuat& b);

/// Splits q into Q_yaw(yaw) * rest where yaw is the heading of q's forward axis.
struct YawSplit {
    double yaw = 0.0;
    UnitQuat rest;
};
YawSplit split_yaw(const UnitQuat& q);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

/// The avatar's reference transform: where the mocap-local frame sits in the
/// digital scenery. Yaw and pitch are explicit scalars so deltas and clamps
/// stay unambiguous.
class ReferenceTransform {
public:
    ReferenceTransform() = default;
    ReferenceTransform(const Vec3& translation, double yaw, double pitch);

    const Vec3& translation() const { return translation_; }
    double yaw() const { return yaw_; }
    double pitch() const { return pitch_; }

    UnitQuat rotation() const;

    friend bool operator==(const ReferenceTransform&, const ReferenceTransform&) = default;

private:
    Vec3 translation_;
    double yaw_ = 0.0;
    double pitch_ = 0.0;
};

struct RootPose {
    Vec3 position;
    UnitQuat rotation;
};

struct TransformDelta {
    double d_forward = 0.0;
    double d_lateral = 0.0;
    double d_vertical = 0.0;
    double d_yaw = 0.0;
    double d_pitch = 0.0;

    friend bool operator==(const TransformDelta&, const TransformDelta&) = default;
};

struct Joint {
    std::string name;
    std::optional<std::size_t> parent;
    Vec3 bind_offset;
};

/// Joints in topological order; index 0 is the only root.
class SkeletonTopology {
public:
    SkeletonTopology() = default;
    explicit SkeletonTopology(std::vector<Joint> joints);

    std::size_t size() const { return joints_.size(); }
    bool empty() const { return joints_.empty(); }
    const Joint& operator[](std::size_t i) const { return joints_[i]; }
    const std::vector<Joint>& joints() const { return joints_; }
    std::optional<std::size_t> find(std::string_view name) const;

    friend bool operator==(const SkeletonTopology&, const SkeletonTopology&);

private:
    std::vector<Joint> joints_;
};

bool operator==(const Joint& a, const Joint& b);

struct WorldPose {
    Vec3 position;
    UnitQuat rotation;
    /// Parent-relative rotations, one per topology joint; entry 0 is the root's
    /// rotation in the stream frame (the world root rotation is `rotation`).
    std::vector<UnitQuat> joint_rotations;
};

/// Places a mocap-relative root into the digital scenery:
/// position = R_yaw R_pitch p + t, rotation = Q_yaw Q_pitch q.
RootPose compose(const ReferenceTransform& ref, const RootPose& local);

/// Moves the reference along its heading. Vertical travels along world up;
/// yaw wraps and pitch clamps to [-pi/2, pi/2].
ReferenceTransform apply_delta(const ReferenceTransform& ref, const TransformDelta& delta);

/// Yaw-only rotation of the reference (pitch discarded).
UnitQuat heading_frame(const ReferenceTransform& ref);

/// World-space rotation and position of every joint given root placement and
/// parent-relative rotations.
struct JointWorld {
    std::vector<Vec3> positions;
    std::vector<UnitQuat> rotations;
};
JointWorld forward_kinematics(const SkeletonTopology& topology, const RootPose& root,
                              const std::vector<UnitQuat>& local_rotations);

} // namespace stagelink
