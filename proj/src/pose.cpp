#include "stagelink/pose.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "stagelink/error.hpp"

namespace stagelink {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

bool Vec3::finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a + (b - a) * t; }

UnitQuat::UnitQuat(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {
    const double n = norm();
    if (!std::isfinite(n) || n == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "quaternion has zero or non-finite norm");
    }
    if (std::abs(n - 1.0) > 1e-6) {
        w_ /= n;
        x_ /= n;
        y_ /= n;
        z_ /= n;
    }
}

UnitQuat UnitQuat::from_axis_angle(const Vec3& axis, double radians) {
    const double n = axis.norm();
    if (n == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "rotation axis has zero length");
    }
    const double s = std::sin(radians / 2.0) / n;
    return {std::cos(radians / 2.0), axis.x * s, axis.y * s, axis.z * s};
}

UnitQuat UnitQuat::about_x(double radians) {
    return {std::cos(radians / 2.0), std::sin(radians / 2.0), 0.0, 0.0};
}

UnitQuat UnitQuat::about_y(double radians) {
    return {std::cos(radians / 2.0), 0.0, std::sin(radians / 2.0), 0.0};
}

UnitQuat UnitQuat::about_z(double radians) {
    return {std::cos(radians / 2.0), 0.0, 0.0, std::sin(radians / 2.0)};
}

double UnitQuat::norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

UnitQuat UnitQuat::conjugate() const { return {w_, -x_, -y_, -z_}; }

Vec3 UnitQuat::rotate(const Vec3& v) const {
    // t = 2 q.xyz x v ; v' = v + w t + q.xyz x t
    const double tx = 2.0 * (y_ * v.z - z_ * v.y);
    const double ty = 2.0 * (z_ * v.x - x_ * v.z);
    const double tz = 2.0 * (x_ * v.y - y_ * v.x);
    return {v.x + w_ * tx + (y_ * tz - z_ * ty),
            v.y + w_ * ty + (z_ * tx - x_ * tz),
            v.z + w_ * tz + (x_ * ty - y_ * tx)};
}

UnitQuat operator*(const UnitQuat& a, const UnitQuat& b) {
    return {a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
            a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
            a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
            a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_};
}

UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double t) {
    double bw = b.w(), bx = b.x(), by = b.y(), bz = b.z();
    double cos_theta = a.w() * bw + a.x() * bx + a.y() * by + a.z() * bz;
    if (cos_theta < 0.0) {
        bw = -bw;
        bx = -bx;
        by = -by;
        bz = -bz;
        cos_theta = -cos_theta;
    }
    double ka = 1.0 - t;
    double kb = t;
    if (cos_theta < 0.9995) {
        const double theta = std::acos(std::min(cos_theta, 1.0));
        const double s = std::sin(theta);
        ka = std::sin((1.0 - t) * theta) / s;
        kb = std::sin(t * theta) / s;
    }
    const double w = ka * a.w() + kb * bw;
    const double x = ka * a.x() + kb * bx;
    const double y = ka * a.y() + kb * by;
    const double z = ka * a.z() + kb * bz;
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    return {w / n, x / n, y / n, z / n};
}

double angle_between(const UnitQuat& a, const UnitQuat& b) {
    const double d = std::abs(a.w() * b.w() + a.x() * b.x() + a.y() * b.y() + a.z() * b.z());
    return 2.0 * std::acos(std::min(d, 1.0));
}

YawSplit split_yaw(const UnitQuat& q) {
    const Vec3 fwd = q.rotate({0.0, 0.0, 1.0});
    YawSplit out;
    if (std::hypot(fwd.x, fwd.z) > 1e-9) {
        out.yaw = std::atan2(fwd.x, fwd.z);
    }
    out.rest = UnitQuat::about_y(-out.yaw) * q;
    return out;
}

double wrap_angle(double radians) {
    if (radians > -kPi && radians <= kPi) {
        return radians;
    }
    double r = std::fmod(radians + kPi, 2.0 * kPi);
    if (r <= 0.0) {
        r += 2.0 * kPi;
    }
    return r - kPi;
}

ReferenceTransform::ReferenceTransform(const Vec3& translation, double yaw, double pitch)
    : translation_(translation), yaw_(wrap_angle(yaw)), pitch_(std::clamp(pitch, -kPi / 2.0, kPi / 2.0)) {
    if (!translation.finite() || !std::isfinite(yaw) || !std::isfinite(pitch)) {
        throw Error(ErrorCode::InvalidArgument, "reference transform must be finite");
    }
}

UnitQuat ReferenceTransform::rotation() const {
    return UnitQuat::about_y(yaw_) * UnitQuat::about_x(pitch_);
}

SkeletonTopology::SkeletonTopology(std::vector<Joint> joints) : joints_(std::move(joints)) {
    std::unordered_set<std::string> names;
    for (std::size_t i = 0; i < joints_.size(); ++i) {
        const Joint& j = joints_[i];
        if (i == 0 && j.parent) {
            throw Error(ErrorCode::InvalidArgument, "joint 0 must be the root");
        }
        if (i > 0 && (!j.parent || *j.parent >= i)) {
            throw Error(ErrorCode::InvalidArgument,
                        "joint '" + j.name + "' must have a parent with a lower index");
        }
        if (!names.insert(j.name).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate joint name '" + j.name + "'");
        }
    }
}

std::optional<std::size_t> SkeletonTopology::find(std::string_view name) const {
    for (std::size_t i = 0; i < joints_.size(); ++i) {
        if (joints_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

bool operator==(const Joint& a, const Joint& b) {
    return a.name == b.name && a.parent == b.parent && a.bind_offset == b.bind_offset;
}

bool operator==(const SkeletonTopology& a, const SkeletonTopology& b) { return a.joints_ == b.joints_; }

RootPose compose(const ReferenceTransform& ref, const RootPose& local) {
    const UnitQuat r = ref.rotation();
    return {r.rotate(local.position) + ref.translation(), r * local.rotation};
}

ReferenceTransform apply_delta(const ReferenceTransform& ref, const TransformDelta& delta) {
    const Vec3 planar = UnitQuat::about_y(ref.yaw()).rotate({delta.d_lateral, 0.0, delta.d_forward});
    const Vec3 t = ref.translation() + planar + Vec3{0.0, delta.d_vertical, 0.0};
    return {t, ref.yaw() + delta.d_yaw, ref.pitch() + delta.d_pitch};
}

UnitQuat heading_frame(const ReferenceTransform& ref) { return UnitQuat::about_y(ref.yaw()); }

JointWorld forward_kinematics(const SkeletonTopology& topology, const RootPose& root,
                              const std::vector<UnitQuat>& local_rotations) {
    if (local_rotations.size() != topology.size()) {
        throw Error(ErrorCode::TopologyMismatch, "rotation count does not match topology");
    }
    JointWorld out;
    out.positions.resize(topology.size());
    out.rotations.resize(topology.size());
    if (topology.empty()) {
        return out;
    }
    out.positions[0] = root.position;
    out.rotations[0] = root.rotation;
    for (std::size_t i = 1; i < topology.size(); ++i) {
        const std::size_t p = *topology[i].parent;
        out.positions[i] = out.positions[p] + out.rotations[p].rotate(topology[i].bind_offset);
        out.rotations[i] = out.rotations[p] * local_rotations[i];
    }
    return out;
}

} // namespace stagelink
