#include "stagelink/stage.hpp"

#include <algorithm>
#include <cmath>

#include "stagelink/error.hpp"

namespace stagelink {

void Box::validate() const {
    if (!(min.x < max.x && min.y < max.y && min.z < max.z)) {
        throw Error(ErrorCode::InvalidArgument, "volume min must be below max on every axis");
    }
}

ClampResult clamp_to_volume(const Vec3& p, const Box& volume) {
    ClampResult r;
    r.position = {std::clamp(p.x, volume.min.x, volume.max.x),
                  std::clamp(p.y, volume.min.y, volume.max.y),
                  std::clamp(p.z, volume.min.z, volume.max.z)};
    r.clamped = !(r.position == p);
    return r;
}

Vec3 map_a_to_b(const Vec3& p_stage, const StageToScenery& calib) {
    return UnitQuat::about_y(calib.yaw).rotate(p_stage) + calib.translation;
}

double look_at_yaw(const Vec3& from, const Vec3& target) {
    const double dx = target.x - from.x;
    const double dz = target.z - from.z;
    if (std::hypot(dx, dz) <= kDegenerateDistance) {
        throw Error(ErrorCode::DegenerateTarget, "target is vertically aligned with the watcher");
    }
    return std::atan2(dx, dz);
}

} // namespace stagelink
