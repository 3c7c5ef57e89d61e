// SPDX-License-Identifier: Apache-2.0
#include "raysel/geometry.hpp"

#include <algorithm>
#include <limits>

namespace raysel {

double wrap_angle(double angle) {
  double a = std::fmod(angle + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

bool RigidTransform::is_rigid(double tol) const {
  const Mat3 g = rotation.transposed() * rotation;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expected = (i == j) ? 1.0 : 0.0;
      if (std::abs(g(i, j) - expected) > tol) return false;
    }
  return std::abs(rotation.determinant() - 1.0) <= 1e-6 &&
         translation.finite();
}

std::optional<RayHit> intersect_ray_obb(const Ray& ray,
                                        const OrientedBox3D& box) {
  const Mat3 to_local = Mat3::rotation_z(-box.yaw);
  const Vec3 o = to_local * (ray.origin - box.center);
  const Vec3 d = to_local * ray.direction;
  const Vec3 half = box.dims * 0.5;

  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double da = d[axis];
    const double oa = o[axis];
    const double ha = half[axis];
    if (da == 0.0) {
      // Parallel to the slab: hit only possible when already between faces.
      if (oa < -ha || oa > ha) return std::nullopt;
      continue;
    }
    double ta = (-ha - oa) / da;
    double tb = (ha - oa) / da;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  if (t1 < 0.0) return std::nullopt;
  return RayHit{std::max(t0, 0.0), t1};
}

bool point_in_obb(const Vec3& p, const OrientedBox3D& box) {
  const Vec3 q = box.to_local(p);
  return std::abs(q.x) <= 0.5 * box.dims.x &&
         std::abs(q.y) <= 0.5 * box.dims.y && std::abs(q.z) <= 0.5 * box.dims.z;
}

PixelUV project(const CameraRig& rig, const Vec3& p_cam) {
  if (!(p_cam.z > 0.0))
    throw std::invalid_argument("project: point is behind the camera");
  const CameraIntrinsics& k = rig.intrinsics;
  return {k.fx * p_cam.x / p_cam.z + k.cx, k.fy * p_cam.y / p_cam.z + k.cy};
}

Ray backproject_pixel_ray(const CameraRig& rig, int i, int j) {
  if (i < 0 || i >= rig.grid_rows() || j < 0 || j >= rig.grid_cols())
    throw std::out_of_range("backproject_pixel_ray: feature cell (" +
                            std::to_string(i) + ", " + std::to_string(j) +
                            ") outside grid");
  const CameraIntrinsics& k = rig.intrinsics;
  const double s = static_cast<double>(rig.feature_stride);
  const double u = s * (j + 0.5);
  const double v = s * (i + 0.5);
  const Vec3 dir_cam{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
  return Ray::through(rig.optical_center(), rig.cam_to_lidar.rotate(dir_cam));
}

}  // namespace raysel
