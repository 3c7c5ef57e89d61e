// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace raysel {

/// Absolute tolerance for geometric equalities, in meters.
inline constexpr double kGeomTol = 1e-9;

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double operator[](int axis) const {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }

  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
  }

  static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
  }

  /// Rotation by `angle` radians about +z (counter-clockwise looking down -z).
  static Mat3 rotation_z(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {{c, -s, 0, s, c, 0, 0, 0, 1}};
  }

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Mat3 transposed() const {
    return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
  }

  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

/// Rigid body transform: p -> rotation * p + translation.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transposed();
    return {rt, -(rt * translation)};
  }

  /// True iff rotation is orthonormal within `tol` and det is +1.
  bool is_rigid(double tol = kGeomTol) const;
};

struct CameraIntrinsics {
  double fx{1.0};
  double fy{1.0};
  double cx{0.0};
  double cy{0.0};
  int width{0};
  int height{0};

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && cx >= 0.0 && cx <= width && cy >= 0.0 &&
           cy <= height && width > 0 && height > 0;
  }
};

struct CameraRig {
  int id{0};
  CameraIntrinsics intrinsics;
  RigidTransform cam_to_lidar;
  int feature_stride{1};

  /// Camera optical center in the LiDAR frame (= cam_to_lidar applied to 0).
  Vec3 optical_center() const { return cam_to_lidar.translation; }

  int grid_rows() const {
    return (intrinsics.height + feature_stride - 1) / feature_stride;
  }
  int grid_cols() const {
    return (intrinsics.width + feature_stride - 1) / feature_stride;
  }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit norm

  /// Builds a ray through `origin` along `dir`, normalizing the direction.
  static Ray through(const Vec3& origin, const Vec3& dir) {
    const double n = dir.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw std::invalid_argument("ray direction must be nonzero and finite");
    return {origin, dir * (1.0 / n)};
  }
};

/// Yaw-rotated cuboid. dims = (length, width, height): extent along the
/// box-local x, y, z axes before the yaw rotation about +z.
struct OrientedBox3D {
  Vec3 center;
  Vec3 dims;
  double yaw{0.0};  // radians in [-pi, pi)
  int class_id{0};

  bool valid() const {
    return dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0 && yaw >= -M_PI &&
           yaw < M_PI && center.finite();
  }

  /// Maps a LiDAR-frame point into the box local frame.
  Vec3 to_local(const Vec3& p) const {
    return Mat3::rotation_z(-yaw) * (p - center);
  }
};

struct RayHit {
  double t_near{0.0};
  double t_far{0.0};
};

struct PixelUV {
  double u{0.0};
  double v{0.0};
};

/// Slab test in the box local frame. Returns the parametric interval where
/// the ray is inside the box, with t_near clamped to 0 when the origin lies
/// inside; absent when there is no intersection at t >= 0.
std::optional<RayHit> intersect_ray_obb(const Ray& ray,
                                        const OrientedBox3D& box);

/// True iff p, expressed in the box local frame, lies within +-dims/2 on
/// every axis (boundary inclusive).
bool point_in_obb(const Vec3& p, const OrientedBox3D& box);

/// Pinhole projection of a camera-frame point with z > 0.
PixelUV project(const CameraRig& rig, const Vec3& p_cam);

/// Ray through the center of feature cell (i, j): full-resolution pixel
/// (S*(j+0.5), S*(i+0.5)) back-projected by K^-1 and rotated into the LiDAR
/// frame, origin at the optical center.
Ray backproject_pixel_ray(const CameraRig& rig, int i, int j);

}  // namespace raysel
