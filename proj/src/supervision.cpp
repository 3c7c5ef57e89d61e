// SPDX-License-Identifier: Apache-2.0
#include "raysel/supervision.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace raysel {

std::string mask_modality_token(const GridSpec& grid) {
  if (grid.kind == GridKind::Camera)
    return "camera:" + std::to_string(grid.rig_id);
  return "bev";
}

bool ray_labels_positive(const Ray& ray, const OrientedBox3D& box) {
  const auto hit = intersect_ray_obb(ray, box);
  return hit.has_value() && hit->t_far > hit->t_near;
}

Ray grid_cell_ray(const GridSpec& grid, const Scene& scene, int i, int j) {
  if (grid.kind == GridKind::Camera)
    return backproject_pixel_ray(scene.rig(grid.rig_id), i, j);
  // Vertical rays start at the region floor regardless of the grid datum.
  Vec3 start = grid.bev_cell_center(i, j);
  start.z = scene.region.z_min;
  return Ray{start, Vec3{0.0, 0.0, 1.0}};
}

namespace {

bool any_box_hit(const Ray& ray, const Scene& scene) {
  for (const auto& box : scene.boxes)
    if (ray_labels_positive(ray, box)) return true;
  return false;
}

}  // namespace

SupervisionMask ras_camera_mask(const Scene& scene, int rig_id) {
  const CameraRig& rig = scene.rig(rig_id);
  SupervisionMask mask;
  mask.grid = GridSpec::camera(rig);
  mask.values.assign(mask.grid.num_cells(), 0);
  for (int i = 0; i < mask.grid.rows; ++i)
    for (int j = 0; j < mask.grid.cols; ++j)
      if (any_box_hit(backproject_pixel_ray(rig, i, j), scene))
        mask.at(i, j) = 1;
  return mask;
}

SupervisionMask ras_bev_mask(const Scene& scene) {
  SupervisionMask mask;
  mask.grid = scene.bev;
  mask.values.assign(mask.grid.num_cells(), 0);
  for (int i = 0; i < mask.grid.rows; ++i)
    for (int j = 0; j < mask.grid.cols; ++j)
      if (any_box_hit(grid_cell_ray(mask.grid, scene, i, j), scene))
        mask.at(i, j) = 1;
  return mask;
}

SupervisionMask ras_oracle_camera_mask(const Scene& scene, int rig_id,
                                       double march_step) {
  if (!(march_step > 0.0))
    throw std::invalid_argument("march_step must be positive");
  const CameraRig& rig = scene.rig(rig_id);
  SupervisionMask mask;
  mask.grid = GridSpec::camera(rig);
  mask.values.assign(mask.grid.num_cells(), 0);

  const Vec3 origin = rig.optical_center();
  const double t_max = scene.region.max_corner_distance(origin);

  // Per-box march windows keep the sample count tractable: a sample can only
  // be inside a box when its ray parameter is within half a diagonal of the
  // box center's projection onto the ray.
  std::vector<double> reach(scene.boxes.size());
  for (std::size_t b = 0; b < scene.boxes.size(); ++b)
    reach[b] = 0.5 * scene.boxes[b].dims.norm();

  for (int i = 0; i < mask.grid.rows; ++i)
    for (int j = 0; j < mask.grid.cols; ++j) {
      const Ray ray = backproject_pixel_ray(rig, i, j);
      bool positive = false;
      for (std::size_t b = 0; b < scene.boxes.size() && !positive; ++b) {
        const OrientedBox3D& box = scene.boxes[b];
        const Vec3 rel = box.center - ray.origin;
        const double tc = rel.dot(ray.direction);
        const double perp_sq = rel.squared_norm() - tc * tc;
        if (perp_sq > reach[b] * reach[b]) continue;
        const double lo = std::max(0.0, tc - reach[b] - march_step);
        const double hi = std::min(t_max, tc + reach[b] + march_step);
        // Samples stay on the global lattice t = k * march_step.
        const long k_lo = static_cast<long>(std::floor(lo / march_step));
        const long k_hi = static_cast<long>(std::ceil(hi / march_step));
        for (long k = k_lo; k <= k_hi; ++k) {
          const double t = k * march_step;
          if (t < 0.0 || t > t_max) continue;
          if (point_in_obb(ray.origin + ray.direction * t, box)) {
            positive = true;
            break;
          }
        }
      }
      if (positive) mask.at(i, j) = 1;
    }
  return mask;
}

bool point_in_footprint(const OrientedBox3D& box, double x, double y) {
  const double c = std::cos(-box.yaw);
  const double s = std::sin(-box.yaw);
  const double dx = x - box.center.x;
  const double dy = y - box.center.y;
  const double u = c * dx - s * dy;
  const double v = s * dx + c * dy;
  return std::abs(u) <= 0.5 * box.dims.x && std::abs(v) <= 0.5 * box.dims.y;
}

double footprint_boundary_distance(const OrientedBox3D& box, double x,
                                   double y) {
  const double c = std::cos(-box.yaw);
  const double s = std::sin(-box.yaw);
  const double dx = x - box.center.x;
  const double dy = y - box.center.y;
  const double u = std::abs(c * dx - s * dy);
  const double v = std::abs(s * dx + c * dy);
  const double hu = 0.5 * box.dims.x;
  const double hv = 0.5 * box.dims.y;
  if (u <= hu && v <= hv) return std::min(hu - u, hv - v);
  const double du = std::max(u - hu, 0.0);
  const double dv = std::max(v - hv, 0.0);
  return std::hypot(du, dv);
}

SupervisionMask bev_footprint_mask(const Scene& scene) {
  SupervisionMask mask;
  mask.grid = scene.bev;
  mask.values.assign(mask.grid.num_cells(), 0);
  for (int i = 0; i < mask.grid.rows; ++i)
    for (int j = 0; j < mask.grid.cols; ++j) {
      const Vec3 center = mask.grid.bev_cell_center(i, j);
      for (const auto& box : scene.boxes)
        if (point_in_footprint(box, center.x, center.y)) {
          mask.at(i, j) = 1;
          break;
        }
    }
  return mask;
}

void write_mask(const SupervisionMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "RAS " << mask_modality_token(mask.grid) << ' ' << mask.grid.rows
      << ' ' << mask.grid.cols << '\n';
  for (int i = 0; i < mask.grid.rows; ++i) {
    for (int j = 0; j < mask.grid.cols; ++j)
      out << (mask.at(i, j) ? '1' : '0');
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

SupervisionMask read_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mask file: " + path);
  std::string magic, modality;
  int rows = 0, cols = 0;
  if (!(in >> magic >> modality >> rows >> cols) || magic != "RAS" ||
      rows <= 0 || cols <= 0)
    throw std::runtime_error("malformed mask header in " + path);

  SupervisionMask mask;
  if (modality == "bev") {
    mask.grid.kind = GridKind::Bev;
  } else if (modality.rfind("camera:", 0) == 0) {
    mask.grid.kind = GridKind::Camera;
    try {
      mask.grid.rig_id = std::stoi(modality.substr(7));
    } catch (const std::exception&) {
      throw std::runtime_error("malformed mask modality in " + path);
    }
  } else {
    throw std::runtime_error("unknown mask modality '" + modality + "' in " +
                             path);
  }
  mask.grid.rows = rows;
  mask.grid.cols = cols;
  mask.values.assign(static_cast<std::size_t>(rows) * cols, 0);
  std::string line;
  std::getline(in, line);  // finish header line
  for (int i = 0; i < rows; ++i) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) < cols)
      throw std::runtime_error("truncated mask row " + std::to_string(i) +
                               " in " + path);
    for (int j = 0; j < cols; ++j) {
      if (line[j] == '1')
        mask.at(i, j) = 1;
      else if (line[j] != '0')
        throw std::runtime_error("invalid mask character at row " +
                                 std::to_string(i) + " in " + path);
    }
  }
  return mask;
}

}  // namespace raysel
