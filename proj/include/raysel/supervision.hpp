// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raysel/scene.hpp"

namespace raysel {

/// Binary foreground mask over a token grid.
struct SupervisionMask {
  GridSpec grid;
  std::vector<std::uint8_t> values;  // rows*cols, row-major, 0 or 1

  std::uint8_t at(int i, int j) const { return values[i * grid.cols + j]; }
  std::uint8_t& at(int i, int j) { return values[i * grid.cols + j]; }

  int positive_count() const {
    int n = 0;
    for (auto v : values) n += v;
    return n;
  }
};

/// "camera:<k>" or "bev".
std::string mask_modality_token(const GridSpec& grid);

/// The supervision ray of cell (i, j): the back-projected pixel ray for
/// camera grids, the vertical through the cell center for BEV grids.
Ray grid_cell_ray(const GridSpec& grid, const Scene& scene, int i, int j);

/// True iff the ray crosses the box in front of the origin with a strictly
/// positive chord. Zero-length (edge-touching) intervals count as misses.
bool ray_labels_positive(const Ray& ray, const OrientedBox3D& box);

/// Camera-grid mask: cell (i, j) is positive iff its back-projected ray
/// intersects any ground-truth box.
SupervisionMask ras_camera_mask(const Scene& scene, int rig_id);

/// BEV mask: cell positive iff the vertical ray through its center (origin
/// at the region floor, direction +z) intersects any box.
SupervisionMask ras_bev_mask(const Scene& scene);

/// Brute-force mask: marches each cell ray from t = 0 to the farthest region
/// corner at `march_step`, testing point-in-box at every sample.
SupervisionMask ras_oracle_camera_mask(const Scene& scene, int rig_id,
                                       double march_step);

/// Mask file: header "RAS <modality> <rows> <cols>", then rows of 0/1 chars.
void write_mask(const SupervisionMask& mask, const std::string& path);
SupervisionMask read_mask(const std::string& path);

/// True iff (x, y) lies inside the box's yaw-rotated footprint rectangle.
bool point_in_footprint(const OrientedBox3D& box, double x, double y);

/// 2D distance from (x, y) to the footprint boundary (0 on the edge).
double footprint_boundary_distance(const OrientedBox3D& box, double x,
                                   double y);

/// Reference BEV mask built from footprint containment instead of ray
/// casting; used to cross-check ras_bev_mask.
SupervisionMask bev_footprint_mask(const Scene& scene);

}  // namespace raysel
