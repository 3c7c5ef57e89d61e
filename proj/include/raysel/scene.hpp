// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raysel/geometry.hpp"

namespace raysel {

struct SceneRegion {
  double x_min{-54.0}, x_max{54.0};
  double y_min{-54.0}, y_max{54.0};
  double z_min{-5.0}, z_max{3.0};

  bool valid() const {
    return x_min < x_max && y_min < y_max && z_min < z_max;
  }
  double x_extent() const { return x_max - x_min; }
  double y_extent() const { return y_max - y_min; }
  double z_extent() const { return z_max - z_min; }

  bool contains(const Vec3& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max &&
           p.z >= z_min && p.z <= z_max;
  }

  /// Distance from p to the farthest region corner.
  double max_corner_distance(const Vec3& p) const;
};

enum class GridKind { Camera, Bev };

/// Token grid over either one camera's feature map or the BEV plane.
struct GridSpec {
  GridKind kind{GridKind::Bev};
  int rows{0};
  int cols{0};
  // BEV only: metric layout. origin is the (x_min, y_min, z_min) corner;
  // cell (i, j) spans y along rows and x along cols.
  double cell_size{0.0};
  Vec3 origin;
  // Camera only: owning rig id.
  int rig_id{-1};

  static GridSpec camera(const CameraRig& rig) {
    GridSpec g;
    g.kind = GridKind::Camera;
    g.rows = rig.grid_rows();
    g.cols = rig.grid_cols();
    g.rig_id = rig.id;
    return g;
  }

  static GridSpec bev(const SceneRegion& region, double cell_size);

  int num_cells() const { return rows * cols; }

  /// Metric center of BEV cell (i, j); z sits at the region floor.
  Vec3 bev_cell_center(int i, int j) const {
    return {origin.x + (j + 0.5) * cell_size, origin.y + (i + 0.5) * cell_size,
            origin.z};
  }

  bool operator==(const GridSpec& o) const {
    return kind == o.kind && rows == o.rows && cols == o.cols &&
           cell_size == o.cell_size && rig_id == o.rig_id &&
           origin.x == o.origin.x && origin.y == o.origin.y &&
           origin.z == o.origin.z;
  }
};

struct Scene {
  SceneRegion region;
  std::vector<OrientedBox3D> boxes;
  std::vector<CameraRig> rigs;
  GridSpec bev;
  std::vector<std::string> class_names;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  const CameraRig& rig(int rig_id) const;
};

struct ClassDistribution {
  std::vector<std::int64_t> counts;

  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

/// Scene file is malformed (missing/badly typed fields).
class SceneFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scene file parsed but violates a domain invariant.
class SceneInvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Defaults mirrored by generate_scene.
inline constexpr double kDefaultBevCellSize = 0.6;
inline constexpr int kDefaultFeatureStride = 16;
inline constexpr int kDefaultImageWidth = 800;
inline constexpr int kDefaultImageHeight = 320;
inline constexpr double kDefaultFocal = 400.0;

/// Deterministic synthetic scene: boxes uniform in the region with per-class
/// dimension priors, cameras on an outward-facing surround ring.
Scene generate_scene(std::uint64_t seed, int n_boxes,
                     const std::vector<double>& class_mix, int n_cameras = 6);

/// Per-class ground-truth box counts.
ClassDistribution gt_distribution(const Scene& scene);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

/// Validates all Scene invariants; throws SceneInvariantError naming the
/// offending element.
void validate_scene(const Scene& scene);

bool scenes_equal(const Scene& a, const Scene& b);

/// Category names with per-class size priors; index c cycles through this
/// table. The first two entries are deliberately one large and one small
/// class so a two-class mix stresses class balancing.
const std::vector<std::string>& default_class_taxonomy();

}  // namespace raysel
