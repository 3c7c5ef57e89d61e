// SPDX-License-Identifier: Apache-2.0
#include "raysel/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "raysel/rng.hpp"

namespace raysel {

using nlohmann::json;

double SceneRegion::max_corner_distance(const Vec3& p) const {
  double best = 0.0;
  for (double cx : {x_min, x_max})
    for (double cy : {y_min, y_max})
      for (double cz : {z_min, z_max})
        best = std::max(best, (Vec3{cx, cy, cz} - p).norm());
  return best;
}

GridSpec GridSpec::bev(const SceneRegion& region, double cell_size) {
  if (!(cell_size > 0.0))
    throw std::invalid_argument("bev cell_size must be positive");
  GridSpec g;
  g.kind = GridKind::Bev;
  g.cell_size = cell_size;
  g.cols = static_cast<int>(std::lround(region.x_extent() / cell_size));
  g.rows = static_cast<int>(std::lround(region.y_extent() / cell_size));
  g.origin = {region.x_min, region.y_min, region.z_min};
  return g;
}

const CameraRig& Scene::rig(int rig_id) const {
  for (const auto& r : rigs)
    if (r.id == rig_id) return r;
  throw std::out_of_range("no camera rig with id " + std::to_string(rig_id));
}

namespace {

struct SizePrior {
  double len_lo, len_hi;
  double wid_lo, wid_hi;
  double hgt_lo, hgt_hi;
};

// Loose surround-driving size priors. Order matters: index 0 large,
// index 1 small, so short class mixes pair a dominant large class with a
// rare small one.
const std::vector<std::string> kTaxonomy = {
    "car",     "traffic_cone", "truck",      "bicycle",      "bus",
    "pedestrian", "trailer",   "motorcycle", "construction", "barrier"};

const std::vector<SizePrior> kSizePriors = {
    {4.0, 5.0, 1.7, 2.1, 1.4, 1.8},   // car
    {0.3, 0.5, 0.3, 0.5, 0.6, 1.1},   // traffic_cone
    {6.0, 9.0, 2.3, 2.9, 2.5, 3.5},   // truck
    {1.5, 1.9, 0.5, 0.8, 1.0, 1.4},   // bicycle
    {9.0, 12.0, 2.7, 3.0, 3.0, 3.5},  // bus
    {0.5, 0.8, 0.5, 0.8, 1.5, 1.9},   // pedestrian
    {8.0, 13.0, 2.5, 3.0, 3.0, 4.0},  // trailer
    {1.8, 2.4, 0.7, 1.0, 1.2, 1.6},   // motorcycle
    {5.0, 8.0, 2.5, 3.2, 2.5, 3.5},   // construction
    {2.0, 2.6, 0.5, 0.8, 0.9, 1.2},   // barrier
};

std::string class_name_for(int c) {
  const int n = static_cast<int>(kTaxonomy.size());
  if (c < n) return kTaxonomy[c];
  return kTaxonomy[c % n] + "_" + std::to_string(c / n);
}

CameraRig make_ring_camera(int id, int n_cameras) {
  const double phi = 2.0 * M_PI * id / n_cameras;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  // Camera axes in the LiDAR frame: +x right, +y down, +z forward.
  const Vec3 right{s, -c, 0.0};
  const Vec3 down{0.0, 0.0, -1.0};
  const Vec3 forward{c, s, 0.0};

  CameraRig rig;
  rig.id = id;
  rig.intrinsics = {kDefaultFocal,
                    kDefaultFocal,
                    kDefaultImageWidth / 2.0,
                    kDefaultImageHeight / 2.0,
                    kDefaultImageWidth,
                    kDefaultImageHeight};
  rig.cam_to_lidar.rotation = Mat3::from_cols(right, down, forward);
  rig.cam_to_lidar.translation = {1.0 * c, 1.0 * s, 1.6};
  rig.feature_stride = kDefaultFeatureStride;
  return rig;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw SceneFormatError(path + ": expected an array of 3 reals");
  for (int i = 0; i < 3; ++i)
    if (!j[i].is_number())
      throw SceneFormatError(path + "[" + std::to_string(i) +
                             "]: expected a real");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

double number_at(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key))
    throw SceneFormatError(path + "." + key + ": missing field");
  if (!j[key].is_number())
    throw SceneFormatError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

int int_at(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key))
    throw SceneFormatError(path + "." + key + ": missing field");
  if (!j[key].is_number_integer())
    throw SceneFormatError(path + "." + key + ": expected an integer");
  return j[key].get<int>();
}

const json& object_at(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key))
    throw SceneFormatError(path + "." + key + ": missing field");
  if (!j[key].is_object())
    throw SceneFormatError(path + "." + key + ": expected an object");
  return j[key];
}

const json& array_at(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key))
    throw SceneFormatError(path + "." + key + ": missing field");
  if (!j[key].is_array())
    throw SceneFormatError(path + "." + key + ": expected an array");
  return j[key];
}

}  // namespace

const std::vector<std::string>& default_class_taxonomy() { return kTaxonomy; }

Scene generate_scene(std::uint64_t seed, int n_boxes,
                     const std::vector<double>& class_mix, int n_cameras) {
  if (class_mix.empty())
    throw std::invalid_argument("generate_scene: class_mix must be non-empty");
  double sum = 0.0;
  for (double w : class_mix) {
    if (w < 0.0)
      throw std::invalid_argument("generate_scene: class_mix entries must be "
                                  "non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("generate_scene: class_mix must sum to 1");
  if (n_boxes < 0)
    throw std::invalid_argument("generate_scene: n_boxes must be >= 0");
  if (n_cameras < 1)
    throw std::invalid_argument("generate_scene: n_cameras must be >= 1");

  Scene scene;
  scene.region = SceneRegion{};
  scene.bev = GridSpec::bev(scene.region, kDefaultBevCellSize);

  const int num_classes = static_cast<int>(class_mix.size());
  scene.class_names.reserve(num_classes);
  for (int c = 0; c < num_classes; ++c)
    scene.class_names.push_back(class_name_for(c));

  for (int k = 0; k < n_cameras; ++k)
    scene.rigs.push_back(make_ring_camera(k, n_cameras));

  // Draw order per box: class, dims (l, w, h), yaw, center (x, y, z).
  DetRng rng(seed);
  scene.boxes.reserve(n_boxes);
  const SceneRegion& rg = scene.region;
  for (int b = 0; b < n_boxes; ++b) {
    OrientedBox3D box;
    box.class_id = rng.discrete(class_mix);
    const SizePrior& p = kSizePriors[box.class_id % kSizePriors.size()];
    box.dims = {rng.uniform(p.len_lo, p.len_hi), rng.uniform(p.wid_lo, p.wid_hi),
                rng.uniform(p.hgt_lo, p.hgt_hi)};
    box.yaw = wrap_angle(rng.uniform(-M_PI, M_PI));
    // Margin keeps the whole footprint inside the region under any yaw.
    const double margin = 0.5 * std::hypot(box.dims.x, box.dims.y);
    box.center = {rng.uniform(rg.x_min + margin, rg.x_max - margin),
                  rng.uniform(rg.y_min + margin, rg.y_max - margin),
                  rng.uniform(rg.z_min + 0.5 * box.dims.z,
                              rg.z_max - 0.5 * box.dims.z)};
    scene.boxes.push_back(box);
  }
  return scene;
}

ClassDistribution gt_distribution(const Scene& scene) {
  ClassDistribution dist;
  dist.counts.assign(scene.class_names.size(), 0);
  for (const auto& box : scene.boxes) ++dist.counts[box.class_id];
  return dist;
}

std::string scene_to_json(const Scene& scene) {
  json j;
  j["region"] = {{"x_min", scene.region.x_min}, {"x_max", scene.region.x_max},
                 {"y_min", scene.region.y_min}, {"y_max", scene.region.y_max},
                 {"z_min", scene.region.z_min}, {"z_max", scene.region.z_max}};
  j["class_names"] = scene.class_names;

  json boxes = json::array();
  for (const auto& b : scene.boxes)
    boxes.push_back({{"center", vec3_to_json(b.center)},
                     {"dims", vec3_to_json(b.dims)},
                     {"yaw", b.yaw},
                     {"class_id", b.class_id}});
  j["boxes"] = std::move(boxes);

  json cameras = json::array();
  for (const auto& r : scene.rigs) {
    json rot = json::array();
    for (double v : r.cam_to_lidar.rotation.m) rot.push_back(v);
    cameras.push_back(
        {{"id", r.id},
         {"intrinsics",
          {{"fx", r.intrinsics.fx},
           {"fy", r.intrinsics.fy},
           {"cx", r.intrinsics.cx},
           {"cy", r.intrinsics.cy},
           {"width", r.intrinsics.width},
           {"height", r.intrinsics.height}}},
         {"cam_to_lidar",
          {{"rotation", std::move(rot)},
           {"translation", vec3_to_json(r.cam_to_lidar.translation)}}},
         {"feature_stride", r.feature_stride}});
  }
  j["cameras"] = std::move(cameras);

  j["bev"] = {{"rows", scene.bev.rows},
              {"cols", scene.bev.cols},
              {"cell_size", scene.bev.cell_size},
              {"origin", vec3_to_json(scene.bev.origin)}};
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SceneFormatError(std::string("scene JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw SceneFormatError("$: expected a JSON object");

  Scene scene;
  const json& region = object_at(j, "region", "$");
  scene.region.x_min = number_at(region, "x_min", "$.region");
  scene.region.x_max = number_at(region, "x_max", "$.region");
  scene.region.y_min = number_at(region, "y_min", "$.region");
  scene.region.y_max = number_at(region, "y_max", "$.region");
  scene.region.z_min = number_at(region, "z_min", "$.region");
  scene.region.z_max = number_at(region, "z_max", "$.region");

  const json& names = array_at(j, "class_names", "$");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!names[i].is_string())
      throw SceneFormatError("$.class_names[" + std::to_string(i) +
                             "]: expected a string");
    scene.class_names.push_back(names[i].get<std::string>());
  }

  const json& boxes = array_at(j, "boxes", "$");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::string path = "$.boxes[" + std::to_string(i) + "]";
    const json& jb = boxes[i];
    if (!jb.is_object()) throw SceneFormatError(path + ": expected an object");
    OrientedBox3D box;
    box.center = vec3_from_json(
        jb.contains("center") ? jb["center"] : json(), path + ".center");
    box.dims =
        vec3_from_json(jb.contains("dims") ? jb["dims"] : json(), path + ".dims");
    box.yaw = number_at(jb, "yaw", path);
    box.class_id = int_at(jb, "class_id", path);
    scene.boxes.push_back(box);
  }

  const json& cameras = array_at(j, "cameras", "$");
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const std::string path = "$.cameras[" + std::to_string(i) + "]";
    const json& jc = cameras[i];
    if (!jc.is_object()) throw SceneFormatError(path + ": expected an object");
    CameraRig rig;
    rig.id = int_at(jc, "id", path);
    const json& ji = object_at(jc, "intrinsics", path);
    rig.intrinsics.fx = number_at(ji, "fx", path + ".intrinsics");
    rig.intrinsics.fy = number_at(ji, "fy", path + ".intrinsics");
    rig.intrinsics.cx = number_at(ji, "cx", path + ".intrinsics");
    rig.intrinsics.cy = number_at(ji, "cy", path + ".intrinsics");
    rig.intrinsics.width = int_at(ji, "width", path + ".intrinsics");
    rig.intrinsics.height = int_at(ji, "height", path + ".intrinsics");
    const json& jt = object_at(jc, "cam_to_lidar", path);
    const json& rot = array_at(jt, "rotation", path + ".cam_to_lidar");
    if (rot.size() != 9)
      throw SceneFormatError(path +
                             ".cam_to_lidar.rotation: expected 9 row-major "
                             "reals");
    for (int k = 0; k < 9; ++k) {
      if (!rot[k].is_number())
        throw SceneFormatError(path + ".cam_to_lidar.rotation[" +
                               std::to_string(k) + "]: expected a real");
      rig.cam_to_lidar.rotation.m[k] = rot[k].get<double>();
    }
    rig.cam_to_lidar.translation = vec3_from_json(
        jt.contains("translation") ? jt["translation"] : json(),
        path + ".cam_to_lidar.translation");
    rig.feature_stride = int_at(jc, "feature_stride", path);
    scene.rigs.push_back(rig);
  }

  const json& bev = object_at(j, "bev", "$");
  scene.bev.kind = GridKind::Bev;
  scene.bev.rows = int_at(bev, "rows", "$.bev");
  scene.bev.cols = int_at(bev, "cols", "$.bev");
  scene.bev.cell_size = number_at(bev, "cell_size", "$.bev");
  scene.bev.origin = vec3_from_json(
      bev.contains("origin") ? bev["origin"] : json(), "$.bev.origin");

  validate_scene(scene);
  return scene;
}

void validate_scene(const Scene& scene) {
  if (!scene.region.valid())
    throw SceneInvariantError("region: min must be < max on every axis");
  const int num_classes = static_cast<int>(scene.class_names.size());
  for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
    const auto& b = scene.boxes[i];
    const std::string where = "boxes[" + std::to_string(i) + "]";
    if (!(b.dims.x > 0.0 && b.dims.y > 0.0 && b.dims.z > 0.0))
      throw SceneInvariantError(where + ": dims must be strictly positive");
    if (!(b.yaw >= -M_PI && b.yaw < M_PI))
      throw SceneInvariantError(where + ": yaw must lie in [-pi, pi)");
    if (!b.center.finite())
      throw SceneInvariantError(where + ": center must be finite");
    if (!scene.region.contains(b.center))
      throw SceneInvariantError(where + ": center outside region");
    if (b.class_id < 0 || b.class_id >= num_classes)
      throw SceneInvariantError(where + ": class_id out of range");
  }
  for (std::size_t i = 0; i < scene.rigs.size(); ++i) {
    const auto& r = scene.rigs[i];
    const std::string where = "cameras[" + std::to_string(i) + "]";
    if (!r.intrinsics.valid())
      throw SceneInvariantError(where + ": invalid intrinsics");
    if (r.feature_stride < 1)
      throw SceneInvariantError(where + ": feature_stride must be >= 1");
    if (!r.cam_to_lidar.is_rigid())
      throw SceneInvariantError(where +
                                ": cam_to_lidar rotation is not orthonormal "
                                "with determinant +1");
  }
  if (scene.bev.rows <= 0 || scene.bev.cols <= 0 ||
      !(scene.bev.cell_size > 0.0))
    throw SceneInvariantError("bev: rows, cols and cell_size must be positive");
  if (std::abs(scene.bev.cols * scene.bev.cell_size -
               scene.region.x_extent()) > scene.bev.cell_size ||
      std::abs(scene.bev.rows * scene.bev.cell_size -
               scene.region.y_extent()) > scene.bev.cell_size)
    throw SceneInvariantError("bev: grid does not span the region within one "
                              "cell");
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << scene_to_json(scene);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scene_from_json(buf.str());
}

bool scenes_equal(const Scene& a, const Scene& b) {
  const bool region_eq =
      a.region.x_min == b.region.x_min && a.region.x_max == b.region.x_max &&
      a.region.y_min == b.region.y_min && a.region.y_max == b.region.y_max &&
      a.region.z_min == b.region.z_min && a.region.z_max == b.region.z_max;
  if (!region_eq || a.class_names != b.class_names ||
      a.boxes.size() != b.boxes.size() || a.rigs.size() != b.rigs.size() ||
      !(a.bev == b.bev))
    return false;
  for (std::size_t i = 0; i < a.boxes.size(); ++i) {
    const auto& x = a.boxes[i];
    const auto& y = b.boxes[i];
    if (x.center.x != y.center.x || x.center.y != y.center.y ||
        x.center.z != y.center.z || x.dims.x != y.dims.x ||
        x.dims.y != y.dims.y || x.dims.z != y.dims.z || x.yaw != y.yaw ||
        x.class_id != y.class_id)
      return false;
  }
  for (std::size_t i = 0; i < a.rigs.size(); ++i) {
    const auto& x = a.rigs[i];
    const auto& y = b.rigs[i];
    if (x.id != y.id || x.feature_stride != y.feature_stride) return false;
    if (x.intrinsics.fx != y.intrinsics.fx ||
        x.intrinsics.fy != y.intrinsics.fy ||
        x.intrinsics.cx != y.intrinsics.cx ||
        x.intrinsics.cy != y.intrinsics.cy ||
        x.intrinsics.width != y.intrinsics.width ||
        x.intrinsics.height != y.intrinsics.height)
      return false;
    if (x.cam_to_lidar.rotation.m != y.cam_to_lidar.rotation.m) return false;
    if (x.cam_to_lidar.translation.x != y.cam_to_lidar.translation.x ||
        x.cam_to_lidar.translation.y != y.cam_to_lidar.translation.y ||
        x.cam_to_lidar.translation.z != y.cam_to_lidar.translation.z)
      return false;
  }
  return true;
}

}  // namespace raysel
