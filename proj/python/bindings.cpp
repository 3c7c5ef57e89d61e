// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "raysel/harness.hpp"
#include "raysel/ray_pe.hpp"

namespace py = pybind11;
using namespace raysel;

PYBIND11_MODULE(_core, m) {
  m.doc() = "ray-aware supervision, class-balanced token sampling and ray "
            "positional encodings";

  py::class_<Vec3>(m, "Vec3")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"),
           py::arg("z"))
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("norm", &Vec3::norm)
      .def("dot", &Vec3::dot)
      .def("cross", &Vec3::cross)
      .def("__repr__", [](const Vec3& v) {
        return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) +
               ", " + std::to_string(v.z) + ")";
      });

  py::class_<Mat3>(m, "Mat3")
      .def(py::init<>())
      .def_readwrite("m", &Mat3::m)
      .def_static("identity", &Mat3::identity)
      .def_static("rotation_z", &Mat3::rotation_z)
      .def("determinant", &Mat3::determinant)
      .def("transposed", &Mat3::transposed);

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def_readwrite("rotation", &RigidTransform::rotation)
      .def_readwrite("translation", &RigidTransform::translation)
      .def("apply", &RigidTransform::apply)
      .def("rotate", &RigidTransform::rotate)
      .def("inverse", &RigidTransform::inverse)
      .def("is_rigid", &RigidTransform::is_rigid, py::arg("tol") = kGeomTol);

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init<>())
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("width", &CameraIntrinsics::width)
      .def_readwrite("height", &CameraIntrinsics::height);

  py::class_<CameraRig>(m, "CameraRig")
      .def(py::init<>())
      .def_readwrite("id", &CameraRig::id)
      .def_readwrite("intrinsics", &CameraRig::intrinsics)
      .def_readwrite("cam_to_lidar", &CameraRig::cam_to_lidar)
      .def_readwrite("feature_stride", &CameraRig::feature_stride)
      .def("optical_center", &CameraRig::optical_center)
      .def("grid_rows", &CameraRig::grid_rows)
      .def("grid_cols", &CameraRig::grid_cols);

  py::class_<Ray>(m, "Ray")
      .def_static("through", &Ray::through, py::arg("origin"), py::arg("dir"))
      .def_readwrite("origin", &Ray::origin)
      .def_readwrite("direction", &Ray::direction);

  py::class_<OrientedBox3D>(m, "OrientedBox3D")
      .def(py::init<>())
      .def_readwrite("center", &OrientedBox3D::center)
      .def_readwrite("dims", &OrientedBox3D::dims)
      .def_readwrite("yaw", &OrientedBox3D::yaw)
      .def_readwrite("class_id", &OrientedBox3D::class_id);

  py::class_<RayHit>(m, "RayHit")
      .def_readonly("t_near", &RayHit::t_near)
      .def_readonly("t_far", &RayHit::t_far);

  py::class_<PixelUV>(m, "PixelUV")
      .def_readonly("u", &PixelUV::u)
      .def_readonly("v", &PixelUV::v);

  py::class_<SceneRegion>(m, "SceneRegion")
      .def(py::init<>())
      .def_readwrite("x_min", &SceneRegion::x_min)
      .def_readwrite("x_max", &SceneRegion::x_max)
      .def_readwrite("y_min", &SceneRegion::y_min)
      .def_readwrite("y_max", &SceneRegion::y_max)
      .def_readwrite("z_min", &SceneRegion::z_min)
      .def_readwrite("z_max", &SceneRegion::z_max);

  py::enum_<GridKind>(m, "GridKind")
      .value("CAMERA", GridKind::Camera)
      .value("BEV", GridKind::Bev);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_static("camera", &GridSpec::camera)
      .def_static("bev", &GridSpec::bev)
      .def_readwrite("kind", &GridSpec::kind)
      .def_readwrite("rows", &GridSpec::rows)
      .def_readwrite("cols", &GridSpec::cols)
      .def_readwrite("cell_size", &GridSpec::cell_size)
      .def_readwrite("origin", &GridSpec::origin)
      .def_readwrite("rig_id", &GridSpec::rig_id)
      .def("num_cells", &GridSpec::num_cells)
      .def("bev_cell_center", &GridSpec::bev_cell_center);

  py::class_<Scene>(m, "Scene")
      .def(py::init<>())
      .def_readwrite("region", &Scene::region)
      .def_readwrite("boxes", &Scene::boxes)
      .def_readwrite("rigs", &Scene::rigs)
      .def_readwrite("bev", &Scene::bev)
      .def_readwrite("class_names", &Scene::class_names)
      .def("num_classes", &Scene::num_classes);

  py::class_<ClassDistribution>(m, "ClassDistribution")
      .def(py::init<>())
      .def_readwrite("counts", &ClassDistribution::counts)
      .def("total", &ClassDistribution::total);

  py::class_<SupervisionMask>(m, "SupervisionMask")
      .def_readwrite("grid", &SupervisionMask::grid)
      .def_readwrite("values", &SupervisionMask::values)
      .def("at", [](const SupervisionMask& m_, int i, int j) {
        return m_.at(i, j);
      })
      .def("positive_count", &SupervisionMask::positive_count);

  py::class_<SalienceGrid>(m, "SalienceGrid")
      .def(py::init<>())
      .def_readwrite("grid", &SalienceGrid::grid)
      .def_readwrite("num_classes", &SalienceGrid::num_classes)
      .def_readwrite("logits", &SalienceGrid::logits)
      .def("num_tokens", &SalienceGrid::num_tokens)
      .def("max_logit", &SalienceGrid::max_logit)
      .def("argmax_class", &SalienceGrid::argmax_class);

  py::enum_<WeightMode>(m, "WeightMode")
      .value("MULTIPLY", WeightMode::kMultiply)
      .value("ASSIGN", WeightMode::kAssign);

  py::enum_<DistributionSource>(m, "DistributionSource")
      .value("PREDICTED", DistributionSource::kPredicted)
      .value("GROUND_TRUTH", DistributionSource::kGroundTruth);

  py::class_<CbsConfig>(m, "CbsConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &CbsConfig::lambda)
      .def_readwrite("rho", &CbsConfig::rho)
      .def_readwrite("omega1", &CbsConfig::omega1)
      .def_readwrite("weight_mode", &CbsConfig::weight_mode)
      .def_readwrite("distribution_source", &CbsConfig::distribution_source);

  py::class_<TokenWeights>(m, "TokenWeights")
      .def_readwrite("weights", &TokenWeights::weights)
      .def_readwrite("selected", &TokenWeights::selected);

  py::class_<TokenSet>(m, "TokenSet")
      .def_readwrite("kept", &TokenSet::kept)
      .def_readwrite("ratio", &TokenSet::ratio)
      .def_readwrite("grid", &TokenSet::grid);

  py::enum_<AnchorSource>(m, "AnchorSource")
      .value("CAMERA", AnchorSource::kCamera)
      .value("BEV", AnchorSource::kBev)
      .value("QUERY", AnchorSource::kQuery);

  py::class_<AnchorSequence>(m, "AnchorSequence")
      .def_readwrite("points", &AnchorSequence::points)
      .def_readwrite("ts", &AnchorSequence::ts)
      .def_readwrite("clamped", &AnchorSequence::clamped)
      .def_readwrite("source", &AnchorSequence::source)
      .def_readwrite("region", &AnchorSequence::region)
      .def("size", &AnchorSequence::size);

  py::class_<PositionalEncoding>(m, "PositionalEncoding")
      .def_readwrite("values", &PositionalEncoding::values);

  py::class_<EvalRow>(m, "EvalRow")
      .def_readonly("rho", &EvalRow::rho)
      .def_readonly("tokens_kept", &EvalRow::tokens_kept)
      .def_readonly("foreground_recall", &EvalRow::foreground_recall)
      .def_readonly("per_class_recall", &EvalRow::per_class_recall)
      .def_readonly("flop_proxy", &EvalRow::flop_proxy);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("class_names", &EvalReport::class_names)
      .def_readonly("rows", &EvalReport::rows);

  // geometry
  m.def("intersect_ray_obb", &intersect_ray_obb, py::arg("ray"),
        py::arg("box"));
  m.def("point_in_obb", &point_in_obb, py::arg("p"), py::arg("box"));
  m.def("project", &project, py::arg("rig"), py::arg("p_cam"));
  m.def("backproject_pixel_ray", &backproject_pixel_ray, py::arg("rig"),
        py::arg("i"), py::arg("j"));
  m.def("wrap_angle", &wrap_angle);

  // scenes
  m.def("generate_scene", &generate_scene, py::arg("seed"), py::arg("n_boxes"),
        py::arg("class_mix"), py::arg("n_cameras") = 6);
  m.def("gt_distribution", &gt_distribution);
  m.def("save_scene", &save_scene, py::arg("scene"), py::arg("path"));
  m.def("load_scene", &load_scene, py::arg("path"));
  m.def("scene_to_json", &scene_to_json);
  m.def("scene_from_json", &scene_from_json);

  // supervision
  m.def("ras_camera_mask", &ras_camera_mask, py::arg("scene"),
        py::arg("rig_id"));
  m.def("ras_bev_mask", &ras_bev_mask, py::arg("scene"));
  m.def("ras_oracle_camera_mask", &ras_oracle_camera_mask, py::arg("scene"),
        py::arg("rig_id"), py::arg("march_step"));
  m.def("write_mask", &write_mask, py::arg("mask"), py::arg("path"));
  m.def("read_mask", &read_mask, py::arg("path"));

  // class-balanced sampling
  m.def(
      "token_weights",
      [](const SalienceGrid& sal, const CbsConfig& cfg,
         std::optional<ClassDistribution> gt) {
        return token_weights(sal, cfg, gt ? &*gt : nullptr);
      },
      py::arg("salience"), py::arg("config"),
      py::arg("gt") = std::nullopt);
  m.def("cbs_loss", &cbs_loss, py::arg("salience"), py::arg("labels"),
        py::arg("weights"));
  m.def("combined_cbs_loss", &combined_cbs_loss, py::arg("cam_losses"),
        py::arg("bev_loss"));
  m.def("select_tokens", &select_tokens, py::arg("salience"),
        py::arg("weights"), py::arg("rho"));
  m.def("perclass_recall", &perclass_recall, py::arg("tokens"),
        py::arg("mask"), py::arg("scene"));

  // ray positional encoding
  m.def("sample_camera_anchors", &sample_camera_anchors, py::arg("ray"),
        py::arg("d"), py::arg("region"), py::arg("d_min"), py::arg("d_max"));
  m.def("sample_bev_anchors", &sample_bev_anchors, py::arg("x"), py::arg("y"),
        py::arg("d"), py::arg("region"));
  m.def("embed", &embed, py::arg("anchors"), py::arg("embed_dim"));
  m.def("query_anchor_pair", &query_anchor_pair, py::arg("cam_ray"),
        py::arg("bev_x"), py::arg("bev_y"), py::arg("d"), py::arg("region"),
        py::arg("d_min"), py::arg("d_max"));
  m.def("embed_query", &embed_query, py::arg("cam_anchors"),
        py::arg("bev_anchors"), py::arg("embed_dim"));

  // harness
  m.def("perfect_logits", &perfect_logits, py::arg("scene"), py::arg("mask"));
  m.def("noisy_logits", &noisy_logits, py::arg("scene"), py::arg("mask"),
        py::arg("sigma"), py::arg("seed"));
  m.def("owner_labels", &owner_labels, py::arg("scene"), py::arg("mask"));
  m.def("foreground_recall", &foreground_recall, py::arg("tokens"),
        py::arg("mask"));
  m.def("eval_keeping_ratios", &eval_keeping_ratios, py::arg("scene"),
        py::arg("mask"), py::arg("salience"), py::arg("config"),
        py::arg("rhos"));
}
