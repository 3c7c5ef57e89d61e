// SPDX-License-Identifier: Apache-2.0
//
// raysel: scene generation, ray-aware supervision masks, class-balanced
// token sampling, keeping-ratio evaluation and ray positional encodings,
// all from one binary. Exit codes: 0 success, 2 usage, 3 I/O or format.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raysel/harness.hpp"
#include "raysel/ray_pe.hpp"

namespace fs = std::filesystem;
using namespace raysel;

namespace {

std::vector<double> parse_real_list(const std::string& text,
                                    const std::string& flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": cannot parse real '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

WeightMode parse_weight_mode(const std::string& s) {
  if (s == "multiply") return WeightMode::kMultiply;
  if (s == "assign") return WeightMode::kAssign;
  throw std::invalid_argument("--weight-mode must be multiply or assign");
}

DistributionSource parse_dist_source(const std::string& s) {
  if (s == "predicted") return DistributionSource::kPredicted;
  if (s == "gt") return DistributionSource::kGroundTruth;
  throw std::invalid_argument("--dist-source must be predicted or gt");
}

/// "bev" or "cam:<k>".
GridSpec parse_grid(const std::string& s, const Scene& scene) {
  if (s == "bev") return scene.bev;
  if (s.rfind("cam:", 0) == 0) {
    int k = 0;
    try {
      k = std::stoi(s.substr(4));
    } catch (const std::exception&) {
      throw std::invalid_argument("--grid: bad camera index in '" + s + "'");
    }
    return GridSpec::camera(scene.rig(k));
  }
  throw std::invalid_argument("--grid must be bev or cam:<k>");
}

SupervisionMask mask_for_grid(const Scene& scene, const GridSpec& grid) {
  return grid.kind == GridKind::Bev ? ras_bev_mask(scene)
                                    : ras_camera_mask(scene, grid.rig_id);
}

/// file path | "perfect" | "noisy:<sigma>".
SalienceGrid resolve_logits(const std::string& spec, const Scene& scene,
                            const SupervisionMask& mask,
                            std::uint64_t noise_seed) {
  if (spec == "perfect") return perfect_logits(scene, mask);
  if (spec.rfind("noisy:", 0) == 0) {
    double sigma = 0.0;
    try {
      sigma = std::stod(spec.substr(6));
    } catch (const std::exception&) {
      throw std::invalid_argument("--logits: bad sigma in '" + spec + "'");
    }
    if (sigma < 0.0)
      throw std::invalid_argument("--logits: sigma must be >= 0");
    return noisy_logits(scene, mask, sigma, noise_seed);
  }
  SalienceGrid sal = load_logits(spec);
  if (sal.grid.rows != mask.grid.rows || sal.grid.cols != mask.grid.cols)
    throw std::runtime_error("logits file " + spec +
                             " does not match the selected grid shape");
  if (sal.num_classes != scene.num_classes())
    throw std::runtime_error("logits file " + spec +
                             " has the wrong class count");
  sal.grid = mask.grid;
  return sal;
}

void print_distribution(const Scene& scene) {
  const ClassDistribution dist = gt_distribution(scene);
  std::cout << "boxes: " << scene.boxes.size() << '\n';
  for (std::size_t c = 0; c < scene.class_names.size(); ++c)
    std::cout << scene.class_names[c] << ": " << dist.counts[c] << '\n';
}

struct OracleReportRow {
  std::string mask_name;
  int cells{0};
  int excluded{0};
  int disagreements{0};
};

/// Camera-mask disagreement vs the marching oracle, excluding cells whose
/// longest analytic chord is below 2 * march_step.
OracleReportRow compare_camera_oracle(const Scene& scene, int rig_id,
                                      const SupervisionMask& analytic,
                                      const SupervisionMask& oracle,
                                      double march_step) {
  OracleReportRow row;
  row.mask_name = mask_modality_token(analytic.grid);
  row.cells = analytic.grid.num_cells();
  const CameraRig& rig = scene.rig(rig_id);
  for (int i = 0; i < analytic.grid.rows; ++i)
    for (int j = 0; j < analytic.grid.cols; ++j) {
      if (analytic.at(i, j) == oracle.at(i, j)) continue;
      const Ray ray = backproject_pixel_ray(rig, i, j);
      double max_chord = 0.0;
      for (const auto& box : scene.boxes)
        if (const auto hit = intersect_ray_obb(ray, box))
          max_chord = std::max(max_chord, hit->t_far - hit->t_near);
      if (max_chord < 2.0 * march_step)
        ++row.excluded;
      else
        ++row.disagreements;
    }
  return row;
}

OracleReportRow compare_bev_oracle(const Scene& scene,
                                   const SupervisionMask& analytic,
                                   const SupervisionMask& oracle) {
  OracleReportRow row;
  row.mask_name = "bev";
  row.cells = analytic.grid.num_cells();
  for (int i = 0; i < analytic.grid.rows; ++i)
    for (int j = 0; j < analytic.grid.cols; ++j) {
      if (analytic.at(i, j) == oracle.at(i, j)) continue;
      const Vec3 center = analytic.grid.bev_cell_center(i, j);
      double edge = std::numeric_limits<double>::infinity();
      for (const auto& box : scene.boxes)
        edge = std::min(edge,
                        footprint_boundary_distance(box, center.x, center.y));
      if (edge < 1e-6)
        ++row.excluded;
      else
        ++row.disagreements;
    }
  return row;
}

int run(int argc, char** argv) {
  CLI::App app{"ray-aware supervision, class-balanced token sampling and ray "
               "positional encodings over synthetic multi-camera scenes"};
  app.set_config("--config");
  app.require_subcommand(1);

  // gen-scene
  auto* gen = app.add_subcommand("gen-scene", "generate a synthetic scene");
  std::uint64_t gen_seed = 0;
  int gen_boxes = 50;
  int gen_cameras = 6;
  std::string gen_mix = "0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1";
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--boxes", gen_boxes, "number of ground-truth boxes");
  gen->add_option("--cameras", gen_cameras, "number of surround cameras");
  gen->add_option("--class-mix", gen_mix,
                  "comma-separated class probabilities (defines C)");
  gen->add_option("--out", gen_out, "scene JSON output path")->required();
  gen->callback([&] {
    const Scene scene =
        generate_scene(gen_seed, gen_boxes, parse_real_list(gen_mix, "--class-mix"),
                       gen_cameras);
    save_scene(scene, gen_out);
    print_distribution(scene);
  });

  // supervise
  auto* sup = app.add_subcommand("supervise", "write RAS masks for a scene");
  std::string sup_scene, sup_out_dir;
  bool sup_oracle = false;
  double sup_step = 0.01;
  sup->add_option("--scene", sup_scene, "scene JSON path")->required();
  sup->add_option("--out-dir", sup_out_dir, "output directory")->required();
  sup->add_flag("--oracle", sup_oracle,
                "also write brute-force oracle masks and a disagreement "
                "report");
  sup->add_option("--march-step", sup_step, "oracle march step in meters");
  sup->callback([&] {
    const Scene scene = load_scene(sup_scene);
    fs::create_directories(sup_out_dir);
    const fs::path dir(sup_out_dir);
    std::vector<OracleReportRow> report;

    for (const auto& rig : scene.rigs) {
      const SupervisionMask mask = ras_camera_mask(scene, rig.id);
      write_mask(mask, (dir / ("camera" + std::to_string(rig.id) + ".mask"))
                           .string());
      if (sup_oracle) {
        const SupervisionMask oracle =
            ras_oracle_camera_mask(scene, rig.id, sup_step);
        write_mask(oracle,
                   (dir / ("camera" + std::to_string(rig.id) + ".oracle.mask"))
                       .string());
        report.push_back(
            compare_camera_oracle(scene, rig.id, mask, oracle, sup_step));
      }
    }
    const SupervisionMask bev = ras_bev_mask(scene);
    write_mask(bev, (dir / "bev.mask").string());
    if (sup_oracle) {
      const SupervisionMask oracle = bev_footprint_mask(scene);
      write_mask(oracle, (dir / "bev.oracle.mask").string());
      report.push_back(compare_bev_oracle(scene, bev, oracle));

      std::ofstream out(dir / "oracle_report.csv", std::ios::binary);
      out << "mask,cells,excluded,disagreements\n";
      for (const auto& row : report) {
        out << row.mask_name << ',' << row.cells << ',' << row.excluded << ','
            << row.disagreements << '\n';
        std::cout << row.mask_name << ": " << row.disagreements
                  << " disagreements (" << row.excluded
                  << " cells excluded)\n";
      }
      if (!out) throw std::runtime_error("write failed: oracle_report.csv");
    }
  });

  // sample
  auto* smp = app.add_subcommand("sample",
                                 "class-balanced token weights and pruning");
  std::string smp_scene, smp_grid = "bev", smp_logits = "perfect", smp_out;
  std::string smp_weights_out;
  std::string smp_weight_mode = "multiply", smp_dist_source = "predicted";
  double smp_lambda = 1.5, smp_rho = 1.0;
  std::uint64_t smp_noise_seed = 0;
  smp->add_option("--scene", smp_scene, "scene JSON path")->required();
  smp->add_option("--grid", smp_grid, "token grid: bev or cam:<k>");
  smp->add_option("--logits", smp_logits,
                  "logits file, 'perfect', or 'noisy:<sigma>'");
  smp->add_option("--lambda", smp_lambda, "selected-token weight factor (>= 1)");
  smp->add_option("--rho", smp_rho, "keeping ratio in (0, 1]");
  smp->add_option("--weight-mode", smp_weight_mode, "multiply or assign");
  smp->add_option("--dist-source", smp_dist_source, "predicted or gt");
  smp->add_option("--noise-seed", smp_noise_seed, "seed for noisy logits");
  smp->add_option("--out", smp_out, "kept-token CSV path")->required();
  smp->add_option("--weights-out", smp_weights_out,
                  "weights CSV path (default: <out>.weights.csv)");
  smp->callback([&] {
    const Scene scene = load_scene(smp_scene);
    const GridSpec grid = parse_grid(smp_grid, scene);
    const SupervisionMask mask = mask_for_grid(scene, grid);
    const SalienceGrid sal =
        resolve_logits(smp_logits, scene, mask, smp_noise_seed);
    CbsConfig cfg;
    cfg.lambda = smp_lambda;
    cfg.rho = smp_rho;
    cfg.weight_mode = parse_weight_mode(smp_weight_mode);
    cfg.distribution_source = parse_dist_source(smp_dist_source);
    cfg.validate();
    const ClassDistribution dist = gt_distribution(scene);
    const TokenWeights w = token_weights(sal, cfg, &dist);
    const TokenSet tok = select_tokens(sal, w, cfg.rho);
    write_token_set(tok, sal, w, smp_out);
    write_weights(w, smp_weights_out.empty() ? smp_out + ".weights.csv"
                                             : smp_weights_out);
    std::cout << "kept " << tok.kept.size() << " of " << sal.num_tokens()
              << " tokens (foreground recall "
              << foreground_recall(tok, mask) << ")\n";
  });

  // eval
  auto* evl = app.add_subcommand("eval", "keeping-ratio sweep report");
  std::string evl_scene, evl_grid = "bev", evl_logits = "perfect", evl_out;
  std::string evl_rhos = "0.25,0.5,0.75,1.0";
  std::string evl_weight_mode = "multiply", evl_dist_source = "predicted";
  double evl_lambda = 1.5;
  std::uint64_t evl_noise_seed = 0;
  evl->add_option("--scene", evl_scene, "scene JSON path")->required();
  evl->add_option("--grid", evl_grid, "token grid: bev or cam:<k>");
  evl->add_option("--logits", evl_logits,
                  "logits file, 'perfect', or 'noisy:<sigma>'");
  evl->add_option("--lambda", evl_lambda, "selected-token weight factor");
  evl->add_option("--rhos", evl_rhos, "comma-separated keeping ratios");
  evl->add_option("--weight-mode", evl_weight_mode, "multiply or assign");
  evl->add_option("--dist-source", evl_dist_source, "predicted or gt");
  evl->add_option("--noise-seed", evl_noise_seed, "seed for noisy logits");
  evl->add_option("--out", evl_out, "report CSV path")->required();
  evl->callback([&] {
    const Scene scene = load_scene(evl_scene);
    const GridSpec grid = parse_grid(evl_grid, scene);
    const SupervisionMask mask = mask_for_grid(scene, grid);
    const SalienceGrid sal =
        resolve_logits(evl_logits, scene, mask, evl_noise_seed);
    const std::vector<double> rhos = parse_real_list(evl_rhos, "--rhos");
    for (double rho : rhos)
      if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("--rhos: every rho must be in (0, 1]");
    CbsConfig cfg;
    cfg.lambda = evl_lambda;
    cfg.weight_mode = parse_weight_mode(evl_weight_mode);
    cfg.distribution_source = parse_dist_source(evl_dist_source);
    cfg.validate();
    const EvalReport report =
        eval_keeping_ratios(scene, mask, sal, cfg, rhos);
    write_eval_csv(report, evl_out);
    for (const auto& row : report.rows)
      std::cout << "rho " << row.rho << ": kept " << row.tokens_kept
                << ", foreground recall " << row.foreground_recall
                << ", flop proxy " << row.flop_proxy << '\n';
  });

  // render
  auto* ren = app.add_subcommand("render", "mask/token heatmap to PGM/PPM");
  std::string ren_mask, ren_tokens, ren_out;
  ren->add_option("--mask", ren_mask, "mask file path")->required();
  ren->add_option("--tokens", ren_tokens, "kept-token CSV (overlay mode)");
  ren->add_option("--out", ren_out, "output image path")->required();
  ren->callback([&] {
    const SupervisionMask mask = read_mask(ren_mask);
    if (ren_tokens.empty()) {
      write_image(render_mask(mask), ren_out);
    } else {
      TokenSet tok = read_token_set(ren_tokens);
      tok.grid = mask.grid;
      write_image(render_overlay(mask, tok), ren_out);
    }
  });

  // raype
  auto* rpe = app.add_subcommand("raype",
                                 "anchor sampling and positional encodings "
                                 "for one pixel ray and its BEV column");
  std::string rpe_scene, rpe_pixel = "0,0", rpe_out;
  int rpe_camera = 0, rpe_d = 16, rpe_embed = 192;
  double rpe_dmin = 1.0, rpe_dmax = 54.0;
  rpe->add_option("--scene", rpe_scene, "scene JSON path")->required();
  rpe->add_option("--camera", rpe_camera, "camera rig id");
  rpe->add_option("--pixel", rpe_pixel, "feature cell as i,j");
  rpe->add_option("--d", rpe_d, "anchor points per ray");
  rpe->add_option("--embed-dim", rpe_embed, "encoding length per ray");
  rpe->add_option("--d-min", rpe_dmin, "near sampling distance (m)");
  rpe->add_option("--d-max", rpe_dmax, "far sampling distance (m)");
  rpe->add_option("--out", rpe_out, "output path prefix")->required();
  rpe->callback([&] {
    const Scene scene = load_scene(rpe_scene);
    const std::vector<double> ij = parse_real_list(rpe_pixel, "--pixel");
    if (ij.size() != 2) throw std::invalid_argument("--pixel must be i,j");
    const int i = static_cast<int>(ij[0]);
    const int j = static_cast<int>(ij[1]);
    const CameraRig& rig = scene.rig(rpe_camera);
    const Ray ray = backproject_pixel_ray(rig, i, j);

    // BEV cell under the point where the ray enters the region.
    const SceneRegion& rg = scene.region;
    OrientedBox3D region_box;
    region_box.center = {0.5 * (rg.x_min + rg.x_max),
                         0.5 * (rg.y_min + rg.y_max),
                         0.5 * (rg.z_min + rg.z_max)};
    region_box.dims = {rg.x_extent(), rg.y_extent(), rg.z_extent()};
    const auto entry = intersect_ray_obb(ray, region_box);
    if (!entry)
      throw std::invalid_argument("pixel ray never enters the scene region");
    const Vec3 p = ray.origin + ray.direction * entry->t_near;
    const int bi = std::clamp(
        static_cast<int>(std::floor((p.y - scene.bev.origin.y) /
                                    scene.bev.cell_size)),
        0, scene.bev.rows - 1);
    const int bj = std::clamp(
        static_cast<int>(std::floor((p.x - scene.bev.origin.x) /
                                    scene.bev.cell_size)),
        0, scene.bev.cols - 1);
    const Vec3 cell = scene.bev.bev_cell_center(bi, bj);

    auto [cam_seq, bev_seq] = query_anchor_pair(ray, cell.x, cell.y, rpe_d,
                                               rg, rpe_dmin, rpe_dmax);
    cam_seq.cam_id = rpe_camera;
    cam_seq.row = i;
    cam_seq.col = j;
    bev_seq.row = bi;
    bev_seq.col = bj;

    write_anchors(cam_seq, rpe_out + "camera_anchors.csv");
    write_encoding(embed(cam_seq, rpe_embed), rpe_out + "camera_encoding.csv");
    write_anchors(bev_seq, rpe_out + "bev_anchors.csv");
    write_encoding(embed(bev_seq, rpe_embed), rpe_out + "bev_encoding.csv");
    write_encoding(embed_query(cam_seq, bev_seq, rpe_embed),
                   rpe_out + "query_encoding.csv");
    std::cout << "camera " << rpe_camera << " pixel (" << i << ", " << j
              << ") -> bev cell (" << bi << ", " << bj << ")\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
