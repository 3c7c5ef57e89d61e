// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "raysel/harness.hpp"

using namespace raysel;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("perfect logits: +10 on the owner class, zero background") {
  const Scene scene = generate_scene(61, 15, {0.7, 0.3});
  const SupervisionMask mask = ras_bev_mask(scene);
  const SalienceGrid sal = perfect_logits(scene, mask);
  REQUIRE(sal.num_tokens() == mask.grid.num_cells());
  for (int n = 0; n < sal.num_tokens(); ++n) {
    if (mask.values[n]) {
      CHECK(sal.max_logit(n) == 10.0);
      int tens = 0;
      for (int c = 0; c < sal.num_classes; ++c)
        if (sal.logit(n, c) == 10.0) ++tens;
      CHECK(tens == 1);
    } else {
      for (int c = 0; c < sal.num_classes; ++c) CHECK(sal.logit(n, c) == 0.0);
    }
  }
}

TEST_CASE("perfect logits: the nearer of two stacked boxes owns the cell") {
  Scene scene = generate_scene(1, 0, {0.5, 0.5}, 1);
  // Two boxes over the same footprint, class 1 sits lower (nearer to the
  // upward BEV ray origin at z_min).
  OrientedBox3D low;
  low.center = scene.bev.bev_cell_center(60, 60);
  low.center.z = -3.0;
  low.dims = {2.4, 2.4, 1.0};
  low.class_id = 1;
  OrientedBox3D high = low;
  high.center.z = 1.0;
  high.class_id = 0;
  scene.boxes = {high, low};  // farther box listed first

  const SupervisionMask mask = ras_bev_mask(scene);
  const SalienceGrid sal = perfect_logits(scene, mask);
  const std::vector<int> labels = owner_labels(scene, mask);
  const int n = 60 * scene.bev.cols + 60;
  REQUIRE(mask.values[n] == 1);
  CHECK(sal.logit(n, 1) == 10.0);
  CHECK(sal.logit(n, 0) == 0.0);
  CHECK(labels[n] == 1);
}

TEST_CASE("noisy logits are seeded and reproducible") {
  const Scene scene = generate_scene(62, 10, {0.8, 0.2});
  const SupervisionMask mask = ras_bev_mask(scene);
  const SalienceGrid a = noisy_logits(scene, mask, 1.0, 5);
  const SalienceGrid b = noisy_logits(scene, mask, 1.0, 5);
  const SalienceGrid c = noisy_logits(scene, mask, 1.0, 6);
  CHECK(a.logits == b.logits);
  CHECK(a.logits != c.logits);
  CHECK(a.logits != perfect_logits(scene, mask).logits);
}

TEST_CASE("logits files round trip") {
  const Scene scene = generate_scene(63, 8, {0.6, 0.4});
  const SupervisionMask mask = ras_camera_mask(scene, 2);
  const SalienceGrid sal = noisy_logits(scene, mask, 0.7, 3);
  const std::string path = temp_path("raysel_logits_rt.tmp");
  save_logits(sal, path);
  const SalienceGrid back = load_logits(path);
  CHECK(back.logits == sal.logits);
  CHECK(back.grid.rows == sal.grid.rows);
  CHECK(back.grid.cols == sal.grid.cols);
  CHECK(back.num_classes == sal.num_classes);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_logits("/nonexistent/logits"), std::runtime_error);
  // Non-finite tokens are rejected, either by the number parser (libstdc++
  // refuses "nan") or by the explicit finiteness check.
  {
    std::ofstream out(path, std::ios::binary);
    out << "LOGITS 1 1 2\n0.5 nan\n";
  }
  CHECK_THROWS_AS(load_logits(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("eval sweep: exact token counts, monotone recall") {
  const Scene scene = generate_scene(7, 50, {0.9, 0.1});
  const SupervisionMask mask = ras_bev_mask(scene);
  const SalienceGrid sal = perfect_logits(scene, mask);
  CbsConfig cfg;
  const EvalReport report = eval_keeping_ratios(
      scene, mask, sal, cfg, {0.25, 0.5, 0.75, 1.0});
  REQUIRE(report.rows.size() == 4);

  const int n = sal.num_tokens();
  double prev_recall = 0.0;
  for (const auto& row : report.rows) {
    CHECK(row.tokens_kept == round_half_up(row.rho * n));
    CHECK(row.flop_proxy ==
          doctest::Approx(static_cast<double>(row.tokens_kept) / n)
              .epsilon(1e-15));
    CHECK(std::abs(row.flop_proxy - row.rho) <= 1.0 / n + 1e-12);
    CHECK(row.foreground_recall >= prev_recall);
    prev_recall = row.foreground_recall;
  }
  // Perfect logits and foreground around 4% of the grid: full recall at
  // every keeping ratio.
  const double fg_fraction =
      static_cast<double>(mask.positive_count()) / n;
  REQUIRE(fg_fraction <= 0.25);
  for (const auto& row : report.rows) CHECK(row.foreground_recall == 1.0);
  CHECK(report.rows.back().flop_proxy == 1.0);

  const std::string path = temp_path("raysel_eval.csv");
  write_eval_csv(report, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "rho,tokens_kept,foreground_recall,recall_car,recall_traffic_cone,"
        "flop_proxy");
  std::remove(path.c_str());
}

TEST_CASE("foreground recall: empty mask reports 1.0") {
  const Scene scene = generate_scene(3, 0, {1.0}, 1);
  const SupervisionMask mask = ras_bev_mask(scene);
  TokenSet none;
  none.grid = mask.grid;
  CHECK(foreground_recall(none, mask) == 1.0);
}

TEST_CASE("render: all-zero mask becomes an all-black PGM") {
  const Scene scene = generate_scene(3, 0, {1.0}, 1);
  const SupervisionMask mask = ras_bev_mask(scene);
  const ImageU8 img = render_mask(mask);
  CHECK(img.width == 180);
  CHECK(img.height == 180);
  CHECK(img.channels == 1);
  for (auto p : img.pixels) CHECK(p == 0);
}

TEST_CASE("render: images round trip pixel-exact") {
  const Scene scene = generate_scene(64, 20, {0.8, 0.2});
  const SupervisionMask mask = ras_bev_mask(scene);
  const std::string path = temp_path("raysel_img.tmp");

  const ImageU8 gray = render_mask(mask);
  write_image(gray, path);
  ImageU8 back = read_image(path);
  CHECK(back.channels == 1);
  CHECK(back.pixels == gray.pixels);

  const SalienceGrid sal = perfect_logits(scene, mask);
  CbsConfig cfg;
  const ClassDistribution dist = gt_distribution(scene);
  const TokenWeights w = token_weights(sal, cfg, &dist);
  const TokenSet tok = select_tokens(sal, w, 0.3);
  const ImageU8 rgb = render_overlay(mask, tok);
  write_image(rgb, path);
  back = read_image(path);
  CHECK(back.channels == 3);
  CHECK(back.pixels == rgb.pixels);
  std::remove(path.c_str());
}

TEST_CASE("render overlay: tint categories match set arithmetic") {
  const Scene scene = generate_scene(65, 25, {0.9, 0.1});
  const SupervisionMask mask = ras_bev_mask(scene);
  const SalienceGrid sal = noisy_logits(scene, mask, 1.0, 1);
  CbsConfig cfg;
  const ClassDistribution dist = gt_distribution(scene);
  const TokenWeights w = token_weights(sal, cfg, &dist);
  const TokenSet tok = select_tokens(sal, w, 0.25);
  const ImageU8 img = render_overlay(mask, tok);

  std::vector<std::uint8_t> kept(mask.grid.num_cells(), 0);
  for (int n : tok.kept) kept[n] = 1;
  int kept_pos = 0, kept_neg = 0, unkept_pos = 0;
  for (int n = 0; n < mask.grid.num_cells(); ++n) {
    if (kept[n] && mask.values[n]) ++kept_pos;
    if (kept[n] && !mask.values[n]) ++kept_neg;
    if (!kept[n] && mask.values[n]) ++unkept_pos;
  }
  int green = 0, red = 0, white = 0;
  for (int n = 0; n < mask.grid.num_cells(); ++n) {
    const std::uint8_t r = img.pixels[3 * n], g = img.pixels[3 * n + 1],
                       b = img.pixels[3 * n + 2];
    if (r == 0 && g == 255 && b == 0) ++green;
    if (r == 255 && g == 0 && b == 0) ++red;
    if (r == 255 && g == 255 && b == 255) ++white;
  }
  CHECK(green == kept_pos);
  CHECK(red == kept_neg);
  CHECK(white == unkept_pos);
  CHECK(static_cast<int>(tok.kept.size()) == kept_pos + kept_neg);
}

TEST_CASE("read_image rejects malformed input") {
  const std::string path = temp_path("raysel_bad_img.tmp");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P7\n2 2\n255\nXXXX";
  }
  CHECK_THROWS_AS(read_image(path), std::runtime_error);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n4 4\n255\nXX";  // truncated pixel payload
  }
  CHECK_THROWS_AS(read_image(path), std::runtime_error);
  std::remove(path.c_str());
}
