// SPDX-License-Identifier: Apache-2.0
#include "raysel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "raysel/rng.hpp"

namespace raysel {

namespace {

/// Owning box of a positive cell: smallest t_near among strict hits.
int owner_box(const Ray& ray, const Scene& scene) {
  int best = -1;
  double best_t = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < scene.boxes.size(); ++b) {
    const auto hit = intersect_ray_obb(ray, scene.boxes[b]);
    if (hit && hit->t_far > hit->t_near && hit->t_near < best_t) {
      best_t = hit->t_near;
      best = static_cast<int>(b);
    }
  }
  return best;
}

}  // namespace

SalienceGrid perfect_logits(const Scene& scene, const SupervisionMask& mask) {
  SalienceGrid sal;
  sal.grid = mask.grid;
  sal.num_classes = scene.num_classes();
  sal.logits.assign(static_cast<std::size_t>(sal.num_tokens()) *
                        sal.num_classes,
                    0.0);
  for (int i = 0; i < mask.grid.rows; ++i)
    for (int j = 0; j < mask.grid.cols; ++j) {
      const int n = i * mask.grid.cols + j;
      if (!mask.values[n]) continue;
      const int b = owner_box(grid_cell_ray(mask.grid, scene, i, j), scene);
      if (b >= 0) sal.logit(n, scene.boxes[b].class_id) = 10.0;
    }
  return sal;
}

SalienceGrid noisy_logits(const Scene& scene, const SupervisionMask& mask,
                          double sigma, std::uint64_t seed) {
  SalienceGrid sal = perfect_logits(scene, mask);
  DetRng rng(seed);
  for (double& v : sal.logits) v += sigma * rng.gaussian();
  return sal;
}

std::vector<int> owner_labels(const Scene& scene,
                              const SupervisionMask& mask) {
  std::vector<int> labels(mask.grid.num_cells(), 0);
  for (int i = 0; i < mask.grid.rows; ++i)
    for (int j = 0; j < mask.grid.cols; ++j) {
      const int n = i * mask.grid.cols + j;
      if (!mask.values[n]) continue;
      const int b = owner_box(grid_cell_ray(mask.grid, scene, i, j), scene);
      if (b >= 0) labels[n] = scene.boxes[b].class_id;
    }
  return labels;
}

void save_logits(const SalienceGrid& sal, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "LOGITS " << sal.grid.rows << ' ' << sal.grid.cols << ' '
      << sal.num_classes << '\n';
  out.precision(17);
  for (int n = 0; n < sal.num_tokens(); ++n) {
    for (int c = 0; c < sal.num_classes; ++c) {
      if (c) out << ' ';
      out << sal.logit(n, c);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

SalienceGrid load_logits(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open logits file: " + path);
  std::string magic;
  int rows = 0, cols = 0, classes = 0;
  if (!(in >> magic >> rows >> cols >> classes) || magic != "LOGITS" ||
      rows <= 0 || cols <= 0 || classes <= 0)
    throw std::runtime_error("malformed logits header in " + path);
  SalienceGrid sal;
  sal.grid.rows = rows;
  sal.grid.cols = cols;
  sal.num_classes = classes;
  sal.logits.resize(static_cast<std::size_t>(rows) * cols * classes);
  for (double& v : sal.logits) {
    if (!(in >> v))
      throw std::runtime_error("truncated logits data in " + path);
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite logit in " + path);
  }
  return sal;
}

double foreground_recall(const TokenSet& tok, const SupervisionMask& mask) {
  std::vector<std::uint8_t> kept(mask.grid.num_cells(), 0);
  for (int n : tok.kept) kept[n] = 1;
  std::int64_t positives = 0, retained = 0;
  for (int n = 0; n < mask.grid.num_cells(); ++n)
    if (mask.values[n]) {
      ++positives;
      if (kept[n]) ++retained;
    }
  return positives == 0 ? 1.0 : static_cast<double>(retained) / positives;
}

EvalReport eval_keeping_ratios(const Scene& scene, const SupervisionMask& mask,
                               const SalienceGrid& sal, const CbsConfig& cfg,
                               const std::vector<double>& rhos) {
  EvalReport report;
  report.class_names = scene.class_names;
  const ClassDistribution dist = gt_distribution(scene);
  const TokenWeights w = token_weights(sal, cfg, &dist);
  for (double rho : rhos) {
    const TokenSet tok = select_tokens(sal, w, rho);
    EvalRow row;
    row.rho = rho;
    row.tokens_kept = static_cast<int>(tok.kept.size());
    row.foreground_recall = foreground_recall(tok, mask);
    row.per_class_recall = perclass_recall(tok, mask, scene);
    row.flop_proxy =
        static_cast<double>(row.tokens_kept) / sal.num_tokens();
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "rho,tokens_kept,foreground_recall";
  for (const auto& name : report.class_names) out << ",recall_" << name;
  out << ",flop_proxy\n";
  out.precision(17);
  for (const auto& row : report.rows) {
    out << row.rho << ',' << row.tokens_kept << ',' << row.foreground_recall;
    for (double r : row.per_class_recall) out << ',' << r;
    out << ',' << row.flop_proxy << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ImageU8 render_mask(const SupervisionMask& mask) {
  ImageU8 img;
  img.width = mask.grid.cols;
  img.height = mask.grid.rows;
  img.channels = 1;
  img.pixels.resize(mask.values.size());
  for (std::size_t n = 0; n < mask.values.size(); ++n)
    img.pixels[n] = mask.values[n] ? 255 : 0;
  return img;
}

ImageU8 render_overlay(const SupervisionMask& mask, const TokenSet& tok) {
  std::vector<std::uint8_t> kept(mask.grid.num_cells(), 0);
  for (int n : tok.kept) {
    if (n < 0 || n >= mask.grid.num_cells())
      throw std::runtime_error("token index out of range for mask");
    kept[n] = 1;
  }
  ImageU8 img;
  img.width = mask.grid.cols;
  img.height = mask.grid.rows;
  img.channels = 3;
  img.pixels.resize(mask.values.size() * 3);
  for (std::size_t n = 0; n < mask.values.size(); ++n) {
    std::uint8_t r = 0, g = 0, b = 0;
    if (kept[n] && mask.values[n]) {
      g = 255;
    } else if (kept[n]) {
      r = 255;
    } else if (mask.values[n]) {
      r = g = b = 255;
    }
    img.pixels[3 * n] = r;
    img.pixels[3 * n + 1] = g;
    img.pixels[3 * n + 2] = b;
  }
  return img;
}

void write_image(const ImageU8& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_image: 1 or 3 channels only");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << (img.channels == 1 ? "P5" : "P6") << '\n'
      << img.width << ' ' << img.height << '\n'
      << "255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

ImageU8 read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image file: " + path);
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  if (!(in >> magic >> width >> height >> maxval) ||
      (magic != "P5" && magic != "P6") || width <= 0 || height <= 0 ||
      maxval != 255)
    throw std::runtime_error("malformed PGM/PPM header in " + path);
  in.get();  // the single whitespace byte after maxval

  ImageU8 img;
  img.width = width;
  img.height = height;
  img.channels = magic == "P5" ? 1 : 3;
  img.pixels.resize(static_cast<std::size_t>(width) * height * img.channels);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw std::runtime_error("truncated pixel data in " + path);
  return img;
}

}  // namespace raysel
