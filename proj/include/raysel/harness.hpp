// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raysel/cbs.hpp"
#include "raysel/scene.hpp"
#include "raysel/supervision.hpp"

namespace raysel {

/// Logits synthesized from the RAS mask: +10 on the owning class at positive
/// cells (owner = hit box with the smallest entry distance, ties to the
/// lower box index), 0 everywhere else.
SalienceGrid perfect_logits(const Scene& scene, const SupervisionMask& mask);

/// perfect_logits plus seeded N(0, sigma) noise on every logit.
SalienceGrid noisy_logits(const Scene& scene, const SupervisionMask& mask,
                          double sigma, std::uint64_t seed);

/// Per-cell ground-truth class labels matching perfect_logits' owner rule.
/// Background cells get class 0.
std::vector<int> owner_labels(const Scene& scene, const SupervisionMask& mask);

/// Logits file: header "LOGITS <rows> <cols> <classes>", then rows*cols
/// lines of <classes> reals.
void save_logits(const SalienceGrid& sal, const std::string& path);
SalienceGrid load_logits(const std::string& path);

struct EvalRow {
  double rho{1.0};
  int tokens_kept{0};
  double foreground_recall{1.0};
  std::vector<double> per_class_recall;
  double flop_proxy{1.0};  // tokens_kept / N, the relative decoder cost
};

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<EvalRow> rows;
};

/// Keeping-ratio sweep: one row per rho, weights recomputed from cfg.
EvalReport eval_keeping_ratios(const Scene& scene, const SupervisionMask& mask,
                               const SalienceGrid& sal, const CbsConfig& cfg,
                               const std::vector<double>& rhos);

/// CSV "rho,tokens_kept,foreground_recall,recall_<class>...,flop_proxy".
void write_eval_csv(const EvalReport& report, const std::string& path);

/// Fraction of mask-positive cells present in kept; 1.0 when the mask has no
/// positive cells.
double foreground_recall(const TokenSet& tok, const SupervisionMask& mask);

struct ImageU8 {
  int width{0};
  int height{0};
  int channels{1};  // 1 = PGM (P5), 3 = PPM (P6)
  std::vector<std::uint8_t> pixels;
};

/// Grayscale rendering of a mask: 0 -> 0, 1 -> 255.
ImageU8 render_mask(const SupervisionMask& mask);

/// RGB overlay of kept tokens on a mask. Kept positives are green, kept
/// negatives red; unkept positives white, unkept negatives black.
ImageU8 render_overlay(const SupervisionMask& mask, const TokenSet& tok);

/// Binary PGM (P5) for 1-channel images, PPM (P6) for 3-channel.
void write_image(const ImageU8& img, const std::string& path);
ImageU8 read_image(const std::string& path);

}  // namespace raysel
