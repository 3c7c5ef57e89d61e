// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raysel/scene.hpp"
#include "raysel/supervision.hpp"

namespace raysel {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// round(x) with half-up ties, as used for the keeping-ratio token count.
inline int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

/// Per-token class logits over a grid. Token n = i*cols + j.
struct SalienceGrid {
  GridSpec grid;
  int num_classes{0};
  std::vector<double> logits;  // [n * num_classes + c]

  int num_tokens() const { return grid.num_cells(); }
  double logit(int n, int c) const { return logits[n * num_classes + c]; }
  double& logit(int n, int c) { return logits[n * num_classes + c]; }

  /// Max logit of token n, the per-token salience scalar.
  double max_logit(int n) const;
  /// Argmax class of token n, ties broken by lower class index.
  int argmax_class(int n) const;
};

enum class WeightMode {
  kMultiply,  // selected tokens get W = sigmoid(P) * lambda
  kAssign,    // selected tokens get W = lambda
};

enum class DistributionSource {
  kPredicted,    // per-class quota = count of tokens predicted as that class
  kGroundTruth,  // per-class quota = ground-truth box count
};

struct CbsConfig {
  double lambda{1.5};
  double rho{1.0};
  double omega1{1.5};  // overall supervision-loss weight, housed here
  WeightMode weight_mode{WeightMode::kMultiply};
  DistributionSource distribution_source{DistributionSource::kPredicted};

  void validate() const {
    if (!(lambda >= 1.0))
      throw std::invalid_argument("CbsConfig: lambda must be >= 1");
    if (!(rho > 0.0 && rho <= 1.0))
      throw std::invalid_argument("CbsConfig: rho must be in (0, 1]");
  }
};

struct TokenWeights {
  std::vector<double> weights;
  std::vector<std::uint8_t> selected;  // membership flags for the set D
};

struct TokenSet {
  std::vector<int> kept;  // ascending token indices
  double ratio{1.0};
  GridSpec grid;
};

/// Class-balanced token weighting. Every token starts at sigmoid of its max
/// logit; then, per class, the quota of highest-salience tokens predicted as
/// that class is boosted by lambda. With the ground-truth source the quota
/// comes from the scene's class distribution instead of the predictions.
TokenWeights token_weights(const SalienceGrid& sal, const CbsConfig& cfg,
                           const ClassDistribution* gt = nullptr);

/// Mean over tokens of -W_n * log softmax(logits_n)[labels_n].
double cbs_loss(const SalienceGrid& sal, const std::vector<int>& labels,
                const TokenWeights& w);

/// Camera losses averaged over rigs, plus the BEV loss.
double combined_cbs_loss(const std::vector<double>& cam_losses,
                         double bev_loss);

/// Keeps the round(rho*N) tokens with the largest reweighted salience
/// W_n * sigmoid(max logit), ties broken by lower index.
TokenSet select_tokens(const SalienceGrid& sal, const TokenWeights& w,
                       double rho);

/// For each class, the fraction of mask-positive cells covered by that
/// class's boxes that survive into `kept`. Classes with no covered cells
/// report 1.0.
std::vector<double> perclass_recall(const TokenSet& tok,
                                    const SupervisionMask& mask,
                                    const Scene& scene);

/// CSV "index,row,col,score" (score = ranking salience of each kept token).
void write_token_set(const TokenSet& tok, const SalienceGrid& sal,
                     const TokenWeights& w, const std::string& path);

/// Reads back a token-set CSV. Only the indices are recovered; the grid is
/// supplied by the caller that knows the owning mask.
TokenSet read_token_set(const std::string& path);

/// CSV "index,weight,selected".
void write_weights(const TokenWeights& w, const std::string& path);

}  // namespace raysel
