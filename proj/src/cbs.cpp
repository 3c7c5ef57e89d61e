// SPDX-License-Identifier: Apache-2.0
#include "raysel/cbs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace raysel {

double SalienceGrid::max_logit(int n) const {
  double best = logit(n, 0);
  for (int c = 1; c < num_classes; ++c) best = std::max(best, logit(n, c));
  return best;
}

int SalienceGrid::argmax_class(int n) const {
  int best = 0;
  for (int c = 1; c < num_classes; ++c)
    if (logit(n, c) > logit(n, best)) best = c;
  return best;
}

TokenWeights token_weights(const SalienceGrid& sal, const CbsConfig& cfg,
                           const ClassDistribution* gt) {
  cfg.validate();
  const int n_tokens = sal.num_tokens();
  const int n_classes = sal.num_classes;
  if (n_tokens < 1)
    throw std::invalid_argument("token_weights: empty salience grid");
  if (cfg.distribution_source == DistributionSource::kGroundTruth) {
    if (gt == nullptr)
      throw std::invalid_argument(
          "token_weights: ground-truth distribution source requires counts");
    if (static_cast<int>(gt->counts.size()) != n_classes)
      throw std::invalid_argument(
          "token_weights: class distribution size mismatch");
  }

  std::vector<double> max_logit(n_tokens);
  std::vector<int> argmax(n_tokens);
  for (int n = 0; n < n_tokens; ++n) {
    max_logit[n] = sal.max_logit(n);
    argmax[n] = sal.argmax_class(n);
  }

  std::vector<std::int64_t> bag(n_classes, 0);
  if (cfg.distribution_source == DistributionSource::kPredicted) {
    for (int n = 0; n < n_tokens; ++n) ++bag[argmax[n]];
  } else {
    bag = gt->counts;
  }

  TokenWeights out;
  out.weights.resize(n_tokens);
  out.selected.assign(n_tokens, 0);
  for (int n = 0; n < n_tokens; ++n) out.weights[n] = sigmoid(max_logit[n]);

  // Per class, boost the quota of highest-salience tokens predicted as that
  // class. Ties in salience break toward the lower token index.
  std::vector<int> pool;
  for (int c = 0; c < n_classes; ++c) {
    const std::int64_t quota = bag[c];
    if (quota <= 0) continue;
    pool.clear();
    for (int n = 0; n < n_tokens; ++n)
      if (argmax[n] == c) pool.push_back(n);
    if (pool.empty()) continue;
    const std::size_t take =
        std::min<std::size_t>(pool.size(), static_cast<std::size_t>(quota));
    std::partial_sort(pool.begin(), pool.begin() + take, pool.end(),
                      [&](int a, int b) {
                        if (max_logit[a] != max_logit[b])
                          return max_logit[a] > max_logit[b];
                        return a < b;
                      });
    for (std::size_t r = 0; r < take; ++r) {
      const int n = pool[r];
      out.selected[n] = 1;
      out.weights[n] = cfg.weight_mode == WeightMode::kMultiply
                           ? out.weights[n] * cfg.lambda
                           : cfg.lambda;
    }
  }
  return out;
}

double cbs_loss(const SalienceGrid& sal, const std::vector<int>& labels,
                const TokenWeights& w) {
  const int n_tokens = sal.num_tokens();
  const int n_classes = sal.num_classes;
  if (static_cast<int>(labels.size()) != n_tokens ||
      static_cast<int>(w.weights.size()) != n_tokens)
    throw std::invalid_argument("cbs_loss: size mismatch");
  if (n_tokens == 0) return 0.0;

  double total = 0.0;
  for (int n = 0; n < n_tokens; ++n) {
    const int y = labels[n];
    if (y < 0 || y >= n_classes)
      throw std::invalid_argument("cbs_loss: label out of range");
    // Log-softmax shifted by the max logit, with the max term split out so
    // log1p keeps relative accuracy even when the remainder is tiny.
    const int top = sal.argmax_class(n);
    const double m = sal.logit(n, top);
    double rest = 0.0;
    for (int c = 0; c < n_classes; ++c)
      if (c != top) rest += std::exp(sal.logit(n, c) - m);
    const double log_softmax = sal.logit(n, y) - m - std::log1p(rest);
    total += -w.weights[n] * log_softmax;
  }
  return total / n_tokens;
}

double combined_cbs_loss(const std::vector<double>& cam_losses,
                         double bev_loss) {
  if (cam_losses.empty()) return bev_loss;
  const double sum = std::accumulate(cam_losses.begin(), cam_losses.end(), 0.0);
  return sum / static_cast<double>(cam_losses.size()) + bev_loss;
}

TokenSet select_tokens(const SalienceGrid& sal, const TokenWeights& w,
                       double rho) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("select_tokens: rho must be in (0, 1]");
  const int n_tokens = sal.num_tokens();
  if (static_cast<int>(w.weights.size()) != n_tokens)
    throw std::invalid_argument("select_tokens: size mismatch");

  std::vector<double> score(n_tokens);
  for (int n = 0; n < n_tokens; ++n)
    score[n] = w.weights[n] * sigmoid(sal.max_logit(n));

  const int keep = round_half_up(rho * n_tokens);
  std::vector<int> order(n_tokens);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](int a, int b) {
                      if (score[a] != score[b]) return score[a] > score[b];
                      return a < b;
                    });

  TokenSet out;
  out.ratio = rho;
  out.grid = sal.grid;
  out.kept.assign(order.begin(), order.begin() + keep);
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

std::vector<double> perclass_recall(const TokenSet& tok,
                                    const SupervisionMask& mask,
                                    const Scene& scene) {
  if (!(tok.grid == mask.grid))
    throw std::invalid_argument("perclass_recall: token/mask grid mismatch");
  const int n_classes = scene.num_classes();
  const int n_tokens = mask.grid.num_cells();

  std::vector<std::uint8_t> kept(n_tokens, 0);
  for (int n : tok.kept) kept[n] = 1;

  // A cell counts for every class whose boxes' rays cover it.
  std::vector<std::int64_t> covered(n_classes, 0);
  std::vector<std::int64_t> retained(n_classes, 0);
  std::vector<std::uint8_t> hit_class(n_classes);
  for (int i = 0; i < mask.grid.rows; ++i)
    for (int j = 0; j < mask.grid.cols; ++j) {
      const int n = i * mask.grid.cols + j;
      if (!mask.values[n]) continue;
      std::fill(hit_class.begin(), hit_class.end(), 0);
      const Ray ray = grid_cell_ray(mask.grid, scene, i, j);
      for (const auto& box : scene.boxes)
        if (!hit_class[box.class_id] && ray_labels_positive(ray, box))
          hit_class[box.class_id] = 1;
      for (int c = 0; c < n_classes; ++c)
        if (hit_class[c]) {
          ++covered[c];
          if (kept[n]) ++retained[c];
        }
    }

  std::vector<double> recall(n_classes, 1.0);
  for (int c = 0; c < n_classes; ++c)
    if (covered[c] > 0)
      recall[c] = static_cast<double>(retained[c]) / covered[c];
  return recall;
}

void write_token_set(const TokenSet& tok, const SalienceGrid& sal,
                     const TokenWeights& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "index,row,col,score\n";
  out.precision(17);
  for (int n : tok.kept) {
    const double score = w.weights[n] * sigmoid(sal.max_logit(n));
    out << n << ',' << n / tok.grid.cols << ',' << n % tok.grid.cols << ','
        << score << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TokenSet read_token_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open token file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,", 0) != 0)
    throw std::runtime_error("malformed token CSV header in " + path);
  TokenSet out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.kept.push_back(std::stoi(line.substr(0, line.find(','))));
    } catch (const std::exception&) {
      throw std::runtime_error("malformed token CSV row in " + path);
    }
  }
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

void write_weights(const TokenWeights& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "index,weight,selected\n";
  out.precision(17);
  for (std::size_t n = 0; n < w.weights.size(); ++n)
    out << n << ',' << w.weights[n] << ','
        << static_cast<int>(w.selected[n]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace raysel
