// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "raysel/scene.hpp"

namespace raysel {

enum class AnchorSource { kCamera, kBev, kQuery };

/// Ordered 3D anchor points sampled along a ray (camera) or a vertical
/// column (BEV). Camera anchors leaving the region are clamped per-axis to
/// the boundary; the flag records which ones, so on-ray checks can skip them.
struct AnchorSequence {
  std::vector<Vec3> points;
  std::vector<double> ts;  // strictly increasing ray parameter / height
  std::vector<std::uint8_t> clamped;
  AnchorSource source{AnchorSource::kCamera};
  SceneRegion region;
  // Optional provenance labels, set by callers that know the grid indices.
  int cam_id{-1};
  int row{-1};
  int col{-1};

  int size() const { return static_cast<int>(points.size()); }
};

struct PositionalEncoding {
  std::vector<double> values;
};

struct RayPeConfig {
  int d{16};
  double d_min{1.0};
  double d_max{54.0};
  int embed_dim{192};
};

/// d anchors at evenly spaced ray parameters in [d_min, d_max], near to far.
AnchorSequence sample_camera_anchors(const Ray& ray, int d,
                                     const SceneRegion& region, double d_min,
                                     double d_max);

/// d anchors along +z through (x, y): evenly spaced over the region's z
/// range for d >= 2, the midpoint for d = 1.
AnchorSequence sample_bev_anchors(double x, double y, int d,
                                  const SceneRegion& region);

/// Fixed sinusoidal code over the region-normalized anchor coordinates.
/// With F = floor(embed_dim / (6d)) frequencies, each coordinate q emits
/// sin(q*pi*2^m) and cos(q*pi*2^m) for m in [0, F); the tail is zero-padded
/// to exactly embed_dim.
PositionalEncoding embed(const AnchorSequence& anchors, int embed_dim);

/// The two legs of a query: anchors along the camera ray and along the BEV
/// vertical through (bev_x, bev_y).
std::pair<AnchorSequence, AnchorSequence> query_anchor_pair(
    const Ray& cam_ray, double bev_x, double bev_y, int d,
    const SceneRegion& region, double d_min, double d_max);

/// Query code: embed of each leg, concatenated (2 * embed_dim values).
PositionalEncoding embed_query(const AnchorSequence& cam_anchors,
                               const AnchorSequence& bev_anchors,
                               int embed_dim);

/// CSV "source,k,x,y,z,clamped".
void write_anchors(const AnchorSequence& anchors, const std::string& path);

/// CSV "component,value".
void write_encoding(const PositionalEncoding& pe, const std::string& path);

}  // namespace raysel
