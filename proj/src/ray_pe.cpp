// SPDX-License-Identifier: Apache-2.0
#include "raysel/ray_pe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace raysel {

namespace {

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace

AnchorSequence sample_camera_anchors(const Ray& ray, int d,
                                     const SceneRegion& region, double d_min,
                                     double d_max) {
  if (d < 2)
    throw std::invalid_argument("sample_camera_anchors: d must be >= 2");
  if (!(d_min > 0.0) || !(d_min < d_max))
    throw std::invalid_argument(
        "sample_camera_anchors: need 0 < d_min < d_max");

  AnchorSequence seq;
  seq.source = AnchorSource::kCamera;
  seq.region = region;
  seq.points.reserve(d);
  seq.ts.reserve(d);
  seq.clamped.reserve(d);
  const double step = (d_max - d_min) / (d - 1);
  for (int k = 0; k < d; ++k) {
    const double t = d_min + k * step;
    const Vec3 p = ray.origin + ray.direction * t;
    const Vec3 q{clamp(p.x, region.x_min, region.x_max),
                 clamp(p.y, region.y_min, region.y_max),
                 clamp(p.z, region.z_min, region.z_max)};
    seq.points.push_back(q);
    seq.ts.push_back(t);
    seq.clamped.push_back(
        (q.x != p.x || q.y != p.y || q.z != p.z) ? 1 : 0);
  }
  return seq;
}

AnchorSequence sample_bev_anchors(double x, double y, int d,
                                  const SceneRegion& region) {
  if (d < 1) throw std::invalid_argument("sample_bev_anchors: d must be >= 1");

  AnchorSequence seq;
  seq.source = AnchorSource::kBev;
  seq.region = region;
  seq.points.reserve(d);
  seq.ts.reserve(d);
  seq.clamped.assign(d, 0);
  if (d == 1) {
    const double z = 0.5 * (region.z_min + region.z_max);
    seq.points.push_back({x, y, z});
    seq.ts.push_back(z);
    return seq;
  }
  const double step = region.z_extent() / (d - 1);
  for (int k = 0; k < d; ++k) {
    const double z = region.z_min + k * step;
    seq.points.push_back({x, y, z});
    seq.ts.push_back(z);
  }
  return seq;
}

PositionalEncoding embed(const AnchorSequence& anchors, int embed_dim) {
  if (embed_dim < 2)
    throw std::invalid_argument("embed: embed_dim must be >= 2");
  const int d = anchors.size();
  if (d < 1) throw std::invalid_argument("embed: empty anchor sequence");

  const SceneRegion& r = anchors.region;
  std::vector<double> coords;
  coords.reserve(3 * d);
  for (const Vec3& p : anchors.points) {
    coords.push_back((p.x - r.x_min) / r.x_extent());
    coords.push_back((p.y - r.y_min) / r.y_extent());
    coords.push_back((p.z - r.z_min) / r.z_extent());
  }

  PositionalEncoding pe;
  pe.values.assign(embed_dim, 0.0);
  const int freqs = embed_dim / (6 * d);
  int idx = 0;
  for (double q : coords)
    for (int m = 0; m < freqs; ++m) {
      const double phase = q * M_PI * std::pow(2.0, m);
      pe.values[idx++] = std::sin(phase);
      pe.values[idx++] = std::cos(phase);
    }
  return pe;
}

std::pair<AnchorSequence, AnchorSequence> query_anchor_pair(
    const Ray& cam_ray, double bev_x, double bev_y, int d,
    const SceneRegion& region, double d_min, double d_max) {
  return {sample_camera_anchors(cam_ray, d, region, d_min, d_max),
          sample_bev_anchors(bev_x, bev_y, d, region)};
}

PositionalEncoding embed_query(const AnchorSequence& cam_anchors,
                               const AnchorSequence& bev_anchors,
                               int embed_dim) {
  PositionalEncoding cam = embed(cam_anchors, embed_dim);
  const PositionalEncoding bev = embed(bev_anchors, embed_dim);
  cam.values.insert(cam.values.end(), bev.values.begin(), bev.values.end());
  return cam;
}

namespace {

std::string source_token(const AnchorSequence& a) {
  switch (a.source) {
    case AnchorSource::kCamera:
      return "camera:" + std::to_string(a.cam_id) + ":" +
             std::to_string(a.row) + ":" + std::to_string(a.col);
    case AnchorSource::kBev:
      return "bev:" + std::to_string(a.row) + ":" + std::to_string(a.col);
    case AnchorSource::kQuery:
      return "query";
  }
  return "unknown";
}

}  // namespace

void write_anchors(const AnchorSequence& anchors, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "source,k,x,y,z,clamped\n";
  out.precision(17);
  const std::string src = source_token(anchors);
  for (int k = 0; k < anchors.size(); ++k) {
    const Vec3& p = anchors.points[k];
    out << src << ',' << k << ',' << p.x << ',' << p.y << ',' << p.z << ','
        << static_cast<int>(anchors.clamped[k]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_encoding(const PositionalEncoding& pe, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "component,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < pe.values.size(); ++i)
    out << i << ',' << pe.values[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace raysel
