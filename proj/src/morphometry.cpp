#include "flair/morphometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

namespace flair {
namespace {

constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

// One Zhang–Suen sub-iteration over a bitmap with a one-pixel background border.
// Neighbours are P2..P9 clockwise from north.
bool thinning_step(Bitmap& img, bool first) {
  std::vector<std::pair<int, int>> doomed;
  for (int y = 1; y + 1 < img.rows(); ++y) {
    for (int x = 1; x + 1 < img.cols(); ++x) {
      if (!img(y, x)) continue;
      int p[8];
      int b = 0;
      for (int k = 0; k < 8; ++k) {
        p[k] = img(y + kDy[k], x + kDx[k]);
        b += p[k];
      }
      if (b < 2 || b > 6) continue;
      int a = 0;
      for (int k = 0; k < 8; ++k) a += (p[k] == 0 && p[(k + 1) % 8] == 1);
      if (a != 1) continue;
      // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
      if (first) {
        if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0) continue;
      } else {
        if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0) continue;
      }
      doomed.emplace_back(y, x);
    }
  }
  for (auto [y, x] : doomed) img(y, x) = 0;
  return !doomed.empty();
}

std::int64_t key(const PixelPoint& p, int width) { return std::int64_t(p.y) * width + p.x; }

}  // namespace

void CameraModel::validate() const {
  const double fields[] = {sensor_width_mm, image_width_px, altitude_m, depth_m, focal_length_mm,
                           fps};
  const char* names[] = {"sensor_width_mm", "image_width_px", "altitude_m", "depth_m",
                         "focal_length_mm", "fps"};
  for (int i = 0; i < 6; ++i) {
    if (!(fields[i] > 0.0) || !std::isfinite(fields[i])) {
      throw InputError(std::string("camera parameter ") + names[i] + " must be positive");
    }
  }
}

double CameraModel::meters_per_pixel() const {
  validate();
  return (sensor_width_mm / image_width_px) * ((altitude_m + depth_m) / focal_length_mm);
}

std::vector<std::vector<int>> Skeleton::adjacency() const {
  std::unordered_map<std::int64_t, int> index;
  index.reserve(pixels.size());
  for (int i = 0; i < int(pixels.size()); ++i) index.emplace(key(pixels[i], width), i);
  std::vector<std::vector<int>> adj(pixels.size());
  for (int i = 0; i < int(pixels.size()); ++i) {
    for (int k = 0; k < 8; ++k) {
      const PixelPoint q{pixels[i].x + kDx[k], pixels[i].y + kDy[k]};
      if (q.x < 0 || q.y < 0 || q.x >= width || q.y >= height) continue;
      if (auto it = index.find(key(q, width)); it != index.end()) adj[i].push_back(it->second);
    }
  }
  return adj;
}

std::vector<int> Skeleton::endpoints() const {
  std::vector<int> out;
  const auto adj = adjacency();
  for (int i = 0; i < int(pixels.size()); ++i) {
    if (adj[i].size() == 1) out.push_back(i);
  }
  return out;
}

BinaryMask Skeleton::to_mask() const { return BinaryMask::from_pixels(width, height, pixels); }

Skeleton skeletonize(const BinaryMask& m) {
  if (m.is_empty()) throw InputError("cannot skeletonize an empty mask");
  const BoundingBox box = bbox(m);
  const int w = box.x_max - box.x_min + 1;
  const int h = box.y_max - box.y_min + 1;
  Bitmap img = Bitmap::Zero(h + 2, w + 2);
  for (const PixelPoint& p : m.foreground_pixels()) img(p.y - box.y_min + 1, p.x - box.x_min + 1) = 1;

  bool changed = true;
  while (changed) {
    const bool a = thinning_step(img, true);
    const bool b = thinning_step(img, false);
    changed = a || b;
  }

  Skeleton s;
  s.width = m.width();
  s.height = m.height();
  for (int y = 1; y <= h; ++y) {
    for (int x = 1; x <= w; ++x) {
      if (img(y, x)) s.pixels.push_back({x - 1 + box.x_min, y - 1 + box.y_min});
    }
  }
  return s;
}

SkeletonPath longest_skeleton_path(const Skeleton& s) {
  SkeletonPath best;
  if (s.pixels.empty()) return best;
  const auto adj = s.adjacency();
  const int n = int(s.pixels.size());

  // Path ends: pixels whose neighbours are all mutually adjacent. This is the
  // one-neighbour case plus staircase tips left by thinning.
  auto touching = [&](int a, int b) {
    return std::abs(s.pixels[a].x - s.pixels[b].x) <= 1 &&
           std::abs(s.pixels[a].y - s.pixels[b].y) <= 1;
  };
  std::vector<int> tips;
  for (int i = 0; i < n; ++i) {
    if (adj[i].empty()) continue;
    bool clique = true;
    for (std::size_t u = 0; u < adj[i].size() && clique; ++u) {
      for (std::size_t v = u + 1; v < adj[i].size() && clique; ++v) {
        clique = touching(adj[i][u], adj[i][v]);
      }
    }
    if (clique) tips.push_back(i);
  }

  best.points = {s.pixels.front()};
  if (tips.size() < 2) return best;

  const double diag = std::sqrt(2.0);
  std::vector<double> dist(n);
  std::vector<int> prev(n);
  double best_len = -1.0;
  for (int src : tips) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(prev.begin(), prev.end(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[src] = 0.0;
    queue.emplace(0.0, src);
    while (!queue.empty()) {
      auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      for (int v : adj[u]) {
        const bool diagonal = s.pixels[u].x != s.pixels[v].x && s.pixels[u].y != s.pixels[v].y;
        const double nd = d + (diagonal ? diag : 1.0);
        if (nd < dist[v]) {
          dist[v] = nd;
          prev[v] = u;
          queue.emplace(nd, v);
        }
      }
    }
    for (int dst : tips) {
      if (dst <= src || !std::isfinite(dist[dst])) continue;
      // Strictly longer wins; tips are visited in raster order so ties keep the first pair.
      if (dist[dst] > best_len + 1e-12) {
        best_len = dist[dst];
        best.points.clear();
        for (int v = dst; v != -1; v = prev[v]) best.points.push_back(s.pixels[v]);
        std::reverse(best.points.begin(), best.points.end());
      }
    }
  }
  best.length_px = std::max(best_len, 0.0);
  return best;
}

double march_to_boundary(const Bitmap& mask, const RealPoint& start, const RealPoint& direction) {
  constexpr double kStep = 0.25;
  const double limit = double(mask.rows() + mask.cols()) * 2.0;
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < mask.cols() && y < mask.rows() && mask(y, x) != 0;
  };
  int last_x = int(std::floor(start.x() + 0.5));
  int last_y = int(std::floor(start.y() + 0.5));
  if (!inside(last_x, last_y)) return 0.0;
  for (double t = kStep; t < limit; t += kStep) {
    const RealPoint p = start + t * direction;
    const int x = int(std::floor(p.x() + 0.5));
    const int y = int(std::floor(p.y() + 0.5));
    if (!inside(x, y)) break;
    last_x = x;
    last_y = y;
  }
  const double along = (RealPoint(last_x, last_y) - start).dot(direction);
  return std::max(along, 0.0);
}

LengthBreakdown skeleton_length_breakdown(const Skeleton& s, const BinaryMask& m) {
  LengthBreakdown out;
  const SkeletonPath path = longest_skeleton_path(s);
  if (path.points.empty()) return out;
  out.path_px = path.length_px;
  const Bitmap bitmap = m.to_bitmap();

  if (path.points.size() == 1) {
    // No direction from the path itself: use the principal axis of the mask.
    const auto pixels = m.foreground_pixels();
    const RealPoint c = centroid(m);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const PixelPoint& p : pixels) {
      const RealPoint d = p.real() - c;
      cov += d * d.transpose();
    }
    RealPoint axis(1.0, 0.0);
    if (cov.norm() > 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
      axis = solver.eigenvectors().col(1).normalized();
    }
    const RealPoint start = path.points.front().real();
    out.extension_px = march_to_boundary(bitmap, start, axis) + march_to_boundary(bitmap, start, -axis);
    return out;
  }

  // Direction at each end: mean of the last (up to) three steps.
  auto end_direction = [](const std::vector<PixelPoint>& pts) {
    const std::size_t last = pts.size() - 1;
    const std::size_t back = last >= 3 ? last - 3 : 0;
    return RealPoint(pts[last].real() - pts[back].real()).normalized();
  };
  std::vector<PixelPoint> reversed(path.points.rbegin(), path.points.rend());
  out.extension_px = march_to_boundary(bitmap, path.points.back().real(), end_direction(path.points)) +
                     march_to_boundary(bitmap, reversed.back().real(), end_direction(reversed));
  return out;
}

double skeleton_length_px(const Skeleton& s, const BinaryMask& m) {
  return skeleton_length_breakdown(s, m).total_px();
}

double pixels_to_meters(double length_px, const CameraModel& cam) {
  if (!(length_px >= 0.0)) throw InputError("pixel length must be nonnegative");
  return cam.meters_per_pixel() * length_px;
}

double measure_length(const BinaryMask& m, const CameraModel& cam) {
  cam.validate();
  return pixels_to_meters(skeleton_length_px(skeletonize(m), m), cam);
}

}  // namespace flair
