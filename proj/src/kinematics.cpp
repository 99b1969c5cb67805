#include "flair/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

namespace flair {
namespace {

using Int128 = __int128;

std::int64_t dist2(const PixelPoint& a, const PixelPoint& b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::int64_t cross(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
  return std::int64_t(a.x - o.x) * (b.y - o.y) - std::int64_t(a.y - o.y) * (b.x - o.x);
}

// Row extremes contain every extreme point of the pixel set.
std::vector<PixelPoint> row_extremes(const BinaryMask& m) {
  std::vector<PixelPoint> pts;
  const std::int64_t w = m.width();
  std::int64_t row = -1;
  for (const Span& s : m.spans()) {
    const std::int64_t y0 = s.begin / w;
    const std::int64_t y1 = (s.end - 1) / w;
    for (std::int64_t y = y0; y <= y1; ++y) {
      const int x_lo = int(y == y0 ? s.begin - y * w : 0);
      const int x_hi = int(y == y1 ? s.end - 1 - y * w : w - 1);
      if (y != row) {
        pts.push_back({x_lo, int(y)});
        pts.push_back({x_hi, int(y)});
        row = y;
      } else {
        pts.back().x = x_hi;
      }
    }
  }
  return pts;
}

// Andrew's monotone chain; drops collinear points.
std::vector<PixelPoint> convex_hull(std::vector<PixelPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const PixelPoint& a, const PixelPoint& b) {
    return std::tie(a.x, a.y) < std::tie(b.x, b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<PixelPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

void KinematicsConfig::validate() const {
  if (savgol_window < 1 || savgol_window % 2 == 0) throw InputError("savgol_window must be odd");
  if (savgol_order < 0 || savgol_order >= savgol_window) {
    throw InputError("savgol_order must be below savgol_window");
  }
  if (!(tbf_step_s > 0.0) || !(tbf_window_s > tbf_step_s)) {
    throw InputError("need tbf_window_s > tbf_step_s > 0");
  }
  if (!(min_extremum_fraction >= 0.0 && min_extremum_fraction < 1.0)) {
    throw InputError("min_extremum_fraction must lie in [0,1)");
  }
  if (!(max_gap_s >= 0.0)) throw InputError("max_gap_s must be nonnegative");
}

std::pair<PixelPoint, PixelPoint> farthest_pair(const BinaryMask& m) {
  if (area(m) < 2) throw InputError("farthest pair needs at least two foreground pixels");
  const std::vector<PixelPoint> hull = convex_hull(row_extremes(m));
  std::optional<std::pair<PixelPoint, PixelPoint>> best;
  std::int64_t best_d = -1;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      auto pair = std::minmax(hull[i], hull[j]);
      const std::int64_t d = dist2(pair.first, pair.second);
      if (d > best_d || (d == best_d && std::pair(pair.first, pair.second) < *best)) {
        best_d = d;
        best = std::pair(pair.first, pair.second);
      }
    }
  }
  return *best;
}

HeadTail head_tail(const BinaryMask& m) {
  const auto [a, b] = farthest_pair(m);
  const PixelMoments mo = moments(m);
  // Squared distance to the centroid scaled by count², exact in 128 bits.
  auto scaled = [&](const PixelPoint& p) {
    const Int128 dx = Int128(p.x) * mo.count - mo.sum_x;
    const Int128 dy = Int128(p.y) * mo.count - mo.sum_y;
    return dx * dx + dy * dy;
  };
  const Int128 da = scaled(a);
  const Int128 db = scaled(b);
  if (da == db) return {a, b, true};
  return da < db ? HeadTail{a, b, false} : HeadTail{b, a, false};
}

double tail_displacement(const BinaryMask& m) {
  const HeadTail ht = head_tail(m);
  const RealPoint com = centroid(m);
  const RealPoint heading = com - ht.head.real();
  const double norm = heading.norm();
  if (norm == 0.0) throw InputError("degenerate centerline");
  const RealPoint v = ht.tail.real() - com;
  return (v.x() * heading.y() - v.y() * heading.x()) / norm;
}

std::vector<double> sign_change_positions(const Eigen::VectorXd& series) {
  std::vector<double> out;
  Eigen::Index prev = -1;
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    const double v = series(i);
    if (v == 0.0) continue;
    if (prev >= 0 && (v > 0.0) != (series(prev) > 0.0)) {
      if (i == prev + 1) {
        out.push_back(double(prev) + series(prev) / (series(prev) - v));
      } else {
        out.push_back(0.5 * double(prev + i));  // middle of an exact-zero run
      }
    }
    prev = i;
  }
  return out;
}

std::vector<double> find_crossings(const Eigen::VectorXd& smoothed, double fps, int first_frame,
                                   double min_extremum_fraction) {
  const Eigen::Index n = smoothed.size();
  std::vector<double> out;
  if (n < 3) return out;
  const double peak = smoothed.cwiseAbs().maxCoeff();
  const double floor = min_extremum_fraction * peak;

  // Significant interior extrema, plateaus reduced to their midpoint. +1 max, -1 min.
  struct Extremum {
    double position;
    int kind;
  };
  std::vector<Extremum> extrema;
  for (Eigen::Index a = 1; a + 1 < n;) {
    Eigen::Index b = a;
    while (b + 1 < n - 1 && smoothed(b + 1) == smoothed(a)) ++b;
    const double v = smoothed(a);
    const double left = smoothed(a - 1);
    const double right = smoothed(b + 1);
    if (b + 1 < n) {
      if (v > left && v > right && v > 0.0 && v >= floor) extrema.push_back({0.5 * double(a + b), 1});
      if (v < left && v < right && v < 0.0 && -v >= floor) extrema.push_back({0.5 * double(a + b), -1});
    }
    a = b + 1;
  }

  const std::vector<double> changes = sign_change_positions(smoothed);
  std::size_t e = 0;
  std::vector<double> group;
  auto flush = [&] {
    if (!group.empty()) out.push_back((first_frame + group[(group.size() - 1) / 2]) / fps);
    group.clear();
  };
  std::optional<std::size_t> group_bracket;
  for (double c : changes) {
    while (e < extrema.size() && extrema[e].position < c) ++e;
    if (e == 0 || e == extrema.size()) continue;
    const Extremum& before = extrema[e - 1];
    const Extremum& after = extrema[e];
    if (before.kind == after.kind) continue;
    if (group_bracket != e) {
      flush();
      group_bracket = e;
    }
    group.push_back(c);
  }
  flush();
  return out;
}

BeatIntervals beat_intervals(std::span<const double> crossings) {
  BeatIntervals out;
  out.crossing_times.assign(crossings.begin(), crossings.end());
  for (std::size_t i = 0; i + 2 < crossings.size(); i += 2) {
    out.beats.emplace_back(crossings[i], crossings[i + 2]);
  }
  return out;
}

double fractional_beats(std::span<const std::pair<double, double>> beats, double lo, double hi) {
  double count = 0.0;
  for (auto [b0, b1] : beats) {
    const double overlap = std::min(hi, b1) - std::max(lo, b0);
    if (overlap > 0.0 && b1 > b0) count += overlap / (b1 - b0);
  }
  return count;
}

TbfSeries windowed_tbf(std::span<const std::pair<double, double>> beats, double duration_s,
                       const KinematicsConfig& cfg,
                       std::span<const std::pair<double, double>> observed) {
  cfg.validate();
  TbfSeries out;
  std::vector<std::pair<double, double>> windows;
  if (cfg.tbf_window_s >= duration_s) {
    windows.emplace_back(0.0, std::max(duration_s, 0.0));
  } else {
    for (int k = 0;; ++k) {
      const double start = k * cfg.tbf_step_s;
      if (start + cfg.tbf_window_s > duration_s + 1e-9) break;
      windows.emplace_back(start, start + cfg.tbf_window_s);
    }
  }
  std::vector<std::pair<double, double>> spans(observed.begin(), observed.end());
  if (spans.empty() && !beats.empty()) spans.emplace_back(beats.front().first, beats.back().second);
  for (auto [lo, hi] : windows) {
    double covered = 0.0;
    for (auto [s0, s1] : spans) covered += std::max(0.0, std::min(hi, s1) - std::max(lo, s0));
    out.window_centers_s.push_back(0.5 * (lo + hi));
    out.beats_per_second.push_back(covered > 0.0 ? fractional_beats(beats, lo, hi) / covered : 0.0);
  }
  return out;
}

TbfEstimate estimate_tbf(const std::map<int, BinaryMask>& masks, double fps,
                         const KinematicsConfig& cfg, int n_frames) {
  cfg.validate();
  if (!(fps > 0.0)) throw InputError("fps must be positive");

  std::vector<int> frames;
  std::vector<double> values;
  for (const auto& [frame, mask] : masks) {
    if (area(mask) < 2) continue;
    try {
      values.push_back(tail_displacement(mask));
      frames.push_back(frame);
    } catch (const InputError&) {
      // Degenerate geometry in this frame: treat as a gap.
    }
  }
  if (int(frames.size()) < cfg.savgol_window) {
    throw InputError("insufficient frames for tailbeat estimation: " + std::to_string(frames.size()) +
                     " valid masks, need at least " + std::to_string(cfg.savgol_window));
  }

  TbfEstimate est;
  est.displacement.fps = fps;
  std::vector<double> crossings;
  std::vector<std::pair<double, double>> beats;
  std::vector<std::pair<double, double>> observed;

  // Split at long gaps, interpolate across short ones.
  std::size_t begin = 0;
  while (begin < frames.size()) {
    std::size_t end = begin + 1;
    while (end < frames.size() &&
           double(frames[end] - frames[end - 1] - 1) / fps < cfg.max_gap_s) {
      ++end;
    }
    const int first = frames[begin];
    const int last = frames[end - 1];
    const int length = last - first + 1;
    Eigen::VectorXd series(length);
    std::vector<bool> filled(length, true);
    for (std::size_t k = begin; k < end; ++k) {
      series(frames[k] - first) = values[k];
      filled[frames[k] - first] = false;
      if (k + 1 < end) {
        const int gap = frames[k + 1] - frames[k];
        for (int g = 1; g < gap; ++g) {
          const double t = double(g) / gap;
          series(frames[k] - first + g) = (1.0 - t) * values[k] + t * values[k + 1];
        }
      }
    }

    if (length >= cfg.savgol_window) {
      const Eigen::VectorXd smooth = savgol_smooth(series, cfg.savgol_window, cfg.savgol_order);
      for (int i = 0; i < length; ++i) {
        est.displacement.frames.push_back(first + i);
        est.displacement.values.push_back(series(i));
        est.displacement.smoothed.push_back(smooth(i));
        est.displacement.interpolated.push_back(filled[i]);
      }
      const std::vector<double> seg = find_crossings(smooth, fps, first, cfg.min_extremum_fraction);
      const BeatIntervals seg_beats = beat_intervals(seg);
      crossings.insert(crossings.end(), seg.begin(), seg.end());
      beats.insert(beats.end(), seg_beats.beats.begin(), seg_beats.beats.end());
      if (!seg_beats.beats.empty()) {
        observed.emplace_back(seg_beats.beats.front().first, seg_beats.beats.back().second);
      }
    }
    begin = end;
  }
  if (est.displacement.frames.empty()) {
    throw InputError("insufficient frames for tailbeat estimation: no gap-free segment of " +
                     std::to_string(cfg.savgol_window) + " frames");
  }

  est.beats.crossing_times = std::move(crossings);
  est.beats.beats = std::move(beats);
  const int total_frames = n_frames > 0 ? n_frames : frames.back() + 1;
  est.tbf = windowed_tbf(est.beats.beats, total_frames / fps, cfg, observed);
  return est;
}

}  // namespace flair
