// Tailbeat frequency from a sequence of body masks.
//
// Per frame: head and tail are the farthest pair of foreground pixels (the one
// nearer the centre of mass is the head); the tail's signed distance from the
// head→COM line forms a displacement series. The series is smoothed, its
// centerline crossings are kept only where they lie between a local maximum and
// a local minimum, every other crossing bounds a beat, and beats are counted in
// sliding windows.
#pragma once

#include "flair/mask.hpp"
#include "flair/savgol.hpp"

#include <map>
#include <span>
#include <utility>
#include <vector>

namespace flair {

struct KinematicsConfig {
  int savgol_window = 15;
  int savgol_order = 3;
  double tbf_window_s = 5.0;
  double tbf_step_s = 0.5;
  /// Extrema smaller than this fraction of the largest |displacement| do not bracket crossings.
  double min_extremum_fraction = 0.05;
  /// Gaps shorter than this are interpolated; longer gaps split the series.
  double max_gap_s = 0.5;

  void validate() const;
};

struct HeadTail {
  PixelPoint head;
  PixelPoint tail;
  /// Both points were equally far from the centre of mass.
  bool tie = false;
};

/// Foreground pixel pair at maximal distance, ordered by (y, x). Among equal
/// pairs the lexicographically smallest wins. Throws InputError when area < 2.
std::pair<PixelPoint, PixelPoint> farthest_pair(const BinaryMask& m);

HeadTail head_tail(const BinaryMask& m);

/// Signed perpendicular distance of the tail from the head→COM line, positive
/// when the tail lies to the left of that heading as seen on screen.
double tail_displacement(const BinaryMask& m);

/// Raw sign changes of a sampled series, as fractional sample positions.
std::vector<double> sign_change_positions(const Eigen::VectorXd& series);

/// Sign changes bracketed by a significant local maximum on one side and a
/// significant local minimum on the other; one crossing is kept per bracket.
/// Times are (first_frame + position) / fps.
std::vector<double> find_crossings(const Eigen::VectorXd& smoothed, double fps, int first_frame = 0,
                                   double min_extremum_fraction = 0.05);

struct BeatIntervals {
  std::vector<double> crossing_times;
  std::vector<std::pair<double, double>> beats;
};

/// Beats span crossings (0→2), (2→4), ...
BeatIntervals beat_intervals(std::span<const double> crossings);

struct TbfSeries {
  std::vector<double> window_centers_s;
  std::vector<double> beats_per_second;
};

/// Sum over beats of (overlap with [lo, hi]) / (beat duration).
double fractional_beats(std::span<const std::pair<double, double>> beats, double lo, double hi);

/// Beats per second in windows of tbf_window_s sliding by tbf_step_s over
/// [0, duration_s]; a video shorter than one window gets a single window.
///
/// The fractional beat count of a window is divided by the part of the window
/// inside `observed`, the spans where beats can be resolved at all. When
/// `observed` is empty it defaults to [first beat start, last beat end]. A full
/// window inside the observed span is therefore divided by its own length.
TbfSeries windowed_tbf(std::span<const std::pair<double, double>> beats, double duration_s,
                       const KinematicsConfig& cfg,
                       std::span<const std::pair<double, double>> observed = {});

struct DisplacementSeries {
  double fps = 30.0;
  std::vector<int> frames;
  std::vector<double> values;
  std::vector<double> smoothed;
  /// True where the value was interpolated across a short gap.
  std::vector<bool> interpolated;
};

struct TbfEstimate {
  DisplacementSeries displacement;
  BeatIntervals beats;
  TbfSeries tbf;
};

/// Full pipeline over one individual's masks. `n_frames` sets the video
/// duration; 0 means last frame + 1. Throws InputError when no segment has at
/// least savgol_window frames.
TbfEstimate estimate_tbf(const std::map<int, BinaryMask>& masks, double fps,
                         const KinematicsConfig& cfg, int n_frames = 0);

}  // namespace flair
