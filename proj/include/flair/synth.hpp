// Synthetic undulating swimmers with known ground truth, plus transient blobs
// standing in for single-interval false positives.
#pragma once

#include "flair/alignment.hpp"
#include "flair/mask.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace flair {

/// One swimmer. The midline at normalised arclength s ∈ [0,1] and time t is
///   head(t) - s·L·h + A·(0.1 + 0.9s)·sin(φ(t) - k·s)·n
/// with heading h, its normal n, and phase φ(t) = 2π(f·t + r·t²/2).
struct SwimmerSpec {
  double body_length_px = 158.7;
  double max_half_width_px = 10.0;
  /// Half-width at the tail tip as a fraction of max_half_width_px.
  double tail_width_fraction = 0.15;
  /// Length fraction over which the rounded nose widens to full width.
  double nose_fraction = 0.15;
  double amplitude_px = 15.87;
  double frequency_hz = 0.5;
  /// Linear change of frequency over time (r above), Hz per second.
  double frequency_rate_hz_per_s = 0.0;
  /// Radians of phase lag per body length (k above).
  double wavenumber = 3.14159265358979323846;
  double heading_deg = 0.0;
  double speed_px_per_s = 0.0;
  RealPoint head_start{200.0, 100.0};
  double shark_score = 0.99;

  double half_width(double s) const;
  double frequency_at(double t) const { return frequency_hz + frequency_rate_hz_per_s * t; }
  /// Midline sampled at `samples` evenly spaced values of s, as columns.
  Eigen::Matrix2Xd midline(double t, int samples) const;
};

/// A disc visible over an inclusive frame range.
struct BlobSpec {
  int first_frame = 0;
  int last_frame = 0;
  RealPoint center{0.0, 0.0};
  double radius = 6.0;
  double shark_score = 0.97;
};

struct SceneSpec {
  int width = 400;
  int height = 200;
  double fps = 30.0;
  double duration_s = 20.0;
  int interval_stride = 30;
  std::vector<SwimmerSpec> swimmers;
  std::vector<BlobSpec> blobs;
  /// Extra blobs, each placed by the seed around a single sampled frame.
  int random_transients = 0;
  double transient_radius = 6.0;
  std::uint64_t seed = 0;
  /// Oracle tracks randomly erode or dilate each mask by up to this many pixels (0 or 1).
  int perturb_px = 0;
  std::string shark_label = "shark";
  std::string background_label = "background";

  int n_frames() const;
  void validate() const;
};

struct SwimmerTruth {
  double frequency_hz = 0.0;
  std::vector<BinaryMask> masks;
  std::vector<double> arc_length_px;
  std::vector<RealPoint> head;
};

/// Which scene object a candidate was proposed for.
struct CandidateSource {
  enum class Kind { swimmer, blob } kind = Kind::swimmer;
  int index = 0;
};

struct SyntheticVideo {
  SceneSpec scene;
  int n_frames = 0;
  std::vector<SwimmerTruth> swimmers;
  /// Explicit blobs followed by the seeded transients.
  std::vector<BlobSpec> blobs;
  std::vector<CandidateDetection> candidates;
  std::vector<CandidateSource> sources;  // parallel to candidates

  BinaryMask blob_mask(int blob) const;
};

/// Renders every frame. Throws InputError when a swimmer leaves the image.
SyntheticVideo generate(const SceneSpec& scene);

/// Rasterises one swimmer at time t: union of discs along the midline sampled
/// every ≤0.25 px, 4×4 supersampling, pixel set when most subsamples are inside.
BinaryMask rasterize_swimmer(const SwimmerSpec& swimmer, double t, int width, int height);
BinaryMask rasterize_disc(const RealPoint& center, double radius, int width, int height);

/// Arc length of the midline by summing 1000 chords.
double midline_arc_length(const SwimmerSpec& swimmer, double t);

/// 4-neighbour dilation and erosion by one pixel.
BinaryMask dilate_mask(const BinaryMask& m);
BinaryMask erode_mask(const BinaryMask& m);

/// Replays ground truth for a candidate: swimmers over the whole video, blobs
/// over their visible range. With perturb_px = 1 each frame is independently
/// eroded, dilated or left alone, seeded by (seed, interval, candidate, frame).
class SyntheticPropagator : public TrackPropagator {
 public:
  explicit SyntheticPropagator(const SyntheticVideo& video) : video_(&video) {}
  TrackRecord propagate(const CandidateDetection& candidate) const override;

 private:
  const SyntheticVideo* video_;
};

/// One track per candidate (before gating), in candidate order.
std::vector<TrackRecord> oracle_tracks(const SyntheticVideo& video);

}  // namespace flair
