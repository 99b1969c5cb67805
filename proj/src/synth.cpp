#include "flair/synth.hpp"

#include "flair/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flair {
namespace {

constexpr int kSupersample = 4;

RealPoint unit_heading(double heading_deg) {
  const double a = heading_deg * std::numbers::pi / 180.0;
  return {std::cos(a), std::sin(a)};
}

// Marks the union of discs on a supersampled grid and majority-votes to pixels.
BinaryMask rasterize_discs(const Eigen::Matrix2Xd& centers, const Eigen::VectorXd& radii, int width,
                           int height) {
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (Eigen::Index i = 0; i < centers.cols(); ++i) {
    x_lo = std::min(x_lo, centers(0, i) - radii(i));
    x_hi = std::max(x_hi, centers(0, i) + radii(i));
    y_lo = std::min(y_lo, centers(1, i) - radii(i));
    y_hi = std::max(y_hi, centers(1, i) + radii(i));
  }
  const int px0 = std::max(0, int(std::floor(x_lo)) - 1);
  const int px1 = std::min(width - 1, int(std::ceil(x_hi)) + 1);
  const int py0 = std::max(0, int(std::floor(y_lo)) - 1);
  const int py1 = std::min(height - 1, int(std::ceil(y_hi)) + 1);
  if (px1 < px0 || py1 < py0) return BinaryMask::empty(width, height);

  const int cols = (px1 - px0 + 1) * kSupersample;
  const int rows = (py1 - py0 + 1) * kSupersample;
  // Subsample (i, j) sits at pixel coordinate (px0, py0) + ((i, j) + 0.5) / 4 - 0.5.
  auto sub_y = [&](int j) { return py0 + (j + 0.5) / kSupersample - 0.5; };

  Eigen::ArrayXXi diff = Eigen::ArrayXXi::Zero(rows, cols + 1);
  for (Eigen::Index k = 0; k < centers.cols(); ++k) {
    const double cx = centers(0, k);
    const double cy = centers(1, k);
    const double r = radii(k);
    const int j0 = std::max(0, int(std::ceil((cy - r - py0 + 0.5) * kSupersample - 0.5)));
    const int j1 = std::min(rows - 1, int(std::floor((cy + r - py0 + 0.5) * kSupersample - 0.5)));
    for (int j = j0; j <= j1; ++j) {
      const double dy = sub_y(j) - cy;
      const double span2 = r * r - dy * dy;
      if (span2 < 0.0) continue;
      const double half = std::sqrt(span2);
      const int i0 = std::max(0, int(std::ceil((cx - half - px0 + 0.5) * kSupersample - 0.5)));
      const int i1 = std::min(cols - 1, int(std::floor((cx + half - px0 + 0.5) * kSupersample - 0.5)));
      if (i1 < i0) continue;
      diff(j, i0) += 1;
      diff(j, i1 + 1) -= 1;
    }
  }

  std::vector<Span> spans;
  const int pw = px1 - px0 + 1;
  Eigen::ArrayXXi votes = Eigen::ArrayXXi::Zero(py1 - py0 + 1, pw);
  for (int j = 0; j < rows; ++j) {
    int running = 0;
    for (int i = 0; i < cols; ++i) {
      running += diff(j, i);
      if (running > 0) votes(j / kSupersample, i / kSupersample) += 1;
    }
  }
  constexpr int kMajority = kSupersample * kSupersample / 2 + 1;
  for (int y = 0; y < votes.rows(); ++y) {
    for (int x = 0; x < pw; ++x) {
      if (votes(y, x) >= kMajority) {
        const std::int64_t idx = std::int64_t(py0 + y) * width + px0 + x;
        spans.push_back({idx, idx + 1});
      }
    }
  }
  return BinaryMask::from_spans(width, height, std::move(spans));
}

BinaryMask morph(const BinaryMask& m, bool grow) {
  const Bitmap src = m.to_bitmap();
  Bitmap dst = src;
  const int h = int(src.rows());
  const int w = int(src.cols());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto at = [&](int xx, int yy) -> int {
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) return 0;
        return src(yy, xx);
      };
      const int n = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1);
      if (grow) {
        if (n > 0) dst(y, x) = 1;
      } else if (src(y, x) && n < 4) {
        dst(y, x) = 0;
      }
    }
  }
  return BinaryMask::from_bitmap(dst);
}

}  // namespace

double SwimmerSpec::half_width(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  if (s < nose_fraction) return max_half_width_px * std::sqrt(s / nose_fraction);
  const double u = (s - nose_fraction) / (1.0 - nose_fraction);
  return max_half_width_px * (1.0 - (1.0 - tail_width_fraction) * u);
}

Eigen::Matrix2Xd SwimmerSpec::midline(double t, int samples) const {
  const RealPoint h = unit_heading(heading_deg);
  const RealPoint normal(-h.y(), h.x());
  const RealPoint head = head_start + speed_px_per_s * t * h;
  const double phase =
      2.0 * std::numbers::pi * (frequency_hz * t + 0.5 * frequency_rate_hz_per_s * t * t);
  Eigen::Matrix2Xd pts(2, samples);
  for (int i = 0; i < samples; ++i) {
    const double s = samples == 1 ? 0.0 : double(i) / (samples - 1);
    const double lateral = amplitude_px * (0.1 + 0.9 * s) * std::sin(phase - wavenumber * s);
    pts.col(i) = head - s * body_length_px * h + lateral * normal;
  }
  return pts;
}

double midline_arc_length(const SwimmerSpec& swimmer, double t) {
  const Eigen::Matrix2Xd pts = swimmer.midline(t, 1000);
  double length = 0.0;
  for (Eigen::Index i = 1; i < pts.cols(); ++i) length += (pts.col(i) - pts.col(i - 1)).norm();
  return length;
}

BinaryMask rasterize_swimmer(const SwimmerSpec& swimmer, double t, int width, int height) {
  const double approx = midline_arc_length(swimmer, t);
  const int samples = int(std::ceil(approx / 0.25)) + 1;
  const Eigen::Matrix2Xd pts = swimmer.midline(t, samples);
  Eigen::VectorXd radii(samples);
  for (int i = 0; i < samples; ++i) radii(i) = swimmer.half_width(double(i) / (samples - 1));
  return rasterize_discs(pts, radii, width, height);
}

BinaryMask rasterize_disc(const RealPoint& center, double radius, int width, int height) {
  Eigen::Matrix2Xd c(2, 1);
  c.col(0) = center;
  Eigen::VectorXd r(1);
  r(0) = radius;
  return rasterize_discs(c, r, width, height);
}

BinaryMask dilate_mask(const BinaryMask& m) { return morph(m, true); }
BinaryMask erode_mask(const BinaryMask& m) { return morph(m, false); }

int SceneSpec::n_frames() const { return int(std::lround(duration_s * fps)); }

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw InputError("scene dimensions must be positive");
  if (!(fps > 0.0) || !(duration_s > 0.0) || n_frames() < 1) {
    throw InputError("scene fps and duration must be positive");
  }
  if (interval_stride < 1) throw InputError("interval_stride must be >= 1");
  if (random_transients < 0) throw InputError("random_transients must be >= 0");
  if (perturb_px < 0 || perturb_px > 1) throw InputError("perturb_px must be 0 or 1");
  if (!(transient_radius > 0.0)) throw InputError("transient_radius must be positive");
  for (std::size_t i = 0; i < swimmers.size(); ++i) {
    const SwimmerSpec& s = swimmers[i];
    const std::string tag = "swimmer " + std::to_string(i) + ": ";
    if (!(s.body_length_px > 0.0) || !(s.max_half_width_px > 0.0)) {
      throw InputError(tag + "body length and width must be positive");
    }
    if (!(s.amplitude_px >= 0.0) || !(s.frequency_hz >= 0.0)) {
      throw InputError(tag + "amplitude and frequency must be nonnegative");
    }
    if (!(s.tail_width_fraction > 0.0 && s.tail_width_fraction <= 1.0) ||
        !(s.nose_fraction > 0.0 && s.nose_fraction < 1.0)) {
      throw InputError(tag + "width profile fractions out of range");
    }
    if (!(s.shark_score >= 0.0 && s.shark_score <= 1.0)) throw InputError(tag + "score out of [0,1]");
  }
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const BlobSpec& b = blobs[i];
    if (b.first_frame < 0 || b.last_frame < b.first_frame || !(b.radius > 0.0) ||
        !(b.shark_score >= 0.0 && b.shark_score <= 1.0)) {
      throw InputError("blob " + std::to_string(i) + " is invalid");
    }
  }
}

BinaryMask SyntheticVideo::blob_mask(int blob) const {
  const BlobSpec& b = blobs.at(std::size_t(blob));
  return rasterize_disc(b.center, b.radius, scene.width, scene.height);
}

SyntheticVideo generate(const SceneSpec& scene) {
  scene.validate();
  SyntheticVideo video;
  video.scene = scene;
  video.n_frames = scene.n_frames();

  for (std::size_t i = 0; i < scene.swimmers.size(); ++i) {
    const SwimmerSpec& spec = scene.swimmers[i];
    SwimmerTruth truth;
    truth.frequency_hz = spec.frequency_hz;
    for (int f = 0; f < video.n_frames; ++f) {
      const double t = f / scene.fps;
      const Eigen::Matrix2Xd pts = spec.midline(t, 200);
      for (Eigen::Index k = 0; k < pts.cols(); ++k) {
        const double r = spec.half_width(double(k) / (pts.cols() - 1));
        if (pts(0, k) - r < 0.0 || pts(1, k) - r < 0.0 || pts(0, k) + r > scene.width - 1 ||
            pts(1, k) + r > scene.height - 1) {
          throw InputError("swimmer " + std::to_string(i) + " leaves the image at frame " +
                           std::to_string(f));
        }
      }
      truth.masks.push_back(rasterize_swimmer(spec, t, scene.width, scene.height));
      truth.arc_length_px.push_back(midline_arc_length(spec, t));
      truth.head.push_back(pts.col(0));
    }
    video.swimmers.push_back(std::move(truth));
  }

  const std::vector<int> sampled = sample_interval_frames(video.n_frames, scene.interval_stride);

  video.blobs = scene.blobs;
  if (scene.random_transients > 0) {
    Rng rng(mix_seed(scene.seed, 0x7a11));
    // Keep transients off the swimmers' swept area where possible.
    std::vector<BoundingBox> keep_out;
    for (const SwimmerTruth& s : video.swimmers) {
      BoundingBox box{scene.width, scene.height, -1, -1};
      for (const BinaryMask& m : s.masks) {
        if (m.is_empty()) continue;
        const BoundingBox b = bbox(m);
        box = {std::min(box.x_min, b.x_min), std::min(box.y_min, b.y_min),
               std::max(box.x_max, b.x_max), std::max(box.y_max, b.y_max)};
      }
      keep_out.push_back(box);
    }
    const double r = scene.transient_radius;
    const int half = std::max(0, (scene.interval_stride - 1) / 2);
    for (int n = 0; n < scene.random_transients; ++n) {
      const int k = int(rng.below(sampled.size()));
      const int center_frame = sampled[std::size_t(k)];
      BlobSpec blob;
      blob.radius = r;
      blob.first_frame = std::max(0, center_frame - int(rng.below(std::uint64_t(half) + 1)));
      blob.last_frame = std::min(video.n_frames - 1, center_frame + int(rng.below(std::uint64_t(half) + 1)));
      for (int attempt = 0; attempt < 100; ++attempt) {
        blob.center = {rng.uniform(r + 1.0, scene.width - r - 2.0),
                       rng.uniform(r + 1.0, scene.height - r - 2.0)};
        const bool clear = std::none_of(keep_out.begin(), keep_out.end(), [&](const BoundingBox& b) {
          return blob.center.x() + r >= b.x_min - 2 && blob.center.x() - r <= b.x_max + 2 &&
                 blob.center.y() + r >= b.y_min - 2 && blob.center.y() - r <= b.y_max + 2;
        });
        if (clear) break;
      }
      video.blobs.push_back(blob);
    }
  }

  for (std::size_t k = 0; k < sampled.size(); ++k) {
    const int frame = sampled[k];
    int index = 0;
    auto add = [&](BinaryMask mask, double score, CandidateSource source) {
      if (mask.is_empty()) return;
      CandidateDetection c;
      c.frame_index = frame;
      c.interval_index = int(k);
      c.candidate_index = index++;
      c.box = bbox(mask);
      c.mask = std::move(mask);
      c.prompt_scores = {{scene.shark_label, score}, {scene.background_label, 1.0 - score}};
      video.candidates.push_back(std::move(c));
      video.sources.push_back(source);
    };
    for (std::size_t i = 0; i < video.swimmers.size(); ++i) {
      add(video.swimmers[i].masks[std::size_t(frame)], scene.swimmers[i].shark_score,
          {CandidateSource::Kind::swimmer, int(i)});
    }
    for (std::size_t b = 0; b < video.blobs.size(); ++b) {
      const BlobSpec& blob = video.blobs[b];
      if (frame < blob.first_frame || frame > blob.last_frame) continue;
      add(video.blob_mask(int(b)), blob.shark_score, {CandidateSource::Kind::blob, int(b)});
    }
  }
  return video;
}

TrackRecord SyntheticPropagator::propagate(const CandidateDetection& candidate) const {
  const SyntheticVideo& v = *video_;
  std::size_t pos = v.candidates.size();
  for (std::size_t i = 0; i < v.candidates.size(); ++i) {
    if (v.candidates[i].interval_index == candidate.interval_index &&
        v.candidates[i].candidate_index == candidate.candidate_index) {
      pos = i;
      break;
    }
  }
  if (pos == v.candidates.size()) throw InputError("candidate not produced by this scene");
  const CandidateSource source = v.sources[pos];

  TrackRecord track;
  track.origin = {candidate.interval_index, candidate.candidate_index};
  auto perturbed = [&](BinaryMask mask, int frame) {
    if (v.scene.perturb_px == 0) return mask;
    const std::uint64_t key = (std::uint64_t(candidate.interval_index) << 40) ^
                              (std::uint64_t(candidate.candidate_index) << 24) ^ std::uint64_t(frame);
    switch (mix_seed(v.scene.seed, key) % 3) {
      case 0:
        return erode_mask(mask);
      case 1:
        return dilate_mask(mask);
      default:
        return mask;
    }
  };
  if (source.kind == CandidateSource::Kind::swimmer) {
    const SwimmerTruth& s = v.swimmers[std::size_t(source.index)];
    for (int f = 0; f < v.n_frames; ++f) {
      // The origin frame keeps the candidate's own mask.
      track.masks.emplace(f, f == candidate.frame_index ? s.masks[std::size_t(f)]
                                                        : perturbed(s.masks[std::size_t(f)], f));
    }
  } else {
    const BlobSpec& b = v.blobs[std::size_t(source.index)];
    const BinaryMask disc = v.blob_mask(source.index);
    for (int f = b.first_frame; f <= std::min(b.last_frame, v.n_frames - 1); ++f) {
      track.masks.emplace(f, f == candidate.frame_index ? disc : perturbed(disc, f));
    }
  }
  return track;
}

std::vector<TrackRecord> oracle_tracks(const SyntheticVideo& video) {
  SyntheticPropagator propagator(video);
  std::vector<TrackRecord> tracks;
  tracks.reserve(video.candidates.size());
  for (const CandidateDetection& c : video.candidates) tracks.push_back(propagator.propagate(c));
  return tracks;
}

}  // namespace flair
