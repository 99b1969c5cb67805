// Cross-interval track alignment: candidate gating, confirmation of tracks that
// agree with tracks started at other sampled frames, and consolidation of the
// confirmed tracks into per-individual masks.
#pragma once

#include "flair/mask.hpp"

#include <compare>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace flair {

struct AlignmentConfig {
  int interval_stride = 30;
  double score_threshold = 0.95;
  double iou_threshold = 0.7;
  std::string shark_prompt_label = "shark";
  /// Number of distinct other intervals that must agree with a track.
  int min_support = 1;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

/// A mask proposed at a sampled frame, with per-prompt probabilities.
struct CandidateDetection {
  int frame_index = 0;
  int interval_index = 0;
  /// Position of this record among the records of its interval, in stream order.
  int candidate_index = 0;
  BinaryMask mask;
  BoundingBox box;
  std::map<std::string, double> prompt_scores;
};

/// Identifies the candidate a track was started from.
struct TrackOrigin {
  int interval = 0;
  int candidate = 0;

  friend auto operator<=>(const TrackOrigin&, const TrackOrigin&) = default;
};

/// One candidate propagated over the video. Frames without an entry, or with an
/// empty mask, are frames where the track is absent.
struct TrackRecord {
  TrackOrigin origin;
  std::map<int, BinaryMask> masks;

  bool present(int frame) const;
  std::vector<int> present_frames() const;
};

struct ConfirmedIndividual {
  int id = 0;
  std::map<int, BinaryMask> masks;
  std::set<int> supporting_intervals;
  std::vector<TrackOrigin> members;
};

inline constexpr const char* kSingleIntervalWarning = "single-interval-video";

struct AlignmentResult {
  std::vector<ConfirmedIndividual> individuals;
  std::vector<std::string> warnings;
};

/// A confirmed track inside a group: index into the track list plus the set of
/// other intervals that agree with it.
struct GroupMember {
  std::size_t track = 0;
  std::set<int> support;
};
using TrackGroup = std::vector<GroupMember>;

/// [0, stride, 2*stride, ...] strictly below n_frames.
std::vector<int> sample_interval_frames(int n_frames, int stride);

/// Keeps detections whose shark-prompt score is strictly above the threshold.
/// Throws InputError naming the record when the shark label is missing.
std::vector<CandidateDetection> filter_candidates(std::span<const CandidateDetection> detections,
                                                  const AlignmentConfig& cfg);

/// True when the two tracks share a frame where their masks have IOU above `threshold`.
bool tracks_aligned(const TrackRecord& a, const TrackRecord& b, double threshold);

/// Confirms tracks supported by at least cfg.min_support other intervals, groups
/// them into connected components of the aligned relation and consolidates each
/// component into one individual. Fewer than two origin intervals yields an empty
/// result carrying kSingleIntervalWarning.
AlignmentResult align_tracks(std::span<const TrackRecord> tracks, const AlignmentConfig& cfg);

/// One individual per group. Each frame takes the mask of the present member with
/// the most support, ties broken by earliest origin interval then lowest candidate
/// index. Ids follow the earliest member origin of each group.
std::vector<ConfirmedIndividual> consolidate(std::span<const TrackRecord> tracks,
                                             std::span<const TrackGroup> groups);

/// Produces a track for a candidate. Implementations must tolerate concurrent
/// calls for distinct candidates and throw on failure.
class TrackPropagator {
 public:
  virtual ~TrackPropagator() = default;
  virtual TrackRecord propagate(const CandidateDetection& candidate) const = 0;
};

struct AlignmentRun {
  AlignmentResult result;
  std::size_t candidates_in = 0;
  std::size_t candidates_kept = 0;
  std::size_t tracks_propagated = 0;
};

/// Gate, propagate every kept candidate, align, consolidate. Failed propagations
/// are skipped with a warning; if every propagation fails, throws std::runtime_error.
AlignmentRun run_alignment(std::span<const CandidateDetection> candidates,
                           const TrackPropagator& propagator, const AlignmentConfig& cfg,
                           int threads = 1);

/// A row of per-frame output.
struct IndividualFrame {
  int id = 0;
  int frame = 0;
  BinaryMask mask;
};

/// Flattens individuals into rows ordered by id then frame.
std::vector<IndividualFrame> per_frame_output(std::span<const ConfirmedIndividual> individuals);

}  // namespace flair
