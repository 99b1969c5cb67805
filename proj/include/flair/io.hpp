// NDJSON and CSV formats shared by the command-line tools.
//
//   candidates   {"frame", "interval", "mask", "bbox": [x0,y0,x1,y1], "scores": {label: p}}
//   tracks       {"origin_interval", "origin_candidate", "frame", "mask"}
//   individuals  {"id", "frame", "mask"}
//   truth        {"swimmer", "frequency_hz"} then {"frame", "swimmer", "true_mask",
//                "arc_length_px", "head_xy": [x, y]}
//
// Masks use the canonical text form `width height r0 r1 ...`.
#pragma once

#include "flair/alignment.hpp"
#include "flair/eval.hpp"
#include "flair/synth.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace flair {

/// Input error tied to a line of an NDJSON or CSV stream (1-based).
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads a candidate stream. candidate_index counts records per interval in
/// stream order. Every mask must share the first record's dimensions. A positive
/// `stride` also requires frame == interval * stride.
std::vector<CandidateDetection> read_candidates(std::istream& in, int stride = 0);
void write_candidates(std::ostream& out, const std::vector<CandidateDetection>& candidates);

/// Reads track records and groups them by origin, ordered by origin.
std::vector<TrackRecord> read_tracks(std::istream& in);
/// Writes tracks grouped by origin, frames ascending.
void write_tracks(std::ostream& out, const std::vector<TrackRecord>& tracks);

void write_individuals(std::ostream& out, const std::vector<IndividualFrame>& rows);
/// id -> frame -> mask.
std::map<int, std::map<int, BinaryMask>> read_individuals(std::istream& in);

/// Reads any record stream carrying "frame" and "mask" (or "true_mask") into
/// per-frame mask lists. Records without a mask key are skipped.
/// `n_frames` < 0 sizes the result from the largest frame seen.
FrameMasks read_frame_masks(std::istream& in, int n_frames = -1);

void write_ground_truth(std::ostream& out, const SyntheticVideo& video);

/// Serves tracks read from a track file, keyed by origin.
class FileTrackPropagator : public TrackPropagator {
 public:
  explicit FileTrackPropagator(std::vector<TrackRecord> tracks);
  TrackRecord propagate(const CandidateDetection& candidate) const override;
  std::size_t size() const { return tracks_.size(); }

 private:
  std::map<TrackOrigin, TrackRecord> tracks_;
};

/// Reads `video,frame` rows (header required).
std::vector<FrameRow> read_frame_table(std::istream& in);
void write_split(std::ostream& out, const std::vector<SplitAssignment>& rows);

/// Fixed-precision decimal formatting used by every CSV writer.
std::string format_number(double value, int decimals = 6);

}  // namespace flair
