// Segmentation metrics and time-blocked dataset splitting.
#pragma once

#include "flair/mask.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flair {

/// Masks per frame; index is the frame number.
using FrameMasks = std::vector<std::vector<BinaryMask>>;

/// Mean over frames of dice(union of predictions, union of ground truth).
/// With only_positive_frames, frames with empty ground truth are skipped.
/// Throws InputError on a frame count mismatch or when no frame is left.
double video_dice(const FrameMasks& preds, const FrameMasks& gts, bool only_positive_frames = false);

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
  std::int64_t true_positives = 0;
  std::int64_t predictions = 0;
  std::int64_t ground_truths = 0;
};

/// Greedy one-to-one matching per frame by descending IOU; a match counts when
/// IOU >= threshold. Precision is 1 with no predictions, recall 1 with no ground truth.
PrecisionRecall precision_recall_at_iou(const FrameMasks& preds, const FrameMasks& gts,
                                        double threshold);

/// Matched (prediction, ground truth) index pairs for one frame.
std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::span<const BinaryMask> preds,
                                                              std::span<const BinaryMask> gts,
                                                              double threshold);

enum class Split { train, val, test };
const char* split_name(Split s);

struct SplitConfig {
  int block_size = 45;
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FrameRow {
  std::string video;
  int frame = 0;
};

struct SplitAssignment {
  std::string video;
  int frame = 0;
  int block = 0;
  Split split = Split::train;
};

/// Cuts each video's frames (sorted) into consecutive blocks of block_size, the
/// last one possibly shorter, shuffles blocks with the seed and hands each block
/// to the split furthest below its target size. Rows come back sorted by
/// (video, frame); block ids are global in that order.
std::vector<SplitAssignment> time_block_split(std::span<const FrameRow> rows, const SplitConfig& cfg);

}  // namespace flair
