#include "flair/eval.hpp"

#include "flair/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <tuple>

namespace flair {
namespace {

std::optional<BinaryMask> frame_union(const std::vector<BinaryMask>& masks) {
  if (masks.empty()) return std::nullopt;
  BinaryMask u = masks.front();
  for (std::size_t i = 1; i < masks.size(); ++i) u = mask_union(u, masks[i]);
  return u;
}

}  // namespace

double video_dice(const FrameMasks& preds, const FrameMasks& gts, bool only_positive_frames) {
  if (preds.size() != gts.size()) {
    throw InputError("frame count mismatch: " + std::to_string(preds.size()) + " predicted vs " +
                     std::to_string(gts.size()) + " ground truth");
  }
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t f = 0; f < gts.size(); ++f) {
    const auto p = frame_union(preds[f]);
    const auto g = frame_union(gts[f]);
    const bool gt_positive = g && !g->is_empty();
    if (only_positive_frames && !gt_positive) continue;
    double d = 1.0;
    if (p && g) {
      d = dice(*p, *g);
    } else if (p || g) {
      d = dice(p ? *p : *g, BinaryMask::empty((p ? *p : *g).width(), (p ? *p : *g).height()));
    }
    total += d;
    ++counted;
  }
  if (counted == 0) throw InputError("no frames to evaluate");
  return total / double(counted);
}

std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::span<const BinaryMask> preds,
                                                              std::span<const BinaryMask> gts,
                                                              double threshold) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double v = iou(preds[i], gts[j]);
      if (v >= threshold && v > 0.0) pairs.emplace_back(v, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<bool> pred_used(preds.size());
  std::vector<bool> gt_used(gts.size());
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  for (const auto& [v, i, j] : pairs) {
    if (pred_used[i] || gt_used[j]) continue;
    pred_used[i] = gt_used[j] = true;
    matches.emplace_back(i, j);
  }
  return matches;
}

PrecisionRecall precision_recall_at_iou(const FrameMasks& preds, const FrameMasks& gts,
                                        double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("IOU threshold must lie in (0,1)");
  if (preds.size() != gts.size()) throw InputError("frame count mismatch");
  PrecisionRecall out;
  for (std::size_t f = 0; f < gts.size(); ++f) {
    out.predictions += std::int64_t(preds[f].size());
    out.ground_truths += std::int64_t(gts[f].size());
    out.true_positives += std::int64_t(greedy_match(preds[f], gts[f], threshold).size());
  }
  out.precision = out.predictions == 0 ? 1.0 : double(out.true_positives) / double(out.predictions);
  out.recall = out.ground_truths == 0 ? 1.0 : double(out.true_positives) / double(out.ground_truths);
  return out;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

void SplitConfig::validate() const {
  if (block_size < 1) throw InputError("block_size must be >= 1");
  if (train < 0.0 || val < 0.0 || test < 0.0) throw InputError("split ratios must be nonnegative");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw InputError("split ratios must sum to 1");
}

std::vector<SplitAssignment> time_block_split(std::span<const FrameRow> rows, const SplitConfig& cfg) {
  cfg.validate();
  std::vector<SplitAssignment> out;
  out.reserve(rows.size());
  for (const FrameRow& r : rows) out.push_back({r.video, r.frame, 0, Split::train});
  std::sort(out.begin(), out.end(), [](const SplitAssignment& a, const SplitAssignment& b) {
    return std::tie(a.video, a.frame) < std::tie(b.video, b.frame);
  });

  // Block boundaries: [start, end) ranges into `out`.
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  for (std::size_t i = 0; i < out.size();) {
    std::size_t j = i;
    while (j < out.size() && j - i < std::size_t(cfg.block_size) && out[j].video == out[i].video) ++j;
    blocks.emplace_back(i, j);
    i = j;
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = blocks[b].first; i < blocks[b].second; ++i) out[i].block = int(b);
  }

  std::vector<std::size_t> order(blocks.size());
  for (std::size_t b = 0; b < order.size(); ++b) order[b] = b;
  Rng rng(cfg.seed);
  rng.shuffle(order);

  const std::array<double, 3> ratios{cfg.train, cfg.val, cfg.test};
  std::array<double, 3> filled{0.0, 0.0, 0.0};
  const double total = double(out.size());
  for (std::size_t b : order) {
    std::size_t pick = 0;
    double best = -INFINITY;
    for (std::size_t s = 0; s < 3; ++s) {
      if (ratios[s] == 0.0) continue;
      const double deficit = ratios[s] * total - filled[s];
      if (deficit > best) {
        best = deficit;
        pick = s;
      }
    }
    filled[pick] += double(blocks[b].second - blocks[b].first);
    for (std::size_t i = blocks[b].first; i < blocks[b].second; ++i) out[i].split = Split(pick);
  }
  return out;
}

}  // namespace flair
