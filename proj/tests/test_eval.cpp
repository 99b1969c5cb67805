#include "flair/eval.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

using namespace flair;
using namespace flair::testing;

namespace {

// Per-pixel union and dice without the run-length code.
double brute_video_dice(const std::vector<std::vector<Bitmap>>& p, const std::vector<std::vector<Bitmap>>& g,
                        int w, int h, bool only_positive) {
  double total = 0.0;
  int counted = 0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    Bitmap up = Bitmap::Zero(h, w);
    Bitmap ug = Bitmap::Zero(h, w);
    for (const Bitmap& b : p[f]) up = up.max(b);
    for (const Bitmap& b : g[f]) ug = ug.max(b);
    const std::int64_t sg = brute_area(ug);
    if (only_positive && sg == 0) continue;
    const std::int64_t sp = brute_area(up);
    const std::int64_t inter = brute_intersection(up, ug);
    total += (sp + sg == 0) ? 1.0 : 2.0 * double(inter) / double(sp + sg);
    ++counted;
  }
  return total / counted;
}

std::vector<FrameRow> rows_for(const std::string& video, int n) {
  std::vector<FrameRow> rows;
  for (int f = 0; f < n; ++f) rows.push_back({video, f});
  return rows;
}

}  // namespace

TEST_CASE("perfect predictions score one") {
  const FrameMasks gt{{rect(8, 8, 1, 1, 3, 3)}, {}, {rect(8, 8, 0, 0, 7, 0), rect(8, 8, 2, 2, 4, 4)}};
  CHECK(video_dice(gt, gt) == 1.0);
  const PrecisionRecall pr = precision_recall_at_iou(gt, gt, 0.5);
  CHECK(pr.precision == 1.0);
  CHECK(pr.recall == 1.0);
  CHECK(pr.true_positives == 3);
}

TEST_CASE("empty frames and the positive-only toggle") {
  const BinaryMask a = rect(8, 8, 0, 0, 3, 3);
  const FrameMasks gt{{a}, {}};
  const FrameMasks pred{{a}, {rect(8, 8, 5, 5, 6, 6)}};
  CHECK(video_dice(pred, gt) == doctest::Approx(0.5));
  CHECK(video_dice(pred, gt, true) == 1.0);
  CHECK_THROWS_AS(video_dice(FrameMasks{{}}, FrameMasks{{}}, true), InputError);
  CHECK_THROWS_AS(video_dice(FrameMasks{{}}, FrameMasks{{}, {}}), InputError);
}

TEST_CASE("video dice matches per-pixel reference") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 12;
    const int h = 10;
    const int frames = 1 + int(rng.below(6));
    std::vector<std::vector<Bitmap>> pb(frames), gb(frames);
    FrameMasks p(frames), g(frames);
    for (int f = 0; f < frames; ++f) {
      for (int k = int(rng.below(3)); k > 0; --k) pb[f].push_back(random_bitmap(rng, w, h, rng.uniform(0, 0.4)));
      for (int k = int(rng.below(3)); k > 0; --k) gb[f].push_back(random_bitmap(rng, w, h, rng.uniform(0, 0.4)));
      for (const Bitmap& b : pb[f]) p[f].push_back(BinaryMask::from_bitmap(b));
      for (const Bitmap& b : gb[f]) g[f].push_back(BinaryMask::from_bitmap(b));
    }
    CHECK(video_dice(p, g) == doctest::Approx(brute_video_dice(pb, gb, w, h, false)).epsilon(1e-12));
    bool any_positive = false;
    for (const auto& frame : gb) {
      for (const Bitmap& b : frame) any_positive = any_positive || brute_area(b) > 0;
    }
    if (any_positive) {
      CHECK(video_dice(p, g, true) == doctest::Approx(brute_video_dice(pb, gb, w, h, true)).epsilon(1e-12));
    }
  }
}

TEST_CASE("greedy matching takes the best pair first") {
  const BinaryMask g0 = rect(20, 4, 0, 0, 9, 0);
  const BinaryMask g1 = rect(20, 4, 10, 0, 19, 0);
  const BinaryMask p0 = rect(20, 4, 2, 0, 11, 0);  // IOU 8/12 with g0, 2/18 with g1
  const BinaryMask p1 = rect(20, 4, 0, 0, 9, 0);   // exact on g0
  const std::vector<BinaryMask> preds{p0, p1};
  const std::vector<BinaryMask> gts{g0, g1};
  const auto m = greedy_match(preds, gts, 0.1);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == std::pair<std::size_t, std::size_t>{1, 0});
  CHECK(m[1] == std::pair<std::size_t, std::size_t>{0, 1});
  const PrecisionRecall pr = precision_recall_at_iou({preds}, {gts}, 0.5);
  CHECK(pr.true_positives == 1);
  CHECK(pr.precision == 0.5);
  CHECK(pr.recall == 0.5);
  CHECK_THROWS_AS(precision_recall_at_iou({preds}, {gts}, 0.0), InputError);
}

TEST_CASE("zero denominators") {
  const FrameMasks none{{}, {}};
  const FrameMasks some{{rect(4, 4, 0, 0, 1, 1)}, {}};
  const PrecisionRecall a = precision_recall_at_iou(none, some, 0.5);
  CHECK(a.precision == 1.0);
  CHECK(a.recall == 0.0);
  const PrecisionRecall b = precision_recall_at_iou(some, none, 0.5);
  CHECK(b.precision == 0.0);
  CHECK(b.recall == 1.0);
}

TEST_CASE("recall never rises with the threshold") {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    FrameMasks p(4), g(4);
    for (int f = 0; f < 4; ++f) {
      for (int k = 0; k < 3; ++k) {
        const int x = int(rng.below(20));
        const int y = int(rng.below(20));
        g[f].push_back(rect(32, 32, x, y, x + 6, y + 6));
        const int dx = int(rng.below(5)) - 2;
        const int dy = int(rng.below(5)) - 2;
        p[f].push_back(rect(32, 32, std::max(0, x + dx), std::max(0, y + dy), x + dx + 6, y + dy + 6));
      }
    }
    double last = 2.0;
    for (double t = 0.05; t < 1.0; t += 0.05) {
      const double r = precision_recall_at_iou(p, g, t).recall;
      CHECK(r <= last);
      last = r;
    }
  }
}

TEST_CASE("split of 100 frames in blocks of 45") {
  const auto out = time_block_split(rows_for("v", 100), SplitConfig{});
  std::map<int, int> sizes;
  for (const auto& r : out) ++sizes[r.block];
  CHECK(sizes == std::map<int, int>{{0, 45}, {1, 45}, {2, 10}});
}

TEST_CASE("all-train ratios") {
  SplitConfig cfg;
  cfg.train = 1.0;
  cfg.val = 0.0;
  cfg.test = 0.0;
  for (const auto& r : time_block_split(rows_for("v", 500), cfg)) CHECK(r.split == Split::train);
  cfg.train = 0.5;
  CHECK_THROWS_AS(time_block_split(rows_for("v", 5), cfg), InputError);
}

TEST_CASE("split integrity across videos") {
  std::vector<FrameRow> rows;
  for (int v = 0; v < 7; ++v) {
    auto r = rows_for("video" + std::to_string(v), 100 + 37 * v);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  Rng rng(2);
  rng.shuffle(rows);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    SplitConfig cfg;
    cfg.seed = seed;
    const auto out = time_block_split(rows, cfg);
    REQUIRE(out.size() == rows.size());
    std::set<std::pair<std::string, int>> in_set, out_set;
    for (const auto& r : rows) in_set.insert({r.video, r.frame});
    for (const auto& r : out) out_set.insert({r.video, r.frame});
    CHECK(in_set == out_set);

    std::map<int, std::set<Split>> splits_of_block;
    std::map<int, std::set<std::string>> videos_of_block;
    std::map<int, std::vector<int>> frames_of_block;
    std::int64_t counts[3] = {0, 0, 0};
    for (const auto& r : out) {
      splits_of_block[r.block].insert(r.split);
      videos_of_block[r.block].insert(r.video);
      frames_of_block[r.block].push_back(r.frame);
      ++counts[int(r.split)];
    }
    for (const auto& [b, s] : splits_of_block) CHECK(s.size() == 1);
    for (const auto& [b, v] : videos_of_block) CHECK(v.size() == 1);
    for (const auto& [b, f] : frames_of_block) {
      CHECK(f.size() <= 45);
      CHECK(f.back() - f.front() + 1 == int(f.size()));
    }
    const double n = double(out.size());
    CHECK(std::abs(counts[0] - 0.8 * n) <= 45);
    CHECK(std::abs(counts[1] - 0.1 * n) <= 45);
    CHECK(std::abs(counts[2] - 0.1 * n) <= 45);

    const auto again = time_block_split(rows, cfg);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].split == out[i].split);
  }
}
