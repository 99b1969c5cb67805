#include "flair/synth.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace flair;
using namespace flair::testing;

namespace {

SceneSpec one_swimmer(double duration_s = 4.0) {
  SceneSpec scene;
  scene.width = 260;
  scene.height = 120;
  scene.duration_s = duration_s;
  SwimmerSpec sw;
  sw.head_start = {200.0, 60.0};
  scene.swimmers.push_back(sw);
  return scene;
}

}  // namespace

TEST_CASE("width profile") {
  const SwimmerSpec sw;
  CHECK(sw.half_width(sw.nose_fraction) == doctest::Approx(sw.max_half_width_px));
  CHECK(sw.half_width(1.0) == doctest::Approx(sw.max_half_width_px * sw.tail_width_fraction));
  CHECK(sw.half_width(0.0) < sw.half_width(0.05));
  for (double s = sw.nose_fraction; s < 1.0; s += 0.05) CHECK(sw.half_width(s + 0.05) <= sw.half_width(s));
}

TEST_CASE("straight swimmer arc length equals body length") {
  SwimmerSpec sw;
  sw.amplitude_px = 0.0;
  CHECK(midline_arc_length(sw, 0.0) == doctest::Approx(sw.body_length_px).epsilon(1e-3));
  CHECK(midline_arc_length(sw, 3.7) == doctest::Approx(sw.body_length_px).epsilon(1e-3));
  sw.amplitude_px = 15.87;
  CHECK(midline_arc_length(sw, 0.0) > sw.body_length_px);
}

TEST_CASE("midline follows the closed form") {
  SwimmerSpec sw;
  sw.heading_deg = 90.0;  // body extends toward -y from the head
  const double t = 0.4;
  const Eigen::Matrix2Xd m = sw.midline(t, 11);
  for (int k = 0; k <= 10; ++k) {
    const double s = k / 10.0;
    const double lateral =
        sw.amplitude_px * (0.1 + 0.9 * s) * std::sin(2 * std::numbers::pi * sw.frequency_hz * t - sw.wavenumber * s);
    CHECK(m(1, k) == doctest::Approx(sw.head_start.y() - s * sw.body_length_px).epsilon(1e-12));
    CHECK(std::abs(m(0, k) - sw.head_start.x()) == doctest::Approx(std::abs(lateral)).epsilon(1e-9));
  }
}

TEST_CASE("frequency zero gives a static body") {
  SceneSpec scene = one_swimmer(1.0);
  scene.swimmers[0].frequency_hz = 0.0;
  const SyntheticVideo v = generate(scene);
  for (const BinaryMask& m : v.swimmers[0].masks) CHECK(m == v.swimmers[0].masks.front());
}

TEST_CASE("ground truth records the frequency") {
  const SyntheticVideo v = generate(one_swimmer(1.0));
  CHECK(v.swimmers[0].frequency_hz == 0.5);
  CHECK(v.n_frames == 30);
  CHECK(v.swimmers[0].masks.size() == 30);
  CHECK(v.swimmers[0].head[0].x() == doctest::Approx(200.0));
}

TEST_CASE("leaving the image is an error") {
  SceneSpec scene = one_swimmer(4.0);
  scene.swimmers[0].speed_px_per_s = 30.0;
  CHECK_THROWS_WITH_AS(generate(scene), doctest::Contains("leaves the image"), InputError);
}

TEST_CASE("invalid scenes") {
  SceneSpec scene = one_swimmer();
  scene.perturb_px = 2;
  CHECK_THROWS_AS(generate(scene), InputError);
  scene = one_swimmer();
  scene.swimmers[0].shark_score = 1.5;
  CHECK_THROWS_AS(generate(scene), InputError);
}

TEST_CASE("candidates at sampled frames carry both scores") {
  SceneSpec scene = one_swimmer(4.0);
  scene.blobs.push_back({25, 40, {30.0, 20.0}, 6.0, 0.97});
  const SyntheticVideo v = generate(scene);
  // Intervals at 0, 30, 60, 90; the blob is visible only at 30.
  REQUIRE(v.candidates.size() == 5);
  for (const CandidateDetection& c : v.candidates) {
    CHECK(c.frame_index == c.interval_index * 30);
    CHECK(c.prompt_scores.at("shark") + c.prompt_scores.at("background") == doctest::Approx(1.0));
    CHECK(c.box == bbox(c.mask));
  }
  CHECK(v.sources[2].kind == CandidateSource::Kind::blob);
  CHECK(v.candidates[2].candidate_index == 1);
}

TEST_CASE("oracle tracks") {
  SceneSpec scene = one_swimmer(4.0);
  scene.blobs.push_back({25, 40, {30.0, 20.0}, 6.0, 0.97});
  const SyntheticVideo v = generate(scene);
  const std::vector<TrackRecord> tracks = oracle_tracks(v);
  REQUIRE(tracks.size() == v.candidates.size());
  // Unperturbed swimmer tracks agree exactly everywhere.
  for (int f = 0; f < v.n_frames; ++f) CHECK(iou(tracks[0].masks.at(f), tracks[1].masks.at(f)) == 1.0);
  // The blob track covers its visible range only.
  const TrackRecord& blob = tracks[2];
  CHECK(blob.masks.begin()->first == 25);
  CHECK(blob.masks.rbegin()->first == 40);
}

TEST_CASE("one-pixel perturbation keeps cross-interval IOU above 0.7") {
  SceneSpec scene = one_swimmer(4.0);
  scene.perturb_px = 1;
  scene.seed = 12;
  const SyntheticVideo v = generate(scene);
  const std::vector<TrackRecord> tracks = oracle_tracks(v);
  bool changed = false;
  for (int f = 0; f < v.n_frames; ++f) {
    const double j = iou(tracks[0].masks.at(f), tracks[3].masks.at(f));
    CHECK(j > 0.7);
    changed = changed || j < 1.0;
  }
  CHECK(changed);
  CHECK(tracks[1].masks.at(30) == v.swimmers[0].masks[30]);
}

TEST_CASE("random transients are single-interval and seeded") {
  SceneSpec scene = one_swimmer(4.0);
  scene.random_transients = 8;
  scene.seed = 4;
  const SyntheticVideo a = generate(scene);
  const SyntheticVideo b = generate(scene);
  REQUIRE(a.blobs.size() == 8);
  CHECK(a.candidates.size() == b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) CHECK(a.candidates[i].mask == b.candidates[i].mask);

  for (const BlobSpec& blob : a.blobs) {
    int sampled = 0;
    for (int f = blob.first_frame; f <= blob.last_frame; ++f) sampled += f % scene.interval_stride == 0;
    CHECK(sampled == 1);
  }

  scene.seed = 5;
  const SyntheticVideo c = generate(scene);
  bool differs = false;
  for (std::size_t i = 0; i < a.blobs.size(); ++i) differs = differs || a.blobs[i].center != c.blobs[i].center;
  CHECK(differs);
}

TEST_CASE("four-neighbour morphology") {
  const BinaryMask dot = rect(9, 9, 4, 4, 4, 4);
  CHECK(area(dilate_mask(dot)) == 5);
  CHECK(erode_mask(dilate_mask(dot)) == dot);
  const BinaryMask box = rect(20, 20, 5, 5, 14, 14);
  CHECK(area(erode_mask(box)) == 64);
  CHECK(erode_mask(dilate_mask(box)) == box);
  CHECK(area(rasterize_disc({10.0, 10.0}, 6.0, 21, 21)) == doctest::Approx(std::numbers::pi * 36).epsilon(0.1));
}
