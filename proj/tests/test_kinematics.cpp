#include "flair/kinematics.hpp"
#include "flair/synth.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace flair;
using namespace flair::testing;

namespace {

std::int64_t d2(PixelPoint a, PixelPoint b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Brute force over all pixel pairs with the documented tie-break.
std::pair<PixelPoint, PixelPoint> brute_farthest(const BinaryMask& m) {
  const auto px = m.foreground_pixels();
  std::pair<PixelPoint, PixelPoint> best{px[0], px[1]};
  std::int64_t best_d = -1;
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t j = i + 1; j < px.size(); ++j) {
      const std::int64_t d = d2(px[i], px[j]);
      const std::pair<PixelPoint, PixelPoint> cand{px[i], px[j]};
      if (d > best_d || (d == best_d && cand < best)) {
        best_d = d;
        best = cand;
      }
    }
  }
  return best;
}

Eigen::VectorXd sampled(int n, double fps, auto fn) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = fn(i / fps);
  return v;
}

BinaryMask flip_vertical(const BinaryMask& m) {
  const Bitmap b = m.to_bitmap();
  return BinaryMask::from_bitmap(b.colwise().reverse().eval());
}

}  // namespace

TEST_CASE("savgol coefficients for window 5, order 2") {
  const Series<double> c = savgol_coefficients<double>(5, 2);
  const double expected[] = {-3, 12, 17, 12, -3};
  for (int i = 0; i < 5; ++i) CHECK(c(i) == doctest::Approx(expected[i] / 35.0).epsilon(1e-12));
  CHECK(c.sum() == doctest::Approx(1.0));
}

TEST_CASE("savgol reproduces polynomials up to its order") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int order = int(rng.below(5));
    const int window = 2 * (order + int(rng.below(6))) + 1 + (order == 0 ? 2 : 0);
    const int n = window + 20 + int(rng.below(40));
    std::vector<double> coef(std::size_t(order) + 1);
    for (double& c : coef) c = rng.uniform(-2.0, 2.0);
    Series<double> y(n);
    for (int i = 0; i < n; ++i) {
      const double x = (i - n / 2) * 0.1;
      double v = 0.0;
      for (std::size_t k = coef.size(); k-- > 0;) v = v * x + coef[k];
      y(i) = v;
    }
    const Series<double> s = savgol_smooth(y, window, order);
    for (int i = window / 2; i < n - window / 2; ++i) CHECK(std::abs(s(i) - y(i)) < 1e-9);
  }
}

TEST_CASE("savgol works on float series") {
  Series<float> y(21);
  for (int i = 0; i < 21; ++i) y(i) = float(0.5 * i - 3.0);
  const Series<float> s = savgol_smooth(y, 7, 1);
  for (int i = 3; i < 18; ++i) CHECK(s(i) == doctest::Approx(y(i)).epsilon(1e-5));
}

TEST_CASE("savgol rejects bad parameters") {
  Series<double> y = Series<double>::Zero(10);
  CHECK_THROWS_WITH_AS(savgol_smooth(y, 15, 3), doctest::Contains("shorter window"), InputError);
  CHECK_THROWS_AS(savgol_coefficients<double>(4, 2), InputError);
  CHECK_THROWS_AS(savgol_coefficients<double>(5, 5), InputError);
}

TEST_CASE("kinematics config validation") {
  KinematicsConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.savgol_window = 14;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = KinematicsConfig{};
  cfg.tbf_step_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("farthest pair matches brute force") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 2 + int(rng.below(24));
    const int h = 2 + int(rng.below(24));
    BinaryMask m = BinaryMask::from_bitmap(random_bitmap(rng, w, h, rng.uniform(0.02, 0.6)));
    if (area(m) < 2) continue;
    const auto fast = farthest_pair(m);
    const auto slow = brute_farthest(m);
    CHECK(d2(fast.first, fast.second) == d2(slow.first, slow.second));
    CHECK(fast == slow);
  }
  CHECK_THROWS_AS(farthest_pair(rect(4, 4, 1, 1, 1, 1)), InputError);
}

TEST_CASE("head is the end nearer the centre of mass") {
  // Wide block on the right, thin tail to the left.
  const BinaryMask m = mask_from(60, 21, [](int x, int y) {
    return (x >= 40 && x <= 50 && y >= 5 && y <= 15) || (x >= 5 && x < 40 && y == 10);
  });
  const HeadTail ht = head_tail(m);
  CHECK(ht.head.x >= 40);
  CHECK(ht.tail.x == 5);
  CHECK_FALSE(ht.tie);
}

TEST_CASE("tail displacement sign and magnitude") {
  // Diamond head with its tip at (52, 10); tail runs left and bends at its end.
  auto shape = [](int bend) {
    return mask_from(60, 30, [bend](int x, int y) {
      if (std::abs(x - 44) + std::abs(y - 10) <= 8) return true;
      if (x >= 15 && x < 40 && y == 10) return true;
      return x >= 5 && x < 15 && y == 10 + bend;
    });
  };
  const BinaryMask down = shape(4);
  const HeadTail ht = head_tail(down);
  CHECK(ht.head == PixelPoint{52, 10});
  CHECK(ht.tail.x == 5);
  const RealPoint c = centroid(down) - ht.head.real();
  const RealPoint v = ht.tail.real() - ht.head.real();
  const double perp = std::abs(v.x() * c.y() - v.y() * c.x()) / c.norm();
  // Heading points toward -x; on screen its left side is +y, where the tail bends.
  CHECK(tail_displacement(down) > 0.0);
  CHECK(std::abs(tail_displacement(down)) == doctest::Approx(perp));
  CHECK(tail_displacement(shape(-4)) < 0.0);
}

TEST_CASE("mirroring the mask negates the displacement") {
  Rng rng(9);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const BinaryMask m = BinaryMask::from_bitmap(random_bitmap(rng, 16, 16, rng.uniform(0.1, 0.5)));
    if (area(m) < 3) continue;
    const BinaryMask f = flip_vertical(m);
    const HeadTail a = head_tail(m);
    const HeadTail b = head_tail(f);
    if (a.tie || b.tie) continue;
    // Mirroring may reorder equally distant pairs; only compare when the chosen ends correspond.
    if (b.head != PixelPoint{a.head.x, 15 - a.head.y} || b.tail != PixelPoint{a.tail.x, 15 - a.tail.y}) continue;
    double da = 0.0;
    try {
      da = tail_displacement(m);
    } catch (const InputError&) {
      continue;
    }
    CHECK(tail_displacement(f) == doctest::Approx(-da));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("raw sign changes") {
  Eigen::VectorXd v(4);
  v << 1.0, -1.0, -1.0, 3.0;
  const auto p = sign_change_positions(v);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(2.25));
  Eigen::VectorXd z(5);
  z << 1.0, 0.0, 0.0, 0.0, -1.0;
  REQUIRE(sign_change_positions(z).size() == 1);
  CHECK(sign_change_positions(z)[0] == doctest::Approx(2.0));
}

TEST_CASE("crossings of a sine bracketed by extrema") {
  const double fps = 30.0;
  const Eigen::VectorXd s = sampled(91, fps, [](double t) { return std::sin(2 * std::numbers::pi * t); });
  const auto c = find_crossings(s, fps);
  // The zero at t = 0 opens the record and has no extremum before it.
  REQUIRE(c.size() == 5);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k] == doctest::Approx(0.5 * double(k + 1)).epsilon(1e-3));
}

TEST_CASE("crossings are scale invariant and ignore small wiggles") {
  const double fps = 30.0;
  const Eigen::VectorXd s = sampled(300, fps, [](double t) {
    return std::sin(2 * std::numbers::pi * 0.7 * t + 0.3) + 0.01 * std::sin(2 * std::numbers::pi * 9.0 * t);
  });
  const auto base = find_crossings(s, fps);
  for (double k : {1e-6, 1e-3, 10.0, 1e6}) {
    const Eigen::VectorXd scaled = s * k;
    const auto c = find_crossings(scaled, fps);
    REQUIRE(c.size() == base.size());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(base[i]));
  }
  // Jitter around a positive plateau produces no crossings at all.
  const Eigen::VectorXd flat = sampled(100, fps, [](double t) { return 1.0 + 0.001 * std::sin(40.0 * t); });
  CHECK(find_crossings(flat, fps).empty());
}

TEST_CASE("beats pair every other crossing") {
  const std::vector<double> c{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  const BeatIntervals b = beat_intervals(c);
  REQUIRE(b.beats.size() == 2);
  CHECK(b.beats[0] == std::pair{0.0, 2.0});
  CHECK(b.beats[1] == std::pair{2.0, 4.0});
  CHECK(beat_intervals(std::vector<double>{1.0, 2.0}).beats.empty());
}

TEST_CASE("fractional beats and windowed rate") {
  const std::vector<std::pair<double, double>> beats{{0.0, 2.0}, {2.0, 4.0}, {4.0, 6.0}};
  CHECK(fractional_beats(beats, 1.0, 5.0) == doctest::Approx(2.0));
  CHECK(fractional_beats(beats, 0.0, 6.0) == doctest::Approx(3.0));
  CHECK(fractional_beats(beats, 7.0, 9.0) == 0.0);

  std::vector<std::pair<double, double>> steady;
  for (double t = 0.0; t + 2.0 <= 20.0; t += 2.0) steady.emplace_back(t, t + 2.0);
  KinematicsConfig cfg;
  const TbfSeries s = windowed_tbf(steady, 20.0, cfg);
  CHECK(s.window_centers_s.size() == 31);
  CHECK(s.window_centers_s.front() == doctest::Approx(2.5));
  for (double v : s.beats_per_second) CHECK(v == doctest::Approx(0.5));

  const TbfSeries short_video = windowed_tbf(std::vector<std::pair<double, double>>{{0.0, 2.0}}, 3.0, cfg);
  REQUIRE(short_video.window_centers_s.size() == 1);
  CHECK(short_video.window_centers_s[0] == doctest::Approx(1.5));
}

TEST_CASE("tailbeat frequency from synthetic masks") {
  SceneSpec scene;
  scene.width = 260;
  scene.height = 120;
  scene.duration_s = 10.0;
  SwimmerSpec sw;
  sw.head_start = {200.0, 60.0};
  sw.frequency_hz = 0.8;
  scene.swimmers.push_back(sw);
  const SyntheticVideo video = generate(scene);
  std::map<int, BinaryMask> masks;
  for (int f = 0; f < video.n_frames; ++f) masks.emplace(f, video.swimmers[0].masks[std::size_t(f)]);

  const KinematicsConfig cfg;
  const TbfEstimate est = estimate_tbf(masks, scene.fps, cfg);
  REQUIRE_FALSE(est.tbf.beats_per_second.empty());
  for (double v : est.tbf.beats_per_second) CHECK(v == doctest::Approx(0.8).epsilon(0.07));

  // A short gap is bridged; a long gap splits the series but both halves still count.
  std::map<int, BinaryMask> gappy = masks;
  for (int f = 100; f < 105; ++f) gappy.erase(f);
  const TbfEstimate bridged = estimate_tbf(gappy, scene.fps, cfg);
  CHECK(std::count(bridged.displacement.interpolated.begin(), bridged.displacement.interpolated.end(), true) == 5);
  for (int f = 120; f < 150; ++f) gappy.erase(f);
  const TbfEstimate split = estimate_tbf(gappy, scene.fps, cfg);
  for (double v : split.tbf.beats_per_second) CHECK(v == doctest::Approx(0.8).epsilon(0.07));

  std::map<int, BinaryMask> few;
  for (int f = 0; f < 10; ++f) few.emplace(f, masks.at(f));
  CHECK_THROWS_AS(estimate_tbf(few, scene.fps, cfg), InputError);
}
