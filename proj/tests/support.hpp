// Shared helpers for the unit tests: random masks and per-pixel reference
// implementations that never touch the run-length code.
#pragma once

#include "flair/mask.hpp"
#include "flair/random.hpp"

#include <cstdint>

namespace flair::testing {

/// Random bitmap; `density` of pixels set, optionally grown into blobs.
inline Bitmap random_bitmap(Rng& rng, int width, int height, double density) {
  Bitmap b(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) b(y, x) = rng.uniform() < density ? 1 : 0;
  }
  return b;
}

inline std::int64_t brute_area(const Bitmap& a) {
  std::int64_t n = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) n += a.data()[i] ? 1 : 0;
  return n;
}

inline std::int64_t brute_intersection(const Bitmap& a, const Bitmap& b) {
  std::int64_t n = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) n += (a.data()[i] && b.data()[i]) ? 1 : 0;
  return n;
}

inline std::int64_t brute_union(const Bitmap& a, const Bitmap& b) {
  std::int64_t n = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) n += (a.data()[i] || b.data()[i]) ? 1 : 0;
  return n;
}

/// Masks built from an explicit pixel predicate.
template <typename Pred>
BinaryMask mask_from(int width, int height, Pred pred) {
  Bitmap b(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) b(y, x) = pred(x, y) ? 1 : 0;
  }
  return BinaryMask::from_bitmap(b);
}

inline BinaryMask rect(int width, int height, int x0, int y0, int x1, int y1) {
  return mask_from(width, height, [&](int x, int y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; });
}

}  // namespace flair::testing
