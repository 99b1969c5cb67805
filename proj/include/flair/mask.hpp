// Run-length-encoded binary masks and exact pixel geometry.
#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flair {

/// Raised for malformed or inconsistent input (bad dimensions, bad text, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major 0/1 image, used for decoding and for pixel-level algorithms.
using Bitmap = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Real-valued image point, x rightward and y downward.
using RealPoint = Eigen::Vector2d;

struct PixelPoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
  // Lexicographic by (y, x), i.e. raster order.
  friend std::strong_ordering operator<=>(const PixelPoint& a, const PixelPoint& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }

  RealPoint real() const { return {double(x), double(y)}; }
};

/// Inclusive pixel bounds.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A foreground span [begin, end) over the row-major linear pixel index.
struct Span {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

/// Binary mask stored as row-major run lengths, background first.
///
/// The run list is kept canonical: its sum equals width*height, only the first
/// run may be zero (when pixel 0 is foreground), and every other run is positive.
/// Equality of two masks is therefore equality of their run lists.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::vector<std::uint32_t> runs);

  static BinaryMask empty(int width, int height);
  static BinaryMask full(int width, int height);
  static BinaryMask from_bitmap(const Bitmap& bitmap);
  static BinaryMask from_pixels(int width, int height, std::span<const PixelPoint> pixels);
  /// Builds a mask from foreground spans; spans may be unsorted or overlapping.
  static BinaryMask from_spans(int width, int height, std::vector<Span> spans);

  /// Parses the canonical text form `width height r0 r1 ...`.
  static BinaryMask from_text(std::string_view text);
  std::string to_text() const;

  int width() const { return width_; }
  int height() const { return height_; }
  std::int64_t pixel_count() const { return std::int64_t(width_) * height_; }
  const std::vector<std::uint32_t>& runs() const { return runs_; }

  /// Foreground spans in increasing order, never adjacent or overlapping.
  std::vector<Span> spans() const;
  std::vector<PixelPoint> foreground_pixels() const;
  Bitmap to_bitmap() const;
  bool is_empty() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint32_t> runs_;
};

/// Exact first-order pixel moments, kept integral so ties can be decided exactly.
struct PixelMoments {
  std::int64_t count = 0;
  std::int64_t sum_x = 0;
  std::int64_t sum_y = 0;
};

std::int64_t area(const BinaryMask& m);
PixelMoments moments(const BinaryMask& m);

std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);

/// |a∩b| / |a∪b|; 0 when both masks are empty. Throws InputError on size mismatch.
double iou(const BinaryMask& a, const BinaryMask& b);
/// 2|a∩b| / (|a|+|b|); 1 when both masks are empty. Throws InputError on size mismatch.
double dice(const BinaryMask& a, const BinaryMask& b);

/// Mean foreground pixel coordinate. Throws InputError on an empty mask.
RealPoint centroid(const BinaryMask& m);
/// Tight inclusive box. Throws InputError on an empty mask.
BoundingBox bbox(const BinaryMask& m);

}  // namespace flair
