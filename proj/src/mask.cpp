#include "flair/mask.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

namespace flair {
namespace {

void require_same_size(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InputError("mask dimension mismatch: " + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()));
  }
}

void require_dims(int width, int height) {
  if (width < 0 || height < 0) throw InputError("mask dimensions must be nonnegative");
  if (std::int64_t(width) * height > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("mask too large");
  }
}

// Canonical runs from sorted, disjoint, non-adjacent spans.
std::vector<std::uint32_t> runs_from_spans(std::int64_t total, const std::vector<Span>& spans) {
  std::vector<std::uint32_t> runs;
  runs.reserve(2 * spans.size() + 1);
  std::int64_t pos = 0;
  for (const Span& s : spans) {
    runs.push_back(std::uint32_t(s.begin - pos));
    runs.push_back(std::uint32_t(s.end - s.begin));
    pos = s.end;
  }
  if (pos < total || runs.empty()) runs.push_back(std::uint32_t(total - pos));
  return runs;
}

// Merges sorted span lists with a predicate on membership (a, b).
template <typename Keep>
std::vector<Span> combine(const std::vector<Span>& a, const std::vector<Span>& b, Keep keep) {
  // Sweep over all span boundaries.
  std::vector<std::int64_t> cuts;
  cuts.reserve(2 * (a.size() + b.size()));
  for (const Span& s : a) cuts.insert(cuts.end(), {s.begin, s.end});
  for (const Span& s : b) cuts.insert(cuts.end(), {s.begin, s.end});
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Span> out;
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const std::int64_t lo = cuts[k];
    const std::int64_t hi = cuts[k + 1];
    while (ia < a.size() && a[ia].end <= lo) ++ia;
    while (ib < b.size() && b[ib].end <= lo) ++ib;
    const bool in_a = ia < a.size() && a[ia].begin <= lo;
    const bool in_b = ib < b.size() && b[ib].begin <= lo;
    if (!keep(in_a, in_b)) continue;
    if (!out.empty() && out.back().end == lo) {
      out.back().end = hi;
    } else {
      out.push_back({lo, hi});
    }
  }
  return out;
}

}  // namespace

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint32_t> runs)
    : width_(width), height_(height), runs_(std::move(runs)) {
  require_dims(width, height);
  const std::int64_t total = pixel_count();
  if (runs_.empty()) {
    if (total != 0) throw InputError("mask has no runs");
    runs_.push_back(0);
    return;
  }
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (runs_[i] == 0 && i != 0 && total != 0) {
      throw InputError("zero-length run at position " + std::to_string(i));
    }
    sum += runs_[i];
  }
  if (sum != total) {
    throw InputError("run lengths sum to " + std::to_string(sum) + ", expected " +
                     std::to_string(total));
  }
  if (total == 0) runs_.assign(1, 0);
}

BinaryMask BinaryMask::empty(int width, int height) {
  require_dims(width, height);
  return BinaryMask(width, height, {std::uint32_t(std::int64_t(width) * height)});
}

BinaryMask BinaryMask::full(int width, int height) {
  require_dims(width, height);
  const auto total = std::uint32_t(std::int64_t(width) * height);
  if (total == 0) return empty(width, height);
  return BinaryMask(width, height, {0, total});
}

BinaryMask BinaryMask::from_bitmap(const Bitmap& bitmap) {
  const int width = int(bitmap.cols());
  const int height = int(bitmap.rows());
  require_dims(width, height);
  std::vector<std::uint32_t> runs;
  const std::uint8_t* data = bitmap.data();
  const std::int64_t total = std::int64_t(width) * height;
  std::uint8_t current = 0;
  std::uint32_t count = 0;
  for (std::int64_t i = 0; i < total; ++i) {
    const std::uint8_t v = data[i] ? 1 : 0;
    if (v != current) {
      runs.push_back(count);
      count = 0;
      current = v;
    }
    ++count;
  }
  runs.push_back(count);
  return BinaryMask(width, height, std::move(runs));
}

BinaryMask BinaryMask::from_spans(int width, int height, std::vector<Span> spans) {
  require_dims(width, height);
  const std::int64_t total = std::int64_t(width) * height;
  std::erase_if(spans, [](const Span& s) { return s.end <= s.begin; });
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.begin < b.begin; });
  std::vector<Span> merged;
  for (const Span& s : spans) {
    if (s.begin < 0 || s.end > total) throw InputError("span outside mask");
    if (!merged.empty() && s.begin <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return BinaryMask(width, height, runs_from_spans(total, merged));
}

BinaryMask BinaryMask::from_pixels(int width, int height, std::span<const PixelPoint> pixels) {
  std::vector<Span> spans;
  spans.reserve(pixels.size());
  for (const PixelPoint& p : pixels) {
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
      throw InputError("pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                       ") outside mask");
    }
    const std::int64_t idx = std::int64_t(p.y) * width + p.x;
    spans.push_back({idx, idx + 1});
  }
  return from_spans(width, height, std::move(spans));
}

BinaryMask BinaryMask::from_text(std::string_view text) {
  std::vector<std::int64_t> values;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end) break;
    std::int64_t v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t')) {
      throw InputError("malformed mask text near offset " + std::to_string(p - text.data()));
    }
    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
      throw InputError("mask value out of range: " + std::to_string(v));
    }
    values.push_back(v);
    p = next;
  }
  if (values.size() < 2) throw InputError("mask text needs width and height");
  if (values[0] > std::numeric_limits<int>::max() || values[1] > std::numeric_limits<int>::max()) {
    throw InputError("mask dimensions out of range");
  }
  std::vector<std::uint32_t> runs(values.begin() + 2, values.end());
  return BinaryMask(int(values[0]), int(values[1]), std::move(runs));
}

std::string BinaryMask::to_text() const {
  std::string out = std::to_string(width_) + ' ' + std::to_string(height_);
  for (std::uint32_t r : runs_) {
    out += ' ';
    out += std::to_string(r);
  }
  return out;
}

std::vector<Span> BinaryMask::spans() const {
  std::vector<Span> out;
  out.reserve(runs_.size() / 2);
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const std::int64_t next = pos + runs_[i];
    if (i % 2 == 1) out.push_back({pos, next});
    pos = next;
  }
  return out;
}

std::vector<PixelPoint> BinaryMask::foreground_pixels() const {
  std::vector<PixelPoint> out;
  for (const Span& s : spans()) {
    for (std::int64_t i = s.begin; i < s.end; ++i) {
      out.push_back({int(i % width_), int(i / width_)});
    }
  }
  return out;
}

Bitmap BinaryMask::to_bitmap() const {
  Bitmap bitmap = Bitmap::Zero(height_, width_);
  std::uint8_t* data = bitmap.data();
  for (const Span& s : spans()) std::fill(data + s.begin, data + s.end, std::uint8_t{1});
  return bitmap;
}

bool BinaryMask::is_empty() const { return runs_.size() < 2; }

std::int64_t area(const BinaryMask& m) {
  std::int64_t n = 0;
  const auto& runs = m.runs();
  for (std::size_t i = 1; i < runs.size(); i += 2) n += runs[i];
  return n;
}

PixelMoments moments(const BinaryMask& m) {
  PixelMoments out;
  const std::int64_t w = m.width();
  for (const Span& s : m.spans()) {
    // Split the span at row boundaries; each piece is a contiguous x range.
    std::int64_t i = s.begin;
    while (i < s.end) {
      const std::int64_t y = i / w;
      const std::int64_t row_end = std::min(s.end, (y + 1) * w);
      const std::int64_t x0 = i - y * w;
      const std::int64_t x1 = row_end - 1 - y * w;
      const std::int64_t n = x1 - x0 + 1;
      out.count += n;
      out.sum_x += (x0 + x1) * n / 2;
      out.sum_y += y * n;
      i = row_end;
    }
  }
  return out;
}

std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b);
  const auto sa = a.spans();
  const auto sb = b.spans();
  std::int64_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < sa.size() && j < sb.size()) {
    const std::int64_t lo = std::max(sa[i].begin, sb[j].begin);
    const std::int64_t hi = std::min(sa[i].end, sb[j].end);
    if (hi > lo) n += hi - lo;
    if (sa[i].end < sb[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b);
  auto spans = combine(a.spans(), b.spans(), [](bool x, bool y) { return x || y; });
  return BinaryMask(a.width(), a.height(), runs_from_spans(a.pixel_count(), spans));
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b);
  auto spans = combine(a.spans(), b.spans(), [](bool x, bool y) { return x && y; });
  return BinaryMask(a.width(), a.height(), runs_from_spans(a.pixel_count(), spans));
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = area(a) + area(b) - inter;
  if (uni == 0) return 0.0;
  return double(inter) / double(uni);
}

double dice(const BinaryMask& a, const BinaryMask& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t denom = area(a) + area(b);
  if (denom == 0) return 1.0;
  return 2.0 * double(inter) / double(denom);
}

RealPoint centroid(const BinaryMask& m) {
  const PixelMoments mo = moments(m);
  if (mo.count == 0) throw InputError("empty mask has no centroid");
  return {double(mo.sum_x) / double(mo.count), double(mo.sum_y) / double(mo.count)};
}

BoundingBox bbox(const BinaryMask& m) {
  const auto spans = m.spans();
  if (spans.empty()) throw InputError("empty mask has no bounding box");
  const std::int64_t w = m.width();
  BoundingBox box{m.width(), int(spans.front().begin / w), -1, int((spans.back().end - 1) / w)};
  for (const Span& s : spans) {
    const std::int64_t y0 = s.begin / w;
    const std::int64_t y1 = (s.end - 1) / w;
    if (y1 > y0) {
      // Wraps a row boundary: touches both the left and right edges.
      box.x_min = 0;
      box.x_max = int(w - 1);
    } else {
      box.x_min = std::min<int>(box.x_min, int(s.begin - y0 * w));
      box.x_max = std::max<int>(box.x_max, int(s.end - 1 - y0 * w));
    }
  }
  return box;
}

}  // namespace flair
