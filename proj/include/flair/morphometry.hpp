// Body length along the centerline of a mask.
#pragma once

#include "flair/mask.hpp"

#include <vector>

namespace flair {

/// Camera and survey geometry for converting pixels to meters.
struct CameraModel {
  double sensor_width_mm = 13.2;
  double image_width_px = 1920.0;
  double altitude_m = 37.0;
  double depth_m = 1.5;
  double focal_length_mm = 28.0;
  double fps = 30.0;

  /// Throws InputError unless every field is strictly positive and finite.
  void validate() const;
  /// Meters per pixel at the subject plane.
  double meters_per_pixel() const;
};

/// Thinned foreground, one pixel wide except at junctions.
struct Skeleton {
  int width = 0;
  int height = 0;
  std::vector<PixelPoint> pixels;  // raster order

  /// Indices into `pixels` of 8-connected neighbours, parallel to `pixels`.
  std::vector<std::vector<int>> adjacency() const;
  /// Indices of pixels with exactly one neighbour.
  std::vector<int> endpoints() const;
  BinaryMask to_mask() const;
};

/// Zhang–Suen thinning: two sub-iterations per pass, repeated until a full pass
/// deletes nothing. Throws InputError on an empty mask.
Skeleton skeletonize(const BinaryMask& m);

/// Ordered skeleton path of maximal geodesic length between two endpoints.
struct SkeletonPath {
  std::vector<PixelPoint> points;
  double length_px = 0.0;
};

/// Longest shortest-path between skeleton endpoints (orthogonal step 1, diagonal √2).
/// A skeleton without endpoints (single pixel, closed loop) yields its first pixel.
SkeletonPath longest_skeleton_path(const Skeleton& s);

struct LengthBreakdown {
  double path_px = 0.0;
  double extension_px = 0.0;
  double total_px() const { return path_px + extension_px; }
};

/// Path length plus the straight-line extension from both path ends to the mask
/// boundary along the local path direction.
LengthBreakdown skeleton_length_breakdown(const Skeleton& s, const BinaryMask& m);
double skeleton_length_px(const Skeleton& s, const BinaryMask& m);

/// Distance from `start` along unit `direction` to the center of the last mask
/// pixel crossed before the ray leaves the mask.
double march_to_boundary(const Bitmap& mask, const RealPoint& start, const RealPoint& direction);

double pixels_to_meters(double length_px, const CameraModel& cam);

/// skeletonize + skeleton_length_px + pixels_to_meters.
double measure_length(const BinaryMask& m, const CameraModel& cam);

}  // namespace flair
