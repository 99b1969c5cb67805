// Command-line entry points and the run configuration file.
//
// Config file (all sections and keys optional, unknown keys rejected):
//
//   {
//     "alignment":  {"interval_stride", "score_threshold", "iou_threshold",
//                    "shark_prompt_label", "min_support"},
//     "kinematics": {"savgol_window", "savgol_order", "tbf_window_s", "tbf_step_s",
//                    "min_extremum_fraction", "max_gap_s"},
//     "camera":     {"sensor_width_mm", "image_width_px", "altitude_m", "depth_m",
//                    "focal_length_mm", "fps"},
//     "split":      {"block_size", "train", "val", "test"},
//     "paths":      {"candidates", "tracks", "individuals", "camera", "scene",
//                    "predictions", "ground_truth", "frame_table", "out", "out_dir"},
//     "seed": 0,
//     "threads": 1
//   }
#pragma once

#include "flair/alignment.hpp"
#include "flair/eval.hpp"
#include "flair/kinematics.hpp"
#include "flair/morphometry.hpp"
#include "flair/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace flair::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitWarnings = 3;

struct Paths {
  std::string candidates;
  std::string tracks;
  std::string individuals;
  std::string camera;
  std::string scene;
  std::string predictions;
  std::string ground_truth;
  std::string frame_table;
  std::string out;
  std::string out_dir;
};

struct RunConfig {
  AlignmentConfig alignment;
  KinematicsConfig kinematics;
  CameraModel camera;
  /// Set when the camera section or a camera file supplied the geometry.
  bool camera_given = false;
  SplitConfig split;
  Paths paths;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// Parses a config document. Throws InputError on unknown keys or wrong types.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Flat camera file with the six CameraModel keys, all required.
CameraModel parse_camera(const std::string& text);
CameraModel load_camera(const std::string& path);

/// Scene description for `synth`; see README for the schema.
SceneSpec parse_scene(const std::string& text);

/// Reads a whole file. Throws InputError when it cannot be opened.
std::string read_file(const std::string& path);

/// Runs the tool with the given arguments (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flair::cli
