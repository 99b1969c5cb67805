#include "flair/cli.hpp"

#include "flair/io.hpp"
#include "flair/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace flair::cli {
namespace {

namespace fs = std::filesystem;

// A flag that, when given, overwrites one field of the loaded RunConfig.
class Overrides {
 public:
  template <typename T>
  void add(CLI::App& app, const std::string& name, const std::string& help,
           std::function<T&(RunConfig&)> field) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app.add_option(name, *value, help);
    entries_.push_back([opt, value, field](RunConfig& cfg) {
      if (opt->count() > 0) field(cfg) = *value;
    });
  }

  void apply(RunConfig& cfg) const {
    for (const auto& e : entries_) e(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> entries_;
};

std::ifstream open_input(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("no ") + what + " path given");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

// Writes `text` to `path`, or to `out` for an empty path or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

fs::path require_out_dir(const std::string& dir) {
  if (dir.empty()) throw InputError("no output directory given (--out-dir)");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

int finish(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  return warnings.empty() ? kExitOk : kExitWarnings;
}

int cmd_align(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ifstream cin_ = open_input(cfg.paths.candidates, "candidates");
  const std::vector<CandidateDetection> candidates = read_candidates(cin_, cfg.alignment.interval_stride);

  std::vector<TrackRecord> tracks;
  if (!candidates.empty()) {
    std::ifstream tin = open_input(cfg.paths.tracks, "tracks");
    tracks = read_tracks(tin);
  }
  const FileTrackPropagator propagator(std::move(tracks));

  AlignmentRun run;
  try {
    run = run_alignment(candidates, propagator, cfg.alignment, cfg.threads);
  } catch (const InputError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }

  std::ostringstream text;
  write_individuals(text, per_frame_output(run.result.individuals));
  emit(cfg.paths.out, text.str(), out);

  err << "align: candidates=" << run.candidates_in << " kept=" << run.candidates_kept
      << " tracks=" << run.tracks_propagated << " individuals=" << run.result.individuals.size()
      << '\n';
  return finish(err, run.result.warnings);
}

struct LengthRow {
  int frame = 0;
  int id = 0;
  double px = 0.0;
  bool ok = false;
  std::string error;
};

int cmd_biometrics(const RunConfig& cfg, int n_frames, std::ostream& err) {
  std::ifstream in = open_input(cfg.paths.individuals, "individuals");
  const auto individuals = read_individuals(in);
  const fs::path dir = require_out_dir(cfg.paths.out_dir);
  const CameraModel& cam = cfg.camera;

  std::vector<LengthRow> rows;
  std::vector<const BinaryMask*> masks;
  for (const auto& [id, frames] : individuals) {
    for (const auto& [frame, mask] : frames) {
      rows.push_back({frame, id, 0.0, false, {}});
      masks.push_back(&mask);
    }
  }
  parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
    try {
      rows[i].px = skeleton_length_px(skeletonize(*masks[i]), *masks[i]);
      rows[i].ok = true;
    } catch (const InputError& e) {
      rows[i].error = e.what();
    }
  });

  std::vector<std::string> warnings;
  std::string lengths = "frame,individual_id,length_px,length_m\n";
  std::size_t length_rows = 0;
  for (const LengthRow& r : rows) {
    if (!r.ok) {
      warnings.push_back("individual " + std::to_string(r.id) + " frame " + std::to_string(r.frame) +
                         ": no length: " + r.error);
      continue;
    }
    lengths += std::to_string(r.frame) + ',' + std::to_string(r.id) + ',' + format_number(r.px) + ',' +
               format_number(pixels_to_meters(r.px, cam)) + '\n';
    ++length_rows;
  }

  std::string displacement = "frame,individual_id,displacement_px,displacement_smoothed_px\n";
  std::string tbf = "window_center_s,individual_id,tbf_hz\n";
  std::size_t tbf_rows = 0;
  for (const auto& [id, frames] : individuals) {
    TbfEstimate est;
    try {
      est = estimate_tbf(frames, cam.fps, cfg.kinematics, n_frames);
    } catch (const InputError& e) {
      warnings.push_back("individual " + std::to_string(id) + ": no tailbeat frequency: " + e.what());
      continue;
    }
    const DisplacementSeries& d = est.displacement;
    for (std::size_t i = 0; i < d.frames.size(); ++i) {
      displacement += std::to_string(d.frames[i]) + ',' + std::to_string(id) + ',' +
                      (d.interpolated[i] ? std::string() : format_number(d.values[i])) + ',' +
                      format_number(d.smoothed[i]) + '\n';
    }
    for (std::size_t i = 0; i < est.tbf.window_centers_s.size(); ++i) {
      tbf += format_number(est.tbf.window_centers_s[i], 3) + ',' + std::to_string(id) + ',' +
             format_number(est.tbf.beats_per_second[i]) + '\n';
      ++tbf_rows;
    }
  }

  write_file(dir / "lengths.csv", lengths);
  write_file(dir / "displacement.csv", displacement);
  write_file(dir / "tbf.csv", tbf);
  err << "biometrics: individuals=" << individuals.size() << " length_rows=" << length_rows
      << " tbf_rows=" << tbf_rows << " meters_per_pixel=" << format_number(cam.meters_per_pixel(), 9)
      << '\n';
  return finish(err, warnings);
}

SceneSpec default_scene() {
  SceneSpec scene;
  scene.duration_s = 10.0;
  scene.swimmers.emplace_back();
  scene.random_transients = 5;
  return scene;
}

int cmd_synth(const RunConfig& cfg, bool seed_given, bool stride_given, std::ostream& err) {
  SceneSpec scene = cfg.paths.scene.empty() ? default_scene() : parse_scene(read_file(cfg.paths.scene));
  if (seed_given) scene.seed = cfg.seed;
  if (stride_given) scene.interval_stride = cfg.alignment.interval_stride;
  scene.validate();
  const fs::path dir = require_out_dir(cfg.paths.out_dir);
  const SyntheticVideo video = generate(scene);

  std::ostringstream candidates;
  write_candidates(candidates, video.candidates);
  std::ostringstream tracks;
  write_tracks(tracks, oracle_tracks(video));
  std::ostringstream truth;
  write_ground_truth(truth, video);
  write_file(dir / "candidates.ndjson", candidates.str());
  write_file(dir / "tracks.ndjson", tracks.str());
  write_file(dir / "ground_truth.ndjson", truth.str());

  err << "synth: frames=" << video.n_frames << " swimmers=" << video.swimmers.size()
      << " blobs=" << video.blobs.size() << " candidates=" << video.candidates.size() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, int n_frames, bool only_positive, const std::vector<double>& thresholds,
             const std::string& csv_path, std::ostream& out, std::ostream& err) {
  std::ifstream gin = open_input(cfg.paths.ground_truth, "ground truth");
  const FrameMasks gts = read_frame_masks(gin, n_frames);
  std::ifstream pin = open_input(cfg.paths.predictions, "predictions");
  const FrameMasks preds = read_frame_masks(pin, int(gts.size()));

  const double dice_score = video_dice(preds, gts, only_positive);
  std::string report = "frames=" + std::to_string(gts.size()) + '\n' +
                       "only_positive_frames=" + (only_positive ? "true" : "false") + '\n' +
                       "dice=" + format_number(dice_score) + '\n';
  std::string csv = "iou_threshold,precision,recall,true_positives,predictions,ground_truths,dice\n";
  for (double t : thresholds) {
    const PrecisionRecall pr = precision_recall_at_iou(preds, gts, t);
    const std::string tag = format_number(t, 2);
    report += "precision@" + tag + '=' + format_number(pr.precision) + '\n';
    report += "recall@" + tag + '=' + format_number(pr.recall) + '\n';
    report += "true_positives@" + tag + '=' + std::to_string(pr.true_positives) + '\n';
    csv += tag + ',' + format_number(pr.precision) + ',' + format_number(pr.recall) + ',' +
           std::to_string(pr.true_positives) + ',' + std::to_string(pr.predictions) + ',' +
           std::to_string(pr.ground_truths) + ',' + format_number(dice_score) + '\n';
  }
  emit(cfg.paths.out, report, out);
  if (!csv_path.empty()) emit(csv_path, csv, out);
  err << "eval: frames=" << gts.size() << " dice=" << format_number(dice_score) << '\n';
  return kExitOk;
}

int cmd_split(const RunConfig& cfg, std::optional<int> frames, const std::string& video, std::ostream& out,
              std::ostream& err) {
  std::vector<FrameRow> rows;
  if (frames) {
    if (!cfg.paths.frame_table.empty()) throw InputError("give either --frame-table or --frames, not both");
    if (*frames < 1) throw InputError("--frames must be >= 1");
    for (int f = 0; f < *frames; ++f) rows.push_back({video, f});
  } else {
    std::ifstream in = open_input(cfg.paths.frame_table, "frame table");
    rows = read_frame_table(in);
  }
  const std::vector<SplitAssignment> assigned = time_block_split(rows, cfg.split);
  std::ostringstream text;
  write_split(text, assigned);
  emit(cfg.paths.out, text.str(), out);

  std::size_t counts[3] = {0, 0, 0};
  int blocks = 0;
  for (const SplitAssignment& a : assigned) {
    ++counts[int(a.split)];
    blocks = std::max(blocks, a.block + 1);
  }
  err << "split: rows=" << assigned.size() << " blocks=" << blocks << " train=" << counts[0]
      << " val=" << counts[1] << " test=" << counts[2] << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shark detection post-processing, morphometrics and evaluation", "flair"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "JSON run configuration");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Random seed");
  CLI::Option* threads_opt = app.add_option("--threads", threads, "Worker threads");

  Overrides ov;
  ov.add<int>(app, "--interval-stride", "Frames between sampled intervals",
              [](RunConfig& c) -> int& { return c.alignment.interval_stride; });
  ov.add<double>(app, "--score-threshold", "Minimum shark prompt score (exclusive)",
                 [](RunConfig& c) -> double& { return c.alignment.score_threshold; });
  ov.add<double>(app, "--iou-threshold", "Track alignment IOU (exclusive)",
                 [](RunConfig& c) -> double& { return c.alignment.iou_threshold; });
  ov.add<std::string>(app, "--shark-label", "Prompt label holding the shark score",
                      [](RunConfig& c) -> std::string& { return c.alignment.shark_prompt_label; });
  ov.add<int>(app, "--min-support", "Other intervals a track must overlap",
              [](RunConfig& c) -> int& { return c.alignment.min_support; });
  ov.add<int>(app, "--savgol-window", "Smoothing window (odd)",
              [](RunConfig& c) -> int& { return c.kinematics.savgol_window; });
  ov.add<int>(app, "--savgol-order", "Smoothing polynomial order",
              [](RunConfig& c) -> int& { return c.kinematics.savgol_order; });
  ov.add<double>(app, "--tbf-window", "Tailbeat window, seconds",
                 [](RunConfig& c) -> double& { return c.kinematics.tbf_window_s; });
  ov.add<double>(app, "--tbf-step", "Tailbeat window step, seconds",
                 [](RunConfig& c) -> double& { return c.kinematics.tbf_step_s; });
  ov.add<double>(app, "--min-extremum-fraction", "Extremum significance relative to peak",
                 [](RunConfig& c) -> double& { return c.kinematics.min_extremum_fraction; });
  ov.add<double>(app, "--max-gap", "Longest interpolated gap, seconds",
                 [](RunConfig& c) -> double& { return c.kinematics.max_gap_s; });
  ov.add<double>(app, "--sensor-width-mm", "Camera sensor width",
                 [](RunConfig& c) -> double& { return c.camera.sensor_width_mm; });
  ov.add<double>(app, "--image-width-px", "Image width",
                 [](RunConfig& c) -> double& { return c.camera.image_width_px; });
  ov.add<double>(app, "--altitude-m", "Camera altitude",
                 [](RunConfig& c) -> double& { return c.camera.altitude_m; });
  ov.add<double>(app, "--depth-m", "Subject depth",
                 [](RunConfig& c) -> double& { return c.camera.depth_m; });
  ov.add<double>(app, "--focal-length-mm", "Lens focal length",
                 [](RunConfig& c) -> double& { return c.camera.focal_length_mm; });
  ov.add<double>(app, "--fps", "Video frame rate",
                 [](RunConfig& c) -> double& { return c.camera.fps; });
  ov.add<int>(app, "--block-size", "Frames per split block",
              [](RunConfig& c) -> int& { return c.split.block_size; });
  ov.add<double>(app, "--train", "Train fraction", [](RunConfig& c) -> double& { return c.split.train; });
  ov.add<double>(app, "--val", "Validation fraction", [](RunConfig& c) -> double& { return c.split.val; });
  ov.add<double>(app, "--test", "Test fraction", [](RunConfig& c) -> double& { return c.split.test; });

  Paths given;
  CLI::App* align = app.add_subcommand("align", "Confirm individuals from candidates and tracks");
  align->add_option("--candidates", given.candidates, "Candidate NDJSON");
  align->add_option("--tracks", given.tracks, "Track NDJSON");
  align->add_option("--out", given.out, "Individuals NDJSON (default stdout)");

  int bio_frames = 0;
  CLI::App* bio = app.add_subcommand("biometrics", "Body length and tailbeat frequency");
  bio->add_option("--individuals", given.individuals, "Individuals NDJSON");
  bio->add_option("--camera", given.camera, "Camera JSON");
  bio->add_option("--out-dir", given.out_dir, "Directory for the CSV outputs");
  bio->add_option("--frames", bio_frames, "Video length in frames (default: last frame + 1)");

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  synth->add_option("--scene", given.scene, "Scene JSON (default: one swimmer, five transients)");
  synth->add_option("--out-dir", given.out_dir, "Directory for the NDJSON outputs");

  int eval_frames = -1;
  bool only_positive = false;
  std::vector<double> thresholds{0.5, 0.75};
  std::string csv_path;
  CLI::App* eval = app.add_subcommand("eval", "Dice and precision/recall against ground truth");
  eval->add_option("--predictions", given.predictions, "Predicted masks NDJSON");
  eval->add_option("--ground-truth", given.ground_truth, "Ground-truth masks NDJSON");
  eval->add_option("--frames", eval_frames, "Video length in frames (default: from ground truth)");
  eval->add_flag("--only-positive-frames", only_positive, "Skip frames without ground truth in Dice");
  eval->add_option("--iou-thresholds", thresholds, "Matching thresholds")->delimiter(',');
  eval->add_option("--out", given.out, "Report path (default stdout)");
  eval->add_option("--csv", csv_path, "Per-threshold CSV");

  std::optional<int> split_frames;
  std::string split_video = "video";
  CLI::App* split = app.add_subcommand("split", "Time-blocked train/val/test split");
  split->add_option("--frame-table", given.frame_table, "CSV with header video,frame");
  split->add_option("--frames", split_frames, "Generate rows 0..N-1 for one video");
  split->add_option("--video", split_video, "Video name used with --frames");
  split->add_option("--out", given.out, "Split CSV (default stdout)");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (threads_opt->count() > 0) cfg.threads = threads;
    cfg.split.seed = cfg.seed;
    if (bio->parsed() && !given.camera.empty()) {
      cfg.camera = load_camera(given.camera);
      cfg.camera_given = true;
    } else if (bio->parsed() && !cfg.paths.camera.empty()) {
      cfg.camera = load_camera(cfg.paths.camera);
      cfg.camera_given = true;
    }
    ov.apply(cfg);

    auto take = [](std::string& target, const std::string& flag) {
      if (!flag.empty()) target = flag;
    };
    take(cfg.paths.candidates, given.candidates);
    take(cfg.paths.tracks, given.tracks);
    take(cfg.paths.individuals, given.individuals);
    take(cfg.paths.scene, given.scene);
    take(cfg.paths.predictions, given.predictions);
    take(cfg.paths.ground_truth, given.ground_truth);
    take(cfg.paths.frame_table, given.frame_table);
    take(cfg.paths.out, given.out);
    take(cfg.paths.out_dir, given.out_dir);
    cfg.validate();

    if (align->parsed()) return cmd_align(cfg, out, err);
    if (bio->parsed()) {
      if (!cfg.camera_given) {
        throw InputError("no camera geometry: pass --camera or add a camera section to the config");
      }
      return cmd_biometrics(cfg, bio_frames, err);
    }
    if (synth->parsed()) {
      const bool stride_given = app.get_option("--interval-stride")->count() > 0;
      return cmd_synth(cfg, seed_opt->count() > 0, stride_given, err);
    }
    if (eval->parsed()) return cmd_eval(cfg, eval_frames, only_positive, thresholds, csv_path, out, err);
    if (split->parsed()) return cmd_split(cfg, split_frames, split_video, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace flair::cli
