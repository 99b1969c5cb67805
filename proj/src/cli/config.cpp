#include "flair/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace flair::cli {
namespace {

using nlohmann::json;

json parse_document(const std::string& text, const std::string& what) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw InputError(what + " must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw InputError(what + ": malformed JSON: " + e.what());
  }
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw InputError(where + ": unknown key '" + item.key() + "'");
  }
}

const json& section(const json& doc, const char* key, const std::string& where) {
  const json& s = doc.at(key);
  if (!s.is_object()) throw InputError(where + ": '" + key + "' must be an object");
  return s;
}

// Assigns obj[key] to `target` when present, checking the JSON type.
void read_value(const json& obj, const char* key, const std::string& where, double& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw InputError(where + ": '" + key + "' must be a number");
  target = v.get<double>();
}

void read_value(const json& obj, const char* key, const std::string& where, int& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw InputError(where + ": '" + key + "' must be an integer");
  target = v.get<int>();
}

void read_value(const json& obj, const char* key, const std::string& where, std::uint64_t& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw InputError(where + ": '" + key + "' must be a nonnegative integer");
  target = v.get<std::uint64_t>();
}

void read_value(const json& obj, const char* key, const std::string& where, std::string& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) throw InputError(where + ": '" + key + "' must be a string");
  target = v.get<std::string>();
}

void read_value(const json& obj, const char* key, const std::string& where, RealPoint& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw InputError(where + ": '" + key + "' must be [x, y]");
  }
  target = {v[0].get<double>(), v[1].get<double>()};
}

const char* const kCameraKeys[] = {"sensor_width_mm", "image_width_px", "altitude_m",
                                   "depth_m", "focal_length_mm", "fps"};

void read_camera(const json& obj, const std::string& where, CameraModel& cam) {
  reject_unknown(obj, where, {"sensor_width_mm", "image_width_px", "altitude_m", "depth_m",
                              "focal_length_mm", "fps"});
  read_value(obj, "sensor_width_mm", where, cam.sensor_width_mm);
  read_value(obj, "image_width_px", where, cam.image_width_px);
  read_value(obj, "altitude_m", where, cam.altitude_m);
  read_value(obj, "depth_m", where, cam.depth_m);
  read_value(obj, "focal_length_mm", where, cam.focal_length_mm);
  read_value(obj, "fps", where, cam.fps);
}

}  // namespace

void RunConfig::validate() const {
  alignment.validate();
  kinematics.validate();
  camera.validate();
  split.validate();
  if (threads < 1) throw InputError("threads must be >= 1");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig parse_run_config(const std::string& text) {
  const std::string where = "config";
  const json doc = parse_document(text, where);
  reject_unknown(doc, where, {"alignment", "kinematics", "camera", "split", "paths", "seed", "threads"});
  RunConfig cfg;
  try {
    if (doc.contains("alignment")) {
      const std::string w = "config.alignment";
      const json& a = section(doc, "alignment", where);
      reject_unknown(a, w, {"interval_stride", "score_threshold", "iou_threshold",
                            "shark_prompt_label", "min_support"});
      read_value(a, "interval_stride", w, cfg.alignment.interval_stride);
      read_value(a, "score_threshold", w, cfg.alignment.score_threshold);
      read_value(a, "iou_threshold", w, cfg.alignment.iou_threshold);
      read_value(a, "shark_prompt_label", w, cfg.alignment.shark_prompt_label);
      read_value(a, "min_support", w, cfg.alignment.min_support);
    }
    if (doc.contains("kinematics")) {
      const std::string w = "config.kinematics";
      const json& k = section(doc, "kinematics", where);
      reject_unknown(k, w, {"savgol_window", "savgol_order", "tbf_window_s", "tbf_step_s",
                            "min_extremum_fraction", "max_gap_s"});
      read_value(k, "savgol_window", w, cfg.kinematics.savgol_window);
      read_value(k, "savgol_order", w, cfg.kinematics.savgol_order);
      read_value(k, "tbf_window_s", w, cfg.kinematics.tbf_window_s);
      read_value(k, "tbf_step_s", w, cfg.kinematics.tbf_step_s);
      read_value(k, "min_extremum_fraction", w, cfg.kinematics.min_extremum_fraction);
      read_value(k, "max_gap_s", w, cfg.kinematics.max_gap_s);
    }
    if (doc.contains("camera")) {
      read_camera(section(doc, "camera", where), "config.camera", cfg.camera);
      cfg.camera_given = true;
    }
    if (doc.contains("split")) {
      const std::string w = "config.split";
      const json& s = section(doc, "split", where);
      reject_unknown(s, w, {"block_size", "train", "val", "test"});
      read_value(s, "block_size", w, cfg.split.block_size);
      read_value(s, "train", w, cfg.split.train);
      read_value(s, "val", w, cfg.split.val);
      read_value(s, "test", w, cfg.split.test);
    }
    if (doc.contains("paths")) {
      const std::string w = "config.paths";
      const json& p = section(doc, "paths", where);
      reject_unknown(p, w, {"candidates", "tracks", "individuals", "camera", "scene", "predictions",
                            "ground_truth", "frame_table", "out", "out_dir"});
      read_value(p, "candidates", w, cfg.paths.candidates);
      read_value(p, "tracks", w, cfg.paths.tracks);
      read_value(p, "individuals", w, cfg.paths.individuals);
      read_value(p, "camera", w, cfg.paths.camera);
      read_value(p, "scene", w, cfg.paths.scene);
      read_value(p, "predictions", w, cfg.paths.predictions);
      read_value(p, "ground_truth", w, cfg.paths.ground_truth);
      read_value(p, "frame_table", w, cfg.paths.frame_table);
      read_value(p, "out", w, cfg.paths.out);
      read_value(p, "out_dir", w, cfg.paths.out_dir);
    }
    read_value(doc, "seed", where, cfg.seed);
    read_value(doc, "threads", where, cfg.threads);
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
  cfg.split.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

CameraModel parse_camera(const std::string& text) {
  const std::string where = "camera";
  const json doc = parse_document(text, where);
  for (const char* key : kCameraKeys) {
    if (!doc.contains(key)) throw InputError(where + ": missing key '" + key + "'");
  }
  CameraModel cam;
  read_camera(doc, where, cam);
  cam.validate();
  return cam;
}

CameraModel load_camera(const std::string& path) { return parse_camera(read_file(path)); }

SceneSpec parse_scene(const std::string& text) {
  const std::string where = "scene";
  const json doc = parse_document(text, where);
  reject_unknown(doc, where, {"width", "height", "fps", "duration_s", "interval_stride", "seed",
                              "perturb_px", "random_transients", "transient_radius", "shark_label",
                              "background_label", "swimmers", "blobs"});
  SceneSpec scene;
  try {
    read_value(doc, "width", where, scene.width);
    read_value(doc, "height", where, scene.height);
    read_value(doc, "fps", where, scene.fps);
    read_value(doc, "duration_s", where, scene.duration_s);
    read_value(doc, "interval_stride", where, scene.interval_stride);
    read_value(doc, "seed", where, scene.seed);
    read_value(doc, "perturb_px", where, scene.perturb_px);
    read_value(doc, "random_transients", where, scene.random_transients);
    read_value(doc, "transient_radius", where, scene.transient_radius);
    read_value(doc, "shark_label", where, scene.shark_label);
    read_value(doc, "background_label", where, scene.background_label);
    if (doc.contains("swimmers")) {
      const json& list = doc.at("swimmers");
      if (!list.is_array()) throw InputError(where + ": 'swimmers' must be an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string w = where + ".swimmers[" + std::to_string(i) + "]";
        const json& s = list[i];
        if (!s.is_object()) throw InputError(w + " must be an object");
        reject_unknown(s, w, {"body_length_px", "max_half_width_px", "tail_width_fraction",
                              "nose_fraction", "amplitude_px", "frequency_hz",
                              "frequency_rate_hz_per_s", "wavenumber", "heading_deg",
                              "speed_px_per_s", "head_start", "shark_score"});
        SwimmerSpec sw;
        read_value(s, "body_length_px", w, sw.body_length_px);
        read_value(s, "max_half_width_px", w, sw.max_half_width_px);
        read_value(s, "tail_width_fraction", w, sw.tail_width_fraction);
        read_value(s, "nose_fraction", w, sw.nose_fraction);
        read_value(s, "amplitude_px", w, sw.amplitude_px);
        read_value(s, "frequency_hz", w, sw.frequency_hz);
        read_value(s, "frequency_rate_hz_per_s", w, sw.frequency_rate_hz_per_s);
        read_value(s, "wavenumber", w, sw.wavenumber);
        read_value(s, "heading_deg", w, sw.heading_deg);
        read_value(s, "speed_px_per_s", w, sw.speed_px_per_s);
        read_value(s, "head_start", w, sw.head_start);
        read_value(s, "shark_score", w, sw.shark_score);
        scene.swimmers.push_back(sw);
      }
    }
    if (doc.contains("blobs")) {
      const json& list = doc.at("blobs");
      if (!list.is_array()) throw InputError(where + ": 'blobs' must be an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string w = where + ".blobs[" + std::to_string(i) + "]";
        const json& b = list[i];
        if (!b.is_object()) throw InputError(w + " must be an object");
        reject_unknown(b, w, {"first_frame", "last_frame", "center", "radius", "shark_score"});
        BlobSpec blob;
        read_value(b, "first_frame", w, blob.first_frame);
        read_value(b, "last_frame", w, blob.last_frame);
        read_value(b, "center", w, blob.center);
        read_value(b, "radius", w, blob.radius);
        read_value(b, "shark_score", w, blob.shark_score);
        scene.blobs.push_back(blob);
      }
    }
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
  scene.validate();
  return scene;
}

}  // namespace flair::cli
