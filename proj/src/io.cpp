#include "flair/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace flair {
namespace {

using nlohmann::json;

// Calls fn(line_number, object) for each nonblank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(number, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(number, "record is not a JSON object");
    try {
      fn(number, record);
    } catch (const ParseError&) {
      throw;
    } catch (const json::exception& e) {
      throw ParseError(number, e.what());
    } catch (const InputError& e) {
      throw ParseError(number, e.what());
    }
  }
}

void require_keys(std::size_t line, const json& record, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  std::set<std::string> allowed;
  for (const char* k : required) {
    if (!record.contains(k)) throw ParseError(line, std::string("missing key '") + k + "'");
    allowed.insert(k);
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& item : record.items()) {
    if (!allowed.count(item.key())) throw ParseError(line, "unknown key '" + item.key() + "'");
  }
}

int get_int(std::size_t line, const json& record, const char* key) {
  const json& v = record.at(key);
  if (!v.is_number_integer()) throw ParseError(line, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

BinaryMask get_mask(std::size_t line, const json& record, const char* key) {
  const json& v = record.at(key);
  if (!v.is_string()) throw ParseError(line, std::string("'") + key + "' must be a mask string");
  return BinaryMask::from_text(v.get<std::string>());
}

}  // namespace

std::string format_number(double value, int decimals) {
  if (value == 0.0) value = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::vector<CandidateDetection> read_candidates(std::istream& in, int stride) {
  std::vector<CandidateDetection> out;
  std::map<int, int> per_interval;
  for_each_record(in, [&](std::size_t line, const json& r) {
    require_keys(line, r, {"frame", "interval", "mask", "bbox", "scores"});
    CandidateDetection c;
    c.frame_index = get_int(line, r, "frame");
    c.interval_index = get_int(line, r, "interval");
    if (c.frame_index < 0 || c.interval_index < 0) {
      throw ParseError(line, "frame and interval must be nonnegative");
    }
    if (stride > 0 && std::int64_t(c.interval_index) * stride != c.frame_index) {
      throw ParseError(line, "frame " + std::to_string(c.frame_index) + " is not the sampled frame of interval " +
                                 std::to_string(c.interval_index) + " at stride " + std::to_string(stride));
    }
    c.mask = get_mask(line, r, "mask");
    const json& box = r.at("bbox");
    if (!box.is_array() || box.size() != 4) throw ParseError(line, "'bbox' must be [x_min,y_min,x_max,y_max]");
    for (const json& v : box) {
      if (!v.is_number_integer()) throw ParseError(line, "'bbox' entries must be integers");
    }
    c.box = {box[0].get<int>(), box[1].get<int>(), box[2].get<int>(), box[3].get<int>()};
    if (c.box.x_min > c.box.x_max || c.box.y_min > c.box.y_max) throw ParseError(line, "inverted bbox");
    const json& scores = r.at("scores");
    if (!scores.is_object()) throw ParseError(line, "'scores' must be an object");
    for (const auto& item : scores.items()) {
      if (!item.value().is_number()) throw ParseError(line, "score '" + item.key() + "' is not a number");
      const double p = item.value().get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw ParseError(line, "score '" + item.key() + "' outside [0,1]");
      c.prompt_scores[item.key()] = p;
    }
    if (!out.empty() && (c.mask.width() != out.front().mask.width() ||
                         c.mask.height() != out.front().mask.height())) {
      throw ParseError(line, "mask dimensions differ from earlier records");
    }
    c.candidate_index = per_interval[c.interval_index]++;
    out.push_back(std::move(c));
  });
  return out;
}

void write_candidates(std::ostream& out, const std::vector<CandidateDetection>& candidates) {
  for (const CandidateDetection& c : candidates) {
    json r;
    r["frame"] = c.frame_index;
    r["interval"] = c.interval_index;
    r["mask"] = c.mask.to_text();
    r["bbox"] = {c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max};
    r["scores"] = json(c.prompt_scores);
    out << r.dump() << '\n';
  }
}

std::vector<TrackRecord> read_tracks(std::istream& in) {
  std::map<TrackOrigin, TrackRecord> grouped;
  int width = -1;
  int height = -1;
  for_each_record(in, [&](std::size_t line, const json& r) {
    require_keys(line, r, {"origin_interval", "origin_candidate", "frame", "mask"});
    const TrackOrigin origin{get_int(line, r, "origin_interval"), get_int(line, r, "origin_candidate")};
    const int frame = get_int(line, r, "frame");
    if (frame < 0 || origin.interval < 0 || origin.candidate < 0) {
      throw ParseError(line, "negative frame or origin");
    }
    BinaryMask mask = get_mask(line, r, "mask");
    if (width < 0) {
      width = mask.width();
      height = mask.height();
    } else if (mask.width() != width || mask.height() != height) {
      throw ParseError(line, "mask dimensions differ from earlier records");
    }
    TrackRecord& t = grouped[origin];
    t.origin = origin;
    if (!t.masks.emplace(frame, std::move(mask)).second) {
      throw ParseError(line, "duplicate frame " + std::to_string(frame) + " for track origin");
    }
  });
  std::vector<TrackRecord> out;
  out.reserve(grouped.size());
  for (auto& [origin, track] : grouped) out.push_back(std::move(track));
  return out;
}

void write_tracks(std::ostream& out, const std::vector<TrackRecord>& tracks) {
  for (const TrackRecord& t : tracks) {
    for (const auto& [frame, mask] : t.masks) {
      json r;
      r["origin_interval"] = t.origin.interval;
      r["origin_candidate"] = t.origin.candidate;
      r["frame"] = frame;
      r["mask"] = mask.to_text();
      out << r.dump() << '\n';
    }
  }
}

void write_individuals(std::ostream& out, const std::vector<IndividualFrame>& rows) {
  for (const IndividualFrame& row : rows) {
    json r;
    r["id"] = row.id;
    r["frame"] = row.frame;
    r["mask"] = row.mask.to_text();
    out << r.dump() << '\n';
  }
}

std::map<int, std::map<int, BinaryMask>> read_individuals(std::istream& in) {
  std::map<int, std::map<int, BinaryMask>> out;
  for_each_record(in, [&](std::size_t line, const json& r) {
    require_keys(line, r, {"id", "frame", "mask"});
    const int id = get_int(line, r, "id");
    const int frame = get_int(line, r, "frame");
    if (frame < 0) throw ParseError(line, "negative frame");
    if (!out[id].emplace(frame, get_mask(line, r, "mask")).second) {
      throw ParseError(line, "duplicate frame " + std::to_string(frame) + " for id " + std::to_string(id));
    }
  });
  return out;
}

FrameMasks read_frame_masks(std::istream& in, int n_frames) {
  std::vector<std::pair<int, BinaryMask>> records;
  for_each_record(in, [&](std::size_t line, const json& r) {
    const char* key = r.contains("mask") ? "mask" : r.contains("true_mask") ? "true_mask" : nullptr;
    if (!key) return;
    if (!r.contains("frame")) throw ParseError(line, "missing key 'frame'");
    const int frame = get_int(line, r, "frame");
    if (frame < 0) throw ParseError(line, "negative frame");
    if (n_frames >= 0 && frame >= n_frames) {
      throw ParseError(line, "frame " + std::to_string(frame) + " beyond the " +
                                 std::to_string(n_frames) + "-frame range");
    }
    records.emplace_back(frame, get_mask(line, r, key));
  });
  int count = n_frames;
  if (count < 0) {
    count = 0;
    for (const auto& [frame, mask] : records) count = std::max(count, frame + 1);
  }
  FrameMasks out(static_cast<std::size_t>(count));
  for (auto& [frame, mask] : records) out[std::size_t(frame)].push_back(std::move(mask));
  return out;
}

void write_ground_truth(std::ostream& out, const SyntheticVideo& video) {
  for (std::size_t i = 0; i < video.swimmers.size(); ++i) {
    json r;
    r["swimmer"] = i;
    r["frequency_hz"] = video.swimmers[i].frequency_hz;
    out << r.dump() << '\n';
  }
  for (int f = 0; f < video.n_frames; ++f) {
    for (std::size_t i = 0; i < video.swimmers.size(); ++i) {
      const SwimmerTruth& s = video.swimmers[i];
      json r;
      r["frame"] = f;
      r["swimmer"] = i;
      r["true_mask"] = s.masks[std::size_t(f)].to_text();
      r["arc_length_px"] = s.arc_length_px[std::size_t(f)];
      r["head_xy"] = {s.head[std::size_t(f)].x(), s.head[std::size_t(f)].y()};
      out << r.dump() << '\n';
    }
  }
}

FileTrackPropagator::FileTrackPropagator(std::vector<TrackRecord> tracks) {
  for (TrackRecord& t : tracks) {
    const TrackOrigin origin = t.origin;
    if (!tracks_.emplace(origin, std::move(t)).second) throw InputError("duplicate track origin");
  }
}

TrackRecord FileTrackPropagator::propagate(const CandidateDetection& candidate) const {
  auto it = tracks_.find({candidate.interval_index, candidate.candidate_index});
  if (it == tracks_.end()) {
    throw InputError("no track for interval " + std::to_string(candidate.interval_index) +
                     " candidate " + std::to_string(candidate.candidate_index));
  }
  return it->second;
}

std::vector<FrameRow> read_frame_table(std::istream& in) {
  std::vector<FrameRow> rows;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "video,frame") throw ParseError(number, "expected header 'video,frame'");
      header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) throw ParseError(number, "expected 'video,frame'");
    FrameRow row;
    row.video = line.substr(0, comma);
    try {
      std::size_t used = 0;
      const std::string digits = line.substr(comma + 1);
      row.frame = std::stoi(digits, &used);
      if (used != digits.size() || row.frame < 0) throw std::invalid_argument("frame");
    } catch (const std::exception&) {
      throw ParseError(number, "frame must be a nonnegative integer");
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw ParseError(1, "empty frame table");
  return rows;
}

void write_split(std::ostream& out, const std::vector<SplitAssignment>& rows) {
  out << "video,frame,block,split\n";
  for (const SplitAssignment& r : rows) {
    out << r.video << ',' << r.frame << ',' << r.block << ',' << split_name(r.split) << '\n';
  }
}

}  // namespace flair
