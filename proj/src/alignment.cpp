#include "flair/alignment.hpp"

#include "flair/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <tuple>

namespace flair {

void AlignmentConfig::validate() const {
  if (interval_stride < 1) throw InputError("interval_stride must be >= 1");
  if (!(score_threshold > 0.0 && score_threshold < 1.0)) {
    throw InputError("score_threshold must lie in (0,1)");
  }
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw InputError("iou_threshold must lie in (0,1)");
  }
  if (min_support < 1) throw InputError("min_support must be >= 1");
  if (shark_prompt_label.empty()) throw InputError("shark_prompt_label must not be empty");
}

bool TrackRecord::present(int frame) const {
  auto it = masks.find(frame);
  return it != masks.end() && !it->second.is_empty();
}

std::vector<int> TrackRecord::present_frames() const {
  std::vector<int> out;
  for (const auto& [frame, mask] : masks) {
    if (!mask.is_empty()) out.push_back(frame);
  }
  return out;
}

std::vector<int> sample_interval_frames(int n_frames, int stride) {
  if (n_frames < 1 || stride < 1) throw InputError("n_frames and stride must be >= 1");
  std::vector<int> frames;
  for (int f = 0; f < n_frames; f += stride) frames.push_back(f);
  return frames;
}

std::vector<CandidateDetection> filter_candidates(std::span<const CandidateDetection> detections,
                                                  const AlignmentConfig& cfg) {
  std::vector<CandidateDetection> kept;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const CandidateDetection& d = detections[i];
    auto it = d.prompt_scores.find(cfg.shark_prompt_label);
    if (it == d.prompt_scores.end()) {
      throw InputError("candidate " + std::to_string(i) + " (frame " +
                       std::to_string(d.frame_index) + ", interval " +
                       std::to_string(d.interval_index) + ") has no score for label '" +
                       cfg.shark_prompt_label + "'");
    }
    if (it->second > cfg.score_threshold) kept.push_back(d);
  }
  return kept;
}

bool tracks_aligned(const TrackRecord& a, const TrackRecord& b, double threshold) {
  auto ia = a.masks.begin();
  auto ib = b.masks.begin();
  while (ia != a.masks.end() && ib != b.masks.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      if (!ia->second.is_empty() && !ib->second.is_empty() &&
          iou(ia->second, ib->second) > threshold) {
        return true;
      }
      ++ia;
      ++ib;
    }
  }
  return false;
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

AlignmentResult align_tracks(std::span<const TrackRecord> tracks, const AlignmentConfig& cfg) {
  cfg.validate();
  AlignmentResult result;

  std::set<TrackOrigin> origins;
  std::set<int> intervals;
  for (const TrackRecord& t : tracks) {
    if (!origins.insert(t.origin).second) {
      throw InputError("duplicate track origin (interval " + std::to_string(t.origin.interval) +
                       ", candidate " + std::to_string(t.origin.candidate) + ")");
    }
    intervals.insert(t.origin.interval);
  }
  if (intervals.size() < 2) {
    result.warnings.emplace_back(kSingleIntervalWarning);
    return result;
  }

  const std::size_t n = tracks.size();
  std::vector<std::set<int>> support(n);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (tracks[i].origin.interval == tracks[j].origin.interval) continue;
      if (!tracks_aligned(tracks[i], tracks[j], cfg.iou_threshold)) continue;
      support[i].insert(tracks[j].origin.interval);
      support[j].insert(tracks[i].origin.interval);
      edges.emplace_back(i, j);
    }
  }

  std::vector<bool> confirmed(n);
  for (std::size_t i = 0; i < n; ++i) {
    confirmed[i] = support[i].size() >= std::size_t(cfg.min_support);
  }

  DisjointSets sets(n);
  for (auto [i, j] : edges) {
    if (confirmed[i] && confirmed[j]) sets.unite(i, j);
  }
  std::map<std::size_t, TrackGroup> by_root;
  for (std::size_t i = 0; i < n; ++i) {
    if (confirmed[i]) by_root[sets.find(i)].push_back({i, support[i]});
  }
  std::vector<TrackGroup> groups;
  groups.reserve(by_root.size());
  for (auto& [root, group] : by_root) groups.push_back(std::move(group));

  result.individuals = consolidate(tracks, groups);
  return result;
}

std::vector<ConfirmedIndividual> consolidate(std::span<const TrackRecord> tracks,
                                             std::span<const TrackGroup> groups) {
  // Representative preference: more support, then earlier origin.
  auto better = [&](const GroupMember& a, const GroupMember& b) {
    const TrackOrigin& oa = tracks[a.track].origin;
    const TrackOrigin& ob = tracks[b.track].origin;
    return std::make_tuple(-std::ptrdiff_t(a.support.size()), oa.interval, oa.candidate) <
           std::make_tuple(-std::ptrdiff_t(b.support.size()), ob.interval, ob.candidate);
  };

  std::vector<ConfirmedIndividual> out;
  std::vector<TrackOrigin> first_origin;
  for (const TrackGroup& group : groups) {
    if (group.empty()) continue;
    std::vector<GroupMember> ranked(group.begin(), group.end());
    std::sort(ranked.begin(), ranked.end(), better);

    ConfirmedIndividual ind;
    for (const GroupMember& m : ranked) {
      const TrackRecord& t = tracks[m.track];
      ind.members.push_back(t.origin);
      ind.supporting_intervals.insert(t.origin.interval);
      ind.supporting_intervals.insert(m.support.begin(), m.support.end());
      // First writer wins, so each frame holds the best present member's mask.
      for (const auto& [frame, mask] : t.masks) {
        if (!mask.is_empty()) ind.masks.try_emplace(frame, mask);
      }
    }
    std::sort(ind.members.begin(), ind.members.end());
    first_origin.push_back(ind.members.front());
    out.push_back(std::move(ind));
  }

  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return first_origin[a] < first_origin[b]; });
  std::vector<ConfirmedIndividual> sorted;
  sorted.reserve(out.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted.push_back(std::move(out[order[k]]));
    sorted.back().id = int(k);
  }
  return sorted;
}

AlignmentRun run_alignment(std::span<const CandidateDetection> candidates,
                           const TrackPropagator& propagator, const AlignmentConfig& cfg,
                           int threads) {
  cfg.validate();
  AlignmentRun run;
  run.candidates_in = candidates.size();
  const std::vector<CandidateDetection> kept = filter_candidates(candidates, cfg);
  run.candidates_kept = kept.size();
  if (kept.empty()) return run;

  std::vector<std::optional<TrackRecord>> tracks(kept.size());
  std::vector<std::string> failures(kept.size());
  parallel_for(kept.size(), threads, [&](std::size_t i) {
    const CandidateDetection& c = kept[i];
    try {
      TrackRecord t = propagator.propagate(c);
      if (!t.present(c.frame_index)) throw std::runtime_error("track absent at its origin frame");
      for (const auto& [frame, mask] : t.masks) {
        if (mask.width() != c.mask.width() || mask.height() != c.mask.height()) {
          throw std::runtime_error("track mask at frame " + std::to_string(frame) +
                                   " does not match the video dimensions");
        }
      }
      t.origin = {c.interval_index, c.candidate_index};
      tracks[i] = std::move(t);
    } catch (const std::exception& e) {
      failures[i] = "propagation-failed interval=" + std::to_string(c.interval_index) +
                    " candidate=" + std::to_string(c.candidate_index) + ": " + e.what();
    }
  });

  std::vector<TrackRecord> collected;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (tracks[i]) {
      collected.push_back(std::move(*tracks[i]));
    } else {
      warnings.push_back(std::move(failures[i]));
    }
  }
  if (collected.empty()) {
    throw std::runtime_error("all " + std::to_string(kept.size()) +
                             " candidate propagations failed; first: " + warnings.front());
  }
  run.tracks_propagated = collected.size();
  run.result = align_tracks(collected, cfg);
  run.result.warnings.insert(run.result.warnings.begin(), warnings.begin(), warnings.end());
  return run;
}

std::vector<IndividualFrame> per_frame_output(std::span<const ConfirmedIndividual> individuals) {
  std::vector<IndividualFrame> rows;
  for (const ConfirmedIndividual& ind : individuals) {
    for (const auto& [frame, mask] : ind.masks) rows.push_back({ind.id, frame, mask});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const IndividualFrame& a, const IndividualFrame& b) {
    return std::tie(a.id, a.frame) < std::tie(b.id, b.frame);
  });
  return rows;
}

}  // namespace flair
