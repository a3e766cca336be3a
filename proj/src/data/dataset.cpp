#include "data/dataset.hpp"

#include <algorithm>
#include <set>

#include "core/error.hpp"

namespace lirec {

void Vocab::validate(const std::string& what) const {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) fail_invalid(what + " vocabulary: empty class name");
    if (!seen.insert(n).second) fail_invalid(what + " vocabulary: duplicate name \"" + n + "\"");
  }
}

double iou(const TimeSpan& a, const TimeSpan& b) {
  double inter = std::min(a.end, b.end) - std::max(a.start, b.start);
  if (inter <= 0.0) return 0.0;
  double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

std::string pair_str(const PairId& p) {
  if (p.is_singleton()) return "(" + std::to_string(p.actor) + ", None)";
  return "(" + std::to_string(p.actor) + ", " + std::to_string(p.recipient) + ")";
}

void MovieDataset::build_derived() {
  overlap_sets = compute_overlap_sets(*this);
  candidate_pairs = compute_candidate_pairs(*this);
  segments = compute_segments(*this);
}

bool MovieDataset::overlap_contains(int clip, int label) const {
  const auto& set = overlap_sets[static_cast<std::size_t>(clip)];
  return std::binary_search(set.begin(), set.end(), label);
}

std::size_t MovieDataset::dim_visual() const {
  for (const auto& c : clips)
    if (c.visual.ndim() == 2) return c.visual.cols();
  return 0;
}

std::size_t MovieDataset::dim_dialog() const {
  for (const auto& c : clips)
    if (c.dialog && c.dialog->ndim() == 2) return c.dialog->cols();
  return 0;
}

std::size_t MovieDataset::dim_track() const {
  for (const auto& c : clips)
    for (const auto& [idx, t] : c.tracks)
      if (t.ndim() == 2) return t.cols();
  return 0;
}

std::vector<std::vector<int>> compute_overlap_sets(const MovieDataset& ds) {
  std::vector<std::vector<int>> sets(ds.clips.size());
  for (const Movie& movie : ds.movies) {
    const auto& idx = movie.clip_indices;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = i + 1; j < idx.size(); ++j) {
        const ClipRecord& a = ds.clips[static_cast<std::size_t>(idx[i])];
        const ClipRecord& b = ds.clips[static_cast<std::size_t>(idx[j])];
        if (iou(a.span, b.span) > 0.2) {
          sets[static_cast<std::size_t>(idx[i])].push_back(b.interaction);
          sets[static_cast<std::size_t>(idx[j])].push_back(a.interaction);
        }
      }
    }
  }
  for (auto& s : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return sets;
}

std::vector<std::vector<PairId>> compute_candidate_pairs(const MovieDataset& ds) {
  std::vector<std::vector<PairId>> candidates(ds.clips.size());
  for (std::size_t ci = 0; ci < ds.clips.size(); ++ci) {
    const ClipRecord& clip = ds.clips[ci];
    std::vector<int> present;
    present.reserve(clip.tracks.size());
    for (const auto& [character, block] : clip.tracks) present.push_back(character);
    std::vector<PairId>& list = candidates[ci];
    for (int j : present)
      for (int k : present)
        if (j != k) list.push_back(PairId::full(j, k));
    for (int j : present) list.push_back(PairId::singleton(j));
    // the annotated pair is always a candidate, even when a member has no
    // track in this clip (its block then encodes to zeros)
    if (clip.gt_pair && std::find(list.begin(), list.end(), *clip.gt_pair) == list.end())
      list.push_back(*clip.gt_pair);
    std::sort(list.begin(), list.end());
  }
  return candidates;
}

std::vector<PairId> movie_pair_set(const Movie& movie) {
  int n = static_cast<int>(movie.characters.size());
  std::vector<PairId> pairs;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (j != k) pairs.push_back(PairId::full(j, k));
  for (int j = 0; j < n; ++j) pairs.push_back(PairId::singleton(j));
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<PairSegment> compute_segments(const MovieDataset& ds) {
  std::vector<PairSegment> segments;
  for (std::size_t mi = 0; mi < ds.movies.size(); ++mi) {
    const Movie& movie = ds.movies[mi];
    // chronological clip list per annotated pair
    std::map<PairId, std::vector<int>> per_pair;
    for (int gi : movie.clip_indices) {
      const ClipRecord& clip = ds.clips[static_cast<std::size_t>(gi)];
      if (clip.gt_pair) per_pair[*clip.gt_pair].push_back(gi);
    }
    for (const auto& [pair, clip_list] : per_pair) {
      // split into maximal runs of one relationship label
      PairSegment current;
      current.movie = static_cast<int>(mi);
      current.pair = pair;
      bool open = false;
      for (int gi : clip_list) {
        const auto& rel = ds.clips[static_cast<std::size_t>(gi)].relationship;
        if (!open || rel != current.relationship) {
          if (open) segments.push_back(current);
          current.relationship = rel;
          current.clips.clear();
          open = true;
        }
        current.clips.push_back(gi);
      }
      if (open) segments.push_back(current);
    }
  }
  return segments;
}

std::vector<PairBundle> build_bundles(const MovieDataset& ds, std::size_t cap,
                                      BundleMode mode, Rng rng, std::size_t* skipped) {
  if (cap < 1) fail_invalid("build_bundles: cap must be >= 1");
  std::size_t skip_count = 0;
  std::vector<PairBundle> bundles;
  for (std::size_t si = 0; si < ds.segments.size(); ++si) {
    const PairSegment& seg = ds.segments[si];
    if (seg.clips.empty()) {
      ++skip_count;
      continue;
    }
    PairBundle b;
    b.movie = seg.movie;
    b.pair = seg.pair;
    b.relationship = seg.relationship;
    b.segment = static_cast<int>(si);
    std::size_t n = seg.clips.size();
    if (n <= cap) {
      b.clips = seg.clips;
    } else if (mode == BundleMode::eval_uniform) {
      b.clips.reserve(cap);
      for (std::size_t i = 0; i < cap; ++i)
        b.clips.push_back(seg.clips[i * n / cap]);
    } else {
      // random subset, chronological order preserved; stream forked per
      // segment so one segment's draw count cannot shift another's
      Rng seg_rng = rng.fork(static_cast<std::uint64_t>(si));
      std::vector<std::size_t> positions(n);
      for (std::size_t i = 0; i < n; ++i) positions[i] = i;
      seg_rng.shuffle(positions);
      positions.resize(cap);
      std::sort(positions.begin(), positions.end());
      b.clips.reserve(cap);
      for (std::size_t pos : positions) b.clips.push_back(seg.clips[pos]);
    }
    bundles.push_back(std::move(b));
  }
  if (skipped) *skipped = skip_count;
  return bundles;
}

}  // namespace lirec
