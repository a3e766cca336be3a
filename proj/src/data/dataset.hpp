#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace lirec {

// Ordered vocabulary of class names; index is the label id used everywhere.
struct Vocab {
  std::vector<std::string> names;
  std::size_t size() const { return names.size(); }
  void validate(const std::string& what) const;
};

// Half-open time span [start, end) in seconds.
struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
};

// intersection-over-union of two half-open spans; 0 when disjoint
double iou(const TimeSpan& a, const TimeSpan& b);

// Ordered (actor, recipient) hypothesis. recipient < 0 encodes the singleton
// (actor, None) used when the second participant is off-screen.
struct PairId {
  int actor = -1;
  int recipient = -1;

  static PairId full(int actor, int recipient) { return {actor, recipient}; }
  static PairId singleton(int actor) { return {actor, -1}; }

  bool is_singleton() const { return recipient < 0; }
  bool operator==(const PairId& o) const {
    return actor == o.actor && recipient == o.recipient;
  }
  bool operator<(const PairId& o) const {
    if (actor != o.actor) return actor < o.actor;
    // full pairs sort before singletons for the same actor
    int a = recipient < 0 ? 1 << 20 : recipient;
    int b = o.recipient < 0 ? 1 << 20 : o.recipient;
    return a < b;
  }
};

std::string pair_str(const PairId& p);

// One trimmed clip with its feature blocks and labels. The visual block is
// always present; dialog and per-character tracks may be missing.
struct ClipRecord {
  std::string id;
  int movie = -1;
  TimeSpan span;
  Tensor visual;                 // (segments, Dv)
  std::optional<Tensor> dialog;  // (sentences, Dd)
  std::map<int, Tensor> tracks;  // character index -> (segments, Dt)
  int interaction = -1;
  std::optional<PairId> gt_pair;
  std::optional<int> relationship;

  bool has_track(int character) const { return tracks.count(character) > 0; }
};

struct Movie {
  std::string id;
  std::vector<std::string> characters;
  std::vector<int> clip_indices;  // into MovieDataset::clips, chronological
};

// Maximal run of one pair's chronological clips sharing one relationship
// label. Uncapped; build_bundles slices these down to the bundle cap.
struct PairSegment {
  int movie = -1;
  PairId pair;
  std::optional<int> relationship;
  std::vector<int> clips;  // global clip indices, chronological
};

// The clip subset V for one ordered pair under one relationship, after
// capping. Training resamples these every epoch; eval uses a fixed spread.
struct PairBundle {
  int movie = -1;
  PairId pair;
  std::optional<int> relationship;
  std::vector<int> clips;
  int segment = -1;  // index into MovieDataset::segments
};

struct MovieDataset {
  Vocab interactions;
  Vocab relationships;
  std::vector<Movie> movies;
  std::vector<ClipRecord> clips;
  std::vector<std::vector<int>> overlap_sets;       // per clip, sorted labels
  std::vector<std::vector<PairId>> candidate_pairs;  // per clip, canonical order
  std::vector<PairSegment> segments;

  // fills overlap_sets / candidate_pairs / segments; called after load
  void build_derived();

  std::size_t num_interactions() const { return interactions.size(); }
  std::size_t num_relationships() const { return relationships.size(); }
  bool overlap_contains(int clip, int label) const;

  // feature dims, taken from the first block of each kind (0 when absent)
  std::size_t dim_visual() const;
  std::size_t dim_dialog() const;
  std::size_t dim_track() const;
};

// Overlap sets: labels of other clips in the same movie whose spans overlap
// with IoU strictly greater than 0.2.
std::vector<std::vector<int>> compute_overlap_sets(const MovieDataset& ds);

// All ordered pairs of characters with tracks in the clip, plus singletons,
// plus the annotated GT pair when its members lack tracks.
std::vector<std::vector<PairId>> compute_candidate_pairs(const MovieDataset& ds);

std::vector<PairSegment> compute_segments(const MovieDataset& ds);

// Movie-level hypothesis space: every ordered character pair plus every
// singleton, in canonical sorted order. Bundle-level scoring ranges over
// this set; members a clip never sees get zero track blocks.
std::vector<PairId> movie_pair_set(const Movie& movie);

enum class BundleMode { train_random, eval_uniform };

// Caps each segment's clip list. Eval picks the fixed evenly-spaced subset
// floor(i*n/cap); train draws a random subset (chronological order kept)
// from the provided stream. Empty segments are skipped and counted.
std::vector<PairBundle> build_bundles(const MovieDataset& ds, std::size_t cap,
                                      BundleMode mode, Rng rng,
                                      std::size_t* skipped = nullptr);

}  // namespace lirec
