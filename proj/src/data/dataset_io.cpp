#include "data/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/serialize.hpp"
#include "util/jsonsafe.hpp"

namespace lirec {

namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail_io("missing file: " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Tensor load_block(const fs::path& root, const std::string& rel, const std::string& clip_id,
                  const std::string& kind, std::size_t* dim) {
  fs::path path = root / rel;
  Tensor t = io::read_feature_file(path);
  if (t.ndim() != 2 || t.rows() == 0 || t.cols() == 0)
    fail_io("clip " + clip_id + ": " + kind + " feature " + path.string() +
            " must be a non-empty 2-d block, got shape " + shape_str(t.shape));
  if (!t.all_finite())
    fail_io("clip " + clip_id + ": " + kind + " feature " + path.string() +
            " contains non-finite values");
  if (*dim == 0) *dim = t.cols();
  if (t.cols() != *dim)
    fail_io("clip " + clip_id + ": " + kind + " feature width " + std::to_string(t.cols()) +
            " disagrees with dataset width " + std::to_string(*dim));
  return t;
}

int parse_label(JsonReader& r, const std::string& key, std::size_t vocab_size,
                const std::string& clip_id, const std::string& what) {
  int v = r.require<int>(key);
  if (v < 0 || static_cast<std::size_t>(v) >= vocab_size)
    fail_io("clip " + clip_id + ": " + what + " index " + std::to_string(v) +
            " outside vocabulary of size " + std::to_string(vocab_size));
  return v;
}

}  // namespace

MovieDataset load_dataset(const fs::path& root) {
  fs::path manifest_path = root / "manifest.json";
  Json doc = parse_json(slurp(manifest_path), manifest_path.string());

  MovieDataset ds;
  JsonReader top(doc, "manifest");
  int version = top.get<int>("schema_version", 1);
  if (version != kSchemaVersion)
    fail_io("manifest: unsupported schema_version " + std::to_string(version));

  {
    JsonReader vocab(top.raw("vocabularies"), "manifest.vocabularies");
    ds.interactions.names = vocab.require<std::vector<std::string>>("interactions");
    ds.relationships.names = vocab.require<std::vector<std::string>>("relationships");
    vocab.finish();
  }
  ds.interactions.validate("interaction");
  ds.relationships.validate("relationship");

  std::size_t dv = 0, dd = 0, dt = 0;
  const Json& movies = top.raw("movies");
  if (!movies.is_array()) fail_io("manifest: \"movies\" must be an array");
  for (const Json& movie_json : movies) {
    JsonReader mr(movie_json, "manifest.movies[]");
    Movie movie;
    movie.id = mr.require<std::string>("id");
    movie.characters = mr.require<std::vector<std::string>>("characters");
    int num_chars = static_cast<int>(movie.characters.size());
    const Json& clips = mr.raw("clips");
    mr.finish();
    if (!clips.is_array()) fail_io("movie " + movie.id + ": \"clips\" must be an array");

    for (const Json& clip_json : clips) {
      JsonReader cr(clip_json, "movie " + movie.id + " clip");
      ClipRecord clip;
      clip.movie = static_cast<int>(ds.movies.size());
      clip.id = cr.require<std::string>("id");
      auto span = cr.require<std::vector<double>>("span");
      if (span.size() != 2 || !(span[1] > span[0]))
        fail_io("clip " + clip.id + ": span must be [start, end) with end > start");
      clip.span = {span[0], span[1]};
      clip.interaction = parse_label(cr, "interaction", ds.interactions.size(), clip.id,
                                     "interaction");
      if (cr.has("pair") && !cr.raw("pair").is_null()) {
        JsonReader pr(cr.raw("pair"), "clip " + clip.id + " pair");
        int actor = pr.require<int>("actor");
        std::optional<int> recipient;
        if (!pr.raw("recipient").is_null()) recipient = pr.require<int>("recipient");
        pr.finish();
        if (actor < 0 || actor >= num_chars)
          fail_io("clip " + clip.id + ": pair actor index " + std::to_string(actor) +
                  " does not resolve in movie " + movie.id);
        if (recipient) {
          if (*recipient < 0 || *recipient >= num_chars)
            fail_io("clip " + clip.id + ": pair recipient index " +
                    std::to_string(*recipient) + " does not resolve in movie " + movie.id);
          if (*recipient == actor)
            fail_io("clip " + clip.id + ": pair actor and recipient must differ");
          clip.gt_pair = PairId::full(actor, *recipient);
        } else {
          clip.gt_pair = PairId::singleton(actor);
        }
      }
      if (cr.has("relationship") && !cr.raw("relationship").is_null())
        clip.relationship = parse_label(cr, "relationship", ds.relationships.size(),
                                        clip.id, "relationship");

      JsonReader fr(cr.raw("features"), "clip " + clip.id + " features");
      clip.visual = load_block(root, fr.require<std::string>("visual"), clip.id, "visual", &dv);
      if (fr.has("dialog") && !fr.raw("dialog").is_null())
        clip.dialog = load_block(root, fr.require<std::string>("dialog"), clip.id, "dialog", &dd);
      if (fr.has("tracks") && !fr.raw("tracks").is_null()) {
        const Json& tracks = fr.raw("tracks");
        if (!tracks.is_object()) fail_io("clip " + clip.id + ": \"tracks\" must be an object");
        for (auto it = tracks.begin(); it != tracks.end(); ++it) {
          int character = -1;
          try {
            character = std::stoi(it.key());
          } catch (...) {
            fail_io("clip " + clip.id + ": track key \"" + it.key() + "\" is not an index");
          }
          if (character < 0 || character >= num_chars)
            fail_io("clip " + clip.id + ": track character index " + std::to_string(character) +
                    " does not resolve in movie " + movie.id);
          clip.tracks[character] =
              load_block(root, it.value().get<std::string>(), clip.id, "track", &dt);
        }
      }
      fr.finish();
      cr.finish();

      movie.clip_indices.push_back(static_cast<int>(ds.clips.size()));
      ds.clips.push_back(std::move(clip));
    }
    ds.movies.push_back(std::move(movie));
  }
  top.finish();

  ds.build_derived();
  return ds;
}

void write_dataset(const MovieDataset& ds, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail_io("cannot create dataset directory: " + root.string());

  Json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["vocabularies"] = {{"interactions", ds.interactions.names},
                              {"relationships", ds.relationships.names}};
  manifest["movies"] = Json::array();

  for (const Movie& movie : ds.movies) {
    fs::create_directories(root / "features" / movie.id, ec);
    if (ec) fail_io("cannot create feature directory for movie " + movie.id);
    Json movie_json;
    movie_json["id"] = movie.id;
    movie_json["characters"] = movie.characters;
    movie_json["clips"] = Json::array();
    for (int gi : movie.clip_indices) {
      const ClipRecord& clip = ds.clips[static_cast<std::size_t>(gi)];
      Json clip_json;
      clip_json["id"] = clip.id;
      clip_json["span"] = {clip.span.start, clip.span.end};
      clip_json["interaction"] = clip.interaction;
      if (clip.gt_pair) {
        Json pair;
        pair["actor"] = clip.gt_pair->actor;
        pair["recipient"] =
            clip.gt_pair->is_singleton() ? Json(nullptr) : Json(clip.gt_pair->recipient);
        clip_json["pair"] = pair;
      } else {
        clip_json["pair"] = nullptr;
      }
      clip_json["relationship"] =
          clip.relationship ? Json(*clip.relationship) : Json(nullptr);

      std::string stem = "features/" + movie.id + "/" + clip.id;
      Json features;
      io::write_feature_file(root / (stem + "_visual.lirc"), clip.visual, "visual");
      features["visual"] = stem + "_visual.lirc";
      if (clip.dialog) {
        io::write_feature_file(root / (stem + "_dialog.lirc"), *clip.dialog, "dialog");
        features["dialog"] = stem + "_dialog.lirc";
      } else {
        features["dialog"] = nullptr;
      }
      Json tracks = Json::object();
      for (const auto& [character, block] : clip.tracks) {
        std::string rel = stem + "_track" + std::to_string(character) + ".lirc";
        io::write_feature_file(root / rel, block, "track");
        tracks[std::to_string(character)] = rel;
      }
      features["tracks"] = tracks;
      clip_json["features"] = features;
      movie_json["clips"].push_back(std::move(clip_json));
    }
    manifest["movies"].push_back(std::move(movie_json));
  }

  std::ofstream os(root / "manifest.json");
  if (!os) fail_io("cannot write manifest: " + (root / "manifest.json").string());
  os << manifest.dump(2) << "\n";
  if (!os) fail_io("write failed for manifest: " + (root / "manifest.json").string());
}

}  // namespace lirec
