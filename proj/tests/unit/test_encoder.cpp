#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "model/encoder.hpp"

using namespace lirec;

namespace {

Tensor random_block(std::size_t n, std::size_t d, Rng& rng) {
  Tensor t = Tensor::zeros({n, d});
  for (double& x : t.data) x = rng.normal();
  return t;
}

ClipRecord make_clip(Rng& rng, bool with_dialog, std::vector<int> chars) {
  ClipRecord c;
  c.id = "t";
  c.movie = 0;
  c.span = {0.0, 4.0};
  c.visual = random_block(3, 4, rng);
  if (with_dialog) c.dialog = random_block(2, 3, rng);
  for (int ch : chars) c.tracks[ch] = random_block(3, 2, rng);
  c.interaction = 0;
  return c;
}

EncoderSettings small_settings() {
  EncoderSettings s;
  s.embed_dim = 6;
  s.hidden = 5;
  s.dropout = 0.0;
  return s;
}

}  // namespace

TEST_CASE("temporal pooling matches a direct per-column reduction") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + rng.uniform_index(5);
    std::size_t d = 1 + rng.uniform_index(4);
    Tensor block = random_block(n, d, rng);
    for (PoolKind kind : {PoolKind::max, PoolKind::avg, PoolKind::sum}) {
      Tensor out = pool_temporal(block, kind);
      REQUIRE(out.size() == d);
      for (std::size_t j = 0; j < d; ++j) {
        double want = block.at(0, j);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          want = std::max(want, block.at(i, j));
          total += block.at(i, j);
        }
        if (kind == PoolKind::avg) want = total / static_cast<double>(n);
        if (kind == PoolKind::sum) want = total;
        CHECK(out.at(j) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("max pool backward routes to the first maximal row") {
  Tensor block = Tensor::zeros({3, 2});
  block.at(0, 0) = 5.0;
  block.at(2, 0) = 5.0;  // tie: first row wins
  block.at(1, 1) = 2.0;
  Tensor dy = Tensor::vector({1.0, 3.0});
  Tensor dx = pool_temporal_backward(block, PoolKind::max, dy);
  CHECK(dx.at(0, 0) == 1.0);
  CHECK(dx.at(2, 0) == 0.0);
  CHECK(dx.at(1, 1) == 3.0);

  Tensor davg = pool_temporal_backward(block, PoolKind::avg, dy);
  CHECK(davg.at(1, 0) == doctest::Approx(1.0 / 3.0));
  Tensor dsum = pool_temporal_backward(block, PoolKind::sum, dy);
  CHECK(dsum.at(1, 1) == 3.0);
}

TEST_CASE("modality encoder is l2(dropout(relu(l1 x))) through tanh") {
  Rng rng(5);
  ModalityEncoder enc = ModalityEncoder::create(3, 4, 2, rng);
  Tensor x = Tensor::vector({0.5, -1.0, 2.0});
  Tensor y = enc.forward(x, 0.0, false, nullptr);
  Tensor want = tanh_map(enc.l2.forward(relu(enc.l1.forward(x))));
  REQUIRE(y.size() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(y.at(i) == doctest::Approx(want.at(i)).epsilon(1e-12));
  // outputs live in tanh range
  for (double v : y.data) {
    CHECK(v < 1.0);
    CHECK(v > -1.0);
  }
}

TEST_CASE("fused embedding is [visual, dialog, actor, recipient]") {
  Rng rng(7);
  EncoderSettings s = small_settings();
  ClipEncoder enc = ClipEncoder::create(4, 3, 2, s, rng);
  ClipRecord clip = make_clip(rng, true, {0, 1});

  std::vector<PairId> pairs = {PairId::full(0, 1), PairId::full(1, 0)};
  ClipParts parts = encode_clip_parts(enc, s, clip, pairs, false, nullptr);
  Tensor phi = assemble_embedding(parts, PairId::full(0, 1));
  REQUIRE(phi.size() == 3 * s.embed_dim);

  std::size_t half = s.embed_dim / 2;
  for (std::size_t i = 0; i < s.embed_dim; ++i) {
    CHECK(phi.at(i) == parts.vis_emb.at(i));
    CHECK(phi.at(s.embed_dim + i) == parts.dlg_emb.at(i));
  }
  for (std::size_t i = 0; i < half; ++i) {
    CHECK(phi.at(2 * s.embed_dim + i) == parts.track_emb.at(0).at(i));
    CHECK(phi.at(2 * s.embed_dim + half + i) == parts.track_emb.at(1).at(i));
  }

  // swapping the pair swaps the track halves, so ordered pairs differ
  Tensor swapped = assemble_embedding(parts, PairId::full(1, 0));
  for (std::size_t i = 0; i < half; ++i) {
    CHECK(swapped.at(2 * s.embed_dim + i) == parts.track_emb.at(1).at(i));
    CHECK(swapped.at(2 * s.embed_dim + half + i) == parts.track_emb.at(0).at(i));
  }
}

TEST_CASE("missing modalities and unseen members embed to zero blocks") {
  Rng rng(9);
  EncoderSettings s = small_settings();
  ClipEncoder enc = ClipEncoder::create(4, 3, 2, s, rng);

  ClipRecord no_dialog = make_clip(rng, false, {0});
  std::vector<PairId> pairs = {PairId::singleton(0), PairId::full(0, 2)};
  ClipParts parts = encode_clip_parts(enc, s, no_dialog, pairs, false, nullptr);

  Tensor phi = assemble_embedding(parts, PairId::singleton(0));
  std::size_t half = s.embed_dim / 2;
  // dialog block zero
  for (std::size_t i = 0; i < s.embed_dim; ++i)
    CHECK(phi.at(s.embed_dim + i) == 0.0);
  // singleton recipient half zero, actor half live
  bool actor_live = false;
  for (std::size_t i = 0; i < half; ++i) {
    if (phi.at(2 * s.embed_dim + i) != 0.0) actor_live = true;
    CHECK(phi.at(2 * s.embed_dim + half + i) == 0.0);
  }
  CHECK(actor_live);

  // pair member with no track in this clip gets a zero half too
  Tensor unseen = assemble_embedding(parts, PairId::full(0, 2));
  for (std::size_t i = 0; i < half; ++i)
    CHECK(unseen.at(2 * s.embed_dim + half + i) == 0.0);
}

TEST_CASE("disabled modalities keep their zero block even when data exists") {
  Rng rng(13);
  EncoderSettings s = small_settings();
  s.use_dialog = false;
  ClipEncoder enc = ClipEncoder::create(4, 3, 2, s, rng);
  CHECK_FALSE(enc.dialog.has_value());
  ClipRecord clip = make_clip(rng, true, {0, 1});
  Tensor phi = encode_clip(enc, s, clip, PairId::full(0, 1), false, nullptr);
  for (std::size_t i = 0; i < s.embed_dim; ++i)
    CHECK(phi.at(s.embed_dim + i) == 0.0);
}

TEST_CASE("dropout draws depend only on the fixed order, not the pair list") {
  Rng rng(21);
  EncoderSettings s = small_settings();
  s.dropout = 0.5;
  ClipEncoder enc = ClipEncoder::create(4, 3, 2, s, rng);
  ClipRecord clip = make_clip(rng, true, {0, 1, 2});

  std::vector<PairId> a = {PairId::full(0, 1), PairId::full(2, 1)};
  std::vector<PairId> b = {PairId::full(2, 1), PairId::full(0, 1)};
  Rng d1(99), d2(99);
  ClipParts pa = encode_clip_parts(enc, s, clip, a, true, &d1);
  ClipParts pb = encode_clip_parts(enc, s, clip, b, true, &d2);
  // same characters wanted -> same draws regardless of pair order
  CHECK(pa.vis_emb.data == pb.vis_emb.data);
  for (int ch : {0, 1, 2})
    CHECK(pa.track_emb.at(ch).data == pb.track_emb.at(ch).data);
}

TEST_CASE("bundle pooling stacks clip embeddings and reduces them") {
  std::vector<Tensor> embs = {Tensor::vector({1.0, -2.0}),
                              Tensor::vector({0.5, 4.0}),
                              Tensor::vector({-3.0, 1.0})};
  Tensor mx = encode_bundle(embs, PoolKind::max);
  CHECK(mx.at(0) == 1.0);
  CHECK(mx.at(1) == 4.0);
  Tensor av = encode_bundle(embs, PoolKind::avg);
  CHECK(av.at(0) == doctest::Approx((1.0 + 0.5 - 3.0) / 3.0));
  Tensor sm = encode_bundle(embs, PoolKind::sum);
  CHECK(sm.at(1) == doctest::Approx(3.0));
}
