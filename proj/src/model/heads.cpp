#include "model/heads.hpp"

#include <cmath>

#include "core/error.hpp"

namespace lirec {

InteractionHead InteractionHead::create(std::size_t num_classes,
                                        std::size_t in_dim, std::size_t hidden,
                                        Rng& rng) {
  if (num_classes < 1 || in_dim < 1 || hidden < 1)
    fail_invalid("interaction head: dims must be >= 1");
  InteractionHead h;
  h.l1 = DenseLayer::create(hidden, in_dim, rng);
  h.l2 = DenseLayer::create(num_classes, hidden, rng);
  return h;
}

Tensor InteractionHead::forward(const Tensor& phi, Cache* cache,
                                KinkProbe* probe) const {
  check_shape(phi, {in_dim()}, "interaction head input");
  Tensor h_pre = l1.forward(phi);
  if (probe)
    for (double v : h_pre.data) probe->note(std::abs(v));
  Tensor h = relu(h_pre);
  Tensor scores = sigmoid_map(l2.forward(h));
  if (cache) {
    cache->x = phi;
    cache->h_pre = std::move(h_pre);
    cache->h = h;
    cache->scores = scores;
  }
  return scores;
}

Tensor InteractionHead::backward(const Cache& cache, const Tensor& dscores) {
  Tensor dz = sigmoid_backward(cache.scores, dscores);
  Tensor dh = l2.backward(cache.h, dz);
  Tensor dh_pre = relu_backward(cache.h_pre, dh);
  return l1.backward(cache.x, dh_pre);
}

void InteractionHead::zero_grad() {
  l1.zero_grad();
  l2.zero_grad();
}

RelationshipHead RelationshipHead::create(std::size_t num_classes,
                                          std::size_t in_dim, Rng& rng) {
  if (num_classes < 1 || in_dim < 1)
    fail_invalid("relationship head: dims must be >= 1");
  RelationshipHead h;
  h.lin = DenseLayer::create(num_classes, in_dim, rng);
  return h;
}

Tensor RelationshipHead::forward(const Tensor& phi, Cache* cache) const {
  check_shape(phi, {in_dim()}, "relationship head input");
  Tensor scores = sigmoid_map(lin.forward(phi));
  if (cache) {
    cache->x = phi;
    cache->scores = scores;
  }
  return scores;
}

Tensor RelationshipHead::backward(const Cache& cache, const Tensor& dscores) {
  Tensor dz = sigmoid_backward(cache.scores, dscores);
  return lin.backward(cache.x, dz);
}

void RelationshipHead::zero_grad() { lin.zero_grad(); }

Tensor concat(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros({a.size() + b.size()});
  for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = a.data[i];
  for (std::size_t i = 0; i < b.size(); ++i) out.at(a.size() + i) = b.data[i];
  return out;
}

void split_grad(const Tensor& d, std::size_t na, Tensor* da, Tensor* db) {
  if (na > d.size()) fail_invalid("split_grad: split point past end");
  if (da) {
    *da = Tensor::zeros({na});
    for (std::size_t i = 0; i < na; ++i) da->at(i) = d.data[i];
  }
  if (db) {
    std::size_t nb = d.size() - na;
    *db = Tensor::zeros({nb});
    for (std::size_t i = 0; i < nb; ++i) db->at(i) = d.data[na + i];
  }
}

ScoreTensor combine_score_tensor(const Tensor& sic, const Tensor& src) {
  std::size_t P = sic.rows(), A = sic.cols(), R = src.cols();
  if (src.rows() != P)
    fail_invalid("score tensor: pair counts disagree, interaction matrix has " +
                 std::to_string(P) + " but relationship matrix has " +
                 std::to_string(src.rows()));
  ScoreTensor t;
  t.values = Tensor::zeros({P, A, R});
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t r = 0; r < R; ++r)
        t.values.at(p, a, r) = sic.at(p, a) + src.at(p, r);
  return t;
}

}  // namespace lirec
