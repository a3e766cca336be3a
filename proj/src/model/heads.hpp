#pragma once

#include "core/layers.hpp"

namespace lirec {

// Two-layer scorer over a fused clip embedding; sigmoid keeps every score
// in (0, 1).
struct InteractionHead {
  DenseLayer l1;
  DenseLayer l2;

  static InteractionHead create(std::size_t num_classes, std::size_t in_dim,
                                std::size_t hidden, Rng& rng);

  struct Cache {
    Tensor x;
    Tensor h_pre;
    Tensor h;
    Tensor scores;
  };

  Tensor forward(const Tensor& phi, Cache* cache = nullptr,
                 KinkProbe* probe = nullptr) const;
  // accumulates parameter grads, returns dphi
  Tensor backward(const Cache& cache, const Tensor& dscores);
  void zero_grad();

  std::size_t num_classes() const { return l2.out_dim(); }
  std::size_t in_dim() const { return l1.in_dim(); }
};

// Linear scorer over a pooled bundle embedding; sigmoid outputs.
struct RelationshipHead {
  DenseLayer lin;

  static RelationshipHead create(std::size_t num_classes, std::size_t in_dim,
                                 Rng& rng);

  struct Cache {
    Tensor x;
    Tensor scores;
  };

  Tensor forward(const Tensor& phi, Cache* cache = nullptr) const;
  Tensor backward(const Cache& cache, const Tensor& dscores);
  void zero_grad();

  std::size_t num_classes() const { return lin.out_dim(); }
  std::size_t in_dim() const { return lin.in_dim(); }
};

Tensor concat(const Tensor& a, const Tensor& b);
// undoes concat on a gradient: first `na` entries into da, rest into db
void split_grad(const Tensor& d, std::size_t na, Tensor* da, Tensor* db);

// Additive 3-D combination T[p,a,r] = sic[p,a] + src[p,r]. Addition keeps
// each head's conditional argmax intact: slicing along one axis never
// changes the winner on another.
struct ScoreTensor {
  Tensor values;  // (pairs, interactions, relationships)

  std::size_t pairs() const { return values.shape[0]; }
  std::size_t interactions() const { return values.shape[1]; }
  std::size_t relationships() const { return values.shape[2]; }
  double at(std::size_t p, std::size_t a, std::size_t r) const {
    return values.at(p, a, r);
  }
};

ScoreTensor combine_score_tensor(const Tensor& sic, const Tensor& src);

}  // namespace lirec
