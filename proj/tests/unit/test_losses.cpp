#include <doctest.h>

#include <cmath>

#include "model/losses.hpp"

using namespace lirec;

namespace {

Tensor matrix(std::size_t r, std::size_t c, std::initializer_list<double> v) {
  Tensor t = Tensor::zeros({r, c});
  std::copy(v.begin(), v.end(), t.data.begin());
  return t;
}

}  // namespace

TEST_CASE("interaction ranking: satisfied margins cost nothing") {
  Tensor s = Tensor::vector({0.9, 0.1, 0.3});
  CHECK(loss_interaction(s, 0, {}, 0.2) == 0.0);
}

TEST_CASE("interaction ranking: flat scores cost margin per negative") {
  Tensor s = Tensor::full({3}, 0.5);
  Tensor d;
  CHECK(loss_interaction(s, 0, {}, 0.2, &d) == doctest::Approx(0.4));
  CHECK(d.at(0) == doctest::Approx(-2.0));
  CHECK(d.at(1) == doctest::Approx(1.0));
  CHECK(d.at(2) == doctest::Approx(1.0));

  // overlapping labels leave the negative set
  CHECK(loss_interaction(s, 0, {1}, 0.2) == doctest::Approx(0.2));
  CHECK(loss_interaction(s, 0, {1, 2}, 0.2) == 0.0);
}

TEST_CASE("interaction ranking on mixed scores") {
  // worked by hand: negatives 0,2,4 give hinge terms 0.15, 0.12, 0.01
  Tensor s = Tensor::vector({0.55, 0.60, 0.52, 0.70, 0.41});
  CHECK(loss_interaction(s, 1, {3}, 0.2) == doctest::Approx(0.28));
}

TEST_CASE("relationship ranking: flat scores cost (R-1) margins") {
  Tensor s = Tensor::full({5}, 0.31);
  CHECK(loss_relationship(s, 2, 0.2) == doctest::Approx(4 * 0.2));
  Tensor good = Tensor::vector({0.1, 0.9, 0.2});
  CHECK(loss_relationship(good, 1, 0.2) == 0.0);
}

TEST_CASE("bundle objective combines the two terms with lambda over V") {
  CHECK(loss_joint(0.3, {0.1, 0.2, 0.6}, 1.5) == doctest::Approx(0.75));
  CHECK(loss_joint(0.3, {0.1, 0.2, 0.6}, 0.0) == doctest::Approx(0.3));
  CHECK(loss_joint(0.25, {0.4}, 1.5) == doctest::Approx(0.25 + 1.5 * 0.4));
  CHECK_THROWS(loss_joint(0.1, {}, 1.5));
}

TEST_CASE("pair-supervised ranking over a score matrix") {
  // single cell is the positive itself: nothing to rank against
  Tensor one = matrix(1, 1, {0.7});
  CHECK(loss_pair_full(one, 0, 0, {}, 0.2, NegReduction::sum) == 0.0);

  // flat 2x2: three negative cells under plain sum
  Tensor flat = Tensor::full({2, 2}, 0.5);
  Tensor d;
  CHECK(loss_pair_full(flat, 0, 0, {}, 0.2, NegReduction::sum, &d) ==
        doctest::Approx(0.6));
  CHECK(d.at(0, 0) == doctest::Approx(-3.0));
  CHECK(d.at(0, 1) == doctest::Approx(1.0));
  CHECK(d.at(1, 0) == doctest::Approx(1.0));
  CHECK(d.at(1, 1) == doctest::Approx(1.0));

  // one hard negative per pair row
  Tensor ds;
  CHECK(loss_pair_full(flat, 0, 0, {}, 0.2, NegReduction::sum_max, &ds) ==
        doctest::Approx(0.4));
  CHECK(ds.at(0, 0) == doctest::Approx(-2.0));
  CHECK(ds.at(0, 1) == doctest::Approx(1.0));
  CHECK(ds.at(1, 0) == doctest::Approx(1.0));  // tie broken to the first cell
  CHECK(ds.at(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("pair-supervised ranking on a worked 3x4 example") {
  // a*=2, p*=1, overlap masks column 0; hand-summed hinge terms
  Tensor S = matrix(3, 4,
                    {0.50, 0.30, 0.45, 0.62,
                     0.20, 0.55, 0.58, 0.33,
                     0.70, 0.10, 0.61, 0.48});
  CHECK(loss_pair_full(S, 2, 1, {0}, 0.2, NegReduction::sum) ==
        doctest::Approx(0.81));
  CHECK(loss_pair_full(S, 2, 1, {0}, 0.2, NegReduction::sum_max) ==
        doctest::Approx(0.64));
  // same label under a different pair stays a negative
  Tensor d;
  loss_pair_full(S, 2, 1, {0}, 0.2, NegReduction::sum, &d);
  CHECK(d.at(0, 2) == doctest::Approx(1.0));
  CHECK(d.at(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("weak pair ranking discards the whole positive column") {
  // flat 2x2, a*=0, latent pair 0: only column 1 remains
  Tensor flat = Tensor::full({2, 2}, 0.5);
  Tensor d;
  CHECK(loss_pair_weak(flat, 0, 0, {}, 0.2, NegReduction::sum, &d) ==
        doctest::Approx(0.4));
  CHECK(d.at(0, 0) == doctest::Approx(-2.0));
  CHECK(d.at(1, 0) == 0.0);  // other pairs of the true label carry no gradient
  CHECK(d.at(0, 1) == doctest::Approx(1.0));
  CHECK(d.at(1, 1) == doctest::Approx(1.0));

  // a single interaction class leaves nothing admissible
  Tensor col = matrix(3, 1, {0.2, 0.9, 0.4});
  CHECK(loss_pair_weak(col, 0, 1, {}, 0.2, NegReduction::sum) == 0.0);
}

TEST_CASE("weak pair ranking on the worked 3x4 example") {
  Tensor S = matrix(3, 4,
                    {0.50, 0.30, 0.45, 0.62,
                     0.20, 0.55, 0.58, 0.33,
                     0.70, 0.10, 0.61, 0.48});
  // a*=2 discarded, overlap masks column 0, latent pair 0
  CHECK(loss_pair_weak(S, 2, 0, {0}, 0.2, NegReduction::sum) ==
        doctest::Approx(1.03));
  CHECK(loss_pair_weak(S, 2, 0, {0}, 0.2, NegReduction::sum_max) ==
        doctest::Approx(0.90));
}

TEST_CASE("weak gradient vanishes at the true label under unchosen pairs") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t P = 2 + rng.uniform_index(4);
    std::size_t A = 2 + rng.uniform_index(5);
    Tensor s = Tensor::zeros({P, A});
    for (double& x : s.data) x = rng.uniform();
    int a_star = static_cast<int>(rng.uniform_index(A));
    std::size_t p_hat = rng.uniform_index(P);
    Tensor d;
    loss_pair_weak(s, a_star, p_hat, {}, 0.2, NegReduction::sum, &d);
    for (std::size_t p = 0; p < P; ++p)
      if (p != p_hat) CHECK(d.at(p, static_cast<std::size_t>(a_star)) == 0.0);
  }
}

TEST_CASE("hard-negative reduction never exceeds the plain sum") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t P = 1 + rng.uniform_index(4);
    std::size_t A = 1 + rng.uniform_index(5);
    Tensor s = Tensor::zeros({P, A});
    for (double& x : s.data) x = rng.uniform();
    int a_star = static_cast<int>(rng.uniform_index(A));
    std::size_t p_star = rng.uniform_index(P);
    double sum = loss_pair_full(s, a_star, p_star, {}, 0.2, NegReduction::sum);
    double hard =
        loss_pair_full(s, a_star, p_star, {}, 0.2, NegReduction::sum_max);
    CHECK(hard <= sum + 1e-12);
  }
  // with one admissible cell per row the two reductions coincide
  Tensor two = matrix(2, 2, {0.5, 0.4, 0.3, 0.6});
  CHECK(loss_pair_weak(two, 0, 0, {}, 0.2, NegReduction::sum) ==
        doctest::Approx(
            loss_pair_weak(two, 0, 0, {}, 0.2, NegReduction::sum_max)));
}

TEST_CASE("weak relationship ranking spans every pair of other labels") {
  // flat (P, R): (R-1) * P margins
  Tensor flat = Tensor::full({4, 3}, 0.5);
  CHECK(loss_rel_pair_weak(flat, 1, 2, 0.2) == doctest::Approx(2 * 4 * 0.2));

  // worked 2x3 example: r*=1, latent pair 1
  Tensor SR = matrix(2, 3, {0.42, 0.58, 0.33, 0.61, 0.47, 0.50});
  Tensor d;
  CHECK(loss_rel_pair_weak(SR, 1, 1, 0.2, &d) == doctest::Approx(0.78));
  // every admissible cell is active here; positive collects -4
  CHECK(d.at(1, 1) == doctest::Approx(-4.0));
  CHECK(d.at(0, 1) == 0.0);  // r* column untouched off the latent pair
}

TEST_CASE("latent pair selection follows scores") {
  Rng rng(41);
  Tensor s = matrix(2, 2, {0.9, 0.5, 0.1, 0.5});
  // multinomial over column 0: weights 0.9 / 0.1
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (sample_pair_weak(s, 0, true, rng) == 0) ++first;
  double sigma = std::sqrt(n * 0.9 * 0.1);
  CHECK(std::abs(first - 0.9 * n) < 3.0 * sigma);

  // greedy mode takes the argmax, ties to the lowest index
  CHECK(sample_pair_weak(s, 0, false, rng) == 0);
  CHECK(sample_pair_weak(s, 1, false, rng) == 0);
  CHECK(select_pair({0.2, 0.7, 0.7}, false, rng) == 1);
}

TEST_CASE("loss config burn-in switches the reduction") {
  LossConfig c;
  c.reduction = NegReduction::sum_max;
  c.burn_in_epochs = 20;
  CHECK(c.effective_reduction(0) == NegReduction::sum);
  CHECK(c.effective_reduction(19) == NegReduction::sum);
  CHECK(c.effective_reduction(20) == NegReduction::sum_max);
  c.reduction = NegReduction::sum;
  CHECK(c.effective_reduction(50) == NegReduction::sum);

  LossConfig bad;
  bad.margin_pair = 1.5;  // sigmoid scores cannot span such a margin
  CHECK_THROWS(bad.validate());
  LossConfig neg;
  neg.lambda = -0.1;
  CHECK_THROWS(neg.validate());
}

TEST_CASE("weak joint objective is plain arithmetic over its parts") {
  Tensor SR = matrix(2, 3, {0.42, 0.58, 0.33, 0.61, 0.47, 0.50});
  double rel = loss_rel_pair_weak(SR, 1, 1, 0.2);
  double total = loss_joint(rel, {0.25, 0.15}, 1.5);
  CHECK(total == doctest::Approx(rel + 1.5 / 2.0 * 0.4));
}
