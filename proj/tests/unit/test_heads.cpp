#include <doctest.h>

#include <cmath>

#include "model/heads.hpp"

using namespace lirec;

TEST_CASE("zeroed heads score exactly one half everywhere") {
  Rng rng(1);
  InteractionHead ih = InteractionHead::create(4, 6, 5, rng);
  ih.l1.weight.fill(0.0);
  ih.l1.bias.fill(0.0);
  ih.l2.weight.fill(0.0);
  ih.l2.bias.fill(0.0);
  Tensor s = ih.forward(Tensor::full({6}, 2.0));
  REQUIRE(s.size() == 4);
  for (double v : s.data) CHECK(v == 0.5);

  RelationshipHead rh = RelationshipHead::create(3, 6, rng);
  rh.lin.weight.fill(0.0);
  rh.lin.bias.fill(0.0);
  Tensor r = rh.forward(Tensor::full({6}, -1.0));
  for (double v : r.data) CHECK(v == 0.5);
}

TEST_CASE("interaction head is sigmoid(l2(relu(l1 phi)))") {
  Rng rng(2);
  InteractionHead ih = InteractionHead::create(3, 4, 5, rng);
  Tensor phi = Tensor::vector({0.2, -0.4, 1.0, 0.3});
  Tensor want = sigmoid_map(ih.l2.forward(relu(ih.l1.forward(phi))));
  Tensor got = ih.forward(phi);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(got.at(i) == doctest::Approx(want.at(i)).epsilon(1e-12));
  for (double v : got.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("relationship head is a linear map through sigmoid") {
  Rng rng(3);
  RelationshipHead rh = RelationshipHead::create(2, 3, rng);
  rh.lin.weight.data = {1.0, 0.0, 0.0, 0.0, 2.0, 0.0};
  rh.lin.bias.data = {0.0, -1.0};
  Tensor s = rh.forward(Tensor::vector({0.5, 0.25, 9.0}));
  CHECK(s.at(0) == doctest::Approx(sigmoid(0.5)));
  CHECK(s.at(1) == doctest::Approx(sigmoid(0.5 - 1.0)));
}

TEST_CASE("concat and split are inverse") {
  Tensor a = Tensor::vector({1.0, 2.0});
  Tensor b = Tensor::vector({3.0, 4.0, 5.0});
  Tensor c = concat(a, b);
  REQUIRE(c.size() == 5);
  CHECK(c.at(0) == 1.0);
  CHECK(c.at(4) == 5.0);
  Tensor da, db;
  split_grad(c, 2, &da, &db);
  CHECK(da.data == a.data);
  CHECK(db.data == b.data);
}

TEST_CASE("score tensor adds the pair/interaction and pair/relationship grids") {
  Tensor sic = Tensor::zeros({2, 3});
  Tensor src = Tensor::zeros({2, 2});
  double v = 0.0;
  for (double& x : sic.data) x = (v += 0.125);
  for (double& x : src.data) x = (v += 0.25);
  ScoreTensor t = combine_score_tensor(sic, src);
  CHECK(t.pairs() == 2);
  CHECK(t.interactions() == 3);
  CHECK(t.relationships() == 2);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t r = 0; r < 2; ++r)
        CHECK(t.at(p, a, r) ==
              doctest::Approx(sic.at(p, a) + src.at(p, r)).epsilon(1e-15));

  Tensor bad = Tensor::zeros({3, 2});
  CHECK_THROWS(combine_score_tensor(sic, bad));
}

TEST_CASE("head backward matches finite differences on a scalar probe") {
  Rng rng(4);
  InteractionHead ih = InteractionHead::create(2, 3, 4, rng);
  Tensor phi = Tensor::vector({0.3, -0.2, 0.7});
  InteractionHead::Cache cache;
  Tensor s = ih.forward(phi, &cache);
  // d(sum of scores)/dphi via backward with dy = 1
  Tensor dy = Tensor::full({2}, 1.0);
  Tensor dphi = ih.backward(cache, dy);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 3; ++i) {
    Tensor up = phi, dn = phi;
    up.at(i) += h;
    dn.at(i) -= h;
    double su = 0.0, sd = 0.0;
    for (double x : ih.forward(up).data) su += x;
    for (double x : ih.forward(dn).data) sd += x;
    CHECK(dphi.at(i) == doctest::Approx((su - sd) / (2 * h)).epsilon(1e-5));
  }
  (void)s;
}
