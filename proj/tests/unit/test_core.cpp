#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "core/adam.hpp"
#include "core/error.hpp"
#include "core/layers.hpp"
#include "core/rng.hpp"
#include "core/serialize.hpp"
#include "core/tensor.hpp"

using namespace lirec;
namespace fs = std::filesystem;

TEST_CASE("tensor shapes and indexing") {
  Tensor t = Tensor::zeros({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  t.at(1, 2) = 5.0;
  CHECK(t.data[5] == 5.0);

  Tensor v = Tensor::vector({1.0, 2.0});
  CHECK(v.ndim() == 1);
  CHECK(v.at(1) == 2.0);

  Tensor f = Tensor::full({2, 2}, 3.5);
  for (double x : f.data) CHECK(x == 3.5);

  CHECK_THROWS_AS(check_shape(t, {3, 2}, "here"), Error);
  CHECK(t.all_finite());
  t.at(0, 0) = std::nan("");
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("rng streams are deterministic and fork-independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // forking never consumes parent state
  Rng c(7);
  std::uint64_t direct = Rng(7).next_u64();
  Rng child = c.fork("anything");
  CHECK(c.next_u64() == direct);

  // sibling streams differ, same tag reproduces
  Rng p(9);
  CHECK(p.fork("x").next_u64() != p.fork("y").next_u64());
  CHECK(p.fork("x").next_u64() == p.fork("x").next_u64());
  CHECK(p.fork(3).next_u64() == p.fork(3).next_u64());
  CHECK(p.fork(3).next_u64() != p.fork(4).next_u64());
  (void)child;
}

TEST_CASE("rng distributions look right") {
  Rng r(123);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  // mean 1/2 (sd ~6.5e-4), variance 1/12
  CHECK(std::abs(mean - 0.5) < 0.004);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.004);

  double nsum = 0.0, nsumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    nsum += x;
    nsumsq += x * x;
  }
  CHECK(std::abs(nsum / n) < 0.01);
  CHECK(std::abs(nsumsq / n - 1.0) < 0.02);
}

TEST_CASE("multinomial follows its weights") {
  Rng r(5);
  std::vector<double> w = {0.9, 0.1};
  const int n = 100000;
  int first = 0;
  for (int i = 0; i < n; ++i)
    if (r.multinomial(w) == 0) ++first;
  // 3 sigma of Binomial(n, 0.9)
  double sigma = std::sqrt(n * 0.9 * 0.1);
  CHECK(std::abs(first - 0.9 * n) < 3.0 * sigma);

  std::vector<double> degenerate = {0.0, 2.0, 0.0};
  for (int i = 0; i < 50; ++i) CHECK(r.multinomial(degenerate) == 1);
}

TEST_CASE("dense layer matches a hand-computed product") {
  Rng rng(1);
  DenseLayer l = DenseLayer::create(2, 3, rng);
  l.weight.data = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  l.bias.data = {0.5, -0.5};
  Tensor y = l.forward(Tensor::vector({1.0, 1.0, 2.0}));
  CHECK(y.at(0) == doctest::Approx(1 + 2 + 6 + 0.5));
  CHECK(y.at(1) == doctest::Approx(4 + 5 + 12 - 0.5));

  // init bound sqrt(6/(in+out)), biases zero
  DenseLayer f = DenseLayer::create(16, 8, rng);
  double bound = std::sqrt(6.0 / (16 + 8));
  for (double wv : f.weight.data) {
    CHECK(wv <= bound);
    CHECK(wv >= -bound);
  }
  for (double bv : f.bias.data) CHECK(bv == 0.0);
}

TEST_CASE("inverted dropout is identity in eval and unbiased in train") {
  Rng rng(11);
  Tensor x = Tensor::full({1000}, 1.0);

  DropoutMask off;  // default mask is the identity
  Tensor same = dropout_forward(x, off);
  for (double v : same.data) CHECK(v == 1.0);

  DropoutMask m = make_dropout_mask(1000, 0.7, true, rng);
  Tensor y = dropout_forward(x, m);
  int kept = 0;
  for (double v : y.data) {
    bool zero = v == 0.0;
    bool scaled = std::abs(v - 1.0 / 0.7) < 1e-12;
    CHECK((zero || scaled));
    if (scaled) ++kept;
  }
  double sigma = std::sqrt(1000 * 0.7 * 0.3);
  CHECK(std::abs(kept - 700) < 3.0 * sigma);

  // backward routes through the same mask
  Tensor dy = Tensor::full({1000}, 1.0);
  Tensor dx = dropout_backward(dy, m);
  for (std::size_t i = 0; i < 1000; ++i)
    CHECK(dx.data[i] == doctest::Approx(y.data[i]));
}

TEST_CASE("adam reproduces a two-step trace") {
  // one scalar parameter, grads 0.3 then -0.1 at lr 0.01
  Tensor value = Tensor::vector({0.5});
  Tensor grad = Tensor::vector({0.3});
  AdamConfig cfg;
  cfg.lr = 0.01;
  Adam opt(cfg);
  std::vector<ParamRef> params = {{"w", &value, &grad}};
  opt.step(params);
  CHECK(value.at(0) == doctest::Approx(0.4900000003333333).epsilon(1e-12));
  grad.at(0) = -0.1;
  opt.step(params);
  CHECK(value.at(0) == doctest::Approx(0.48599781479280807).epsilon(1e-12));
  CHECK(opt.step_count() == 2);
}

TEST_CASE("adam state round-trips through restore") {
  Rng rng(3);
  Tensor v1 = Tensor::vector({0.1, -0.2});
  Tensor g1 = Tensor::vector({0.5, 0.25});
  Adam a;
  std::vector<ParamRef> params = {{"w", &v1, &g1}};
  a.step(params);
  a.step(params);

  std::vector<std::pair<std::string, Tensor>> saved;
  for (const auto& [name, t] : a.named_state(params)) saved.emplace_back(name, *t);

  Adam b;
  Tensor v2 = v1;
  Tensor g2 = g1;
  std::vector<ParamRef> params2 = {{"w", &v2, &g2}};
  b.restore(params2, saved, a.step_count());
  a.step(params);
  b.step(params2);
  CHECK(v1.at(0) == v2.at(0));
  CHECK(v1.at(1) == v2.at(1));
}

TEST_CASE("tensor containers round-trip bit-for-bit") {
  fs::path dir = fs::temp_directory_path() / "lirec_test_serialize";
  fs::create_directories(dir);

  Tensor t = Tensor::zeros({3, 4});
  Rng rng(17);
  for (double& x : t.data) x = rng.normal();
  io::write_feature_file(dir / "f.lirc", t, "feat");
  std::string name;
  Tensor back = io::read_feature_file(dir / "f.lirc", &name);
  CHECK(name == "feat");
  REQUIRE(back.shape == t.shape);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(back.data[i] == t.data[i]);

  io::Checkpoint ck;
  ck.params.emplace_back("a", t);
  ck.params.emplace_back("b", Tensor::vector({1.5, -2.5}));
  ck.opt_state.emplace_back("adam.m.a", Tensor::full({3, 4}, 0.25));
  ck.step = 77;
  io::write_checkpoint(dir / "c.lirc", ck);
  io::Checkpoint rck = io::read_checkpoint(dir / "c.lirc");
  CHECK(rck.step == 77);
  REQUIRE(rck.params.size() == 2);
  CHECK(rck.params[0].first == "a");
  CHECK(rck.params[1].second.at(1) == -2.5);
  REQUIRE(rck.opt_state.size() == 1);
  CHECK(rck.opt_state[0].second.at(2, 3) == 0.25);

  CHECK(io::sniff_container(dir / "c.lirc"));
  CHECK_THROWS_AS(io::read_checkpoint(dir / "missing.lirc"), Error);
  fs::remove_all(dir);
}
