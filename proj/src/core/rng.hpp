#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace lirec {

// Deterministic stream-splittable RNG (xoshiro256** seeded via splitmix64).
// fork() derives an independent child stream purely from the parent's base
// seed and a tag, without consuming parent state, so the order in which
// consumers draw from sibling streams can never perturb one another.
// Training code hangs named streams off the run seed: "init", "dropout",
// "sampling", "data".
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng fork(std::string_view tag) const;
  Rng fork(std::uint64_t index) const;

  std::uint64_t next_u64();
  // uniform on [0, 1)
  double uniform();
  double uniform(double lo, double hi);
  // standard normal via Box-Muller (no cached spare, keeps draws addressable)
  double normal();
  // unbiased integer on [0, n)
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p);
  // index drawn proportionally to non-negative weights
  std::size_t multinomial(const std::vector<double>& weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t base_;
  std::array<std::uint64_t, 4> s_;
};

}  // namespace lirec
