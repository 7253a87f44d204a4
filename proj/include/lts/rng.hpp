#pragma once

#include <cstdint>
#include <random>

namespace lts {

// Seeded random stream. Child streams derived with split() depend only on the
// parent seed and the child index, so work fanned out over children is
// reproducible regardless of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::uint64_t index) const;

  double normal();
  double uniform();
  std::uint64_t next_u64();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace lts
