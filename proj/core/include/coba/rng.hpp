#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace coba {

/// Deterministic random stream. Distribution helpers are implemented here
/// rather than with <random> distributions so that output is identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Stable sub-seed for (seed, id, stream). Used so per-example randomness
/// does not depend on processing order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view id,
                          std::uint64_t stream) noexcept;

}  // namespace coba
