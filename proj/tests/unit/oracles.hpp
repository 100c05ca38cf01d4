#pragma once

// Reference implementations used by the unit and acceptance suites. They are
// written independently of the library code they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "coba/classifier.hpp"
#include "coba/importance.hpp"
#include "coba/tokenize.hpp"

namespace coba::oracle {

/// p(positive) = sigmoid(bias + sum of present word weights + pair bonus
/// when both words of `pair` are present). Words must be unique in a text.
struct WordGame {
  std::map<std::string, double> weights;
  double bias = 0.0;
  std::pair<std::string, std::string> pair;
  double pair_bonus = 0.0;
  bool linear = false;  // report the raw sum instead of the sigmoid

  double value(const std::string& text) const {
    const auto toks = tokenize(text);
    const std::set<std::string> present(toks.begin(), toks.end());
    double z = bias;
    for (const auto& w : present) {
      if (auto it = weights.find(w); it != weights.end()) z += it->second;
    }
    if (present.count(pair.first) && present.count(pair.second)) z += pair_bonus;
    return linear ? z : 1.0 / (1.0 + std::exp(-z));
  }

  std::shared_ptr<CallbackClassifier> classifier(std::string name = "game") const {
    auto self = *this;
    return std::make_shared<CallbackClassifier>(
        std::move(name), TaskKind::SentimentBinary, [self](const std::string& t) {
          const double p = self.value(t);
          return std::vector<double>{p, 1.0 - p};
        });
  }
};

/// Presence mask from bit pattern, bit i = token i.
inline std::vector<bool> mask_of(unsigned long long bits, std::size_t n) {
  std::vector<bool> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = (bits >> i) & 1ULL;
  return m;
}

/// Shapley values by the subset formula with lgamma-based weights.
inline std::vector<double> exact_shapley(const std::vector<double>& value_by_bits,
                                         std::size_t n) {
  std::vector<double> phi(n, 0.0);
  const double log_nfact = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (unsigned long long s = 0; s < (1ULL << n); ++s) {
      if (s & (1ULL << i)) continue;
      const int k = __builtin_popcountll(s);
      const double w = std::exp(std::lgamma(k + 1.0) +
                                std::lgamma(static_cast<double>(n - k)) - log_nfact);
      phi[i] += w * (value_by_bits[s | (1ULL << i)] - value_by_bits[s]);
    }
  }
  return phi;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t k = r + 1; k < n; ++k) acc -= a[r][k] * x[k];
    x[r] = acc / a[r][r];
  }
  return x;
}

/// Weighted least squares of y on [1, z] with LIME's exponential kernel over
/// the fraction of absent tokens. Returns the token coefficients.
inline std::vector<double> lime_wls(const std::vector<std::vector<bool>>& masks,
                                    const std::vector<double>& y, double width) {
  const std::size_t n = masks.front().size();
  const std::size_t d = n + 1;
  std::vector<std::vector<double>> xtx(d, std::vector<double>(d, 0.0));
  std::vector<double> xty(d, 0.0);
  for (std::size_t s = 0; s < masks.size(); ++s) {
    std::vector<double> row(d, 1.0);
    double absent = 0;
    for (std::size_t i = 0; i < n; ++i) {
      row[i + 1] = masks[s][i] ? 1.0 : 0.0;
      absent += masks[s][i] ? 0 : 1;
    }
    const double dist = absent / static_cast<double>(n);
    const double w = std::exp(-(dist * dist) / (width * width));
    for (std::size_t r = 0; r < d; ++r) {
      xty[r] += w * row[r] * y[s];
      for (std::size_t c = 0; c < d; ++c) xtx[r][c] += w * row[r] * row[c];
    }
  }
  auto beta = solve(xtx, xty);
  return {beta.begin() + 1, beta.end()};
}

/// Majority vote by direct counting.
inline std::pair<std::set<std::string>, std::set<std::string>> brute_vote(
    const std::vector<std::vector<std::string>>& lists, int tau) {
  std::set<std::string> all;
  for (const auto& l : lists) all.insert(l.begin(), l.end());
  std::set<std::string> principal, spurious;
  for (const auto& w : all) {
    int c = 0;
    for (const auto& l : lists) c += std::count(l.begin(), l.end(), w) > 0 ? 1 : 0;
    (c >= tau ? principal : spurious).insert(w);
  }
  return {principal, spurious};
}

}  // namespace coba::oracle
