#pragma once

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "skewlie/tensor3.hpp"

namespace testing_support {

// Small generator toolkit for property tests. Every case gets its own seeded
// engine so a failing case can be replayed from the trace message.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return normal_(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::VectorXd vector(Eigen::Index n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * normal();
    return v;
  }

  // Uniform direction, norm uniform in [0, radius).
  Eigen::VectorXd ball(Eigen::Index n, double radius) {
    Eigen::VectorXd v = vector(n);
    while (v.norm() == 0.0) v = vector(n);
    return v.normalized() * uniform(0.0, radius);
  }

  Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * normal();
    return m;
  }

  skewlie::Tensor3<double> tensor(Eigen::Index n) {
    skewlie::Tensor3<double> t(n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) t(k, i, j) = normal();
    return t;
  }

  // alpha^k_ij = -alpha^k_ji, diagonal exactly zero.
  skewlie::Tensor3<double> skew_tensor(Eigen::Index n) {
    skewlie::Tensor3<double> t(n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double v = normal();
          t(k, i, j) = v;
          t(k, j, i) = -v;
        }
    return t;
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(integer(0, static_cast<int>(items.size()) - 1))];
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

template <typename Fn>
void for_all(int cases, std::uint64_t seed, Fn&& fn) {
  for (int c = 0; c < cases; ++c) {
    const std::uint64_t case_seed = seed * 1000003ull + static_cast<std::uint64_t>(c);
    SCOPED_TRACE("property case seed " + std::to_string(case_seed));
    Gen gen(case_seed);
    fn(gen);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Critical value of the two-sample KS statistic at level 0.001.
inline double ks_critical_001(std::size_t n, std::size_t m) {
  return 1.949 * std::sqrt(static_cast<double>(n + m) / static_cast<double>(n * m));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace testing_support
