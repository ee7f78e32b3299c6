#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library's loss or enumeration kernels.

#include "simplexlab/combinatorics.hpp"
#include "simplexlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using simplexlab::LabelVector;
using simplexlab::Matrix;

inline Matrix random_sphere(int n, int h, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix z(n, h);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < h; ++d) z(i, d) = g(rng);
    z.row(i) *= rho / z.row(i).norm();
  }
  return z;
}

inline Matrix random_ball(int n, int h, double rho, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix z = random_sphere(n, h, rho, rng);
  for (int i = 0; i < n; ++i) z.row(i) *= u(rng);
  return z;
}

inline Matrix random_gaussian(int rows, int cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

/// Random labels in which every class appears at least once.
inline LabelVector random_labels(int n, int k, std::mt19937_64& rng) {
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % k;
  std::shuffle(y.begin(), y.end(), rng);
  return LabelVector(y, k);
}

/// All nondecreasing sequences of length b over [0, n), produced recursively
/// in lexicographic order.
inline std::vector<std::vector<int>> all_batches(int n, int b) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == b) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

/// Direct transcription of the batch-wise SC loss on an expanded slot
/// sequence. Slot i's positives are the other slots with the same label; the
/// denominator runs over every other slot.
inline double naive_sc_batch(const Matrix& z, const LabelVector& y, const std::vector<int>& slots) {
  const std::size_t b = slots.size();
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const int a = slots[i];
    double denom = 0.0;
    for (std::size_t k = 0; k < b; ++k) {
      if (k != i) denom += std::exp(z.row(a).dot(z.row(slots[k])));
    }
    double inner = 0.0;
    int positives = 0;
    for (std::size_t p = 0; p < b; ++p) {
      if (p == i || y[static_cast<std::size_t>(slots[p])] != y[static_cast<std::size_t>(a)]) continue;
      ++positives;
      inner += std::log(std::exp(z.row(a).dot(z.row(slots[p]))) / denom);
    }
    if (positives > 0) total -= inner / positives;
  }
  return total;
}

inline double naive_sc_total(const Matrix& z, const LabelVector& y, int b) {
  double total = 0.0;
  for (const auto& s : all_batches(static_cast<int>(z.rows()), b)) total += naive_sc_batch(z, y, s);
  return total;
}

/// Direct softmax cross-entropy, no shift.
inline double naive_ce(const Matrix& z, const Matrix& w, const LabelVector& y) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    double denom = 0.0;
    for (Eigen::Index c = 0; c < w.rows(); ++c) denom += std::exp(z.row(n).dot(w.row(c)));
    const double num = std::exp(z.row(n).dot(w.row(y[static_cast<std::size_t>(n)])));
    total -= std::log(num / denom);
  }
  return total / static_cast<double>(z.rows());
}

/// Central finite-difference gradient of f at x.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                          double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix xp = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double orig = xp(i, j);
      xp(i, j) = orig + step;
      const double fp = f(xp);
      xp(i, j) = orig - step;
      const double fm = f(xp);
      xp(i, j) = orig;
      g(i, j) = (fp - fm) / (2.0 * step);
    }
  }
  return g;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

/// Exact binomial coefficient via Pascal's triangle in 128-bit integers.
inline simplexlab::Count binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<simplexlab::Count> row(static_cast<std::size_t>(k) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = std::min(i, k); j >= 1; --j) row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j) - 1];
  }
  return row[static_cast<std::size_t>(k)];
}

}  // namespace oracle
