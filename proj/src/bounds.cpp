#include "simplexlab/bounds.hpp"

#include <cmath>
#include <limits>

namespace simplexlab {

namespace {

void check_common(int num_classes, double rho) {
  if (num_classes < 2) throw std::invalid_argument("bound: K must be >= 2");
  if (!(rho > 0.0)) throw std::invalid_argument("bound: rho must be > 0");
}

void set_tightness(BoundReport& report, int num_classes, int dim) {
  if (dim > 0 && num_classes > dim + 1) {
    report.tight_capable = false;
    report.note = "K > h+1: the bound holds but is not necessarily tight";
  }
}

// log(1 + (K-1) exp(-a)), a >= 0
double log_one_plus(int num_classes, double exponent) {
  return std::log1p((num_classes - 1) * std::exp(exponent));
}

}  // namespace

const char* to_string(Normalization n) {
  return n == Normalization::Total ? "total" : "mean";
}

BoundReport ce_bound_frobenius(int num_classes, double rho, double frobenius_norm, int dim) {
  check_common(num_classes, rho);
  if (!(frobenius_norm >= 0.0)) throw std::invalid_argument("ce_bound_frobenius: |W|_F must be >= 0");
  const double k = num_classes;
  BoundReport r;
  r.name = "ce_frobenius";
  r.value = log_one_plus(num_classes, -rho * std::sqrt(k) * frobenius_norm / (k - 1.0));
  r.mean = r.value;
  r.inputs = {{"K", k}, {"rho_z", rho}, {"frobenius_w", frobenius_norm}};
  set_tightness(r, num_classes, dim);
  return r;
}

BoundReport ce_bound_rw(int num_classes, double rho, double r_w, int dim) {
  check_common(num_classes, rho);
  if (!(r_w >= 0.0)) throw std::invalid_argument("ce_bound_rw: r_W must be >= 0");
  const double k = num_classes;
  BoundReport r;
  r.name = "ce_rw";
  r.value = log_one_plus(num_classes, -k * rho * r_w / (k - 1.0));
  r.mean = r.value;
  r.inputs = {{"K", k}, {"rho_z", rho}, {"r_w", r_w}};
  set_tightness(r, num_classes, dim);
  return r;
}

double r_w_objective_derivative(int num_classes, double rho, double l2, double x) {
  const double k = num_classes;
  return k * (2.0 * l2 * x - rho / (std::exp(k * rho * x / (k - 1.0)) + k - 1.0));
}

double r_w_objective(int num_classes, double rho, double l2, double x) {
  const double k = num_classes;
  return log_one_plus(num_classes, -rho * k * x / (k - 1.0)) + l2 * k * x * x;
}

double solve_r_w(int num_classes, double rho, double l2, double tol,
                 std::optional<std::pair<double, double>> bracket) {
  check_common(num_classes, rho);
  if (!(l2 > 0.0)) throw std::invalid_argument("solve_r_w: lambda must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_r_w: tol must be > 0");
  const double k = num_classes;
  auto fprime = [&](double x) { return r_w_objective_derivative(num_classes, rho, l2, x); };

  double lo = 0.0;
  double hi = rho / (2.0 * l2 * k);
  if (bracket) {
    lo = std::max(0.0, bracket->first);
    hi = std::max(lo, bracket->second);
    if (hi == 0.0) hi = rho / (2.0 * l2 * k);
  }
  // f'(0) = -rho < 0, so shrinking lo towards 0 always restores the lower end.
  while (fprime(lo) > 0.0) lo = lo > 1e-300 ? lo * 0.5 : 0.0;
  while (fprime(hi) < 0.0) hi *= 2.0;

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (fprime(mid) < 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);

  // Newton polish, kept only when it stays inside the bracket.
  const double e = std::exp(k * rho * x / (k - 1.0));
  const double second =
      k * (2.0 * l2 + rho * (k * rho / (k - 1.0)) * e / ((e + k - 1.0) * (e + k - 1.0)));
  if (std::isfinite(second) && second > 0.0) {
    const double polished = x - fprime(x) / second;
    if (polished >= lo && polished <= hi &&
        std::abs(fprime(polished)) <= std::abs(fprime(x))) {
      x = polished;
    }
  }
  return x;
}

BoundReport ce_bound_l2(int num_classes, double rho, double l2, int dim) {
  const double r = solve_r_w(num_classes, rho, l2);
  BoundReport rep;
  rep.name = "ce_l2";
  rep.value = r_w_objective(num_classes, rho, l2, r);
  rep.mean = rep.value;
  rep.inputs = {{"K", static_cast<double>(num_classes)},
                {"rho_z", rho},
                {"lambda", l2},
                {"r_w", r}};
  set_tightness(rep, num_classes, dim);
  return rep;
}

BoundReport sc_bound(int batch_size, double rho, const LabelVector& labels, int dim) {
  const int num_classes = labels.num_classes();
  check_common(num_classes, rho);
  require_balanced(labels, "sc_bound");
  if (batch_size < 3) throw std::invalid_argument("sc_bound: batch size must be >= 3");
  const int n = static_cast<int>(labels.size());
  const BatchCensus c = census(n, batch_size, labels);

  const double k = num_classes;
  const double decay = std::exp(-k * rho * rho / (k - 1.0));
  const int b = batch_size;
  double total = 0.0;
  for (int l = 2; l <= b; ++l) {
    const double ml = to_double(c.m[static_cast<std::size_t>(l)]);
    if (ml == 0.0) continue;
    // log(l-1 + (b-l) e^{-c}) = log(l-1) + log1p((b-l) e^{-c} / (l-1))
    const double term = std::log(l - 1.0) + std::log1p((b - l) * decay / (l - 1.0));
    total += l * ml * term;
  }
  BoundReport rep;
  rep.name = "sc";
  rep.total = total;
  rep.mean = total / to_double(c.total);
  rep.value = total;
  rep.inputs = {{"N", static_cast<double>(n)},
                {"K", k},
                {"b", static_cast<double>(b)},
                {"rho_z", rho},
                {"batch_count", to_double(c.total)}};
  set_tightness(rep, num_classes, dim);
  return rep;
}

double aux_s_ce(const Matrix& points, const Matrix& weights, const LabelVector& labels) {
  if (static_cast<std::size_t>(points.rows()) != labels.size() ||
      weights.rows() != labels.num_classes() || weights.cols() != points.cols()) {
    throw std::invalid_argument("aux_s_ce: inconsistent shapes");
  }
  const double k = labels.num_classes();
  const Eigen::RowVectorXd mean_w = weights.colwise().mean();
  double sum = 0.0;
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    sum += points.row(n).dot(mean_w - weights.row(labels[static_cast<std::size_t>(n)]));
  }
  return sum * k / ((k - 1.0) * static_cast<double>(points.rows()));
}

double ce_jensen_bound(const Matrix& points, const Matrix& weights, const LabelVector& labels) {
  return log_one_plus(labels.num_classes(), aux_s_ce(points, weights, labels));
}

double sc_class_batch_bound(const Matrix& points, const LabelVector& labels, const Batch& batch,
                            int y) {
  const double s = s_att(points, labels, batch, y) + s_rep(points, labels, batch, y);
  int ny = 0;
  for (const auto& e : batch.entries) {
    if (labels[static_cast<std::size_t>(e.index)] == y) ny += e.count;
  }
  const int b = batch.size();
  return ny * std::log(ny - 1.0 + (b - ny) * std::exp(s));
}

ScLevelSums sc_level_sums(const Matrix& points, const LabelVector& labels, int batch_size,
                          std::uint64_t budget) {
  const int n = static_cast<int>(points.rows());
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::invalid_argument("sc_level_sums: label count does not match number of points");
  }
  if (batch_size < 2) throw std::invalid_argument("sc_level_sums: batch size must be >= 2");
  const Count total = multichoose(n, batch_size);
  if (total > budget) throw BudgetExceeded("sc_level_sums: instance exceeds the budget");

  ScLevelSums out;
  out.batch_size = batch_size;
  const auto levels = static_cast<std::size_t>(batch_size) + 1;
  out.m.assign(levels, 0.0);
  out.loss.assign(levels, 0.0);
  out.s_att.assign(levels, 0.0);
  out.s_rep.assign(levels, 0.0);
  out.log_terms.assign(levels, 0.0);

  const int b = batch_size;
  for_each_batch(n, batch_size, 0, total, [&](const Batch& batch) {
    for (int y = 0; y < labels.num_classes(); ++y) {
      int l = 0;
      for (const auto& e : batch.entries) {
        if (labels[static_cast<std::size_t>(e.index)] == y) l += e.count;
      }
      if (l < 2) continue;
      const auto li = static_cast<std::size_t>(l);
      const double att = s_att(points, labels, batch, y);
      const double rep = s_rep(points, labels, batch, y);
      out.m[li] += 1.0;
      out.loss[li] += sc_class_batch_loss(points, labels, batch, y);
      out.s_att[li] += att;
      out.s_rep[li] += rep;
      out.log_terms[li] += std::log(l - 1.0 + (b - l) * std::exp(att + rep));
    }
  });
  return out;
}

double sc_outer_bound(const ScLevelSums& sums) {
  const int b = sums.batch_size;
  double total = 0.0;
  for (int l = 2; l <= b; ++l) {
    const auto li = static_cast<std::size_t>(l);
    if (sums.m[li] == 0.0) continue;
    const double mean_s = (sums.s_att[li] + sums.s_rep[li]) / sums.m[li];
    total += l * sums.m[li] * std::log(l - 1.0 + (b - l) * std::exp(mean_s));
  }
  return total;
}

double cross_class_inner_product_sum(const Matrix& points, const LabelVector& labels) {
  if (static_cast<std::size_t>(points.rows()) != labels.size()) {
    throw std::invalid_argument("cross_class_inner_product_sum: shape mismatch");
  }
  const Matrix gram = points * points.transpose();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) {
        sum += gram(i, j);
      }
    }
  }
  return sum;
}

}  // namespace simplexlab
