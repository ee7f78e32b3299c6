#pragma once

#include "simplexlab/combinatorics.hpp"
#include "simplexlab/losses.hpp"
#include "simplexlab/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace simplexlab {

enum class Normalization { Total, Mean };

const char* to_string(Normalization n);

/// A closed-form lower bound together with the inputs it was evaluated at.
///
/// CE bounds are stated for the mean instance loss and only carry `mean`. SC
/// bounds carry both the total over all batches and the per-batch mean.
struct BoundReport {
  std::string name;
  double value = 0.0;  ///< natural normalisation: mean for CE, total for SC
  std::optional<double> total;
  std::optional<double> mean;
  std::vector<std::pair<std::string, double>> inputs;
  /// False when K > h + 1: the inequality still holds but no simplex exists
  /// to attain it.
  bool tight_capable = true;
  std::string note;

  std::optional<double> get(Normalization n) const { return n == Normalization::Total ? total : mean; }
};

/// log(1 + (K-1) exp(-rho sqrt(K) |W|_F / (K-1))). `dim` (h) is only used for
/// the tightness flag; pass 0 when unknown.
BoundReport ce_bound_frobenius(int num_classes, double rho, double frobenius_norm, int dim = 0);

/// log(1 + (K-1) exp(-K rho r_W / (K-1))) for rows with |w_y| <= r_W.
BoundReport ce_bound_rw(int num_classes, double rho, double r_w, int dim = 0);

/// Derivative of x -> log(1 + (K-1) exp(-rho K x/(K-1))) + lambda K x^2.
double r_w_objective_derivative(int num_classes, double rho, double l2, double x);
/// The objective itself.
double r_w_objective(int num_classes, double rho, double l2, double x);

/// Unique positive root of r_w_objective_derivative: bracket, bisect to width
/// `tol`, then one Newton step. `bracket` overrides the default [0, rho/(2 lambda K)];
/// it is widened until it contains a sign change.
double solve_r_w(int num_classes, double rho, double l2, double tol = 1e-12,
                 std::optional<std::pair<double, double>> bracket = std::nullopt);

/// Bound on L_CE + lambda |W|_F^2 at r = solve_r_w(K, rho, lambda).
BoundReport ce_bound_l2(int num_classes, double rho, double l2, int dim = 0);

/// Bound on the total SC loss for balanced labels and b >= 3:
/// sum_{l=2}^{b} l M_l log(l - 1 + (b - l) exp(-K rho^2 / (K - 1))).
BoundReport sc_bound(int batch_size, double rho, const LabelVector& labels, int dim = 0);

/// (1/N)(K/(K-1)) sum_n <z_n, mean(W) - w_{y_n}>.
double aux_s_ce(const Matrix& points, const Matrix& weights, const LabelVector& labels);

/// log(1 + (K-1) exp(aux_s_ce)): the first Jensen step below L_CE.
double ce_jensen_bound(const Matrix& points, const Matrix& weights, const LabelVector& labels);

/// |B_y| log(|B_y| - 1 + (b - |B_y|) exp(s_att + s_rep)); lower bound on the
/// class-specific batch loss for |B_y| >= 2.
double sc_class_batch_bound(const Matrix& points, const LabelVector& labels, const Batch& batch,
                            int y);

/// Per-level sums over the pairs (y, B) with B in B_{y,l}.
struct ScLevelSums {
  int batch_size = 0;
  /// Indexed by l in [0, b]; entries for l < 2 stay zero.
  std::vector<double> m;          ///< M_l as counted during the sweep
  std::vector<double> loss;       ///< sum of class-specific batch losses
  std::vector<double> s_att;      ///< sum of s_att
  std::vector<double> s_rep;      ///< sum of s_rep
  std::vector<double> log_terms;  ///< sum of log(l - 1 + (b - l) exp(S))
};

/// Enumerates every batch once and accumulates the per-level sums.
ScLevelSums sc_level_sums(const Matrix& points, const LabelVector& labels, int batch_size,
                          std::uint64_t budget = 1'000'000);

/// sum_l l M_l log(l - 1 + (b - l) exp(mean S over level l)); sits between the
/// SC loss and sc_bound.
double sc_outer_bound(const ScLevelSums& sums);

/// sum_y sum_{n: y_n = y} sum_{m: y_m != y} <z_n, z_m>.
double cross_class_inner_product_sum(const Matrix& points, const LabelVector& labels);

}  // namespace simplexlab
