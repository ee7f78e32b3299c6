#pragma once

#include "simplexlab/bounds.hpp"
#include "simplexlab/geometry.hpp"
#include "simplexlab/losses.hpp"
#include "simplexlab/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace simplexlab {

/// Which equality conditions hold, with the residual of each.
///
/// C1 residual: max_n |z_n - mu_{y_n}| / rho_Z.
/// C2 residual: worst of the S1-S3 residuals of the class means at radius rho_Z.
/// C3 residual: max_y |w_y - (rho_W/rho_Z) mu_y| / rho_W, with rho_W the mean
/// row norm of W.
struct EqualityReport {
  std::vector<ConditionCheck> conditions;
  SimplexCheck simplex;
  double tol = 0.0;
  std::optional<double> rho_w;
  bool pass = false;
};

EqualityReport equality_report_ce(const PointConfig& points, const Matrix& weights,
                                  const LabelVector& labels, double tol);
EqualityReport equality_report_sc(const PointConfig& points, const LabelVector& labels,
                                  double tol);

struct Summary {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

Summary summarize(std::vector<double> values);

/// Cosine-similarity statistics of a configuration:
/// separation between class means, between classifier weights, and spread of
/// each point around its class mean.
struct GeometryStats {
  std::vector<double> across_means;    ///< gamma(mu_i, mu_j), i < j
  std::vector<double> across_weights;  ///< gamma(w_i, w_j), i < j; empty without W
  std::vector<double> to_means;        ///< gamma(z_n, mu_{y_n})
  Summary across_means_summary;
  std::optional<Summary> across_weights_summary;
  Summary to_means_summary;
  double separation_target = 0.0;  ///< value at a regular simplex
  double spread_target = 1.0;
  int num_classes = 0;
};

GeometryStats geometry_stats(const Matrix& points, const LabelVector& labels,
                             const std::optional<Matrix>& weights = std::nullopt);

/// Writes `statistic,pair_or_index,value` rows. Pairs are "i-j" and indices
/// are 1-based.
void write_stats_csv(std::ostream& os, const GeometryStats& stats);

struct Embeddings {
  PointConfig points;
  LabelVector labels;
  std::vector<std::string> warnings;
};

/// Reads a `label,x1,...,xh` CSV. Labels are 1-based integers; K is the
/// largest label. Throws ParseError naming the offending line.
Embeddings load_embeddings(const std::string& path);
Embeddings parse_embeddings(std::istream& is);

/// Inverse of parse_embeddings, doubles printed with 17 significant digits.
void write_embeddings(std::ostream& os, const Matrix& points, const LabelVector& labels);

/// Reads a headerless-or-headed numeric matrix CSV (classifier weights).
Matrix load_matrix_csv(const std::string& path);

/// Raised when an empirical loss sits below its proven lower bound.
class BoundViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct GapReport {
  Normalization normalization = Normalization::Mean;
  double empirical = 0.0;
  double bound = 0.0;
  double absolute = 0.0;
  double relative = 0.0;
  bool tight = false;
};

/// Compares an empirical loss with a bound in the same normalisation. Throws
/// std::invalid_argument when the bound has no value in that normalisation
/// and BoundViolation when the gap is below -1e-9 (relative to max(1, |bound|)).
GapReport gap_report(const LossBreakdown& empirical, const BoundReport& bound,
                     Normalization normalization, double tight_threshold = 1e-4);
GapReport gap_report(double empirical, const BoundReport& bound, Normalization normalization,
                     double tight_threshold = 1e-4);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

}  // namespace simplexlab
