#pragma once

#include "simplexlab/combinatorics.hpp"
#include "simplexlab/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace simplexlab {

/// Linear classifier weights, one row w_y per class, optionally norm-limited.
class WeightMatrix {
 public:
  explicit WeightMatrix(Matrix rows, std::optional<double> norm_limit = std::nullopt);

  const Matrix& rows() const noexcept { return rows_; }
  std::optional<double> norm_limit() const noexcept { return norm_limit_; }

 private:
  Matrix rows_;
  std::optional<double> norm_limit_;
};

struct LossBreakdown {
  double total = 0.0;
  /// Per instance (CE) or per batch in canonical order (SC). May be empty
  /// when the caller did not ask for components.
  std::vector<double> components;
  double mean = 0.0;
};

// ---------------------------------------------------------------------------
// Cross-entropy
// ---------------------------------------------------------------------------

double ce_instance_loss(const Matrix& points, const Matrix& weights, const LabelVector& labels,
                        Eigen::Index n);

/// Mean instance loss; components hold the per-instance values.
LossBreakdown ce_loss(const Matrix& points, const Matrix& weights, const LabelVector& labels);

struct CeGradients {
  double loss = 0.0;  ///< mean CE loss, without the L2 term
  Matrix d_points;
  Matrix d_weights;  ///< includes 2 * l2 * W
};

CeGradients ce_gradients(const Matrix& points, const Matrix& weights, const LabelVector& labels,
                         double l2);

// ---------------------------------------------------------------------------
// Supervised contrastive
// ---------------------------------------------------------------------------

/// Batch-wise SC loss. An index of multiplicity c contributes c anchors, and
/// "B without i" removes exactly one copy. Classes with a single batch member
/// contribute 0. Requires |B| >= 2.
double sc_batch_loss(const Matrix& points, const LabelVector& labels, const Batch& batch);

/// The part of sc_batch_loss whose anchors carry label `y`.
double sc_class_batch_loss(const Matrix& points, const LabelVector& labels, const Batch& batch,
                           int y);

/// Attraction term: -1/(|B_y|(|B_y|-1)) * sum of <z_i, z_j> over ordered pairs
/// of distinct slots in B_y. Requires |B_y| >= 2.
double s_att(const Matrix& points, const LabelVector& labels, const Batch& batch, int y);
/// Repulsion term: 1/(|B_y||B_y^C|) * sum of <z_i, z_j>, i in B_y, j in the
/// complement; 0 when |B_y| = b. Requires |B_y| >= 1.
double s_rep(const Matrix& points, const LabelVector& labels, const Batch& batch, int y);

struct ScOptions {
  /// Upper limit on multichoose(N, b) for exact evaluation.
  std::uint64_t budget = 10'000'000;
  /// Worker threads; 0 resolves through resolve_threads().
  int threads = 0;
  /// Record the per-batch values in LossBreakdown::components.
  bool keep_components = false;
};

/// Sum of sc_batch_loss over every size-b multiset, plus the per-batch mean.
/// Throws BudgetExceeded when the batch count is above the budget.
LossBreakdown sc_total_loss(const Matrix& points, const LabelVector& labels, int batch_size,
                            const ScOptions& options = {});

/// Euclidean gradient of the total SC loss with respect to the points.
Matrix sc_gradient_total(const Matrix& points, const LabelVector& labels, int batch_size,
                         const ScOptions& options = {});

struct ScEvaluation {
  LossBreakdown loss;
  Matrix gradient;  ///< gradient of loss.total
};

/// Loss and gradient in one sweep over the batches.
ScEvaluation sc_total_loss_and_gradient(const Matrix& points, const LabelVector& labels,
                                        int batch_size, const ScOptions& options = {});

/// Gradient of the sum of sc_batch_loss over `batches`. Each entry counts
/// once per occurrence in the list.
ScEvaluation sc_batches_loss_and_gradient(const Matrix& points, const LabelVector& labels,
                                          const std::vector<Batch>& batches);

}  // namespace simplexlab
