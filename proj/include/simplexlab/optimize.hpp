#pragma once

#include "simplexlab/losses.hpp"
#include "simplexlab/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace simplexlab {

enum class Schedule { Constant, Exponential };

/// Step-size and bookkeeping settings shared by all optimisers.
///
/// The defaults are this library's choices for the small reproduction
/// problems; none of them is prescribed by the underlying analysis.
struct OptimConfig {
  int steps = 1000;
  double lr0 = 0.1;
  Schedule schedule = Schedule::Constant;
  double decay = 1.0;  ///< per-step factor for the exponential schedule, in (0, 1]
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double radius = 1.0;  ///< sphere or ball radius of the point constraint
  int log_every = 100;
  /// Stop once the (projected) gradient norm drops below this; 0 disables.
  double grad_tol = 0.0;
  int threads = 0;
  std::uint64_t budget = 10'000'000;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  double learning_rate(int step) const;
};

struct TrajectoryRecord {
  int iter = 0;
  double loss = 0.0;
  double bound_gap = 0.0;  ///< loss minus the matching lower bound; NaN if none applies
  double grad_norm = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Matrix points;
  std::optional<Matrix> weights;
  int steps_taken = 0;
  bool stopped_early = false;
  double final_loss = 0.0;
  std::vector<std::string> warnings;
};

/// Heavy-ball gradient descent on L_CE + lambda |W|_F^2 with every point
/// projected back into the ball of radius cfg.radius after each step. The
/// logged loss is the regularised objective.
Trajectory optimize_ce(const PointConfig& init_points, const Matrix& init_weights,
                       const LabelVector& labels, double l2, const OptimConfig& cfg);

/// Full-gradient descent on the per-batch mean SC loss over the sphere. The
/// gradient is projected onto the tangent space and each step is followed by
/// renormalisation. Logged loss is the exact per-batch mean.
Trajectory optimize_sc_full(const PointConfig& init_points, const LabelVector& labels,
                            int batch_size, const OptimConfig& cfg);

enum class BatchSampling {
  Uniform,   ///< canonical ranks drawn uniformly (with replacement) from the seeded RNG
  FullSweep  ///< every batch once per step; reproduces the full-gradient step
};

/// Stochastic variant: each step averages the gradient of `batches_per_step`
/// sampled batches. Logged loss is the exact mean when the enumeration fits in
/// the budget, else the mean over the sampled batches.
Trajectory optimize_sc_sgd(const PointConfig& init_points, const LabelVector& labels,
                           int batch_size, int batches_per_step, const OptimConfig& cfg,
                           BatchSampling sampling = BatchSampling::Uniform);

struct SingleBatchResult {
  Matrix points;  ///< one row per batch slot
  LabelVector labels;
  double loss = 0.0;
  Trajectory trajectory;
};

/// Minimises the loss of one batch with the given class multiplicities, each
/// slot holding its own point on the sphere of radius cfg.radius in R^dim.
SingleBatchResult optimize_single_batch(const std::vector<int>& multiplicities, int dim,
                                        const OptimConfig& cfg);

}  // namespace simplexlab
