#include "simplexlab/optimize.hpp"

#include "simplexlab/bounds.hpp"
#include "simplexlab/geometry.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace simplexlab {

void OptimConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("optimizer: steps must be >= 1");
  if (!(lr0 > 0.0)) throw std::invalid_argument("optimizer: lr0 must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("optimizer: momentum must lie in [0, 1)");
  }
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("optimizer: decay must lie in (0, 1]");
  }
  if (!(radius > 0.0)) throw std::invalid_argument("optimizer: radius must be > 0");
  if (log_every < 1) throw std::invalid_argument("optimizer: log_every must be >= 1");
  if (!(grad_tol >= 0.0)) throw std::invalid_argument("optimizer: grad_tol must be >= 0");
}

double OptimConfig::learning_rate(int step) const {
  if (schedule == Schedule::Exponential) return lr0 * std::pow(decay, step);
  return lr0;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Removes the radial component of each row of `v` relative to the points.
void project_tangent(const Matrix& points, Matrix& v) {
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const double r2 = points.row(n).squaredNorm();
    v.row(n) -= (v.row(n).dot(points.row(n)) / r2) * points.row(n);
  }
}

bool should_log(int iter, int steps, int every) { return iter % every == 0 || iter == steps; }

struct SphereStep {
  Matrix gradient;              // Euclidean gradient of the objective
  std::optional<double> loss;  // objective at the same point, when known
};

// Shared heavy-ball loop on the sphere. `step_fn` supplies the gradient at a
// point; `loss_fn` evaluates the logged objective when the step did not.
Trajectory sphere_descent(Matrix points, const OptimConfig& cfg,
                          const std::function<SphereStep(const Matrix&, int)>& step_fn,
                          const std::function<double(const Matrix&)>& loss_fn,
                          std::optional<double> bound) {
  cfg.validate();
  project_rows_to_sphere(points, cfg.radius);
  Trajectory out;
  Matrix velocity = Matrix::Zero(points.rows(), points.cols());

  auto record = [&](int iter, double loss, double grad_norm) {
    out.records.push_back({iter, loss, bound ? loss - *bound : kNaN, grad_norm});
  };

  int iter = 0;
  for (; iter < cfg.steps; ++iter) {
    SphereStep s = step_fn(points, iter);
    project_tangent(points, s.gradient);
    const double grad_norm = s.gradient.norm();
    const bool stop = cfg.grad_tol > 0.0 && grad_norm < cfg.grad_tol;
    if (should_log(iter, cfg.steps, cfg.log_every) || stop) {
      record(iter, s.loss ? *s.loss : loss_fn(points), grad_norm);
    }
    if (stop) {
      out.stopped_early = true;
      break;
    }
    velocity = cfg.momentum * velocity + s.gradient;
    points -= cfg.learning_rate(iter) * velocity;
    project_rows_to_sphere(points, cfg.radius);
    project_tangent(points, velocity);
  }
  out.steps_taken = iter;
  if (!out.stopped_early) {
    SphereStep s = step_fn(points, iter);
    project_tangent(points, s.gradient);
    record(iter, s.loss ? *s.loss : loss_fn(points), s.gradient.norm());
  }
  out.final_loss = out.records.back().loss;
  out.points = std::move(points);
  return out;
}

std::optional<double> sc_bound_mean_if_defined(const LabelVector& labels, int batch_size,
                                               double radius) {
  if (!labels.balanced() || batch_size < 3 || labels.num_classes() < 2) return std::nullopt;
  return sc_bound(batch_size, radius, labels).mean;
}

void check_sc_inputs(const PointConfig& init, const LabelVector& labels, int batch_size,
                     const OptimConfig& cfg) {
  if (init.constraint() != Constraint::Sphere) {
    throw std::invalid_argument("SC optimisation requires a sphere-constrained configuration");
  }
  if (std::abs(init.radius() - cfg.radius) > 1e-12 * cfg.radius) {
    throw std::invalid_argument("SC optimisation: configuration radius differs from cfg.radius");
  }
  if (static_cast<std::size_t>(init.size()) != labels.size()) {
    throw std::invalid_argument("SC optimisation: label count does not match number of points");
  }
  if (batch_size < 2) throw std::invalid_argument("SC optimisation: batch size must be >= 2");
}

}  // namespace

Trajectory optimize_ce(const PointConfig& init_points, const Matrix& init_weights,
                       const LabelVector& labels, double l2, const OptimConfig& cfg) {
  cfg.validate();
  if (!(l2 >= 0.0)) throw std::invalid_argument("optimize_ce: lambda must be >= 0");
  if (static_cast<std::size_t>(init_points.size()) != labels.size()) {
    throw std::invalid_argument("optimize_ce: label count does not match number of points");
  }
  Trajectory out;
  if (!labels.balanced()) {
    out.warnings.push_back("labels are not balanced; no lower bound applies");
  }
  std::optional<double> bound;
  if (labels.balanced() && l2 > 0.0 && labels.num_classes() >= 2) {
    bound = ce_bound_l2(labels.num_classes(), cfg.radius, l2).value;
  }

  Matrix points = init_points.points();
  project_rows_to_ball(points, cfg.radius);
  Matrix weights = init_weights;
  Matrix v_points = Matrix::Zero(points.rows(), points.cols());
  Matrix v_weights = Matrix::Zero(weights.rows(), weights.cols());

  auto evaluate = [&](double& objective, double& grad_norm) {
    CeGradients g = ce_gradients(points, weights, labels, l2);
    objective = g.loss + l2 * weights.squaredNorm();
    // Gradient mapping of the ball projection: zero at constrained
    // stationary points.
    Matrix moved = points - g.d_points;
    project_rows_to_ball(moved, cfg.radius);
    grad_norm = std::sqrt((points - moved).squaredNorm() + g.d_weights.squaredNorm());
    return g;
  };

  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  for (; iter < cfg.steps; ++iter) {
    CeGradients g = evaluate(objective, grad_norm);
    const bool stop = cfg.grad_tol > 0.0 && grad_norm < cfg.grad_tol;
    if (should_log(iter, cfg.steps, cfg.log_every) || stop) {
      out.records.push_back({iter, objective, bound ? objective - *bound : kNaN, grad_norm});
    }
    if (stop) {
      out.stopped_early = true;
      break;
    }
    const double lr = cfg.learning_rate(iter);
    v_points = cfg.momentum * v_points + g.d_points;
    v_weights = cfg.momentum * v_weights + g.d_weights;
    points -= lr * v_points;
    weights -= lr * v_weights;
    project_rows_to_ball(points, cfg.radius);
  }
  out.steps_taken = iter;
  if (!out.stopped_early) {
    evaluate(objective, grad_norm);
    out.records.push_back({iter, objective, bound ? objective - *bound : kNaN, grad_norm});
  }
  out.final_loss = objective;
  out.points = std::move(points);
  out.weights = std::move(weights);
  return out;
}

Trajectory optimize_sc_full(const PointConfig& init_points, const LabelVector& labels,
                            int batch_size, const OptimConfig& cfg) {
  cfg.validate();
  check_sc_inputs(init_points, labels, batch_size, cfg);
  ScOptions opts;
  opts.budget = cfg.budget;
  opts.threads = cfg.threads;
  const double count = to_double(multichoose(static_cast<long>(labels.size()), batch_size));
  if (count > static_cast<double>(cfg.budget)) {
    throw BudgetExceeded("optimize_sc_full: batch count exceeds the enumeration budget; use "
                         "optimize_sc_sgd (--mode sgd) instead");
  }

  auto step_fn = [&](const Matrix& z, int) {
    ScEvaluation e = sc_total_loss_and_gradient(z, labels, batch_size, opts);
    return SphereStep{e.gradient / count, e.loss.mean};
  };
  auto loss_fn = [&](const Matrix& z) { return sc_total_loss(z, labels, batch_size, opts).mean; };
  return sphere_descent(init_points.points(), cfg, step_fn, loss_fn,
                        sc_bound_mean_if_defined(labels, batch_size, cfg.radius));
}

Trajectory optimize_sc_sgd(const PointConfig& init_points, const LabelVector& labels,
                           int batch_size, int batches_per_step, const OptimConfig& cfg,
                           BatchSampling sampling) {
  cfg.validate();
  check_sc_inputs(init_points, labels, batch_size, cfg);
  if (batches_per_step < 1) throw std::invalid_argument("optimize_sc_sgd: batches_per_step >= 1");
  const int n = static_cast<int>(labels.size());
  const Count total = multichoose(n, batch_size);
  const bool exact_logging = total <= cfg.budget;
  ScOptions opts;
  opts.budget = cfg.budget;
  opts.threads = cfg.threads;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, to_u64(total) - 1);
  std::vector<Batch> batches;
  double last_sample_mean = kNaN;

  auto step_fn = [&](const Matrix& z, int) {
    if (sampling == BatchSampling::FullSweep) {
      ScEvaluation e = sc_total_loss_and_gradient(z, labels, batch_size, opts);
      return SphereStep{e.gradient / to_double(total), e.loss.mean};
    }
    batches.clear();
    for (int s = 0; s < batches_per_step; ++s) {
      batches.push_back(Batch::from_sequence(unrank_batch(n, batch_size, pick(rng))));
    }
    ScEvaluation e = sc_batches_loss_and_gradient(z, labels, batches);
    last_sample_mean = e.loss.mean;
    return SphereStep{e.gradient / static_cast<double>(batches_per_step), std::nullopt};
  };
  auto loss_fn = [&](const Matrix& z) {
    if (exact_logging) return sc_total_loss(z, labels, batch_size, opts).mean;
    return last_sample_mean;
  };
  std::optional<double> bound;
  if (exact_logging || sampling == BatchSampling::FullSweep) {
    bound = sc_bound_mean_if_defined(labels, batch_size, cfg.radius);
  }
  Trajectory out = sphere_descent(init_points.points(), cfg, step_fn, loss_fn, bound);
  if (!exact_logging) {
    out.warnings.push_back("batch count exceeds the budget; logged losses are sample means");
  }
  return out;
}

SingleBatchResult optimize_single_batch(const std::vector<int>& multiplicities, int dim,
                                        const OptimConfig& cfg) {
  cfg.validate();
  if (dim < 1) throw std::invalid_argument("optimize_single_batch: dim must be >= 1");
  std::vector<int> labels;
  for (std::size_t y = 0; y < multiplicities.size(); ++y) {
    if (multiplicities[y] < 0) {
      throw std::invalid_argument("optimize_single_batch: multiplicities must be >= 0");
    }
    labels.insert(labels.end(), static_cast<std::size_t>(multiplicities[y]), static_cast<int>(y));
  }
  const int b = static_cast<int>(labels.size());
  if (b < 2) throw std::invalid_argument("optimize_single_batch: batch size must be >= 2");
  LabelVector label_vec(labels, std::max<int>(1, static_cast<int>(multiplicities.size())));

  Batch batch;
  for (int i = 0; i < b; ++i) batch.entries.push_back({i, 1});
  const std::vector<Batch> single{batch};

  const PointConfig init = random_sphere_config(b, dim, cfg.radius, cfg.seed);
  auto step_fn = [&](const Matrix& z, int) {
    ScEvaluation e = sc_batches_loss_and_gradient(z, label_vec, single);
    return SphereStep{e.gradient, e.loss.total};
  };
  auto loss_fn = [&](const Matrix& z) { return sc_batch_loss(z, label_vec, batch); };
  Trajectory traj = sphere_descent(init.points(), cfg, step_fn, loss_fn, std::nullopt);

  SingleBatchResult out{traj.points, label_vec, traj.final_loss, std::move(traj)};
  return out;
}

}  // namespace simplexlab
