#include "simplexlab/losses.hpp"

#include "simplexlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace simplexlab {

WeightMatrix::WeightMatrix(Matrix rows, std::optional<double> norm_limit)
    : rows_(std::move(rows)), norm_limit_(norm_limit) {
  if (rows_.rows() < 1 || rows_.cols() < 1) {
    throw std::invalid_argument("weight matrix must have K >= 1 rows and h >= 1 columns");
  }
  if (norm_limit_) {
    if (!(*norm_limit_ >= 0.0)) throw std::invalid_argument("weight norm limit must be >= 0");
    for (Eigen::Index y = 0; y < rows_.rows(); ++y) {
      if (rows_.row(y).norm() > *norm_limit_ * (1.0 + 1e-9)) {
        throw std::invalid_argument("weight row " + std::to_string(y) +
                                    " exceeds the norm limit");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Cross-entropy
// ---------------------------------------------------------------------------

namespace {

void check_ce_shapes(const Matrix& points, const Matrix& weights, const LabelVector& labels) {
  if (static_cast<std::size_t>(points.rows()) != labels.size()) {
    throw std::invalid_argument("CE: label count does not match number of points");
  }
  if (points.cols() != weights.cols()) {
    throw std::invalid_argument("CE: points and weights differ in dimension");
  }
  if (weights.rows() != labels.num_classes()) {
    throw std::invalid_argument("CE: weight matrix must have one row per class");
  }
}

// log-sum-exp of the logits and the softmax probabilities in `probs`.
double log_softmax_normalizer(const Vector& logits, Vector& probs) {
  const double shift = logits.maxCoeff();
  probs = (logits.array() - shift).exp();
  const double sum = probs.sum();
  probs /= sum;
  return shift + std::log(sum);
}

}  // namespace

double ce_instance_loss(const Matrix& points, const Matrix& weights, const LabelVector& labels,
                        Eigen::Index n) {
  check_ce_shapes(points, weights, labels);
  if (n < 0 || n >= points.rows()) throw std::out_of_range("ce_instance_loss: bad index");
  const Vector logits = weights * points.row(n).transpose();
  Vector probs;
  return log_softmax_normalizer(logits, probs) - logits(labels[static_cast<std::size_t>(n)]);
}

LossBreakdown ce_loss(const Matrix& points, const Matrix& weights, const LabelVector& labels) {
  check_ce_shapes(points, weights, labels);
  LossBreakdown out;
  out.components.resize(static_cast<std::size_t>(points.rows()));
  Vector probs;
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const Vector logits = weights * points.row(n).transpose();
    const double value =
        log_softmax_normalizer(logits, probs) - logits(labels[static_cast<std::size_t>(n)]);
    out.components[static_cast<std::size_t>(n)] = value;
    out.total += value;
  }
  out.mean = out.total / static_cast<double>(points.rows());
  return out;
}

CeGradients ce_gradients(const Matrix& points, const Matrix& weights, const LabelVector& labels,
                         double l2) {
  check_ce_shapes(points, weights, labels);
  if (!(l2 >= 0.0)) throw std::invalid_argument("ce_gradients: L2 strength must be >= 0");
  const double inv_n = 1.0 / static_cast<double>(points.rows());
  CeGradients out;
  out.d_points = Matrix::Zero(points.rows(), points.cols());
  out.d_weights = Matrix::Zero(weights.rows(), weights.cols());
  Vector probs;
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const int y = labels[static_cast<std::size_t>(n)];
    const Vector logits = weights * points.row(n).transpose();
    out.loss += log_softmax_normalizer(logits, probs) - logits(y);
    probs(y) -= 1.0;  // softmax minus one-hot
    out.d_points.row(n) = inv_n * (probs.transpose() * weights);
    out.d_weights.noalias() += inv_n * probs * points.row(n);
  }
  out.loss *= inv_n;
  out.d_weights += 2.0 * l2 * weights;
  return out;
}

// ---------------------------------------------------------------------------
// Supervised contrastive
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kChunkSize = 4096;
// Below this the shifted exponential sum is recomputed with a batch-local
// shift so that no term is subnormal.
constexpr double kTinySum = 1e-250;

// One distinct point of a batch: its row in the tables, multiplicity, label.
struct Slot {
  int row;
  int count;
  int label;
};

// Gram matrix, per-row max and exp(G - rowmax) for a point set.
struct GramTables {
  Matrix gram;
  Vector shift;
  Matrix expo;

  explicit GramTables(const Matrix& points) {
    gram.noalias() = points * points.transpose();
    shift = gram.rowwise().maxCoeff();
    expo = (gram.colwise() - shift).array().exp().matrix();
  }
};

struct Workspace {
  std::vector<Slot> slots;
  std::vector<int> class_size;  // |B_{y}| for each slot's label
  std::vector<double> weights;  // c'_f: multiplicity with the anchor copy removed
  std::vector<double> probs;
};

// Evaluates the batch loss over `slots`; anchors restricted to `only_class`
// when it is >= 0. When `accum` is set, adds scale * d(loss)/dG into it.
double eval_slots(const GramTables& t, Workspace& ws, int only_class, Matrix* accum,
                  double scale) {
  const auto& slots = ws.slots;
  const std::size_t d = slots.size();
  ws.class_size.assign(d, 0);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t f = 0; f < d; ++f) {
      if (slots[f].label == slots[a].label) ws.class_size[a] += slots[f].count;
    }
  }
  ws.weights.resize(d);
  ws.probs.resize(d);

  double loss = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    const int ny = ws.class_size[a];
    if (ny <= 1) continue;
    if (only_class >= 0 && slots[a].label != only_class) continue;
    const int i = slots[a].row;
    const auto g_row = t.gram.row(i);
    const auto e_row = t.expo.row(i);

    double denom = 0.0;
    double positives = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
      const double w = static_cast<double>(slots[f].count - (f == a ? 1 : 0));
      ws.weights[f] = w;
      denom += w * e_row(slots[f].row);
      if (slots[f].label == slots[a].label) positives += w * g_row(slots[f].row);
    }

    double log_denom;
    if (denom >= kTinySum) {
      log_denom = t.shift(i) + std::log(denom);
      if (accum) {
        for (std::size_t f = 0; f < d; ++f) ws.probs[f] = ws.weights[f] * e_row(slots[f].row) / denom;
      }
    } else {
      double local_shift = -std::numeric_limits<double>::infinity();
      for (std::size_t f = 0; f < d; ++f) {
        if (ws.weights[f] > 0.0) local_shift = std::max(local_shift, g_row(slots[f].row));
      }
      double local = 0.0;
      for (std::size_t f = 0; f < d; ++f) {
        ws.probs[f] = ws.weights[f] * std::exp(g_row(slots[f].row) - local_shift);
        local += ws.probs[f];
      }
      log_denom = local_shift + std::log(local);
      for (std::size_t f = 0; f < d; ++f) ws.probs[f] /= local;
    }

    const double inv_pos = 1.0 / static_cast<double>(ny - 1);
    loss += slots[a].count * (log_denom - positives * inv_pos);

    if (accum) {
      const double c = scale * slots[a].count;
      for (std::size_t f = 0; f < d; ++f) {
        double v = ws.probs[f];
        if (slots[f].label == slots[a].label) v -= ws.weights[f] * inv_pos;
        (*accum)(i, slots[f].row) += c * v;
      }
    }
  }
  return loss;
}

void check_batch(const Matrix& points, const LabelVector& labels, const Batch& batch) {
  if (static_cast<std::size_t>(points.rows()) != labels.size()) {
    throw std::invalid_argument("SC: label count does not match number of points");
  }
  if (batch.size() < 2) throw std::invalid_argument("SC: batch size must be >= 2");
  for (const auto& e : batch.entries) {
    if (e.index < 0 || e.index >= points.rows() || e.count < 1) {
      throw std::invalid_argument("SC: batch entry outside [0, N) or with zero multiplicity");
    }
  }
}

// Batch restricted to its own support: rows renumbered 0..d-1.
double local_batch_loss(const Matrix& points, const LabelVector& labels, const Batch& batch,
                        int only_class) {
  check_batch(points, labels, batch);
  Matrix support(static_cast<Eigen::Index>(batch.entries.size()), points.cols());
  Workspace ws;
  for (std::size_t k = 0; k < batch.entries.size(); ++k) {
    const auto& e = batch.entries[k];
    support.row(static_cast<Eigen::Index>(k)) = points.row(e.index);
    ws.slots.push_back({static_cast<int>(k), e.count, labels[static_cast<std::size_t>(e.index)]});
  }
  const GramTables tables(support);
  return eval_slots(tables, ws, only_class, nullptr, 0.0);
}

void fill_slots(const Batch& batch, const LabelVector& labels, std::vector<Slot>& slots) {
  slots.clear();
  for (const auto& e : batch.entries) {
    slots.push_back({e.index, e.count, labels[static_cast<std::size_t>(e.index)]});
  }
}

// Shared driver for the exact sweep over all batches.
ScEvaluation sweep_all_batches(const Matrix& points, const LabelVector& labels, int batch_size,
                               const ScOptions& options, bool want_gradient) {
  if (static_cast<std::size_t>(points.rows()) != labels.size()) {
    throw std::invalid_argument("SC: label count does not match number of points");
  }
  if (batch_size < 2) throw std::invalid_argument("SC: batch size must be >= 2");
  const int n = static_cast<int>(points.rows());
  const Count total = multichoose(n, batch_size);
  if (total > options.budget) {
    throw BudgetExceeded("SC: " + to_string(total) + " batches exceed the enumeration budget of " +
                         std::to_string(options.budget) +
                         "; use the SGD optimiser (optimize_sc_sgd / --mode sgd) instead");
  }
  const std::uint64_t num_batches = to_u64(total);
  const std::uint64_t num_chunks = (num_batches + kChunkSize - 1) / kChunkSize;
  const int threads = resolve_threads(options.threads);
  const GramTables tables(points);

  ScEvaluation out;
  if (options.keep_components) out.loss.components.resize(num_batches);
  Matrix accum_total;
  if (want_gradient) accum_total = Matrix::Zero(n, n);

  // Chunks run in waves so that at most `wave` chunk accumulators are alive;
  // merging is always in chunk order.
  const std::uint64_t wave = static_cast<std::uint64_t>(threads) * 4;
  std::vector<double> chunk_loss;
  std::vector<Matrix> chunk_accum;
  for (std::uint64_t first = 0; first < num_chunks; first += wave) {
    const std::uint64_t count = std::min(wave, num_chunks - first);
    chunk_loss.assign(count, 0.0);
    if (want_gradient) chunk_accum.assign(count, Matrix::Zero(n, n));
    parallel_chunks(count, threads, [&](std::size_t local) {
      const std::uint64_t chunk = first + local;
      const std::uint64_t begin = chunk * kChunkSize;
      const std::uint64_t end = std::min(begin + kChunkSize, num_batches);
      Workspace ws;
      Batch batch;
      Matrix* accum = want_gradient ? &chunk_accum[local] : nullptr;
      double sum = 0.0;
      BatchEnumerator it(n, batch_size, begin);
      for (std::uint64_t r = begin; r < end; ++r, it.advance()) {
        it.current(batch);
        fill_slots(batch, labels, ws.slots);
        const double value = eval_slots(tables, ws, -1, accum, 1.0);
        if (options.keep_components) out.loss.components[r] = value;
        sum += value;
      }
      chunk_loss[local] = sum;
    });
    for (std::uint64_t local = 0; local < count; ++local) {
      out.loss.total += chunk_loss[local];
      if (want_gradient) accum_total += chunk_accum[local];
    }
  }
  out.loss.mean = out.loss.total / static_cast<double>(num_batches);
  if (want_gradient) {
    out.gradient.noalias() = (accum_total + accum_total.transpose()) * points;
  }
  return out;
}

int class_members(const LabelVector& labels, const Batch& batch, int y) {
  int size = 0;
  for (const auto& e : batch.entries) {
    if (labels[static_cast<std::size_t>(e.index)] == y) size += e.count;
  }
  return size;
}

}  // namespace

double sc_batch_loss(const Matrix& points, const LabelVector& labels, const Batch& batch) {
  return local_batch_loss(points, labels, batch, -1);
}

double sc_class_batch_loss(const Matrix& points, const LabelVector& labels, const Batch& batch,
                           int y) {
  if (y < 0 || y >= labels.num_classes()) throw std::invalid_argument("SC: bad class");
  return local_batch_loss(points, labels, batch, y);
}

double s_att(const Matrix& points, const LabelVector& labels, const Batch& batch, int y) {
  check_batch(points, labels, batch);
  const int ny = class_members(labels, batch, y);
  if (ny < 2) throw std::invalid_argument("s_att: requires |B_y| >= 2");
  double sum = 0.0;
  for (const auto& a : batch.entries) {
    if (labels[static_cast<std::size_t>(a.index)] != y) continue;
    for (const auto& f : batch.entries) {
      if (labels[static_cast<std::size_t>(f.index)] != y) continue;
      const int pairs = a.count * (f.count - (a.index == f.index ? 1 : 0));
      sum += pairs * points.row(a.index).dot(points.row(f.index));
    }
  }
  return -sum / (static_cast<double>(ny) * (ny - 1));
}

double s_rep(const Matrix& points, const LabelVector& labels, const Batch& batch, int y) {
  check_batch(points, labels, batch);
  const int ny = class_members(labels, batch, y);
  const int b = batch.size();
  if (ny < 1) throw std::invalid_argument("s_rep: requires |B_y| >= 1");
  if (ny == b) return 0.0;
  double sum = 0.0;
  for (const auto& a : batch.entries) {
    if (labels[static_cast<std::size_t>(a.index)] != y) continue;
    for (const auto& f : batch.entries) {
      if (labels[static_cast<std::size_t>(f.index)] == y) continue;
      sum += a.count * f.count * points.row(a.index).dot(points.row(f.index));
    }
  }
  return sum / (static_cast<double>(ny) * (b - ny));
}

LossBreakdown sc_total_loss(const Matrix& points, const LabelVector& labels, int batch_size,
                            const ScOptions& options) {
  return sweep_all_batches(points, labels, batch_size, options, false).loss;
}

Matrix sc_gradient_total(const Matrix& points, const LabelVector& labels, int batch_size,
                         const ScOptions& options) {
  return sweep_all_batches(points, labels, batch_size, options, true).gradient;
}

ScEvaluation sc_total_loss_and_gradient(const Matrix& points, const LabelVector& labels,
                                        int batch_size, const ScOptions& options) {
  return sweep_all_batches(points, labels, batch_size, options, true);
}

ScEvaluation sc_batches_loss_and_gradient(const Matrix& points, const LabelVector& labels,
                                          const std::vector<Batch>& batches) {
  const auto n = points.rows();
  const GramTables tables(points);
  Matrix accum = Matrix::Zero(n, n);
  Workspace ws;
  ScEvaluation out;
  for (const auto& batch : batches) {
    check_batch(points, labels, batch);
    fill_slots(batch, labels, ws.slots);
    const double value = eval_slots(tables, ws, -1, &accum, 1.0);
    out.loss.components.push_back(value);
    out.loss.total += value;
  }
  out.loss.mean = batches.empty() ? 0.0 : out.loss.total / static_cast<double>(batches.size());
  out.gradient.noalias() = (accum + accum.transpose()) * points;
  return out;
}

}  // namespace simplexlab
