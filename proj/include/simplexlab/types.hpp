#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace simplexlab {

/// Row-major storage keeps each point contiguous, which is what every kernel
/// in this library iterates over.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Constraint { Sphere, Ball, Free };

const char* to_string(Constraint c);

/// Thrown when a run would exceed the configured batch enumeration budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed external input (CSV files). Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// An N x h configuration of representation points together with the set it
/// is constrained to.
///
/// Construction validates the invariants: N >= 1, h >= 1, radius > 0, and
/// every row on the sphere (relative 1e-9) or inside the ball, depending on
/// the constraint.
class PointConfig {
 public:
  static constexpr double kTolerance = 1e-9;

  PointConfig(Matrix points, Constraint constraint, double radius);

  /// Unconstrained configuration; radius is only used as a reference scale.
  static PointConfig free(Matrix points, double radius = 1.0);

  const Matrix& points() const noexcept { return points_; }
  Constraint constraint() const noexcept { return constraint_; }
  double radius() const noexcept { return radius_; }
  Eigen::Index size() const noexcept { return points_.rows(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }

 private:
  Matrix points_;
  Constraint constraint_;
  double radius_;
};

/// Class assignments y_n in [0, K). Files use 1-based labels; the library is
/// 0-based throughout.
class LabelVector {
 public:
  LabelVector(std::vector<int> labels, int num_classes);

  /// `per_class` instances of each of `num_classes` classes, in blocks.
  static LabelVector balanced(int num_classes, int per_class);

  const std::vector<int>& labels() const noexcept { return labels_; }
  int operator[](std::size_t n) const { return labels_[n]; }
  int num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<long>& counts() const noexcept { return counts_; }
  long count(int y) const { return counts_.at(static_cast<std::size_t>(y)); }

  /// N_y = N/K for every class (requires K | N).
  bool balanced() const noexcept;
  bool has_empty_class() const noexcept;

 private:
  std::vector<int> labels_;
  int num_classes_;
  std::vector<long> counts_;
};

/// Throws std::invalid_argument unless `labels` is balanced. `context` names
/// the caller in the message.
void require_balanced(const LabelVector& labels, const std::string& context);

}  // namespace simplexlab
