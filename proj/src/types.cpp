#include "simplexlab/types.hpp"

#include <algorithm>
#include <cmath>

namespace simplexlab {

const char* to_string(Constraint c) {
  switch (c) {
    case Constraint::Sphere:
      return "sphere";
    case Constraint::Ball:
      return "ball";
    case Constraint::Free:
      return "free";
  }
  return "unknown";
}

PointConfig::PointConfig(Matrix points, Constraint constraint, double radius)
    : points_(std::move(points)), constraint_(constraint), radius_(radius) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw std::invalid_argument("point configuration must have N >= 1 and h >= 1");
  }
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw std::invalid_argument("radius must be positive and finite");
  }
  for (Eigen::Index n = 0; n < points_.rows(); ++n) {
    const double norm = points_.row(n).norm();
    if (!std::isfinite(norm)) {
      throw std::invalid_argument("point " + std::to_string(n) + " is not finite");
    }
    if (constraint_ == Constraint::Sphere &&
        std::abs(norm - radius_) > kTolerance * radius_) {
      throw std::invalid_argument("point " + std::to_string(n) +
                                  " is not on the sphere of the given radius");
    }
    if (constraint_ == Constraint::Ball && norm > radius_ * (1.0 + kTolerance)) {
      throw std::invalid_argument("point " + std::to_string(n) +
                                  " lies outside the ball of the given radius");
    }
  }
}

PointConfig PointConfig::free(Matrix points, double radius) {
  return PointConfig(std::move(points), Constraint::Free, radius);
}

LabelVector::LabelVector(std::vector<int> labels, int num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes_ < 1) {
    throw std::invalid_argument("number of classes must be >= 1");
  }
  counts_.assign(static_cast<std::size_t>(num_classes_), 0);
  for (std::size_t n = 0; n < labels_.size(); ++n) {
    const int y = labels_[n];
    if (y < 0 || y >= num_classes_) {
      throw std::invalid_argument("label at position " + std::to_string(n) +
                                  " is outside [0, K)");
    }
    ++counts_[static_cast<std::size_t>(y)];
  }
}

LabelVector LabelVector::balanced(int num_classes, int per_class) {
  if (num_classes < 1 || per_class < 1) {
    throw std::invalid_argument("balanced labels need K >= 1 and N/K >= 1");
  }
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(per_class));
  for (int y = 0; y < num_classes; ++y) {
    labels.insert(labels.end(), static_cast<std::size_t>(per_class), y);
  }
  return LabelVector(std::move(labels), num_classes);
}

bool LabelVector::balanced() const noexcept {
  const auto n = static_cast<long>(labels_.size());
  if (n == 0 || n % num_classes_ != 0) return false;
  const long per_class = n / num_classes_;
  return std::all_of(counts_.begin(), counts_.end(),
                     [per_class](long c) { return c == per_class; });
}

bool LabelVector::has_empty_class() const noexcept {
  return std::any_of(counts_.begin(), counts_.end(), [](long c) { return c == 0; });
}

void require_balanced(const LabelVector& labels, const std::string& context) {
  if (!labels.balanced()) {
    throw std::invalid_argument(context +
                                ": label configuration must be balanced (N_y = N/K for "
                                "every class); the bound is only proven under that assumption");
  }
}

}  // namespace simplexlab
