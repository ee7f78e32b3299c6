#include "simplexlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace simplexlab {

SimplexVertices build_simplex(int num_vertices, int dim, double radius) {
  const int k = num_vertices;
  if (k < 2) throw std::invalid_argument("simplex requires K >= 2");
  if (dim < 1) throw std::invalid_argument("simplex requires h >= 1");
  if (k > dim + 1) throw std::invalid_argument("simplex requires K <= h+1");
  if (!(radius > 0.0)) throw std::invalid_argument("simplex requires rho > 0");

  // Columns e_y - 1/K for y < K-1 span the (K-1)-dimensional complement of
  // the all-ones direction.
  Eigen::MatrixXd centered =
      Eigen::MatrixXd::Identity(k, k - 1) - Eigen::MatrixXd::Constant(k, k - 1, 1.0 / k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(centered);
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(k, k - 1);

  // Vertex y has coordinates basis^T (e_y - 1/K) = row y of basis, because the
  // basis is orthogonal to the ones vector.
  SimplexVertices out;
  out.radius = radius;
  out.vertices = Matrix::Zero(k, dim);
  for (int y = 0; y < k; ++y) {
    Vector row = basis.row(y).transpose();
    row *= radius / row.norm();
    out.vertices.row(y).head(k - 1) = row.transpose();
  }
  return out;
}

SimplexCheck verify_simplex(const Matrix& vertices, double radius, double tol) {
  if (vertices.rows() < 1) throw std::invalid_argument("verify_simplex: no vertices");
  if (!(tol > 0.0)) throw std::invalid_argument("verify_simplex: tol must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("verify_simplex: radius must be positive");

  const auto k = vertices.rows();
  SimplexCheck check;

  check.s1.name = "S1";
  check.s1.residual = vertices.colwise().sum().norm() / (static_cast<double>(k) * radius);

  check.s2.name = "S2";
  for (Eigen::Index y = 0; y < k; ++y) {
    check.s2.residual =
        std::max(check.s2.residual, std::abs(vertices.row(y).norm() - radius) / radius);
  }

  check.s3.name = "S3";
  const Matrix gram = vertices * vertices.transpose();
  double sum = 0.0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      sum += gram(i, j);
      ++pairs;
    }
  }
  const double r2 = radius * radius;
  check.fitted_inner_product = pairs > 0 ? sum / static_cast<double>(pairs) : 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      check.s3.residual =
          std::max(check.s3.residual, std::abs(gram(i, j) - check.fitted_inner_product) / r2);
    }
  }
  check.target_inner_product = k > 1 ? -r2 / static_cast<double>(k - 1) : 0.0;
  check.inner_product_deviation =
      std::abs(check.fitted_inner_product - check.target_inner_product) / r2;

  check.s1.pass = check.s1.residual <= tol;
  check.s2.pass = check.s2.residual <= tol;
  check.s3.pass = check.s3.residual <= tol;
  check.pass = check.s1.pass && check.s2.pass && check.s3.pass;
  return check;
}

void project_rows_to_sphere(Matrix& points, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_to_sphere: radius must be positive");
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const double norm = points.row(n).norm();
    if (!(norm > 0.0)) {
      throw std::invalid_argument("project_to_sphere: row " + std::to_string(n) +
                                  " is the zero vector");
    }
    if (norm != radius) points.row(n) *= radius / norm;
  }
}

void project_rows_to_ball(Matrix& points, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_to_ball: radius must be positive");
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const double norm = points.row(n).norm();
    if (norm > radius) points.row(n) *= radius / norm;
  }
}

PointConfig project_to_sphere(const Matrix& points, double radius) {
  Matrix out = points;
  project_rows_to_sphere(out, radius);
  return PointConfig(std::move(out), Constraint::Sphere, radius);
}

PointConfig project_to_ball(const Matrix& points, double radius) {
  Matrix out = points;
  project_rows_to_ball(out, radius);
  return PointConfig(std::move(out), Constraint::Ball, radius);
}

double cosine_similarity(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  const double nx = x.norm();
  const double ny = y.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) {
    throw std::invalid_argument("cosine_similarity: zero vector");
  }
  const double c = std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
  return 1.0 - std::acos(c) / std::numbers::pi;
}

double simplex_similarity(int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("simplex_similarity: K must be >= 2");
  return 1.0 - std::acos(-1.0 / (num_classes - 1)) / std::numbers::pi;
}

Matrix class_means(const Matrix& points, const LabelVector& labels) {
  if (static_cast<std::size_t>(points.rows()) != labels.size()) {
    throw std::invalid_argument("class_means: label count does not match number of points");
  }
  const int k = labels.num_classes();
  Matrix means = Matrix::Zero(k, points.cols());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    means.row(labels[n]) += points.row(static_cast<Eigen::Index>(n));
  }
  for (int y = 0; y < k; ++y) {
    const long count = labels.count(y);
    if (count == 0) {
      throw std::invalid_argument("class_means: class " + std::to_string(y + 1) + " is empty");
    }
    means.row(y) /= static_cast<double>(count);
  }
  return means;
}

PointConfig collapsed_config(const SimplexVertices& simplex, const LabelVector& labels) {
  if (labels.num_classes() > simplex.num_vertices()) {
    throw std::invalid_argument("collapsed_config: more classes than simplex vertices");
  }
  Matrix points(static_cast<Eigen::Index>(labels.size()), simplex.vertices.cols());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    points.row(static_cast<Eigen::Index>(n)) = simplex.vertices.row(labels[n]);
  }
  return PointConfig(std::move(points), Constraint::Sphere, simplex.radius);
}

PointConfig random_sphere_config(Eigen::Index n, Eigen::Index dim, double radius,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix points(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    do {
      for (Eigen::Index d = 0; d < dim; ++d) points(i, d) = normal(rng);
    } while (!(points.row(i).norm() > 0.0));
  }
  return project_to_sphere(points, radius);
}

}  // namespace simplexlab
