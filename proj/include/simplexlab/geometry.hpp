#pragma once

#include "simplexlab/types.hpp"

#include <cstdint>

namespace simplexlab {

/// Vertices of a regular simplex inscribed in the sphere of radius `radius`,
/// one vertex per row.
struct SimplexVertices {
  Matrix vertices;
  double radius = 1.0;

  Eigen::Index num_vertices() const noexcept { return vertices.rows(); }
};

struct ConditionCheck {
  std::string name;
  double residual = 0.0;
  bool pass = false;
};

/// Outcome of checking S1 (zero sum), S2 (equal norms) and S3 (equal pairwise
/// inner products). Residuals are relative: S1 to K*rho, S2 to rho, S3 to
/// rho^2.
struct SimplexCheck {
  ConditionCheck s1;
  ConditionCheck s2;
  ConditionCheck s3;
  double fitted_inner_product = 0.0;  ///< mean of <z_i, z_j>, i < j
  double target_inner_product = 0.0;  ///< -rho^2 / (K - 1)
  double inner_product_deviation = 0.0;
  bool pass = false;
};

/// Builds K vertices in R^h from the centered standard basis of R^K.
/// Requires 2 <= K <= h + 1 and radius > 0.
SimplexVertices build_simplex(int num_vertices, int dim, double radius);

SimplexCheck verify_simplex(const Matrix& vertices, double radius, double tol);

/// Rescales every row to norm `radius`. Rejects zero rows.
PointConfig project_to_sphere(const Matrix& points, double radius);
/// Rescales rows outside the ball onto its boundary.
PointConfig project_to_ball(const Matrix& points, double radius);

/// In-place variants used inside optimisation loops.
void project_rows_to_sphere(Matrix& points, double radius);
void project_rows_to_ball(Matrix& points, double radius);

/// 1 - arccos(<x/|x|, y/|y|>) / pi, with the cosine clamped to [-1, 1].
double cosine_similarity(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

/// Similarity between two vertices of a regular K-simplex.
double simplex_similarity(int num_classes);

/// Row y is the mean of the points labelled y. Every class must be nonempty.
Matrix class_means(const Matrix& points, const LabelVector& labels);

/// z_n = vertex y_n for every n.
PointConfig collapsed_config(const SimplexVertices& simplex, const LabelVector& labels);

/// Standard Gaussian rows projected onto the sphere, deterministic in `seed`.
PointConfig random_sphere_config(Eigen::Index n, Eigen::Index dim, double radius,
                                 std::uint64_t seed);

}  // namespace simplexlab
