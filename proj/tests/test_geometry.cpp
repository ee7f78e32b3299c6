#include <doctest.h>

#include "simplexlab/geometry.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace simplexlab;

TEST_CASE("build_simplex K=2 h=1 is an antipodal pair") {
  const auto s = build_simplex(2, 1, 1.0);
  REQUIRE(s.vertices.rows() == 2);
  REQUIRE(s.vertices.cols() == 1);
  CHECK(std::abs(std::abs(s.vertices(0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(s.vertices(0, 0) + s.vertices(1, 0)) < 1e-12);
  const auto check = verify_simplex(s.vertices, 1.0, 1e-10);
  CHECK(check.pass);
  CHECK(check.fitted_inner_product == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("build_simplex K=3 h=2 gives inner products -1/2") {
  const auto s = build_simplex(3, 2, 1.0);
  const Matrix g = s.vertices * s.vertices.transpose();
  for (int i = 0; i < 3; ++i) {
    CHECK(g(i, i) == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(g(i, j) + 0.5) < 1e-12);
  }
}

TEST_CASE("build_simplex K=4 h=3 rho=2 gives inner products -4/3") {
  const auto s = build_simplex(4, 3, 2.0);
  const Matrix g = s.vertices * s.vertices.transpose();
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) CHECK(std::abs(g(i, j) + 4.0 / 3.0) < 1e-12);
  }
}

TEST_CASE("build_simplex rejects invalid arguments") {
  CHECK_THROWS_WITH_AS(build_simplex(5, 3, 1.0), "simplex requires K <= h+1", std::invalid_argument);
  CHECK_THROWS_AS(build_simplex(1, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_simplex(3, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_simplex(3, 2, -1.0), std::invalid_argument);
}

TEST_CASE("build_simplex verifies for all 2 <= K <= h+1 <= 65") {
  for (double rho : {0.1, 1.0, std::sqrt(10.0)}) {
    for (int h = 1; h <= 64; ++h) {
      for (int k = 2; k <= h + 1; k += (h > 16 ? 7 : 1)) {
        const auto s = build_simplex(k, h, rho);
        const auto check = verify_simplex(s.vertices, rho, 1e-10);
        INFO("K=" << k << " h=" << h << " rho=" << rho);
        REQUIRE(check.pass);
        CHECK(std::abs(check.fitted_inner_product + rho * rho / (k - 1)) <= 1e-10 * rho * rho);
      }
      // Always include the largest admissible K.
      const auto s = build_simplex(h + 1, h, rho);
      REQUIRE(verify_simplex(s.vertices, rho, 1e-10).pass);
    }
  }
}

TEST_CASE("verify_simplex detects a non-centred configuration") {
  Matrix v(3, 2);
  v << 1, 0, 0, 1, -1, 0;
  const auto check = verify_simplex(v, 1.0, 1e-9);
  CHECK_FALSE(check.s1.pass);
  CHECK(check.s1.residual == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(check.pass);
}

TEST_CASE("verify_simplex accepts an antipodal pair") {
  Matrix v(2, 2);
  v << 1, 0, -1, 0;
  const auto check = verify_simplex(v, 1.0, 1e-9);
  CHECK(check.pass);
  CHECK(check.fitted_inner_product == doctest::Approx(-1.0));
  CHECK(check.target_inner_product == doctest::Approx(-1.0));
  CHECK(check.inner_product_deviation == doctest::Approx(0.0));
}

TEST_CASE("project_to_sphere") {
  Matrix z(1, 2);
  z << 3, 4;
  const auto p = project_to_sphere(z, 1.0);
  CHECK(p.points()(0, 0) == doctest::Approx(0.6));
  CHECK(p.points()(0, 1) == doctest::Approx(0.8));
  CHECK(p.constraint() == Constraint::Sphere);

  SUBCASE("idempotent") {
    std::mt19937_64 rng(3);
    const Matrix r = oracle::random_gaussian(20, 5, 3.0, rng);
    const Matrix once = project_to_sphere(r, 2.0).points();
    const Matrix twice = project_to_sphere(once, 2.0).points();
    for (Eigen::Index i = 0; i < once.size(); ++i) {
      CHECK(std::abs(once(i) - twice(i)) <= std::abs(once(i)) * 1e-15);
    }
  }
  SUBCASE("zero row rejected") {
    Matrix zero = Matrix::Zero(1, 2);
    CHECK_THROWS_AS(project_to_sphere(zero, 1.0), std::invalid_argument);
  }
}

TEST_CASE("project_to_ball") {
  Matrix z(3, 2);
  z << 3, 4, 0.1, 0.2, 0, 0;
  const auto p = project_to_ball(z, 1.0);
  CHECK(p.points()(0, 0) == doctest::Approx(0.6));
  CHECK(p.points()(0, 1) == doctest::Approx(0.8));
  CHECK(p.points()(1, 0) == 0.1);
  CHECK(p.points()(1, 1) == 0.2);
  CHECK(p.points()(2, 0) == 0.0);
  CHECK(p.points()(2, 1) == 0.0);
  const Matrix again = project_to_ball(p.points(), 1.0).points();
  CHECK((again - p.points()).cwiseAbs().maxCoeff() <= 2.3e-16);
}

TEST_CASE("cosine_similarity") {
  Vector x(3);
  x << 1, -2, 0.5;
  CHECK(cosine_similarity(x, x) == doctest::Approx(1.0));
  CHECK(cosine_similarity(x, -x) == doctest::Approx(0.0));
  const auto s = build_simplex(3, 4, 1.0);
  CHECK(cosine_similarity(s.vertices.row(0).transpose(), s.vertices.row(1).transpose()) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  Vector zero = Vector::Zero(3);
  CHECK_THROWS_AS(cosine_similarity(zero, x), std::invalid_argument);

  SUBCASE("symmetric, scale invariant and in [0,1]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int t = 0; t < 200; ++t) {
      const Matrix m = oracle::random_gaussian(2, 4, 1.0, rng);
      const Vector a = m.row(0).transpose();
      const Vector b = m.row(1).transpose();
      const double g = cosine_similarity(a, b);
      CHECK(g >= 0.0);
      CHECK(g <= 1.0);
      CHECK(g == doctest::Approx(cosine_similarity(b, a)).epsilon(1e-14));
      CHECK(g == doctest::Approx(cosine_similarity(scale(rng) * a, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("simplex_similarity") {
  CHECK(simplex_similarity(3) == doctest::Approx(1.0 / 3.0));
  CHECK(simplex_similarity(10) == doctest::Approx(1.0 - std::acos(-1.0 / 9.0) / std::numbers::pi));
  CHECK(simplex_similarity(10) == doctest::Approx(0.4647).epsilon(1e-4));
  CHECK(simplex_similarity(2) == doctest::Approx(0.0));
}

TEST_CASE("class_means") {
  Matrix z(2, 2);
  z << 1, 0, 0, 1;
  const Matrix mu = class_means(z, LabelVector({0, 0}, 1));
  CHECK(mu(0, 0) == doctest::Approx(0.5));
  CHECK(mu(0, 1) == doctest::Approx(0.5));

  const auto s = build_simplex(3, 2, 1.0);
  const auto labels = LabelVector::balanced(3, 4);
  const auto collapsed = collapsed_config(s, labels);
  const Matrix means = class_means(collapsed.points(), labels);
  CHECK((means - s.vertices).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(class_means(z, LabelVector({0, 0}, 2)), std::invalid_argument);
}

TEST_CASE("random_sphere_config is deterministic and on the sphere") {
  const auto a = random_sphere_config(50, 3, 2.5, 42);
  const auto b = random_sphere_config(50, 3, 2.5, 42);
  const auto c = random_sphere_config(50, 3, 2.5, 43);
  CHECK(a.points() == b.points());
  CHECK(a.points() != c.points());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a.points().row(i).norm() - 2.5) < 1e-12);
  }
}

TEST_CASE("PointConfig and LabelVector invariants") {
  Matrix z(2, 2);
  z << 1, 0, 0, 2;
  CHECK_THROWS_AS(PointConfig(z, Constraint::Sphere, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PointConfig(z, Constraint::Ball, 1.0), std::invalid_argument);
  CHECK_NOTHROW(PointConfig(z, Constraint::Ball, 2.0));
  CHECK_NOTHROW(PointConfig(z, Constraint::Free, 1.0));
  CHECK_THROWS_AS(PointConfig(z, Constraint::Free, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PointConfig(Matrix(0, 2), Constraint::Free, 1.0), std::invalid_argument);

  const LabelVector y({0, 1, 1, 0}, 2);
  CHECK(y.balanced());
  CHECK(y.count(0) == 2);
  CHECK_FALSE(LabelVector({0, 1, 1}, 2).balanced());
  CHECK(LabelVector({0, 2}, 3).has_empty_class());
  CHECK_THROWS_AS(LabelVector({0, 3}, 3), std::invalid_argument);
  CHECK_THROWS_AS(LabelVector({-1}, 3), std::invalid_argument);
  CHECK_THROWS_AS(require_balanced(LabelVector({0, 1, 1}, 2), "test"), std::invalid_argument);
}
