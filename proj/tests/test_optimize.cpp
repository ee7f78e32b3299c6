#include <doctest.h>

#include "simplexlab/bounds.hpp"
#include "simplexlab/diagnostics.hpp"
#include "simplexlab/geometry.hpp"
#include "simplexlab/losses.hpp"
#include "simplexlab/optimize.hpp"
#include "support.hpp"

#include <cmath>

using namespace simplexlab;

TEST_CASE("OptimConfig validation and schedules") {
  OptimConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.steps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.lr0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.decay = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.decay = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  cfg.lr0 = 0.5;
  CHECK(cfg.learning_rate(100) == 0.5);
  cfg.schedule = Schedule::Exponential;
  cfg.decay = 0.9;
  CHECK(cfg.learning_rate(0) == 0.5);
  CHECK(cfg.learning_rate(2) == doctest::Approx(0.405));
}

TEST_CASE("optimize_ce reaches the regularised bound") {
  const LabelVector y = LabelVector::balanced(3, 100);
  const double l2 = 5e-3;
  std::mt19937_64 rng(1);
  const Matrix z0 = 0.5 * random_sphere_config(300, 2, 1.0, 0).points();
  const Matrix w0 = oracle::random_gaussian(3, 2, 0.1, rng);
  OptimConfig cfg;
  cfg.steps = 5000;
  cfg.lr0 = 1.0;
  cfg.momentum = 0.9;
  cfg.log_every = 250;
  const auto traj = optimize_ce(PointConfig(z0, Constraint::Ball, 1.0), w0, y, l2, cfg);
  const double bound = ce_bound_l2(3, 1.0, l2).value;
  CHECK(std::abs(traj.final_loss - bound) <= 1e-4 * bound);
  CHECK(traj.final_loss >= bound - 1e-10);
  const double r = solve_r_w(3, 1.0, l2);
  for (Eigen::Index c = 0; c < 3; ++c) CHECK(std::abs(traj.weights->row(c).norm() - r) <= 1e-3);
  for (const auto& rec : traj.records) CHECK(rec.loss >= bound - 1e-10);
  for (Eigen::Index n = 0; n < traj.points.rows(); ++n) {
    CHECK(traj.points.row(n).norm() <= 1.0 * (1 + 1e-9));
  }
  CHECK(equality_report_ce(PointConfig(traj.points, Constraint::Ball, 1.0), *traj.weights, y, 1e-3).pass);
}

TEST_CASE("optimize_ce with lambda = 0 decreases monotonically for a small step") {
  const LabelVector y = LabelVector::balanced(3, 10);
  std::mt19937_64 rng(2);
  const Matrix z0 = oracle::random_ball(30, 2, 1.0, rng);
  const Matrix w0 = oracle::random_gaussian(3, 2, 0.5, rng);
  OptimConfig cfg;
  cfg.steps = 1000;
  cfg.lr0 = 1e-3;
  cfg.momentum = 0.0;
  cfg.log_every = 1;
  const auto traj = optimize_ce(PointConfig(z0, Constraint::Ball, 1.0), w0, y, 0.0, cfg);
  REQUIRE(traj.records.size() == 1001);
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    CHECK(traj.records[i].loss <= traj.records[i - 1].loss + 1e-15);
  }
  CHECK(std::isnan(traj.records.front().bound_gap));
}

TEST_CASE("optimize_ce warns on unbalanced labels") {
  const LabelVector y({0, 0, 1}, 2);
  Matrix z(3, 2);
  z << 0.1, 0, 0, 0.1, -0.1, 0;
  OptimConfig cfg;
  cfg.steps = 5;
  const auto traj = optimize_ce(PointConfig(z, Constraint::Ball, 1.0), Matrix::Zero(2, 2), y, 0.1, cfg);
  CHECK_FALSE(traj.warnings.empty());
}

TEST_CASE("optimize_sc_full is stationary at the collapsed simplex") {
  const auto s = build_simplex(3, 2, 1.0);
  const LabelVector y = LabelVector::balanced(3, 2);
  const PointConfig z = collapsed_config(s, y);
  OptimConfig cfg;
  cfg.steps = 100;
  cfg.lr0 = 1.0;
  cfg.log_every = 10;
  const auto traj = optimize_sc_full(z, y, 4, cfg);
  CHECK(std::abs(traj.records.back().loss - traj.records.front().loss) < 1e-10);
  CHECK(std::abs(traj.records.front().bound_gap) < 1e-12);
}

TEST_CASE("optimize_sc_full with K=2 reaches antipodal collapse") {
  const LabelVector y = LabelVector::balanced(2, 2);
  OptimConfig cfg;
  cfg.steps = 400;
  cfg.lr0 = 0.5;
  cfg.log_every = 20;
  const auto traj = optimize_sc_full(random_sphere_config(4, 2, 1.0, 5), y, 3, cfg);
  const Matrix mu = class_means(traj.points, y);
  CHECK(mu.row(0).dot(mu.row(1)) == doctest::Approx(-1.0).epsilon(1e-6));
  const double bound = *sc_bound(3, 1.0, y).mean;
  for (const auto& rec : traj.records) {
    CHECK(rec.loss >= bound - 1e-12);
    CHECK(rec.bound_gap == doctest::Approx(rec.loss - bound));
  }
  for (Eigen::Index n = 0; n < 4; ++n) CHECK(std::abs(traj.points.row(n).norm() - 1.0) < 1e-9);
}

TEST_CASE("optimize_sc_full rejects inputs beyond the budget") {
  const LabelVector y = LabelVector::balanced(3, 4);
  OptimConfig cfg;
  cfg.budget = 100;
  CHECK_THROWS_AS(optimize_sc_full(random_sphere_config(12, 2, 1.0, 0), y, 9, cfg), BudgetExceeded);
  cfg.budget = 10'000'000;
  CHECK_THROWS_AS(optimize_sc_full(PointConfig::free(Matrix::Ones(12, 2)), y, 9, cfg),
                  std::invalid_argument);
}

TEST_CASE("optimize_sc_sgd is deterministic in its seed") {
  const LabelVector y = LabelVector::balanced(2, 3);
  const PointConfig z0 = random_sphere_config(6, 2, 1.0, 1);
  OptimConfig cfg;
  cfg.steps = 300;
  cfg.lr0 = 0.05;
  cfg.seed = 7;
  cfg.log_every = 10;
  const auto a = optimize_sc_sgd(z0, y, 4, 2, cfg);
  const auto b = optimize_sc_sgd(z0, y, 4, 2, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].loss == b.records[i].loss);
  CHECK(a.points == b.points);
  cfg.seed = 8;
  CHECK(optimize_sc_sgd(z0, y, 4, 2, cfg).points != a.points);
}

TEST_CASE("full-sweep sampling reproduces the full-gradient step") {
  const LabelVector y = LabelVector::balanced(2, 3);
  const PointConfig z0 = random_sphere_config(6, 3, 1.0, 2);
  OptimConfig cfg;
  cfg.steps = 25;
  cfg.lr0 = 0.3;
  cfg.log_every = 5;
  const auto full = optimize_sc_full(z0, y, 4, cfg);
  const auto sweep = optimize_sc_sgd(z0, y, 4, 1, cfg, BatchSampling::FullSweep);
  CHECK((full.points - sweep.points).cwiseAbs().maxCoeff() < 1e-12);
  for (std::size_t i = 0; i < full.records.size(); ++i) {
    CHECK(full.records[i].loss == doctest::Approx(sweep.records[i].loss).epsilon(1e-12));
  }
}

TEST_CASE("optimize_sc_sgd on the 12-point toy gets within 5e-3 of the bound") {
  const LabelVector y = LabelVector::balanced(3, 4);
  OptimConfig cfg;
  cfg.steps = 100000;
  cfg.lr0 = 0.01;
  cfg.schedule = Schedule::Exponential;
  cfg.decay = 0.9999;
  cfg.seed = 0;
  cfg.log_every = 10000;
  const auto traj = optimize_sc_sgd(random_sphere_config(12, 2, 1.0, 0), y, 9, 1, cfg);
  const double exact = sc_total_loss(traj.points, y, 9).mean;
  const double bound = *sc_bound(9, 1.0, y).mean;
  CHECK(exact >= bound - 1e-9);
  CHECK(exact - bound <= 5e-3);
  CHECK(traj.final_loss == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("optimize_single_batch examples") {
  OptimConfig cfg;
  cfg.steps = 3000;
  cfg.lr0 = 0.5;
  cfg.log_every = 3000;
  for (double rho : {1.0, 2.0}) {
    cfg.radius = rho;
    const auto one = optimize_single_batch({9}, 2, cfg);
    CHECK(one.loss == doctest::Approx(9.0 * std::log(8.0)).epsilon(1e-8));
    CHECK(one.points.rows() == 9);
  }
  cfg.radius = 1.0;
  const auto distinct = optimize_single_batch({1, 1, 1, 1, 1, 1, 1, 1, 1}, 2, cfg);
  CHECK(distinct.loss == 0.0);
  CHECK_THROWS_AS(optimize_single_batch({1}, 2, cfg), std::invalid_argument);
}

TEST_CASE("single-batch minimiser beats random configurations") {
  OptimConfig cfg;
  cfg.steps = 3000;
  cfg.lr0 = 0.5;
  cfg.log_every = 3000;
  for (const std::vector<int>& mult : {std::vector<int>{5, 4}, std::vector<int>{3, 3, 3}}) {
    const auto res = optimize_single_batch(mult, 2, cfg);
    std::vector<int> seq(9);
    for (int i = 0; i < 9; ++i) seq[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(21);
    double best = INFINITY;
    for (int t = 0; t < 10000; ++t) {
      best = std::min(best, oracle::naive_sc_batch(oracle::random_sphere(9, 2, 1.0, rng), res.labels, seq));
    }
    CHECK(res.loss <= best);
    CHECK(res.loss == doctest::Approx(oracle::naive_sc_batch(res.points, res.labels, seq)).epsilon(1e-12));
    // Every class collapses to a single cluster.
    const Matrix mu = class_means(res.points, res.labels);
    for (Eigen::Index n = 0; n < 9; ++n) {
      CHECK((res.points.row(n) - mu.row(res.labels[static_cast<std::size_t>(n)])).norm() < 1e-4);
    }
  }
  // Antipodal clusters for two classes.
  const auto two = optimize_single_batch({5, 4}, 2, cfg);
  const Matrix mu = class_means(two.points, two.labels);
  CHECK(mu.row(0).normalized().dot(mu.row(1).normalized()) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("single-batch loss is symmetric under relabelling") {
  OptimConfig cfg;
  cfg.steps = 3000;
  cfg.lr0 = 0.5;
  cfg.log_every = 3000;
  const double a = optimize_single_batch({2, 3, 4}, 2, cfg).loss;
  const double b = optimize_single_batch({4, 2, 3}, 2, cfg).loss;
  const double c = optimize_single_batch({3, 4, 2}, 2, cfg).loss;
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
  CHECK(a == doctest::Approx(c).epsilon(1e-6));
}
