#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "simplexlab/bounds.hpp"
#include "simplexlab/combinatorics.hpp"
#include "simplexlab/diagnostics.hpp"
#include "simplexlab/geometry.hpp"
#include "simplexlab/losses.hpp"
#include "simplexlab/optimize.hpp"

#include <algorithm>

namespace py = pybind11;
using namespace simplexlab;

namespace {

// Python callers pass plain 0-based label lists; K defaults to max label + 1.
LabelVector make_labels(const std::vector<int>& labels, int num_classes) {
  if (num_classes <= 0) {
    num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  }
  return LabelVector(labels, num_classes);
}

py::int_ to_pyint(Count c) { return py::int_(py::str(to_string(c))); }

Count from_pyint(const py::int_& v) {
  const std::string s = py::str(v);
  if (!s.empty() && s[0] == '-') throw std::invalid_argument("count must be nonnegative");
  Count c = 0;
  for (char ch : s) c = c * 10 + static_cast<Count>(ch - '0');
  return c;
}

Constraint parse_constraint(const std::string& s) {
  if (s == "sphere") return Constraint::Sphere;
  if (s == "ball") return Constraint::Ball;
  if (s == "free") return Constraint::Free;
  throw std::invalid_argument("constraint must be 'sphere', 'ball' or 'free'");
}

py::dict bound_dict(const BoundReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["value"] = r.value;
  d["total"] = r.total ? py::object(py::float_(*r.total)) : py::object(py::none());
  d["mean"] = r.mean ? py::object(py::float_(*r.mean)) : py::object(py::none());
  py::dict inputs;
  for (const auto& [k, v] : r.inputs) inputs[py::str(k)] = v;
  d["inputs"] = inputs;
  d["tight_capable"] = r.tight_capable;
  d["note"] = r.note;
  return d;
}

py::dict condition_dict(const ConditionCheck& c) {
  py::dict d;
  d["name"] = c.name;
  d["residual"] = c.residual;
  d["pass"] = c.pass;
  return d;
}

py::dict simplex_dict(const SimplexCheck& s) {
  py::dict d;
  d["s1"] = condition_dict(s.s1);
  d["s2"] = condition_dict(s.s2);
  d["s3"] = condition_dict(s.s3);
  d["fitted_inner_product"] = s.fitted_inner_product;
  d["target_inner_product"] = s.target_inner_product;
  d["inner_product_deviation"] = s.inner_product_deviation;
  d["pass"] = s.pass;
  return d;
}

py::dict equality_dict(const EqualityReport& r) {
  py::dict d;
  py::list conds;
  for (const auto& c : r.conditions) conds.append(condition_dict(c));
  d["conditions"] = conds;
  d["simplex"] = simplex_dict(r.simplex);
  d["tol"] = r.tol;
  d["rho_w"] = r.rho_w ? py::object(py::float_(*r.rho_w)) : py::object(py::none());
  d["pass"] = r.pass;
  return d;
}

py::dict summary_dict(const Summary& s) {
  py::dict d;
  d["min"] = s.min;
  d["median"] = s.median;
  d["max"] = s.max;
  return d;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  py::list records;
  for (const auto& r : t.records) {
    py::dict rec;
    rec["iter"] = r.iter;
    rec["loss"] = r.loss;
    rec["bound_gap"] = r.bound_gap;
    rec["grad_norm"] = r.grad_norm;
    records.append(rec);
  }
  d["records"] = records;
  d["points"] = t.points;
  d["weights"] = t.weights ? py::cast(*t.weights) : py::object(py::none());
  d["steps_taken"] = t.steps_taken;
  d["stopped_early"] = t.stopped_early;
  d["final_loss"] = t.final_loss;
  d["warnings"] = t.warnings;
  return d;
}

OptimConfig make_config(int steps, double lr, const std::string& schedule, double decay,
                        double momentum, std::uint64_t seed, double radius, int log_every,
                        double grad_tol, int threads) {
  OptimConfig cfg;
  cfg.steps = steps;
  cfg.lr0 = lr;
  if (schedule == "constant") {
    cfg.schedule = Schedule::Constant;
  } else if (schedule == "exponential") {
    cfg.schedule = Schedule::Exponential;
  } else {
    throw std::invalid_argument("schedule must be 'constant' or 'exponential'");
  }
  cfg.decay = decay;
  cfg.momentum = momentum;
  cfg.seed = seed;
  cfg.radius = radius;
  cfg.log_every = log_every;
  cfg.grad_tol = grad_tol;
  cfg.threads = threads;
  cfg.validate();
  return cfg;
}

#define OPTIM_ARGS                                                                          \
  py::arg("steps") = 1000, py::arg("lr") = 0.1, py::arg("schedule") = "constant",          \
  py::arg("decay") = 1.0, py::arg("momentum") = 0.9, py::arg("seed") = 0,                  \
  py::arg("radius") = 1.0, py::arg("log_every") = 100, py::arg("grad_tol") = 0.0,          \
  py::arg("threads") = 0

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lower bounds and optimisers for CE and SC losses on free representations";

  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  // Geometry.
  m.def("build_simplex", [](int k, int h, double rho) { return build_simplex(k, h, rho).vertices; },
        py::arg("k"), py::arg("h"), py::arg("rho") = 1.0);
  m.def("verify_simplex",
        [](const Matrix& v, double rho, double tol) { return simplex_dict(verify_simplex(v, rho, tol)); },
        py::arg("vertices"), py::arg("rho"), py::arg("tol") = 1e-9);
  m.def("project_to_sphere", [](const Matrix& z, double rho) { return project_to_sphere(z, rho).points(); },
        py::arg("points"), py::arg("rho") = 1.0);
  m.def("project_to_ball", [](const Matrix& z, double rho) { return project_to_ball(z, rho).points(); },
        py::arg("points"), py::arg("rho") = 1.0);
  m.def("cosine_similarity",
        [](const Vector& x, const Vector& y) { return cosine_similarity(x, y); });
  m.def("simplex_similarity", &simplex_similarity, py::arg("k"));
  m.def("class_means",
        [](const Matrix& z, const std::vector<int>& y, int k) { return class_means(z, make_labels(y, k)); },
        py::arg("points"), py::arg("labels"), py::arg("num_classes") = 0);
  m.def("collapsed_config",
        [](int k, int h, double rho, const std::vector<int>& y) {
          return collapsed_config(build_simplex(k, h, rho), make_labels(y, k)).points();
        },
        py::arg("k"), py::arg("h"), py::arg("rho"), py::arg("labels"));
  m.def("random_sphere_config",
        [](Eigen::Index n, Eigen::Index h, double rho, std::uint64_t seed) {
          return random_sphere_config(n, h, rho, seed).points();
        },
        py::arg("n"), py::arg("h"), py::arg("rho") = 1.0, py::arg("seed") = 0);

  // Combinatorics.
  m.def("multichoose", [](long n, long k) { return to_pyint(multichoose(n, k)); }, py::arg("n"),
        py::arg("m"));
  m.def("unrank_batch",
        [](int n, int b, const py::int_& rank) { return unrank_batch(n, b, from_pyint(rank)); },
        py::arg("n"), py::arg("b"), py::arg("rank"));
  m.def("rank_batch",
        [](int n, const std::vector<int>& seq) { return to_pyint(rank_batch(n, seq)); },
        py::arg("n"), py::arg("sequence"));
  m.def("batches",
        [](int n, int b) {
          std::vector<std::vector<int>> out;
          for (BatchEnumerator it(n, b); !it.done(); it.advance()) out.push_back(it.sequence());
          return out;
        },
        py::arg("n"), py::arg("b"), "All size-b multisets over range(n) in canonical order.");
  m.def("census",
        [](int n, int b, const std::vector<int>& y, int k) {
          const auto c = census(n, b, make_labels(y, k));
          py::list by_class;
          for (const auto& row : c.by_class_level) {
            py::list r;
            for (Count v : row) r.append(to_pyint(v));
            by_class.append(r);
          }
          py::list ml;
          for (Count v : c.m) ml.append(to_pyint(v));
          py::dict d;
          d["by_class_level"] = by_class;
          d["m"] = ml;
          d["total"] = to_pyint(c.total);
          return d;
        },
        py::arg("n"), py::arg("b"), py::arg("labels"), py::arg("num_classes") = 0);
  m.def("k_factor",
        [](const std::vector<int>& y, int cls, int level, int b, int k) {
          return k_factor(make_labels(y, k), cls, level, b);
        },
        py::arg("labels"), py::arg("y"), py::arg("level"), py::arg("b"), py::arg("num_classes") = 0);

  // Losses.
  m.def("ce_loss",
        [](const Matrix& z, const Matrix& w, const std::vector<int>& y) {
          return ce_loss(z, w, make_labels(y, static_cast<int>(w.rows()))).mean;
        },
        py::arg("points"), py::arg("weights"), py::arg("labels"), "Mean cross-entropy loss.");
  m.def("ce_gradients",
        [](const Matrix& z, const Matrix& w, const std::vector<int>& y, double l2) {
          const auto g = ce_gradients(z, w, make_labels(y, static_cast<int>(w.rows())), l2);
          return py::make_tuple(g.loss, g.d_points, g.d_weights);
        },
        py::arg("points"), py::arg("weights"), py::arg("labels"), py::arg("l2") = 0.0);
  m.def("sc_batch_loss",
        [](const Matrix& z, const std::vector<int>& y, const std::vector<int>& seq, int k) {
          std::vector<int> sorted = seq;
          std::sort(sorted.begin(), sorted.end());
          return sc_batch_loss(z, make_labels(y, k), Batch::from_sequence(sorted));
        },
        py::arg("points"), py::arg("labels"), py::arg("batch"), py::arg("num_classes") = 0);
  m.def("sc_total_loss",
        [](const Matrix& z, const std::vector<int>& y, int b, int k, std::uint64_t budget, int threads) {
          ScOptions opt;
          opt.budget = budget;
          opt.threads = threads;
          const auto l = sc_total_loss(z, make_labels(y, k), b, opt);
          return py::make_tuple(l.total, l.mean);
        },
        py::arg("points"), py::arg("labels"), py::arg("b"), py::arg("num_classes") = 0,
        py::arg("budget") = 10'000'000, py::arg("threads") = 0,
        "Returns (total, mean) over every size-b multiset batch.");
  m.def("sc_gradient",
        [](const Matrix& z, const std::vector<int>& y, int b, int k, std::uint64_t budget, int threads) {
          ScOptions opt;
          opt.budget = budget;
          opt.threads = threads;
          return sc_gradient_total(z, make_labels(y, k), b, opt);
        },
        py::arg("points"), py::arg("labels"), py::arg("b"), py::arg("num_classes") = 0,
        py::arg("budget") = 10'000'000, py::arg("threads") = 0);

  // Bounds.
  m.def("ce_bound_frobenius",
        [](int k, double rho, double frob, int h) { return bound_dict(ce_bound_frobenius(k, rho, frob, h)); },
        py::arg("k"), py::arg("rho"), py::arg("frobenius_norm"), py::arg("h") = 0);
  m.def("ce_bound_rw", [](int k, double rho, double rw, int h) { return bound_dict(ce_bound_rw(k, rho, rw, h)); },
        py::arg("k"), py::arg("rho"), py::arg("r_w"), py::arg("h") = 0);
  m.def("ce_bound_l2", [](int k, double rho, double l2, int h) { return bound_dict(ce_bound_l2(k, rho, l2, h)); },
        py::arg("k"), py::arg("rho"), py::arg("l2"), py::arg("h") = 0);
  m.def("solve_r_w", [](int k, double rho, double l2) { return solve_r_w(k, rho, l2); }, py::arg("k"),
        py::arg("rho"), py::arg("l2"));
  m.def("sc_bound",
        [](int b, double rho, const std::vector<int>& y, int k, int h) {
          return bound_dict(sc_bound(b, rho, make_labels(y, k), h));
        },
        py::arg("b"), py::arg("rho"), py::arg("labels"), py::arg("num_classes") = 0, py::arg("h") = 0);

  // Optimisers.
  m.def("optimize_ce",
        [](const Matrix& z0, const Matrix& w0, const std::vector<int>& y, double l2, int steps, double lr,
           const std::string& schedule, double decay, double momentum, std::uint64_t seed, double radius,
           int log_every, double grad_tol, int threads) {
          const auto cfg =
              make_config(steps, lr, schedule, decay, momentum, seed, radius, log_every, grad_tol, threads);
          return trajectory_dict(optimize_ce(PointConfig(z0, Constraint::Ball, radius), w0,
                                             make_labels(y, static_cast<int>(w0.rows())), l2, cfg));
        },
        py::arg("points"), py::arg("weights"), py::arg("labels"), py::arg("l2"), OPTIM_ARGS);
  m.def("optimize_sc",
        [](const Matrix& z0, const std::vector<int>& y, int b, int k, int batches_per_step, int steps, double lr,
           const std::string& schedule, double decay, double momentum, std::uint64_t seed, double radius,
           int log_every, double grad_tol, int threads) {
          const auto cfg =
              make_config(steps, lr, schedule, decay, momentum, seed, radius, log_every, grad_tol, threads);
          const PointConfig init = project_to_sphere(z0, radius);
          const LabelVector labels = make_labels(y, k);
          Trajectory t;
          {
            py::gil_scoped_release release;
            t = batches_per_step > 0 ? optimize_sc_sgd(init, labels, b, batches_per_step, cfg)
                                     : optimize_sc_full(init, labels, b, cfg);
          }
          return trajectory_dict(t);
        },
        py::arg("points"), py::arg("labels"), py::arg("b"), py::arg("num_classes") = 0,
        py::arg("batches_per_step") = 0, OPTIM_ARGS,
        "Full-gradient descent when batches_per_step is 0, sampled batches otherwise.");
  m.def("optimize_single_batch",
        [](const std::vector<int>& mult, int h, int steps, double lr, const std::string& schedule, double decay,
           double momentum, std::uint64_t seed, double radius, int log_every, double grad_tol, int threads) {
          const auto cfg =
              make_config(steps, lr, schedule, decay, momentum, seed, radius, log_every, grad_tol, threads);
          const auto r = optimize_single_batch(mult, h, cfg);
          return py::make_tuple(r.points, r.labels.labels(), r.loss);
        },
        py::arg("multiplicities"), py::arg("h"), OPTIM_ARGS);

  // Diagnostics.
  m.def("equality_report_ce",
        [](const Matrix& z, const Matrix& w, const std::vector<int>& y, double tol, const std::string& constraint,
           double rho) {
          return equality_dict(equality_report_ce(PointConfig(z, parse_constraint(constraint), rho), w,
                                                  make_labels(y, static_cast<int>(w.rows())), tol));
        },
        py::arg("points"), py::arg("weights"), py::arg("labels"), py::arg("tol") = 1e-9,
        py::arg("constraint") = "ball", py::arg("rho") = 1.0);
  m.def("equality_report_sc",
        [](const Matrix& z, const std::vector<int>& y, double tol, int k, const std::string& constraint,
           double rho) {
          return equality_dict(
              equality_report_sc(PointConfig(z, parse_constraint(constraint), rho), make_labels(y, k), tol));
        },
        py::arg("points"), py::arg("labels"), py::arg("tol") = 1e-9, py::arg("num_classes") = 0,
        py::arg("constraint") = "sphere", py::arg("rho") = 1.0);
  m.def("geometry_stats",
        [](const Matrix& z, const std::vector<int>& y, const std::optional<Matrix>& w, int k) {
          const auto s = geometry_stats(z, make_labels(y, k), w);
          py::dict d;
          d["across_means"] = s.across_means;
          d["across_weights"] = s.across_weights;
          d["to_means"] = s.to_means;
          d["across_means_summary"] = summary_dict(s.across_means_summary);
          d["across_weights_summary"] =
              s.across_weights_summary ? py::object(summary_dict(*s.across_weights_summary)) : py::object(py::none());
          d["to_means_summary"] = summary_dict(s.to_means_summary);
          d["separation_target"] = s.separation_target;
          d["spread_target"] = s.spread_target;
          d["num_classes"] = s.num_classes;
          return d;
        },
        py::arg("points"), py::arg("labels"), py::arg("weights") = py::none(), py::arg("num_classes") = 0);
  m.def("load_embeddings",
        [](const std::string& path) {
          auto e = load_embeddings(path);
          return py::make_tuple(e.points.points(), e.labels.labels(), e.warnings);
        },
        py::arg("path"), "Returns (points, 0-based labels, warnings).");
}
