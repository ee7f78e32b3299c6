#include "commands.hpp"

#include "simplexlab/bounds.hpp"
#include "simplexlab/combinatorics.hpp"
#include "simplexlab/diagnostics.hpp"
#include "simplexlab/geometry.hpp"
#include "simplexlab/losses.hpp"
#include "simplexlab/optimize.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace simplexlab::cli {

namespace {

constexpr double kFullLr = 1.0;
constexpr double kSgdLr = 0.01;
constexpr double kSgdDecay = 0.9999;
constexpr int kSgdBatchesPerStep = 4;
constexpr int kFullSteps = 500;
constexpr int kSgdSteps = 100000;
constexpr int kFullLogEvery = 10;
constexpr int kSgdLogEvery = 1000;
constexpr double kFullTol = 1e-3;
constexpr double kSgdTol = 5e-3;

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

json condition_json(const ConditionCheck& c) {
  return json{{"name", c.name}, {"residual", c.residual}, {"pass", c.pass}};
}

json simplex_json(const SimplexCheck& s) {
  return json{{"S1", condition_json(s.s1)},
              {"S2", condition_json(s.s2)},
              {"S3", condition_json(s.s3)},
              {"fitted_inner_product", s.fitted_inner_product},
              {"target_inner_product", s.target_inner_product},
              {"inner_product_deviation", s.inner_product_deviation},
              {"pass", s.pass}};
}

json equality_json(const EqualityReport& r) {
  json conditions = json::array();
  for (const auto& c : r.conditions) conditions.push_back(condition_json(c));
  json j{{"tol", r.tol}, {"conditions", conditions}, {"simplex", simplex_json(r.simplex)}};
  if (r.rho_w) j["rho_w"] = *r.rho_w;
  j["pass"] = r.pass;
  return j;
}

json bound_json(const BoundReport& b) {
  json inputs = json::object();
  for (const auto& [k, v] : b.inputs) inputs[k] = v;
  json j{{"name", b.name}, {"value", b.value}};
  if (b.total) j["total"] = *b.total;
  if (b.mean) j["mean"] = *b.mean;
  j["inputs"] = inputs;
  j["tight_capable"] = b.tight_capable;
  if (!b.note.empty()) j["note"] = b.note;
  return j;
}

json gap_json(const GapReport& g) {
  return json{{"normalization", to_string(g.normalization)},
              {"empirical", g.empirical},
              {"bound", g.bound},
              {"absolute", g.absolute},
              {"relative", g.relative},
              {"tight", g.tight}};
}

void write_trajectory(const fs::path& path, const Trajectory& t) {
  auto os = open_out(path);
  os << "iter,loss,bound_gap,grad_norm\n";
  for (const auto& r : t.records) {
    os << r.iter << ',' << format_double(r.loss) << ',' << format_double(r.bound_gap) << ','
       << format_double(r.grad_norm) << '\n';
  }
}

void write_matrix(const fs::path& path, const Matrix& m, const std::string& row_name) {
  auto os = open_out(path);
  os << row_name;
  for (Eigen::Index c = 0; c < m.cols(); ++c) os << ",x" << (c + 1);
  os << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << (r + 1);
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << format_double(m(r, c));
    os << '\n';
  }
}

std::vector<int> parse_multiplicities(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(cell, &used);
    } catch (const std::exception&) {
      throw UsageError("bad multiplicity '" + cell + "'");
    }
    if (used != cell.size() || value < 1) throw UsageError("bad multiplicity '" + cell + "'");
    out.push_back(value);
  }
  if (out.empty()) throw UsageError("empty multiplicity list");
  return out;
}

// Removes classes without instances, renumbering the remaining ones.
LabelVector drop_empty_classes(const LabelVector& labels) {
  std::vector<int> remap(static_cast<std::size_t>(labels.num_classes()), -1);
  int next = 0;
  for (int y = 0; y < labels.num_classes(); ++y) {
    if (labels.count(y) > 0) remap[static_cast<std::size_t>(y)] = next++;
  }
  std::vector<int> out;
  out.reserve(labels.size());
  for (int y : labels.labels()) out.push_back(remap[static_cast<std::size_t>(y)]);
  return LabelVector(std::move(out), next);
}

}  // namespace

void to_json(json& j, const ScToyOptions& o) {
  j = json{{"per_class", o.per_class}, {"k", o.k},       {"h", o.h},
           {"b", o.b},                 {"rho", o.rho},   {"seed", o.seed},
           {"steps", o.steps},         {"mode", o.mode}, {"lr", o.lr},
           {"momentum", o.momentum},   {"decay", o.decay},
           {"batches_per_step", o.batches_per_step},     {"log_every", o.log_every},
           {"tol", o.tol},             {"out_dir", o.out_dir}};
}

void from_json(const json& j, ScToyOptions& o) {
  ScToyOptions d;
  o.per_class = j.value("per_class", d.per_class);
  o.k = j.value("k", d.k);
  o.h = j.value("h", d.h);
  o.b = j.value("b", d.b);
  o.rho = j.value("rho", d.rho);
  o.seed = j.value("seed", d.seed);
  o.steps = j.value("steps", d.steps);
  o.mode = j.value("mode", d.mode);
  o.lr = j.value("lr", d.lr);
  o.momentum = j.value("momentum", d.momentum);
  o.decay = j.value("decay", d.decay);
  o.batches_per_step = j.value("batches_per_step", d.batches_per_step);
  o.log_every = j.value("log_every", d.log_every);
  o.tol = j.value("tol", d.tol);
  o.out_dir = j.value("out_dir", d.out_dir);
}

void to_json(json& j, const CeSweepOptions& o) {
  j = json{{"lambdas", o.lambdas}, {"per_class", o.per_class}, {"k", o.k},
           {"h", o.h},             {"rho", o.rho},             {"seed", o.seed},
           {"steps", o.steps},     {"lr", o.lr},               {"momentum", o.momentum},
           {"log_every", o.log_every},                         {"out_dir", o.out_dir}};
}

void from_json(const json& j, CeSweepOptions& o) {
  CeSweepOptions d;
  o.lambdas = j.value("lambdas", d.lambdas);
  o.per_class = j.value("per_class", d.per_class);
  o.k = j.value("k", d.k);
  o.h = j.value("h", d.h);
  o.rho = j.value("rho", d.rho);
  o.seed = j.value("seed", d.seed);
  o.steps = j.value("steps", d.steps);
  o.lr = j.value("lr", d.lr);
  o.momentum = j.value("momentum", d.momentum);
  o.log_every = j.value("log_every", d.log_every);
  o.out_dir = j.value("out_dir", d.out_dir);
}

void to_json(json& j, const BatchMinimizerOptions& o) {
  j = json{{"multiplicities", o.multiplicities},
           {"h", o.h},
           {"rho", o.rho},
           {"seed", o.seed},
           {"steps", o.steps},
           {"lr", o.lr},
           {"momentum", o.momentum},
           {"out", o.out}};
}

void from_json(const json& j, BatchMinimizerOptions& o) {
  BatchMinimizerOptions d;
  o.multiplicities = j.value("multiplicities", d.multiplicities);
  o.h = j.value("h", d.h);
  o.rho = j.value("rho", d.rho);
  o.seed = j.value("seed", d.seed);
  o.steps = j.value("steps", d.steps);
  o.lr = j.value("lr", d.lr);
  o.momentum = j.value("momentum", d.momentum);
  o.out = j.value("out", d.out);
}

int run_simplex(const SimplexOptions& o, std::ostream& out) {
  const SimplexVertices s = build_simplex(o.k, o.h, o.rho);
  const SimplexCheck check = verify_simplex(s.vertices, o.rho, 1e-10);
  const fs::path dir = prepare_dir(o.out);
  write_matrix(dir / "simplex.csv", s.vertices, "vertex");

  json pairs = json::array();
  const Matrix gram = s.vertices * s.vertices.transpose();
  for (int i = 0; i < o.k; ++i) {
    for (int j = i + 1; j < o.k; ++j) pairs.push_back(json{{"i", i + 1}, {"j", j + 1}, {"dot", gram(i, j)}});
  }
  json report{{"k", o.k}, {"h", o.h}, {"rho", o.rho}, {"verification", simplex_json(check)},
              {"pairwise_inner_products", pairs}};
  write_json(dir / "simplex_report.json", report);
  out << report.dump(2) << '\n';
  return check.pass ? kOk : kInternalError;
}

int run_bound(const BoundOptions& o, std::ostream& out) {
  BoundReport rep;
  if (o.kind == "ce") {
    const int given = (o.frobenius >= 0.0) + (o.r_w >= 0.0) + (o.lambda >= 0.0);
    if (given != 1) throw UsageError("bound ce needs exactly one of --frob, --rw, --lambda");
    if (o.frobenius >= 0.0) rep = ce_bound_frobenius(o.k, o.rho, o.frobenius, o.h);
    if (o.r_w >= 0.0) rep = ce_bound_rw(o.k, o.rho, o.r_w, o.h);
    if (o.lambda >= 0.0) rep = ce_bound_l2(o.k, o.rho, o.lambda, o.h);
  } else if (o.kind == "sc") {
    if (o.k < 1 || o.n % o.k != 0) {
      throw std::invalid_argument("bound sc: N must be a multiple of K (balanced labels)");
    }
    rep = sc_bound(o.b, o.rho, LabelVector::balanced(o.k, o.n / o.k), o.h);
  } else {
    throw UsageError("bound kind must be 'ce' or 'sc'");
  }
  out << bound_json(rep).dump(2) << '\n';
  return kOk;
}

int run_enumerate(const EnumerateOptions& o, std::ostream& out) {
  if (o.count_only) {
    out << to_string(multichoose(o.n, o.b)) << '\n';
    return kOk;
  }
  BatchEnumerator it(o.n, o.b);
  for (; !it.done(); it.advance()) {
    const auto& seq = it.sequence();
    for (std::size_t i = 0; i < seq.size(); ++i) out << (i ? " " : "") << (seq[i] + 1);
    out << '\n';
  }
  return kOk;
}

int run_sc_toy(ScToyOptions o, std::ostream& out) {
  if (o.mode != "full" && o.mode != "sgd") throw UsageError("--mode must be 'full' or 'sgd'");
  const bool sgd = o.mode == "sgd";
  if (o.steps < 0) o.steps = sgd ? kSgdSteps : kFullSteps;
  if (o.lr < 0.0) o.lr = sgd ? kSgdLr : kFullLr;
  if (o.decay < 0.0) o.decay = sgd ? kSgdDecay : 1.0;
  if (o.batches_per_step < 0) o.batches_per_step = sgd ? kSgdBatchesPerStep : 1;
  if (o.log_every < 0) o.log_every = sgd ? kSgdLogEvery : kFullLogEvery;
  if (o.tol < 0.0) o.tol = sgd ? kSgdTol : kFullTol;

  const fs::path dir = prepare_dir(o.out_dir);
  json config;
  to_json(config, o);
  write_json(dir / "config.json", config);

  const LabelVector labels = LabelVector::balanced(o.k, o.per_class);
  const int n = static_cast<int>(labels.size());
  const PointConfig init = random_sphere_config(n, o.h, o.rho, o.seed);

  OptimConfig cfg;
  cfg.steps = o.steps;
  cfg.lr0 = o.lr;
  cfg.momentum = o.momentum;
  cfg.decay = o.decay;
  cfg.schedule = o.decay < 1.0 ? Schedule::Exponential : Schedule::Constant;
  cfg.seed = o.seed;
  cfg.radius = o.rho;
  cfg.log_every = o.log_every;
  cfg.threads = o.threads;

  const Trajectory traj = sgd ? optimize_sc_sgd(init, labels, o.b, o.batches_per_step, cfg)
                              : optimize_sc_full(init, labels, o.b, cfg);

  ScOptions sc_opts;
  sc_opts.threads = o.threads;
  const LossBreakdown final_loss = sc_total_loss(traj.points, labels, o.b, sc_opts);
  const BoundReport bound = sc_bound(o.b, o.rho, labels, o.h);
  const GapReport gap = gap_report(final_loss, bound, Normalization::Mean, o.tol);
  const PointConfig final_points(traj.points, Constraint::Sphere, o.rho);
  const EqualityReport eq = equality_report_sc(final_points, labels, o.tol);

  write_trajectory(dir / "trajectory.csv", traj);
  {
    auto os = open_out(dir / "final_points.csv");
    write_embeddings(os, traj.points, labels);
  }
  json report{{"mode", o.mode},
              {"batch_count", to_u64(multichoose(n, o.b))},
              {"bound_mean", *bound.mean},
              {"bound_total", *bound.total},
              {"final_mean_loss", final_loss.mean},
              {"final_total_loss", final_loss.total},
              {"gap", gap_json(gap)},
              {"equality_report", equality_json(eq)},
              {"steps_taken", traj.steps_taken}};
  if (!traj.warnings.empty()) report["warnings"] = traj.warnings;
  write_json(dir / "report.json", report);
  out << report.dump(2) << '\n';
  return kOk;
}

int run_ce_sweep(const CeSweepOptions& o, std::ostream& out) {
  if (o.lambdas.empty()) throw UsageError("--lambdas needs at least one value");
  for (double l : o.lambdas) {
    if (!(l > 0.0)) throw UsageError("every lambda must be > 0");
  }
  const fs::path dir = prepare_dir(o.out_dir);
  json config;
  to_json(config, o);
  write_json(dir / "config.json", config);

  const LabelVector labels = LabelVector::balanced(o.k, o.per_class);
  const auto n = static_cast<Eigen::Index>(labels.size());

  auto csv = open_out(dir / "sweep.csv");
  csv << "lambda,bound,empirical,r_w_theory,w_norm_mean\n";
  json rows = json::array();
  for (std::size_t i = 0; i < o.lambdas.size(); ++i) {
    const double l2 = o.lambdas[i];
    // Points start strictly inside the ball; weights small and random.
    const Matrix start = 0.5 * random_sphere_config(n, o.h, o.rho, o.seed).points();
    std::mt19937_64 rng(o.seed + 1);
    std::normal_distribution<double> normal(0.0, 0.1);
    Matrix weights(o.k, o.h);
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < weights.cols(); ++c) weights(r, c) = normal(rng);
    }

    OptimConfig cfg;
    cfg.steps = o.steps;
    cfg.lr0 = o.lr;
    cfg.momentum = o.momentum;
    cfg.seed = o.seed;
    cfg.radius = o.rho;
    cfg.log_every = o.log_every;
    const Trajectory traj =
        optimize_ce(PointConfig(start, Constraint::Ball, o.rho), weights, labels, l2, cfg);

    const BoundReport bound = ce_bound_l2(o.k, o.rho, l2, o.h);
    const double r_w = solve_r_w(o.k, o.rho, l2);
    double w_norm = 0.0;
    for (Eigen::Index y = 0; y < traj.weights->rows(); ++y) w_norm += traj.weights->row(y).norm();
    w_norm /= static_cast<double>(traj.weights->rows());

    csv << format_double(l2) << ',' << format_double(bound.value) << ','
        << format_double(traj.final_loss) << ',' << format_double(r_w) << ','
        << format_double(w_norm) << '\n';

    const GapReport gap = gap_report(traj.final_loss, bound, Normalization::Mean);
    const EqualityReport eq = equality_report_ce(PointConfig(traj.points, Constraint::Ball, o.rho),
                                                 *traj.weights, labels, 1e-6);
    rows.push_back(json{{"lambda", l2},
                        {"bound", bound.value},
                        {"empirical", traj.final_loss},
                        {"r_w_theory", r_w},
                        {"w_norm_mean", w_norm},
                        {"gap", gap_json(gap)},
                        {"equality_report", equality_json(eq)}});
    write_trajectory(dir / ("trajectory_" + std::to_string(i + 1) + ".csv"), traj);
  }
  json report{{"rows", rows}};
  write_json(dir / "report.json", report);
  out << report.dump(2) << '\n';
  return kOk;
}

int run_batch_minimizers(const BatchMinimizerOptions& o, std::ostream& out) {
  if (o.multiplicities.empty()) throw UsageError("--multiplicities is required");
  std::vector<std::vector<int>> configs;
  for (const auto& text : o.multiplicities) configs.push_back(parse_multiplicities(text));

  const fs::path dir = prepare_dir(o.out);
  json config;
  to_json(config, o);
  write_json(dir / "config.json", config);

  auto summary = open_out(dir / "summary.csv");
  summary << "multiplicities,loss,file\n";
  json results = json::array();
  for (const auto& mult : configs) {
    OptimConfig cfg;
    cfg.steps = o.steps;
    cfg.lr0 = o.lr;
    cfg.momentum = o.momentum;
    cfg.seed = o.seed;
    cfg.radius = o.rho;
    cfg.log_every = o.steps;
    const SingleBatchResult res = optimize_single_batch(mult, o.h, cfg);

    std::string tag;
    for (std::size_t i = 0; i < mult.size(); ++i) tag += (i ? "-" : "") + std::to_string(mult[i]);
    const std::string file = "batch_" + tag + ".csv";
    {
      auto os = open_out(dir / file);
      write_embeddings(os, res.points, res.labels);
    }
    summary << '"' << tag << "\"," << format_double(res.loss) << ',' << file << '\n';
    results.push_back(json{{"multiplicities", mult}, {"loss", res.loss}, {"file", file}});
  }
  json report{{"results", results}};
  write_json(dir / "report.json", report);
  out << report.dump(2) << '\n';
  return kOk;
}

int run_diagnose(const DiagnoseOptions& o, std::ostream& out, std::ostream& err) {
  Embeddings emb = load_embeddings(o.embeddings);
  std::vector<std::string> warnings = emb.warnings;
  LabelVector labels = emb.labels;
  if (labels.has_empty_class()) {
    labels = drop_empty_classes(labels);
    warnings.push_back("empty classes dropped; remaining classes renumbered in order");
  }
  const Matrix& points = emb.points.points();
  double rho = o.rho;
  if (rho <= 0.0) {
    rho = points.rowwise().norm().mean();
    if (!(rho > 0.0)) throw ParseError("all embeddings are zero vectors", 0);
  }

  std::optional<Matrix> weights;
  if (!o.weights.empty()) {
    weights = load_matrix_csv(o.weights);
    // Allow a leading index column as written by the simplex command.
    if (weights->cols() == points.cols() + 1) {
      Matrix trimmed = weights->rightCols(points.cols());
      weights = std::move(trimmed);
    }
    if (weights->rows() != labels.num_classes() || weights->cols() != points.cols()) {
      throw ParseError("weights file must have K rows and h columns", 0);
    }
  }

  const GeometryStats stats = geometry_stats(points, labels, weights);
  const PointConfig config = PointConfig::free(points, rho);
  const EqualityReport sc_eq = equality_report_sc(config, labels, o.tol);

  const fs::path dir = prepare_dir(o.out);
  {
    auto os = open_out(dir / "stats.csv");
    write_stats_csv(os, stats);
  }

  auto summary_json = [](const Summary& s) {
    return json{{"min", s.min}, {"median", s.median}, {"max", s.max}};
  };
  json notes = json::array();
  if ((points.array() >= 0.0).all()) {
    notes.push_back(
        "all embeddings have nonnegative coordinates: pairwise angles are at most pi/2, so "
        "every cosine similarity is >= 0.5 and the simplex target below 0.5 is unreachable");
  }
  json report{{"n", points.rows()},
              {"h", points.cols()},
              {"k", labels.num_classes()},
              {"rho", rho},
              {"balanced", labels.balanced()},
              {"separation_target", stats.separation_target},
              {"spread_target", stats.spread_target},
              {"across_means", summary_json(stats.across_means_summary)},
              {"to_means", summary_json(stats.to_means_summary)}};
  if (stats.across_weights_summary) {
    report["across_weights"] = summary_json(*stats.across_weights_summary);
  }
  report["equality_report_sc"] = equality_json(sc_eq);
  if (weights) {
    report["equality_report_ce"] =
        equality_json(equality_report_ce(config, *weights, labels, o.tol));
  }
  report["notes"] = notes;
  report["warnings"] = warnings;
  write_json(dir / "equality_report.json", report);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  out << report.dump(2) << '\n';
  return kOk;
}

}  // namespace simplexlab::cli
