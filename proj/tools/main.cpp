#include "commands.hpp"

#include "simplexlab/parallel.hpp"
#include "simplexlab/types.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace cli = simplexlab::cli;
using json = nlohmann::ordered_json;

namespace {

// Loads a resolved config.json into `opts`.
template <class Options>
void load_config(const std::string& path, Options& opts) {
  std::ifstream in(path);
  if (!in) throw cli::UsageError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw simplexlab::ParseError(std::string("config: ") + e.what(), 0);
  }
  from_json(j, opts);
}

std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

std::string find_subcommand(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "sc-toy" || a == "ce-sweep" || a == "batch-minimizers") return a;
  }
  return {};
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw cli::UsageError("bad lambda '" + cell + "'");
    }
    if (used != cell.size()) throw cli::UsageError("bad lambda '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"simplexlab: simplex geometry, loss bounds and collapse diagnostics"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads for exact SC enumeration (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  cli::SimplexOptions simplex;
  auto* c_simplex = app.add_subcommand("simplex", "Build and verify a regular simplex");
  c_simplex->add_option("--k", simplex.k, "Number of vertices")->capture_default_str();
  c_simplex->add_option("--h", simplex.h, "Ambient dimension")->capture_default_str();
  c_simplex->add_option("--rho", simplex.rho, "Sphere radius")->capture_default_str();
  c_simplex->add_option("--out", simplex.out, "Output directory")->capture_default_str();

  cli::BoundOptions bound;
  auto* c_bound = app.add_subcommand("bound", "Evaluate a loss lower bound");
  c_bound->add_option("kind", bound.kind, "ce or sc")
      ->required()
      ->check(CLI::IsMember({"ce", "sc"}));
  c_bound->add_option("--n", bound.n, "Number of points (sc)")->capture_default_str();
  c_bound->add_option("--k", bound.k, "Number of classes")->capture_default_str();
  c_bound->add_option("--h", bound.h, "Embedding dimension (informational)");
  c_bound->add_option("--b", bound.b, "Batch size (sc)")->capture_default_str();
  c_bound->add_option("--rho", bound.rho, "Radius of the embedding sphere/ball")
      ->capture_default_str();
  c_bound->add_option("--frob", bound.frobenius, "Frobenius norm of W (ce)");
  c_bound->add_option("--rw", bound.r_w, "Per-row weight norm r_W (ce)");
  c_bound->add_option("--lambda", bound.lambda, "L2 regularisation strength (ce)");

  cli::EnumerateOptions enumerate;
  auto* c_enum = app.add_subcommand("enumerate", "List or count size-b index multisets");
  c_enum->add_option("--n", enumerate.n, "Number of points")->capture_default_str();
  c_enum->add_option("--b", enumerate.b, "Batch size")->capture_default_str();
  c_enum->add_flag("--count-only", enumerate.count_only, "Print the count only");

  auto* c_repro = app.add_subcommand("repro", "Reproduction experiments");
  c_repro->require_subcommand(1);

  cli::ScToyOptions toy;
  std::string toy_config;
  auto* c_toy = c_repro->add_subcommand("sc-toy", "SC loss on the 12-point toy problem");
  c_toy->add_option("--config", toy_config, "Resolved config.json from an earlier run");
  c_toy->add_option("--seed", toy.seed, "Initialisation / sampling seed");
  c_toy->add_option("--steps", toy.steps, "Optimiser steps (default depends on mode)");
  c_toy->add_option("--mode", toy.mode, "full or sgd")->check(CLI::IsMember({"full", "sgd"}));
  c_toy->add_option("--lr", toy.lr, "Initial learning rate");
  c_toy->add_option("--momentum", toy.momentum, "Heavy-ball momentum");
  c_toy->add_option("--decay", toy.decay, "Per-step exponential decay of the learning rate");
  c_toy->add_option("--batches-per-step", toy.batches_per_step, "Sampled batches per sgd step");
  c_toy->add_option("--per-class", toy.per_class, "Points per class");
  c_toy->add_option("--k", toy.k, "Number of classes");
  c_toy->add_option("--h", toy.h, "Embedding dimension");
  c_toy->add_option("--b", toy.b, "Batch size");
  c_toy->add_option("--rho", toy.rho, "Sphere radius");
  c_toy->add_option("--log-every", toy.log_every, "Trajectory logging interval");
  c_toy->add_option("--tol", toy.tol, "Equality report tolerance");
  c_toy->add_option("--out-dir", toy.out_dir, "Output directory");

  cli::CeSweepOptions sweep;
  std::string sweep_config;
  auto* c_sweep = c_repro->add_subcommand("ce-sweep", "Regularised CE over a grid of lambdas");
  c_sweep->add_option("--config", sweep_config, "Resolved config.json from an earlier run");
  std::string lambdas_text;
  auto* o_lambdas =
      c_sweep->add_option("--lambdas", lambdas_text, "Comma-separated lambda values");
  c_sweep->add_option("--steps", sweep.steps, "Optimiser steps per lambda");
  c_sweep->add_option("--seed", sweep.seed, "Initialisation seed");
  c_sweep->add_option("--lr", sweep.lr, "Learning rate");
  c_sweep->add_option("--momentum", sweep.momentum, "Heavy-ball momentum");
  c_sweep->add_option("--per-class", sweep.per_class, "Points per class");
  c_sweep->add_option("--k", sweep.k, "Number of classes");
  c_sweep->add_option("--h", sweep.h, "Embedding dimension");
  c_sweep->add_option("--rho", sweep.rho, "Ball radius");
  c_sweep->add_option("--log-every", sweep.log_every, "Trajectory logging interval");
  c_sweep->add_option("--out-dir", sweep.out_dir, "Output directory");

  cli::BatchMinimizerOptions minim;
  std::string minim_config;
  auto* c_min = app.add_subcommand("batch-minimizers", "Minimise the loss of single batches");
  c_min->add_option("--config", minim_config, "Resolved config.json from an earlier run");
  c_min->add_option("--multiplicities", minim.multiplicities,
                    "Class multiplicities, e.g. 3,3,3 (repeatable)");
  c_min->add_option("--h", minim.h, "Embedding dimension");
  c_min->add_option("--rho", minim.rho, "Sphere radius");
  c_min->add_option("--seed", minim.seed, "Initialisation seed");
  c_min->add_option("--steps", minim.steps, "Optimiser steps");
  c_min->add_option("--lr", minim.lr, "Learning rate");
  c_min->add_option("--momentum", minim.momentum, "Heavy-ball momentum");
  c_min->add_option("--out", minim.out, "Output directory");

  cli::DiagnoseOptions diag;
  auto* c_diag = app.add_subcommand("diagnose", "Geometry statistics of learned embeddings");
  c_diag->add_option("--embeddings", diag.embeddings, "CSV with label,x1,...,xh")->required();
  c_diag->add_option("--weights", diag.weights, "Optional CSV of classifier weights");
  c_diag->add_option("--rho", diag.rho, "Radius (default: mean embedding norm)");
  c_diag->add_option("--tol", diag.tol, "Equality report tolerance");
  c_diag->add_option("--out", diag.out, "Output directory");

  // A config file supplies the baseline, so it is loaded before parsing and
  // explicit flags then override individual fields.
  const std::string config_path = find_config(argc, argv);
  if (!config_path.empty()) {
    const std::string sub = find_subcommand(argc, argv);
    if (sub == "sc-toy") {
      load_config(config_path, toy);
    } else if (sub == "ce-sweep") {
      load_config(config_path, sweep);
    } else if (sub == "batch-minimizers") {
      load_config(config_path, minim);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsageError;
  }

  if (threads > 0) {
    // The environment variable still wins when set.
    setenv("SIMPLEXLAB_THREADS", std::to_string(threads).c_str(), 0);
  }

  std::ostream& out = std::cout;
  if (*c_simplex) return cli::run_simplex(simplex, out);
  if (*c_bound) return cli::run_bound(bound, out);
  if (*c_enum) return cli::run_enumerate(enumerate, out);
  if (*c_toy) {
    toy.threads = simplexlab::resolve_threads(threads);
    return cli::run_sc_toy(toy, out);
  }
  if (*c_sweep) {
    if (o_lambdas->count() > 0) sweep.lambdas = parse_lambdas(lambdas_text);
    return cli::run_ce_sweep(sweep, out);
  }
  if (*c_min) {
    return cli::run_batch_minimizers(minim, out);
  }
  if (*c_diag) return cli::run_diagnose(diag, out, std::cerr);
  return cli::kUsageError;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const simplexlab::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kDataError;
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsageError;
  } catch (const simplexlab::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return cli::kInternalError;
  }
}
