#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace simplexlab::cli {

enum ExitCode : int { kOk = 0, kInternalError = 1, kUsageError = 2, kDataError = 3 };

/// Raised for flag combinations that parse but make no sense.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimplexOptions {
  int k = 3;
  int h = 2;
  double rho = 1.0;
  std::string out = ".";
};

struct BoundOptions {
  std::string kind;  // "ce" or "sc"
  int n = 12;
  int k = 3;
  int h = 0;
  int b = 9;
  double rho = 1.0;
  double frobenius = -1.0;
  double r_w = -1.0;
  double lambda = -1.0;
};

struct EnumerateOptions {
  int n = 12;
  int b = 9;
  bool count_only = false;
};

struct ScToyOptions {
  int per_class = 4;
  int k = 3;
  int h = 2;
  int b = 9;
  double rho = 1.0;
  std::uint64_t seed = 0;
  int steps = -1;          // < 0: mode default
  std::string mode = "full";
  double lr = -1.0;        // < 0: mode default
  double momentum = 0.9;
  double decay = -1.0;     // < 0: mode default
  int batches_per_step = -1;  // < 0: mode default
  int log_every = -1;      // < 0: mode default
  int threads = 0;
  double tol = -1.0;       // < 0: mode default
  std::string out_dir = "sc_toy";
};

struct CeSweepOptions {
  std::vector<double> lambdas{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  int per_class = 100;
  int k = 3;
  int h = 2;
  double rho = 1.0;
  std::uint64_t seed = 0;
  int steps = 5000;
  double lr = 1.0;
  double momentum = 0.9;
  int log_every = 500;
  std::string out_dir = "ce_sweep";
};

struct BatchMinimizerOptions {
  std::vector<std::string> multiplicities;
  int h = 2;
  double rho = 1.0;
  std::uint64_t seed = 0;
  int steps = 3000;
  double lr = 0.5;
  double momentum = 0.9;
  std::string out = "batch_minimizers";
};

struct DiagnoseOptions {
  std::string embeddings;
  std::string weights;
  double rho = -1.0;  // < 0: mean row norm of the embeddings
  double tol = 1e-9;
  std::string out = "diagnose";
};

void to_json(nlohmann::ordered_json& j, const ScToyOptions& o);
void from_json(const nlohmann::ordered_json& j, ScToyOptions& o);
void to_json(nlohmann::ordered_json& j, const CeSweepOptions& o);
void from_json(const nlohmann::ordered_json& j, CeSweepOptions& o);
void to_json(nlohmann::ordered_json& j, const BatchMinimizerOptions& o);
void from_json(const nlohmann::ordered_json& j, BatchMinimizerOptions& o);

int run_simplex(const SimplexOptions& o, std::ostream& out);
int run_bound(const BoundOptions& o, std::ostream& out);
int run_enumerate(const EnumerateOptions& o, std::ostream& out);
int run_sc_toy(ScToyOptions o, std::ostream& out);
int run_ce_sweep(const CeSweepOptions& o, std::ostream& out);
int run_batch_minimizers(const BatchMinimizerOptions& o, std::ostream& out);
int run_diagnose(const DiagnoseOptions& o, std::ostream& out, std::ostream& err);

}  // namespace simplexlab::cli
