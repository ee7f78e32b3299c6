#include "simplexlab/diagnostics.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace simplexlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ConditionCheck collapse_check(const Matrix& points, const Matrix& means, const LabelVector& labels,
                              double rho, double tol) {
  ConditionCheck c{"C1", 0.0, false};
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    const double dist = (points.row(n) - means.row(labels[static_cast<std::size_t>(n)])).norm();
    c.residual = std::max(c.residual, dist / rho);
  }
  c.pass = c.residual <= tol;
  return c;
}

ConditionCheck simplex_condition(const SimplexCheck& s, double tol) {
  ConditionCheck c{"C2", std::max({s.s1.residual, s.s2.residual, s.s3.residual}), false};
  c.pass = c.residual <= tol;
  return c;
}

void check_report_inputs(const PointConfig& points, const LabelVector& labels) {
  if (static_cast<std::size_t>(points.size()) != labels.size()) {
    throw std::invalid_argument("equality report: label count does not match number of points");
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, long line) {
  if (cell.empty()) throw ParseError("line " + std::to_string(line) + ": empty cell", line);
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line) + ": non-numeric value '" + cell + "'", line);
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

EqualityReport equality_report_ce(const PointConfig& points, const Matrix& weights,
                                  const LabelVector& labels, double tol) {
  check_report_inputs(points, labels);
  if (weights.rows() != labels.num_classes() || weights.cols() != points.dim()) {
    throw std::invalid_argument("equality report: weight matrix shape is inconsistent");
  }
  const double rho = points.radius();
  const Matrix means = class_means(points.points(), labels);

  EqualityReport rep;
  rep.tol = tol;
  rep.conditions.push_back(collapse_check(points.points(), means, labels, rho, tol));
  rep.simplex = verify_simplex(means, rho, tol);
  rep.conditions.push_back(simplex_condition(rep.simplex, tol));

  ConditionCheck c3{"C3", kInf, false};
  double rho_w = 0.0;
  for (Eigen::Index y = 0; y < weights.rows(); ++y) rho_w += weights.row(y).norm();
  rho_w /= static_cast<double>(weights.rows());
  rep.rho_w = rho_w;
  if (rho_w > 0.0) {
    c3.residual = 0.0;
    for (Eigen::Index y = 0; y < weights.rows(); ++y) {
      const double dev = (weights.row(y) - (rho_w / rho) * means.row(y)).norm();
      c3.residual = std::max(c3.residual, dev / rho_w);
    }
  }
  c3.pass = c3.residual <= tol;
  rep.conditions.push_back(c3);

  rep.pass = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                         [](const ConditionCheck& c) { return c.pass; });
  return rep;
}

EqualityReport equality_report_sc(const PointConfig& points, const LabelVector& labels,
                                  double tol) {
  check_report_inputs(points, labels);
  const double rho = points.radius();
  const Matrix means = class_means(points.points(), labels);
  EqualityReport rep;
  rep.tol = tol;
  rep.conditions.push_back(collapse_check(points.points(), means, labels, rho, tol));
  rep.simplex = verify_simplex(means, rho, tol);
  rep.conditions.push_back(simplex_condition(rep.simplex, tol));
  rep.pass = rep.conditions[0].pass && rep.conditions[1].pass;
  return rep;
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median =
      n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return {values.front(), median, values.back()};
}

GeometryStats geometry_stats(const Matrix& points, const LabelVector& labels,
                             const std::optional<Matrix>& weights) {
  const Matrix means = class_means(points, labels);
  const int k = labels.num_classes();
  GeometryStats st;
  st.num_classes = k;
  st.separation_target = k >= 2 ? simplex_similarity(k) : 1.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      st.across_means.push_back(
          cosine_similarity(means.row(i).transpose(), means.row(j).transpose()));
    }
  }
  if (weights) {
    if (weights->rows() != k || weights->cols() != points.cols()) {
      throw std::invalid_argument("geometry_stats: weight matrix shape is inconsistent");
    }
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        st.across_weights.push_back(cosine_similarity(weights->row(i).transpose(),
                                                      weights->row(j).transpose()));
      }
    }
    st.across_weights_summary = summarize(st.across_weights);
  }
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    st.to_means.push_back(cosine_similarity(
        points.row(n).transpose(), means.row(labels[static_cast<std::size_t>(n)]).transpose()));
  }
  st.across_means_summary = summarize(st.across_means);
  st.to_means_summary = summarize(st.to_means);
  return st;
}

void write_stats_csv(std::ostream& os, const GeometryStats& stats) {
  os << "statistic,pair_or_index,value\n";
  auto pairs = [&](const char* name, const std::vector<double>& values) {
    std::size_t idx = 0;
    for (int i = 0; i < stats.num_classes; ++i) {
      for (int j = i + 1; j < stats.num_classes; ++j) {
        os << name << ',' << (i + 1) << '-' << (j + 1) << ',' << format_double(values[idx++])
           << '\n';
      }
    }
  };
  pairs("across_means", stats.across_means);
  if (!stats.across_weights.empty()) pairs("across_weights", stats.across_weights);
  for (std::size_t n = 0; n < stats.to_means.size(); ++n) {
    os << "to_means," << (n + 1) << ',' << format_double(stats.to_means[n]) << '\n';
  }
}

Embeddings parse_embeddings(std::istream& is) {
  std::string line;
  long lineno = 0;
  std::size_t width = 0;
  bool header_seen = false;
  std::vector<int> raw_labels;
  std::vector<std::vector<double>> rows;

  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (!header_seen) {
      if (cells.empty() || cells[0] != "label" || cells.size() < 2) {
        throw ParseError("line " + std::to_string(lineno) +
                             ": expected header 'label,x1,...,xh'",
                         lineno);
      }
      width = cells.size();
      header_seen = true;
      continue;
    }
    if (cells.size() != width) {
      throw ParseError("line " + std::to_string(lineno) + ": ragged row (" +
                           std::to_string(cells.size()) + " fields, expected " +
                           std::to_string(width) + ")",
                       lineno);
    }
    const double label = parse_double(cells[0], lineno);
    if (label != std::floor(label) || label < 1.0 || label > 1e9) {
      throw ParseError("line " + std::to_string(lineno) + ": label must be an integer >= 1",
                       lineno);
    }
    raw_labels.push_back(static_cast<int>(label));
    std::vector<double> row(width - 1);
    for (std::size_t c = 1; c < width; ++c) row[c - 1] = parse_double(cells[c], lineno);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError("empty embeddings file", lineno);
  if (rows.empty()) throw ParseError("embeddings file has a header but no rows", lineno);

  const int k = *std::max_element(raw_labels.begin(), raw_labels.end());
  Matrix points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  std::vector<int> labels(raw_labels.size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t c = 0; c + 1 < width; ++c) {
      points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) = rows[n][c];
    }
    labels[n] = raw_labels[n] - 1;
  }
  LabelVector label_vec(std::move(labels), k);
  std::vector<std::string> warnings;
  for (int y = 0; y < k; ++y) {
    if (label_vec.count(y) == 0) {
      warnings.push_back("class " + std::to_string(y + 1) + " has no instances");
    }
  }
  if (!label_vec.balanced()) warnings.push_back("labels are not balanced");
  return Embeddings{PointConfig::free(std::move(points)), std::move(label_vec),
                    std::move(warnings)};
}

Embeddings load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embeddings file '" + path + "'", 0);
  return parse_embeddings(in);
}

void write_embeddings(std::ostream& os, const Matrix& points, const LabelVector& labels) {
  os << "label";
  for (Eigen::Index c = 0; c < points.cols(); ++c) os << ",x" << (c + 1);
  os << '\n';
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    os << (labels[static_cast<std::size_t>(n)] + 1);
    for (Eigen::Index c = 0; c < points.cols(); ++c) os << ',' << format_double(points(n, c));
    os << '\n';
  }
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file '" + path + "'", 0);
  std::string line;
  long lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    // A first line that does not start with a number is a header.
    if (rows.empty() && lineno == 1) {
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (cells[0].empty() || end != cells[0].c_str() + cells[0].size()) continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("line " + std::to_string(lineno) + ": ragged row", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix file '" + path + "' has no rows", lineno);
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return out;
}

GapReport gap_report(double empirical, const BoundReport& bound, Normalization normalization,
                     double tight_threshold) {
  const auto value = bound.get(normalization);
  if (!value) {
    throw std::invalid_argument("gap_report: bound '" + bound.name + "' has no " +
                                to_string(normalization) + " value");
  }
  GapReport rep;
  rep.normalization = normalization;
  rep.empirical = empirical;
  rep.bound = *value;
  rep.absolute = empirical - *value;
  const double scale = std::max(1.0, std::abs(*value));
  if (rep.absolute < -1e-9 * scale) {
    throw BoundViolation("gap_report: empirical loss " + format_double(empirical) +
                         " is below the lower bound " + format_double(*value));
  }
  rep.relative = *value != 0.0 ? rep.absolute / std::abs(*value) : rep.absolute;
  rep.tight = rep.relative <= tight_threshold;
  return rep;
}

GapReport gap_report(const LossBreakdown& empirical, const BoundReport& bound,
                     Normalization normalization, double tight_threshold) {
  const double value = normalization == Normalization::Total ? empirical.total : empirical.mean;
  return gap_report(value, bound, normalization, tight_threshold);
}

}  // namespace simplexlab
