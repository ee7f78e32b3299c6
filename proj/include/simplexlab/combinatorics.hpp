#pragma once

#include "simplexlab/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace simplexlab {

/// Exact batch counts. Arithmetic is checked; overflow raises
/// std::overflow_error instead of wrapping.
using Count = unsigned __int128;

std::string to_string(Count value);
double to_double(Count value);
/// Narrows to 64 bits, throwing std::overflow_error when the value does not fit.
std::uint64_t to_u64(Count value);

/// Number of m-multisets over an n-element set, C(n+m-1, m).
/// n = 0 is only accepted together with m = 0.
Count multichoose(long n, long m);

/// One (index, multiplicity) pair of a batch. Indices are 0-based.
struct BatchEntry {
  int index;
  int count;
  bool operator==(const BatchEntry&) const = default;
};

/// A size-b multiset of point indices, stored as index -> multiplicity with
/// strictly increasing indices.
struct Batch {
  std::vector<BatchEntry> entries;

  int size() const noexcept;
  /// Multiplicity of `index` (0 when absent).
  int multiplicity(int index) const noexcept;
  /// Expanded nondecreasing index sequence.
  std::vector<int> sequence() const;
  static Batch from_sequence(const std::vector<int>& sorted_indices);

  bool operator==(const Batch&) const = default;
};

/// Walks all size-b multisets over [0, N) in canonical order: nondecreasing
/// index sequences, ordered lexicographically. Ranks are positions in that
/// order, so disjoint rank ranges can be consumed independently.
class BatchEnumerator {
 public:
  BatchEnumerator(int num_points, int batch_size, Count first_rank = 0);

  bool done() const noexcept { return done_; }
  const std::vector<int>& sequence() const noexcept { return seq_; }
  Count rank() const noexcept { return rank_; }
  /// Fills `out` with the current batch.
  void current(Batch& out) const;
  Batch current() const;
  void advance();

  Count total() const noexcept { return total_; }

 private:
  int num_points_;
  int batch_size_;
  std::vector<int> seq_;
  Count rank_ = 0;
  Count total_ = 0;
  bool done_ = false;
};

/// Canonical rank <-> batch conversion.
std::vector<int> unrank_batch(int num_points, int batch_size, Count rank);
Count rank_batch(int num_points, const std::vector<int>& sorted_indices);

/// Calls `fn` for every batch of rank in [first, last).
void for_each_batch(int num_points, int batch_size, Count first, Count last,
                    const std::function<void(const Batch&)>& fn);

/// |B_{y,l}|: batches with exactly l slots from a class of size N_y.
Count count_batches_yl(long class_size, long num_points, long batch_size, long level);

/// Per-class, per-level batch counts.
struct BatchCensus {
  int num_points = 0;
  int num_classes = 0;
  int batch_size = 0;
  /// by_class_level[y][l] = |B_{y,l}|, l in [0, b].
  std::vector<std::vector<Count>> by_class_level;
  /// m[l] = sum_y |B_{y,l}|.
  std::vector<Count> m;
  Count total = 0;
};

BatchCensus census(int num_points, int batch_size, const LabelVector& labels);

/// Combinatorial factor K_{n,m}(y, l) = |B_{y,l}| / (N_y (N - N_y)); it is the
/// same for every admissible pair (n, m). Requires 1 <= l <= b-1, N_y >= 1 and
/// N - N_y >= 1.
double k_factor(const LabelVector& labels, int y, int level, int batch_size);

/// Same quantity by full enumeration:
/// (1 / (l (b-l))) * sum_{B in B_{y,l}} mult_{B_y}(n) * mult_{B_y^C}(m).
/// Requires y_n = y, y_m != y and multichoose(N, b) <= 10^6.
double brute_force_k_factor(const LabelVector& labels, int y, int level, int batch_size,
                            int n, int m);

}  // namespace simplexlab
