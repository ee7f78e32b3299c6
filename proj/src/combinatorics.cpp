#include "simplexlab/combinatorics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace simplexlab {

namespace {

Count checked_mul(Count a, Count b) {
  Count out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw std::overflow_error("batch count overflows 128-bit arithmetic");
  }
  return out;
}

Count checked_add(Count a, Count b) {
  Count out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw std::overflow_error("batch count overflows 128-bit arithmetic");
  }
  return out;
}

Count gcd(Count a, Count b) {
  while (b != 0) {
    const Count t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr Count kBruteForceLimit = 1'000'000;

}  // namespace

std::string to_string(Count value) {
  if (value == 0) return "0";
  std::string out;
  while (value > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double to_double(Count value) { return static_cast<double>(value); }

std::uint64_t to_u64(Count value) {
  if (value > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("count " + to_string(value) + " does not fit in 64 bits");
  }
  return static_cast<std::uint64_t>(value);
}

Count multichoose(long n, long m) {
  if (n < 0 || m < 0) throw std::invalid_argument("multichoose: arguments must be >= 0");
  if (n == 0) {
    if (m == 0) return 1;
    throw std::invalid_argument("multichoose: n = 0 is only defined for m = 0");
  }
  // C(n+m-1, k) with k = min(m, n-1), built as a running binomial so every
  // intermediate is itself an exact binomial coefficient.
  const long top = n + m - 1;
  const long k = std::min(m, n - 1);
  Count result = 1;
  for (long i = 1; i <= k; ++i) {
    const Count num = static_cast<Count>(top - k + i);
    const Count den = static_cast<Count>(i);
    const Count g = gcd(result, den);
    // (result/g) * (num / (den/g)) is exact since den/g divides num.
    result = checked_mul(result / g, num / (den / g));
  }
  return result;
}

int Batch::size() const noexcept {
  int total = 0;
  for (const auto& e : entries) total += e.count;
  return total;
}

int Batch::multiplicity(int index) const noexcept {
  for (const auto& e : entries) {
    if (e.index == index) return e.count;
  }
  return 0;
}

std::vector<int> Batch::sequence() const {
  std::vector<int> out;
  for (const auto& e : entries) out.insert(out.end(), static_cast<std::size_t>(e.count), e.index);
  return out;
}

Batch Batch::from_sequence(const std::vector<int>& sorted_indices) {
  Batch out;
  for (int idx : sorted_indices) {
    if (!out.entries.empty() && out.entries.back().index == idx) {
      ++out.entries.back().count;
    } else {
      if (!out.entries.empty() && out.entries.back().index > idx) {
        throw std::invalid_argument("Batch::from_sequence: indices must be nondecreasing");
      }
      out.entries.push_back({idx, 1});
    }
  }
  return out;
}

std::vector<int> unrank_batch(int num_points, int batch_size, Count rank) {
  if (num_points < 1 || batch_size < 1) {
    throw std::invalid_argument("unrank_batch: need N >= 1 and b >= 1");
  }
  if (rank >= multichoose(num_points, batch_size)) {
    throw std::out_of_range("unrank_batch: rank beyond the number of batches");
  }
  std::vector<int> seq(static_cast<std::size_t>(batch_size));
  int value = 0;
  for (int pos = 0; pos < batch_size; ++pos) {
    for (;; ++value) {
      // Completions with seq[pos] == value: the remaining slots draw from
      // [value, N).
      const Count block = multichoose(num_points - value, batch_size - pos - 1);
      if (rank < block) break;
      rank -= block;
    }
    seq[static_cast<std::size_t>(pos)] = value;
  }
  return seq;
}

Count rank_batch(int num_points, const std::vector<int>& sorted_indices) {
  const int b = static_cast<int>(sorted_indices.size());
  Count rank = 0;
  int value = 0;
  for (int pos = 0; pos < b; ++pos) {
    const int target = sorted_indices[static_cast<std::size_t>(pos)];
    if (target < value || target >= num_points) {
      throw std::invalid_argument("rank_batch: indices must be nondecreasing and within [0, N)");
    }
    for (; value < target; ++value) {
      rank = checked_add(rank, multichoose(num_points - value, b - pos - 1));
    }
  }
  return rank;
}

BatchEnumerator::BatchEnumerator(int num_points, int batch_size, Count first_rank)
    : num_points_(num_points), batch_size_(batch_size) {
  if (num_points < 1 || batch_size < 1) {
    throw std::invalid_argument("batch enumeration needs N >= 1 and b >= 1");
  }
  total_ = multichoose(num_points, batch_size);
  rank_ = first_rank;
  if (first_rank >= total_) {
    done_ = true;
    return;
  }
  seq_ = unrank_batch(num_points, batch_size, first_rank);
}

void BatchEnumerator::current(Batch& out) const {
  out.entries.clear();
  for (int idx : seq_) {
    if (!out.entries.empty() && out.entries.back().index == idx) {
      ++out.entries.back().count;
    } else {
      out.entries.push_back({idx, 1});
    }
  }
}

Batch BatchEnumerator::current() const {
  Batch out;
  current(out);
  return out;
}

void BatchEnumerator::advance() {
  if (done_) return;
  ++rank_;
  int pos = batch_size_ - 1;
  while (pos >= 0 && seq_[static_cast<std::size_t>(pos)] == num_points_ - 1) --pos;
  if (pos < 0) {
    done_ = true;
    return;
  }
  const int value = seq_[static_cast<std::size_t>(pos)] + 1;
  std::fill(seq_.begin() + pos, seq_.end(), value);
}

void for_each_batch(int num_points, int batch_size, Count first, Count last,
                    const std::function<void(const Batch&)>& fn) {
  BatchEnumerator it(num_points, batch_size, first);
  Batch batch;
  for (; !it.done() && it.rank() < last; it.advance()) {
    it.current(batch);
    fn(batch);
  }
}

Count count_batches_yl(long class_size, long num_points, long batch_size, long level) {
  if (level < 0 || level > batch_size) {
    throw std::invalid_argument("count_batches_yl: need 0 <= l <= b");
  }
  if (class_size < 0 || class_size > num_points) {
    throw std::invalid_argument("count_batches_yl: need 0 <= N_y <= N");
  }
  const long rest = num_points - class_size;
  if ((class_size == 0 && level > 0) || (rest == 0 && batch_size - level > 0)) return 0;
  return checked_mul(multichoose(class_size, level), multichoose(rest, batch_size - level));
}

BatchCensus census(int num_points, int batch_size, const LabelVector& labels) {
  if (static_cast<int>(labels.size()) != num_points) {
    throw std::invalid_argument("census: label vector length differs from N");
  }
  BatchCensus out;
  out.num_points = num_points;
  out.num_classes = labels.num_classes();
  out.batch_size = batch_size;
  out.total = multichoose(num_points, batch_size);
  out.m.assign(static_cast<std::size_t>(batch_size) + 1, 0);
  out.by_class_level.resize(static_cast<std::size_t>(labels.num_classes()));
  for (int y = 0; y < labels.num_classes(); ++y) {
    auto& row = out.by_class_level[static_cast<std::size_t>(y)];
    row.resize(static_cast<std::size_t>(batch_size) + 1);
    for (int l = 0; l <= batch_size; ++l) {
      row[static_cast<std::size_t>(l)] =
          count_batches_yl(labels.count(y), num_points, batch_size, l);
      out.m[static_cast<std::size_t>(l)] =
          checked_add(out.m[static_cast<std::size_t>(l)], row[static_cast<std::size_t>(l)]);
    }
  }
  return out;
}

double k_factor(const LabelVector& labels, int y, int level, int batch_size) {
  if (level < 1 || level > batch_size - 1) {
    throw std::invalid_argument("k_factor: need 1 <= l <= b-1");
  }
  if (y < 0 || y >= labels.num_classes()) throw std::invalid_argument("k_factor: bad class");
  const long n = static_cast<long>(labels.size());
  const long ny = labels.count(y);
  if (ny < 1 || n - ny < 1) {
    throw std::invalid_argument("k_factor: class and its complement must both be nonempty");
  }
  const Count count = count_batches_yl(ny, n, batch_size, level);
  return to_double(count) / (static_cast<double>(ny) * static_cast<double>(n - ny));
}

double brute_force_k_factor(const LabelVector& labels, int y, int level, int batch_size, int n,
                            int m) {
  const int num_points = static_cast<int>(labels.size());
  if (n < 0 || n >= num_points || m < 0 || m >= num_points) {
    throw std::invalid_argument("brute_force_k_factor: index out of range");
  }
  if (labels[static_cast<std::size_t>(n)] != y || labels[static_cast<std::size_t>(m)] == y) {
    throw std::invalid_argument("brute_force_k_factor: need y_n = y and y_m != y");
  }
  if (level < 1 || level > batch_size - 1) {
    throw std::invalid_argument("brute_force_k_factor: need 1 <= l <= b-1");
  }
  if (multichoose(num_points, batch_size) > kBruteForceLimit) {
    throw std::invalid_argument("brute_force_k_factor: instance exceeds the 10^6 batch guard");
  }
  long sum = 0;
  for_each_batch(num_points, batch_size, 0, multichoose(num_points, batch_size),
                 [&](const Batch& batch) {
                   int in_class = 0;
                   for (const auto& e : batch.entries) {
                     if (labels[static_cast<std::size_t>(e.index)] == y) in_class += e.count;
                   }
                   if (in_class != level) return;
                   sum += static_cast<long>(batch.multiplicity(n)) * batch.multiplicity(m);
                 });
  return static_cast<double>(sum) / (static_cast<double>(level) * (batch_size - level));
}

}  // namespace simplexlab
