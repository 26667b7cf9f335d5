#pragma once

// Iterated remainder sets
//   S_0(n) = {1, ..., floor(n/2)},  S_j(n) = { n mod k : k in S_{j-1}(n) \ {0} },
// and Pierce chains a_0 = a, a_{i+1} = n mod a_i down to 0.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "remset/arith.hpp"
#include "remset/parallel.hpp"
#include "remset/remainders.hpp"

namespace remset {

/// Largest j for which the witness modulus (j+1)! still fits the 64-bit
/// recursion (x_{j+1} is reduced mod (j+2)!).
inline constexpr unsigned kMaxWitnessLevel = 19;

inline std::uint64_t factorial(unsigned k) {
  if (k > 20) throw std::overflow_error("factorial: " + std::to_string(k) + "! exceeds 64 bits");
  std::uint64_t f = 1;
  for (unsigned i = 2; i <= k; ++i) f *= i;
  return f;
}

struct IteratedProfile {
  std::uint64_t n = 0;
  /// levels[j][r] is set iff r in S_j(n). Level j is sized by max S_{j-1}.
  std::vector<std::vector<bool>> levels;
  std::vector<std::uint64_t> sizes;
  /// max S_j(n), or -1 for an empty level.
  std::vector<std::int64_t> maxima;
  /// Progression witnesses x_j mod (j+1)!, j <= min(depth, kMaxWitnessLevel).
  std::vector<std::uint64_t> witnesses;

  bool contains(std::size_t j, std::uint64_t r) const {
    return j < levels.size() && r < levels[j].size() &&
           levels[j][static_cast<std::size_t>(r)];
  }

  std::vector<std::uint64_t> members(std::size_t j) const {
    std::vector<std::uint64_t> out;
    for (std::size_t r = 0; r < levels.at(j).size(); ++r)
      if (levels[j][r]) out.push_back(r);
    return out;
  }

  /// max { j : S_j(n) nonempty } among the computed levels.
  std::size_t depth() const {
    std::size_t d = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j)
      if (sizes[j] > 0) d = j;
    return d;
  }
};

/// x_0 = 0, x_{j+1} = (n - (j+2) x_j) mod (j+2)!.
inline std::uint64_t progression_witness(std::uint64_t n, unsigned j) {
  if (j > kMaxWitnessLevel)
    throw std::out_of_range("progression_witness: j = " + std::to_string(j) + " too large");
  __int128 x = 0;
  for (unsigned i = 0; i < j; ++i) {
    const auto mod = static_cast<__int128>(factorial(i + 2));
    x = (static_cast<__int128>(n) - static_cast<__int128>(i + 2) * x) % mod;
    if (x < 0) x += mod;
  }
  return static_cast<std::uint64_t>(x);
}

/// Levels S_0 .. S_max_j, stopping after the first empty level.
inline IteratedProfile iterated_profile(std::uint64_t n, unsigned max_j) {
  if (n == 0) throw std::invalid_argument("iterated_profile: n must be positive");
  IteratedProfile prof;
  prof.n = n;

  std::vector<bool> level0(static_cast<std::size_t>(n / 2 + 1), false);
  for (std::uint64_t k = 1; k <= n / 2; ++k) level0[static_cast<std::size_t>(k)] = true;
  prof.levels.push_back(std::move(level0));
  prof.sizes.push_back(n / 2);
  prof.maxima.push_back(n >= 2 ? static_cast<std::int64_t>(n / 2) : -1);

  for (unsigned j = 1; j <= max_j && prof.sizes.back() > 0; ++j) {
    const auto& prev = prof.levels.back();
    const std::int64_t prev_max = prof.maxima.back();
    std::vector<bool> next(static_cast<std::size_t>(std::max<std::int64_t>(prev_max, 0)), false);
    std::uint64_t size = 0;
    std::int64_t mx = -1;
    for (std::size_t k = 1; k < prev.size(); ++k) {
      if (!prev[k]) continue;
      const auto r = static_cast<std::size_t>(n % k);
      if (!next[r]) {
        next[r] = true;
        ++size;
        mx = std::max<std::int64_t>(mx, static_cast<std::int64_t>(r));
      }
    }
    prof.levels.push_back(std::move(next));
    prof.sizes.push_back(size);
    prof.maxima.push_back(mx);
  }

  const auto w = std::min<std::size_t>(prof.levels.size() - 1, kMaxWitnessLevel);
  for (unsigned j = 0; j <= w; ++j) prof.witnesses.push_back(progression_witness(n, j));
  return prof;
}

/// Sizes and maxima of S_0 .. S_max_j without keeping the levels. Reuses its
/// buffers across calls; with a sieve, S_1 comes from the membership test.
class LevelSizer {
 public:
  struct Stats {
    std::vector<std::uint64_t> sizes;
    std::vector<std::int64_t> maxima;
  };

  explicit LevelSizer(const SpfTable* table = nullptr) : table_(table) {}

  Stats operator()(std::uint64_t n, unsigned max_j) {
    Stats st;
    st.sizes.push_back(n / 2);
    st.maxima.push_back(n >= 2 ? static_cast<std::int64_t>(n / 2) : -1);
    if (max_j == 0 || n < 2) return finish(st, max_j);

    cur_.clear();
    if (table_ != nullptr && n <= table_->limit()) {
      const auto nn = static_cast<std::uint32_t>(n);
      for (std::uint32_t r = 0; r <= (nn - 2) / 3; ++r)
        if (table_->reach(nn - r) > nn) cur_.push_back(r);
    } else {
      bump();
      for (std::uint64_t k = 1; k <= n / 2; ++k) mark(n % k);
    }
    record(st);

    for (unsigned j = 2; j <= max_j && !cur_.empty(); ++j) {
      prev_.swap(cur_);
      cur_.clear();
      bump();
      for (std::uint64_t k : prev_)
        if (k != 0) mark(n % k);
      record(st);
    }
    return finish(st, max_j);
  }

 private:
  void bump() {
    if (++gen_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      gen_ = 1;
    }
  }

  void mark(std::uint64_t r) {
    if (r >= stamp_.size()) stamp_.resize(static_cast<std::size_t>(r) + 1, 0);
    if (stamp_[r] != gen_) {
      stamp_[r] = gen_;
      cur_.push_back(r);
    }
  }

  void record(Stats& st) {
    st.sizes.push_back(cur_.size());
    st.maxima.push_back(cur_.empty() ? -1
                                     : static_cast<std::int64_t>(
                                           *std::max_element(cur_.begin(), cur_.end())));
  }

  static Stats finish(Stats& st, unsigned max_j) {
    st.sizes.resize(max_j + 1, 0);
    st.maxima.resize(max_j + 1, -1);
    return st;
  }

  const SpfTable* table_;
  std::vector<std::uint64_t> cur_, prev_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t gen_ = 1;
};

// ---------------------------------------------------------------------------
// Pierce chains

struct PierceChain {
  std::uint64_t n = 0;
  std::uint64_t a = 0;
  std::vector<std::uint64_t> terms;  // a_0, ..., a_t = 0

  std::size_t length() const noexcept { return terms.empty() ? 0 : terms.size() - 1; }
};

inline PierceChain pierce_chain(std::uint64_t n, std::uint64_t a) {
  if (a < 1 || a > n)
    throw std::invalid_argument("pierce_chain: need 1 <= a <= n");
  PierceChain c{n, a, {a}};
  while (a != 0) {
    a = n % a;
    c.terms.push_back(a);
  }
  return c;
}

/// P(n, a) without materializing the chain.
inline std::uint64_t pierce_length(std::uint64_t n, std::uint64_t a) {
  std::uint64_t t = 0;
  while (a != 0) {
    a = n % a;
    ++t;
  }
  return t;
}

struct PierceMax {
  std::uint64_t length = 0;
  std::uint64_t argmax = 0;  // least a attaining the maximum
};

/// P(n) = max_{1<=a<=n} P(n, a). For a < n/2 the start n - a is one step
/// longer, so only a > floor(n/2) can attain the maximum once n >= 3.
inline PierceMax pierce_max(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("pierce_max: n must be positive");
  if (n <= 2) return {1, 1};
  PierceMax best;
  for (std::uint64_t a = n / 2 + 1; a <= n; ++a) {
    const std::uint64_t len = pierce_length(n, a);
    if (len > best.length) best = {len, a};
  }
  return best;
}

/// P(n) = 1 + max{ j : S_j(n) nonempty } for n >= 3.
inline bool depth_relation_check(std::uint64_t n) {
  if (n < 3) throw std::invalid_argument("depth_relation_check: n must be >= 3");
  const auto prof = iterated_profile(n, static_cast<unsigned>(n));
  return pierce_max(n).length == prof.depth() + 1;
}

// ---------------------------------------------------------------------------
// Arithmetic progressions inside S_j(n)

/// Size below which the progression range may be empty or fall outside the
/// hypotheses: (j+2) * (j+2)!.
inline std::uint64_t witness_threshold(unsigned j) { return (j + 2) * factorial(j + 2); }

struct WitnessCheck {
  bool holds = true;
  bool below_threshold = false;
  std::uint64_t checked = 0;
  std::optional<std::uint64_t> first_violation;

  explicit operator bool() const noexcept { return holds; }
};

/// Verifies { r : j <= r <= (n-j-1)/(j+2), r = x_j mod (j+1)! } within S_j(n).
/// S_0 does not contain 0, so for j = 0 the range starts at r = 1.
inline WitnessCheck progression_witness_check(std::uint64_t n, unsigned j, std::uint64_t x_j) {
  WitnessCheck wc;
  wc.below_threshold = j > kMaxWitnessLevel || n < witness_threshold(j);
  if (j > kMaxWitnessLevel || n < j + 1) return wc;
  const std::uint64_t mod = factorial(j + 1);
  const std::uint64_t lo = std::max<std::uint64_t>(j, 1);
  const std::uint64_t hi = (n - j - 1) / (j + 2);
  if (lo > hi) return wc;
  const auto prof = iterated_profile(n, j);
  std::uint64_t r = lo + (x_j % mod + mod - lo % mod) % mod;
  for (; r <= hi; r += mod) {
    ++wc.checked;
    if (!prof.contains(j, r)) {
      wc.holds = false;
      wc.first_violation = r;
      return wc;
    }
  }
  return wc;
}

// ---------------------------------------------------------------------------
// Band classification

struct BandRow {
  std::uint64_t n = 0;
  unsigned j = 0;
  std::uint64_t s_j = 0;
  unsigned mod6 = 0;
  bool div5 = false;
};

/// Rows (n, s_j(n), n mod 6, 5 | n) for n in [from, to], ascending.
template <class Sink>
void bands_scan(std::uint64_t from, std::uint64_t to, unsigned j, Sink&& sink,
                unsigned threads = 1, const SpfTable* table = nullptr) {
  if (j < 1) throw std::invalid_argument("bands_scan: j must be >= 1");
  if (from == 0) from = 1;
  for_each_block_ordered(
      from, to, 2048, threads,
      [&](std::uint64_t lo, std::uint64_t hi) {
        LevelSizer sizer(table);
        std::vector<BandRow> rows;
        for (std::uint64_t n = lo; n <= hi; ++n)
          rows.push_back({n, j, sizer(n, j).sizes[j], static_cast<unsigned>(n % 6), n % 5 == 0});
        return rows;
      },
      [&](std::uint64_t, std::uint64_t, std::vector<BandRow>&& rows) {
        for (const auto& r : rows) sink(r);
      });
}

}  // namespace remset
