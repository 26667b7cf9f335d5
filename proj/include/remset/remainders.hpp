#pragma once

// Remainder sets S(n) = { n mod k : 1 <= k <= floor(n/2) } and s(n) = |S(n)|.
//
// Everything here rests on one equivalence: for 0 <= r < floor(n/2),
// r is in S(n) iff n - r has a proper divisor >= r + 1, i.e. iff the largest
// proper divisor (n - r) / spf(n - r) is at least r + 1. With the sieve's
// reach(m) = m + m / spf(m) that reads reach(n - r) > n.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "remset/arith.hpp"
#include "remset/parallel.hpp"

namespace remset {

/// S(n) as a bitmap over residues 0 .. floor(n/2) - 1.
struct RemainderSet {
  std::uint64_t n = 0;
  std::vector<bool> members;
  std::uint64_t count = 0;

  bool contains(std::uint64_t r) const {
    return r < members.size() && members[static_cast<std::size_t>(r)];
  }

  std::vector<std::uint64_t> to_vector() const {
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::size_t r = 0; r < members.size(); ++r)
      if (members[r]) out.push_back(r);
    return out;
  }

  std::uint64_t max() const {
    for (std::size_t r = members.size(); r-- > 0;)
      if (members[r]) return r;
    throw std::domain_error("RemainderSet::max: empty set");
  }
};

namespace detail {

inline void require_in_table(std::uint64_t n, const SpfTable& table,
                             const char* what) {
  if (n > table.limit())
    throw std::out_of_range(std::string(what) + ": n = " + std::to_string(n) +
                            " exceeds sieve limit " +
                            std::to_string(table.limit()));
}

// Number of m in [lo, hi] with reach(m) > n. Hot loop of every scan.
inline std::uint32_t count_reach_above(const SpfTable& table, std::uint32_t lo,
                                       std::uint32_t hi, std::uint32_t n) {
  const auto reach = table.reach_range(lo, hi);
  const std::uint32_t* p = reach.data();
  const std::size_t len = reach.size();
  std::uint32_t c = 0;
  for (std::size_t i = 0; i < len; ++i) c += p[i] > n;
  return c;
}

}  // namespace detail

/// O(1) membership test; requires r < floor(n/2) and n <= table.limit().
inline bool is_remainder(std::uint64_t n, std::uint64_t r, const SpfTable& table) {
  if (r >= n / 2)
    throw std::invalid_argument("is_remainder: r = " + std::to_string(r) +
                                " not below floor(n/2) = " + std::to_string(n / 2));
  detail::require_in_table(n, table, "is_remainder");
  return table.reach(static_cast<std::uint32_t>(n - r)) > n;
}

/// s(n) by counting over the only residues that can occur, r <= (n-2)/3.
inline std::uint64_t s_value(std::uint64_t n, const SpfTable& table) {
  if (n < 2) return 0;
  detail::require_in_table(n, table, "s_value");
  const auto nn = static_cast<std::uint32_t>(n);
  const std::uint32_t rmax = (nn - 2) / 3;
  return detail::count_reach_above(table, nn - rmax, nn, nn);
}

/// Full S(n). Every residue below floor(n/2) is tested, so the (n-2)/3 cap
/// is an observable property here rather than an assumption.
inline RemainderSet remainder_set(std::uint64_t n, const SpfTable& table) {
  if (n == 0) throw std::invalid_argument("remainder_set: n must be positive");
  detail::require_in_table(n, table, "remainder_set");
  RemainderSet rs;
  rs.n = n;
  rs.members.assign(static_cast<std::size_t>(n / 2), false);
  for (std::uint64_t r = 0; r < n / 2; ++r) {
    if (table.reach(static_cast<std::uint32_t>(n - r)) > n) {
      rs.members[static_cast<std::size_t>(r)] = true;
      ++rs.count;
    }
  }
  return rs;
}

/// Streams (n, s(n)) for n in [from, to] in ascending order. Blocks may be
/// computed on several threads; the sink is only called from this thread.
template <class Sink>
void s_scan(std::uint64_t from, std::uint64_t to, const SpfTable& table,
            Sink&& sink, unsigned threads = 1,
            std::uint64_t block = std::uint64_t{1} << 14) {
  if (from > to) return;
  detail::require_in_table(to, table, "s_scan");
  for_each_block_ordered(
      from, to, block, threads,
      [&](std::uint64_t lo, std::uint64_t hi) {
        std::vector<std::uint32_t> out;
        out.reserve(static_cast<std::size_t>(hi - lo + 1));
        for (std::uint64_t n = lo; n <= hi; ++n)
          out.push_back(static_cast<std::uint32_t>(s_value(n, table)));
        return out;
      },
      [&](std::uint64_t lo, std::uint64_t, std::vector<std::uint32_t>&& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) sink(lo + i, vals[i]);
      });
}

/// s(from), ..., s(to) collected into a vector.
inline std::vector<std::uint32_t> s_values(std::uint64_t from, std::uint64_t to,
                                           const SpfTable& table,
                                           unsigned threads = 1) {
  std::vector<std::uint32_t> out;
  if (from <= to) out.reserve(static_cast<std::size_t>(to - from + 1));
  s_scan(from, to, table,
         [&](std::uint64_t, std::uint32_t s) { out.push_back(s); }, threads);
  return out;
}

/// Buckets S(n) \ {0} by p = spf(n - r); the buckets are the sets R_p(n)
/// and their sizes sum to s(n) - 1.
inline std::map<std::uint32_t, std::uint64_t> decompose_by_least_prime(
    std::uint64_t n, const SpfTable& table) {
  if (n < 2) throw std::invalid_argument("decompose_by_least_prime: n must be >= 2");
  detail::require_in_table(n, table, "decompose_by_least_prime");
  std::map<std::uint32_t, std::uint64_t> buckets;
  const auto nn = static_cast<std::uint32_t>(n);
  for (std::uint32_t r = 1; r <= (nn - 2) / 3; ++r) {
    const std::uint32_t m = nn - r;
    if (table.reach(m) > nn) ++buckets[table.spf(m)];
  }
  return buckets;
}

// ---------------------------------------------------------------------------
// D_p: integers whose smallest prime factor is p.

using Rational = boost::rational<std::int64_t>;

/// Largest p accepted by count_dp_interval.
inline constexpr std::uint32_t kMaxDpPrime = 31;

struct DpCount {
  std::uint32_t p = 0;
  std::uint64_t a = 0;
  std::uint64_t t = 0;
  std::uint64_t exact_count = 0;
  Rational density_term;  // t * (1/p) * prod_{q<p} (1 - 1/q)
  Rational error;         // exact_count - density_term
  std::uint64_t error_bound = 0;  // 2^{pi(p-1)}

  bool within_bound() const {
    return boost::abs(error) <= Rational(static_cast<std::int64_t>(error_bound));
  }
};

/// |D_p cap [a+1, a+t]| counted from the sieve, compared with its density.
inline DpCount count_dp_interval(std::uint32_t p, std::uint64_t a, std::uint64_t t,
                                 const SpfTable& table) {
  if (p > kMaxDpPrime)
    throw std::invalid_argument("count_dp_interval: p must be <= " +
                                std::to_string(kMaxDpPrime));
  if (!is_prime(std::uint64_t{p}))
    throw std::invalid_argument("count_dp_interval: p = " + std::to_string(p) +
                                " is not prime");
  if (t == 0) throw std::invalid_argument("count_dp_interval: t must be positive");
  detail::require_in_table(a + t, table, "count_dp_interval");

  DpCount d;
  d.p = p;
  d.a = a;
  d.t = t;
  for (std::uint64_t m = std::max<std::uint64_t>(a + 1, 2); m <= a + t; ++m)
    if (table.spf(static_cast<std::uint32_t>(m)) == p) ++d.exact_count;

  std::int64_t num = 1, den = p;
  unsigned smaller = 0;
  for (std::uint32_t q : detail::kSmallPrimes) {
    if (q >= p) break;
    num *= q - 1;
    den *= q;
    ++smaller;
  }
  d.density_term = Rational(num, den) * static_cast<std::int64_t>(t);
  d.error = Rational(static_cast<std::int64_t>(d.exact_count)) - d.density_term;
  d.error_bound = std::uint64_t{1} << smaller;
  return d;
}

}  // namespace remset
