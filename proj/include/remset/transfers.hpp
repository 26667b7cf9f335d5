#pragma once

// Transfer sets T(n, n+1) = { r in S(n) : r + 1 not in S(n+1) }.
//
// S(n+1) is {0} together with r + 1 for every r in S(n) \ T(n, n+1), hence
//   s(n+1) = s(n) + 1 - |T(n, n+1)|.
// r is in T(n, n+1) exactly when r + 1 is the largest proper divisor of
// n - r. For odd n this pins r + 1 to a "suffix" of the ascending prime
// factorization of n + 1, which is what transfer_set_factored enumerates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "remset/arith.hpp"
#include "remset/remainders.hpp"

namespace remset {

enum class TransferKind {
  zero,     // r = 0, present iff n is prime
  third,    // r = (n - 2) / 3, present iff n = 2 (mod 3)
  generic,  // r + 1 = p_I^{x_I} ... p_l^{x_l}
};

inline const char* to_string(TransferKind k) {
  switch (k) {
    case TransferKind::zero: return "zero";
    case TransferKind::third: return "third";
    case TransferKind::generic: return "generic";
  }
  return "?";
}

template <class Int>
struct TransferElement {
  Int r{};
  TransferKind kind = TransferKind::generic;
  /// 1-based index I of the first prime in the suffix (generic only).
  unsigned suffix_index = 0;
  /// p = (n + 1) / (r + 1) - 1 (generic only).
  Int p{};

  friend bool operator==(const TransferElement&, const TransferElement&) = default;
};

template <class Int>
struct BasicTransferRecord {
  Int n{};
  std::vector<TransferElement<Int>> elements;  // ascending r

  std::size_t size() const noexcept { return elements.size(); }

  std::vector<Int> residues() const {
    std::vector<Int> out;
    for (const auto& e : elements) out.push_back(e.r);
    return out;
  }
};

using TransferRecord = BasicTransferRecord<std::uint64_t>;

namespace detail {

template <class Int>
bool probably_prime(const Int& v, const PrimalityOptions& opt) {
  if constexpr (std::is_same_v<Int, BigInt>) {
    return v >= 2 && is_prime(v, opt).prime;
  } else {
    return v >= 2 && is_prime(static_cast<std::uint64_t>(v)).prime;
  }
}

template <class Int>
Int prime_power(const PrimePower<Int>& f) {
  Int v{1};
  for (unsigned e = 0; e < f.exponent; ++e) v *= f.prime;
  return v;
}

// Tags an element of T(n, n+1) with its case. Throws if r matches none of
// them, which would contradict the characterization.
inline TransferElement<std::uint64_t> classify_transfer(
    std::uint64_t n, std::uint64_t r, const Factorization<std::uint64_t>& np1) {
  if (r == 0) return {0, TransferKind::zero, 0, 0};
  if (3 * r + 2 == n) return {r, TransferKind::third, 0, 0};
  std::uint64_t suffix = 1;
  for (std::size_t i = np1.factors.size(); i-- > 1;) {
    suffix *= prime_power(np1.factors[i]);
    if (suffix == r + 1)
      return {r, TransferKind::generic, static_cast<unsigned>(i + 1),
              (n + 1) / suffix - 1};
  }
  throw std::logic_error("classify_transfer: r = " + std::to_string(r) +
                         " in T(" + std::to_string(n) +
                         ", n+1) matches no known case");
}

}  // namespace detail

/// T(n, n+1) straight from the definition, using membership tests.
inline TransferRecord transfer_set_naive(std::uint64_t n, const SpfTable& table) {
  if (n == 0) throw std::invalid_argument("transfer_set_naive: n must be positive");
  detail::require_in_table(n + 1, table, "transfer_set_naive");
  TransferRecord rec;
  rec.n = n;
  if (n < 2) return rec;
  const auto np1 = factorize(n + 1, table);
  for (std::uint64_t r = 0; r < n / 2; ++r) {
    if (!is_remainder(n, r, table)) continue;
    const bool kept = r + 1 < (n + 1) / 2 && is_remainder(n + 1, r + 1, table);
    if (!kept) rec.elements.push_back(detail::classify_transfer(n, r, np1));
  }
  return rec;
}

/// T(n, n+1) for odd n >= 3 from the factorization of n + 1:
///   generic r:  r + 1 = p_I^{x_I} ... p_l^{x_l} with 2 <= I <= l,
///               p = (n+1)/(r+1) - 1 prime, p <= p_I, 1 <= r < (n-2)/3;
///   r = 0       iff n is prime;
///   r = (n-2)/3 iff n = 2 (mod 3).
/// Primality of p and n is decided by is_prime, so for big n the result is
/// only as certain as the probable-prime test.
template <class Int>
BasicTransferRecord<Int> transfer_set_factored(const Int& n,
                                               const Factorization<Int>& np1,
                                               const PrimalityOptions& opt = {}) {
  if (n % 2 == 0)
    throw std::invalid_argument("transfer_set_factored: n must be odd (use even_step)");
  if (n < 3) throw std::invalid_argument("transfer_set_factored: n must be >= 3");
  if (np1.value != n + 1 || np1.product() != np1.value)
    throw std::invalid_argument("transfer_set_factored: factorization does not match n + 1");

  BasicTransferRecord<Int> rec;
  rec.n = n;
  if (detail::probably_prime(n, opt)) rec.elements.push_back({Int{0}, TransferKind::zero, 0, Int{0}});
  if (n % 3 == 2) rec.elements.push_back({(n - 2) / 3, TransferKind::third, 0, Int{0}});

  const Int np1v = n + 1;
  Int suffix{1};
  for (std::size_t i = np1.factors.size(); i-- > 1;) {
    suffix *= detail::prime_power(np1.factors[i]);
    const Int r = suffix - 1;
    if (r < 1 || !(3 * r < n - 2)) continue;
    const Int p = np1v / suffix - 1;
    if (p > np1.factors[i].prime) continue;
    if (!detail::probably_prime(p, opt)) continue;
    rec.elements.push_back({r, TransferKind::generic, static_cast<unsigned>(i + 1), p});
  }
  std::sort(rec.elements.begin(), rec.elements.end(),
            [](const auto& a, const auto& b) { return a.r < b.r; });
  return rec;
}

/// Closed form for even n >= 2: {(n-2)/3} if n = 2 (mod 3), else empty.
inline TransferRecord even_step(std::uint64_t n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("even_step: n must be even and >= 2");
  TransferRecord rec;
  rec.n = n;
  if (n % 3 == 2)
    rec.elements.push_back({(n - 2) / 3, n == 2 ? TransferKind::zero : TransferKind::third, 0, 0});
  return rec;
}

/// T(n, n+1) by the fastest applicable route.
inline TransferRecord transfer_set(std::uint64_t n, const SpfTable& table) {
  if (n % 2 == 0 && n >= 2) return even_step(n);
  if (n < 3) return transfer_set_naive(n, table);
  return transfer_set_factored(n, factorize(n + 1, table));
}

/// |T(n, n+1)| <= log_3(log_2 n) + 4 for odd n >= 3.
inline double transfer_bound(std::uint64_t n) {
  return std::log(std::log2(static_cast<double>(n))) / std::log(3.0) + 4.0;
}

inline bool transfer_bound_check(std::uint64_t n, const TransferRecord& record) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("transfer_bound_check: n must be odd and >= 3");
  return static_cast<double>(record.size()) <= transfer_bound(n);
}

// ---------------------------------------------------------------------------
// Difference scans

struct DiffRow {
  std::uint64_t n = 0;
  std::uint64_t s_n = 0;
  std::uint64_t s_next = 0;
  std::int64_t diff = 0;
};

/// Running summary of s(n+1) - s(n).
struct DiffSummary {
  std::uint64_t rows = 0;
  std::int64_t max_diff = std::numeric_limits<std::int64_t>::min();
  std::int64_t min_diff = std::numeric_limits<std::int64_t>::max();
  /// decrease d >= 1 -> least n with s(n+1) - s(n) = -d
  std::map<std::uint64_t, std::uint64_t> first_decrease;

  void observe(const DiffRow& row) {
    ++rows;
    max_diff = std::max(max_diff, row.diff);
    min_diff = std::min(min_diff, row.diff);
    if (row.diff < 0) first_decrease.try_emplace(static_cast<std::uint64_t>(-row.diff), row.n);
  }
};

/// Rows (n, s(n), s(n+1), diff) for n in [from, to], computed by direct
/// counting. Needs to + 1 <= table.limit().
template <class Sink>
DiffSummary diff_scan(std::uint64_t from, std::uint64_t to, const SpfTable& table,
                      Sink&& sink, unsigned threads = 1,
                      DiffSummary summary = {}) {
  if (from == 0) from = 1;
  if (from > to) return summary;
  detail::require_in_table(to + 1, table, "diff_scan");
  std::optional<std::uint64_t> prev;
  s_scan(from, to + 1, table,
         [&](std::uint64_t n, std::uint32_t s) {
           if (prev) {
             const DiffRow row{n - 1, *prev, s,
                               static_cast<std::int64_t>(s) - static_cast<std::int64_t>(*prev)};
             summary.observe(row);
             sink(row);
           }
           prev = s;
         },
         threads);
  return summary;
}

inline DiffSummary diff_scan(std::uint64_t to, const SpfTable& table, unsigned threads = 1) {
  return diff_scan(1, to, table, [](const DiffRow&) {}, threads);
}

/// s(1), ..., s(to) from the recurrence s(n+1) = s(n) + 1 - |T(n, n+1)|,
/// with T taken from even_step / transfer_set_factored.
inline std::vector<std::uint32_t> s_values_by_transfers(std::uint64_t to,
                                                        const SpfTable& table) {
  std::vector<std::uint32_t> s;
  if (to == 0) return s;
  detail::require_in_table(to, table, "s_values_by_transfers");
  s.reserve(static_cast<std::size_t>(to));
  s.push_back(0);
  for (std::uint64_t n = 1; n < to; ++n) {
    const std::size_t t = n == 1 ? 0 : transfer_set(n, table).size();
    s.push_back(static_cast<std::uint32_t>(s.back() + 1 - t));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Arbitrarily large decreases: the prime chain 3, 11, 131, n4, ...

/// Raised when the x search of a construction step runs out of budget.
/// `completed` and `next_x` allow the search to be resumed.
class BudgetExceeded;

/// A pairwise-coprime block of the factorization of n_j + 1. Prime blocks
/// are exact; cofactor blocks only carry a lower bound on their smallest
/// prime factor.
struct FactorBlock {
  BigInt value;
  unsigned exponent = 1;
  bool prime = false;
  BigInt spf_lower_bound;
};

struct ConstructionStep {
  unsigned j = 0;
  BigInt n;
  bool hard_wired = false;
  BigInt primorial;  // P, searched steps only
  BigInt y;          // CRT residue, searched steps only
  std::uint64_t x = 0;
  BigInt Q;  // n_j + 1 = (n_{j-1} + 1) * Q
  PrimalityCertificate certificate;
  std::vector<FactorBlock> blocks;  // of n_j + 1
  std::vector<BigInt> verified_transfers;
};

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::vector<ConstructionStep> completed, std::uint64_t next_x)
      : std::runtime_error("construction: x budget exhausted at step " +
                           std::to_string(completed.size() + 1) + ", resume from x = " +
                           std::to_string(next_x)),
        completed(std::move(completed)),
        next_x(next_x) {}

  std::vector<ConstructionStep> completed;
  std::uint64_t next_x;
};

struct ConstructionOptions {
  PrimalityOptions primality;
  std::uint64_t x_budget = 1'000'000;
  /// First x tried by the next searched step (for resuming).
  std::uint64_t start_x = 1;
  /// Largest n_j whose primorial we are willing to form.
  std::uint64_t max_primorial_bound = 100'000'000;
};

/// Checks r in T(n, n+1) through "r + 1 is the largest proper divisor of
/// n - r": p = (n+1)/(r+1) - 1 must be (probably) prime and no prime factor
/// of r + 1 may be below p. Prime factors of r + 1 are bounded below through
/// the blocks of n + 1 it shares a factor with.
inline bool verify_transfer(const BigInt& n, std::span<const FactorBlock> blocks,
                            const BigInt& r, const PrimalityOptions& opt = {}) {
  if (r < 0 || r >= n / 2) return false;
  const BigInt np1 = n + 1;
  const BigInt d = r + 1;
  if (np1 % d != 0) return false;
  const BigInt p = np1 / d - 1;
  if (!detail::probably_prime(p, opt)) return false;
  for (const auto& b : blocks) {
    if (boost::multiprecision::gcd(d, b.value) == 1) continue;
    const BigInt& least = b.prime ? b.value : b.spf_lower_bound;
    if (least < p) return false;
  }
  return true;
}

namespace detail {

inline ConstructionStep hard_wired_step(unsigned j, std::uint64_t n, std::uint64_t q,
                                        const PrimalityOptions& opt) {
  ConstructionStep st;
  st.j = j;
  st.n = n;
  st.hard_wired = true;
  st.Q = q;
  st.certificate = is_prime(n).certificate;
  const auto tbl = build_spf(n + 1);
  const auto f = factorize(n + 1, tbl);
  Factorization<BigInt> fb;
  fb.value = n + 1;
  for (const auto& pp : f.factors) {
    fb.factors.push_back({BigInt{pp.prime}, pp.exponent});
    st.blocks.push_back({BigInt{pp.prime}, pp.exponent, true, BigInt{pp.prime}});
  }
  for (const auto& e : transfer_set_factored(BigInt{n}, fb, opt).elements)
    if (verify_transfer(st.n, st.blocks, e.r, opt)) st.verified_transfers.push_back(e.r);
  return st;
}

}  // namespace detail

/// Extends `done` (possibly empty) to J steps. Steps 1-3 are the fixed base
/// 3 = 2^2 - 1, 11 = 2^2 * 3 - 1, 131 = 2^2 * 3 * 11 - 1. Each later step
/// takes P = primorial(n_j), the CRT residue y, and the least x >= 1 with
/// (n_j + 1)(xP + y) - 1 probably prime.
inline std::vector<ConstructionStep> continue_decrease_chain(
    std::vector<ConstructionStep> done, unsigned J, const ConstructionOptions& opt = {}) {
  if (J == 0) throw std::invalid_argument("construct_decrease_chain: steps must be >= 1");
  static constexpr std::uint64_t base[] = {3, 11, 131};
  static constexpr std::uint64_t base_q[] = {4, 3, 11};
  std::uint64_t start_x = std::max<std::uint64_t>(opt.start_x, 1);

  while (done.size() < J) {
    const auto j = static_cast<unsigned>(done.size() + 1);
    if (j <= 3) {
      done.push_back(detail::hard_wired_step(j, base[j - 1], base_q[j - 1], opt.primality));
      continue;
    }
    const ConstructionStep& prev = done.back();
    if (prev.n > opt.max_primorial_bound)
      throw ResourceError("construction: primorial of n_" + std::to_string(j - 1) + " (" +
                          std::to_string(prev.n.str().size()) +
                          " digits) is beyond the configured bound");
    const auto bound = static_cast<std::uint64_t>(prev.n);
    const auto primes = primes_up_to(bound);
    ConstructionStep st;
    st.j = j;
    st.primorial = primorial(bound);
    st.y = crt_select_residue(prev.n, primes);
    const BigInt np1 = prev.n + 1;

    bool found = false;
    for (std::uint64_t i = 0; i < opt.x_budget; ++i) {
      const std::uint64_t x = start_x + i;
      const BigInt q = st.primorial * x + st.y;
      const BigInt cand = np1 * q - 1;
      const auto res = is_prime(cand, opt.primality);
      if (!res) continue;
      st.x = x;
      st.Q = q;
      st.n = cand;
      st.certificate = res.certificate;
      found = true;
      break;
    }
    if (!found) throw BudgetExceeded(std::move(done), start_x + opt.x_budget);
    start_x = 1;
    if (boost::multiprecision::gcd(st.Q, st.primorial) != 1)
      throw std::logic_error("construction: Q shares a factor with the primorial");

    st.blocks = prev.blocks;
    st.blocks.push_back({st.Q, 1, false, prev.n + 1});

    std::vector<BigInt> candidates{BigInt{0}};
    for (const auto& r : prev.verified_transfers) candidates.push_back((r + 1) * st.Q - 1);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (const auto& r : candidates)
      if (verify_transfer(st.n, st.blocks, r, opt.primality)) st.verified_transfers.push_back(r);
    done.push_back(std::move(st));
  }
  return done;
}

inline std::vector<ConstructionStep> construct_decrease_chain(
    unsigned J, const ConstructionOptions& opt = {}) {
  return continue_decrease_chain({}, J, opt);
}

}  // namespace remset
