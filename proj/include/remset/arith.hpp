#pragma once

// Integer machinery shared by every other module: smallest-prime-factor
// sieve, factorization, primality, primorials and the CRT residue used by
// the decrease construction.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace remset {

using BigInt = boost::multiprecision::cpp_int;

/// Raised when a request would exceed a configured memory or size budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default cap on sieve memory (spf + reach arrays).
inline constexpr std::size_t kDefaultSieveBudget = std::size_t{1} << 30;

/// Smallest-prime-factor table over [2, limit].
///
/// Alongside spf the table caches reach(m) = m + m / spf(m), i.e. m plus its
/// largest proper divisor. A residue r belongs to S(n) exactly when
/// reach(n - r) > n, which turns membership into one comparison.
class SpfTable {
 public:
  SpfTable() = default;

  std::uint32_t limit() const noexcept { return limit_; }

  /// Unchecked access, 2 <= m <= limit.
  std::uint32_t spf(std::uint32_t m) const noexcept { return spf_[m]; }
  std::uint32_t reach(std::uint32_t m) const noexcept { return reach_[m]; }

  std::uint32_t spf_at(std::uint64_t m) const {
    check(m);
    return spf_[static_cast<std::uint32_t>(m)];
  }

  bool is_prime(std::uint64_t m) const {
    if (m < 2) return false;
    return spf_at(m) == m;
  }

  /// All primes <= limit, ascending.
  std::span<const std::uint32_t> primes() const noexcept { return primes_; }

  /// Contiguous view of reach(m) for m in [first, last].
  std::span<const std::uint32_t> reach_range(std::uint32_t first,
                                             std::uint32_t last) const noexcept {
    return {reach_.data() + first, static_cast<std::size_t>(last - first + 1)};
  }

  /// Number of primes strictly below x.
  std::size_t prime_count_below(std::uint64_t x) const {
    if (x > std::uint64_t{limit_} + 1)
      throw std::out_of_range("prime_count_below: " + std::to_string(x) +
                              " exceeds sieve limit");
    return static_cast<std::size_t>(
        std::lower_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
  }

 private:
  friend SpfTable build_spf(std::uint64_t, std::size_t);

  void check(std::uint64_t m) const {
    if (m < 2 || m > limit_)
      throw std::out_of_range("value " + std::to_string(m) +
                              " outside sieve range [2, " +
                              std::to_string(limit_) + "]");
  }

  std::uint32_t limit_ = 0;
  std::vector<std::uint32_t> spf_;
  std::vector<std::uint32_t> reach_;
  std::vector<std::uint32_t> primes_;
};

/// Linear (Euler) sieve. Every composite is struck exactly once, by its
/// smallest prime factor.
inline SpfTable build_spf(std::uint64_t limit,
                          std::size_t memory_budget = kDefaultSieveBudget) {
  if (limit < 2) throw std::invalid_argument("build_spf: limit must be >= 2");
  if (limit >= std::numeric_limits<std::uint32_t>::max())
    throw ResourceError("build_spf: limit exceeds 32-bit sieve entries");
  const std::size_t bytes = 2 * sizeof(std::uint32_t) * (limit + 1);
  if (bytes > memory_budget)
    throw ResourceError("build_spf: limit " + std::to_string(limit) +
                        " needs " + std::to_string(bytes) +
                        " bytes, budget is " + std::to_string(memory_budget));

  SpfTable t;
  const auto lim = static_cast<std::uint32_t>(limit);
  t.limit_ = lim;
  t.spf_.assign(std::size_t{lim} + 1, 0);
  for (std::uint32_t i = 2; i <= lim; ++i) {
    if (t.spf_[i] == 0) {
      t.spf_[i] = i;
      t.primes_.push_back(i);
    }
    const std::uint32_t si = t.spf_[i];
    for (std::uint32_t p : t.primes_) {
      if (p > si || std::uint64_t{p} * i > lim) break;
      t.spf_[std::size_t{p} * i] = p;
    }
  }
  t.reach_.assign(std::size_t{lim} + 1, 0);
  for (std::uint32_t m = 2; m <= lim; ++m) t.reach_[m] = m + m / t.spf_[m];
  return t;
}

/// Primes <= bound by a plain Eratosthenes sieve (no spf storage).
inline std::vector<std::uint32_t> primes_up_to(std::uint64_t bound) {
  if (bound < 2) return {};
  if (bound >= std::numeric_limits<std::uint32_t>::max())
    throw ResourceError("primes_up_to: bound exceeds 32-bit range");
  const auto lim = static_cast<std::uint32_t>(bound);
  std::vector<bool> composite(std::size_t{lim} + 1, false);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 2; i <= lim; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (std::uint64_t k = std::uint64_t{i} * i; k <= lim; k += i)
      composite[static_cast<std::size_t>(k)] = true;
  }
  return out;
}

template <class Int>
struct PrimePower {
  Int prime;
  unsigned exponent = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// value = prod prime^exponent, primes strictly increasing.
template <class Int>
struct Factorization {
  Int value{1};
  std::vector<PrimePower<Int>> factors;

  std::size_t size() const noexcept { return factors.size(); }

  Int product() const {
    Int acc{1};
    for (const auto& f : factors)
      for (unsigned e = 0; e < f.exponent; ++e) acc *= f.prime;
    return acc;
  }
};

inline Factorization<std::uint64_t> factorize(std::uint64_t m,
                                              const SpfTable& table) {
  if (m == 0) throw std::invalid_argument("factorize: zero has no factorization");
  Factorization<std::uint64_t> f;
  f.value = m;
  if (m == 1) return f;
  if (m > table.limit())
    throw std::out_of_range("factorize: " + std::to_string(m) +
                            " exceeds sieve limit " +
                            std::to_string(table.limit()));
  auto rest = static_cast<std::uint32_t>(m);
  while (rest > 1) {
    const std::uint32_t p = table.spf(rest);
    unsigned e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    f.factors.push_back({p, e});
  }
  return f;
}

/// m / spf(m); equals 1 exactly when m is prime.
inline std::uint64_t largest_proper_divisor(std::uint64_t m,
                                            const SpfTable& table) {
  if (m < 2)
    throw std::invalid_argument("largest_proper_divisor: " + std::to_string(m) +
                                " has no proper divisor");
  return m / table.spf_at(m);
}

// ---------------------------------------------------------------------------
// Primality

struct PrimalityCertificate {
  enum class Kind { deterministic, probable };

  Kind kind = Kind::deterministic;
  unsigned rounds = 0;
  std::uint64_t witness_seed = 0;
};

inline const char* to_string(PrimalityCertificate::Kind k) {
  return k == PrimalityCertificate::Kind::deterministic ? "deterministic"
                                                        : "probable";
}

struct PrimalityResult {
  bool prime = false;
  PrimalityCertificate certificate;

  explicit operator bool() const noexcept { return prime; }
};

struct PrimalityOptions {
  unsigned rounds = 64;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t e,
                            std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (e) {
    if (e & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    e >>= 1;
  }
  return r;
}

inline constexpr std::uint32_t kSmallPrimes[] = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

// Strong probable-prime test to base a; n odd, n > 2.
inline bool strong_probable_prime(std::uint64_t n, std::uint64_t a) {
  const std::uint64_t d0 = n - 1;
  const int s = std::countr_zero(d0);
  const std::uint64_t d = d0 >> s;
  std::uint64_t x = powmod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < s; ++i) {
    x = mulmod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

inline bool strong_probable_prime(const BigInt& n, const BigInt& a,
                                  const BigInt& d, unsigned s) {
  const BigInt nm1 = n - 1;
  BigInt x = boost::multiprecision::powm(a, d, n);
  if (x == 1 || x == nm1) return true;
  for (unsigned i = 1; i < s; ++i) {
    x = x * x % n;
    if (x == nm1) return true;
  }
  return false;
}

}  // namespace detail

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for
/// every 64-bit input.
inline PrimalityResult is_prime(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("is_prime: zero input");
  PrimalityResult res;
  if (m < 2) return res;
  for (std::uint32_t p : detail::kSmallPrimes) {
    if (m == p) {
      res.prime = true;
      return res;
    }
    if (m % p == 0) return res;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37})
    if (!detail::strong_probable_prime(m, a)) return res;
  res.prime = true;
  return res;
}

/// Word-sized inputs take the deterministic path; larger inputs run one
/// base-2 round plus rounds-1 seeded random bases and report kind=probable.
inline PrimalityResult is_prime(const BigInt& m, const PrimalityOptions& opt = {}) {
  if (m.is_zero()) throw std::invalid_argument("is_prime: zero input");
  if (m < 0) return {};
  if (m <= std::numeric_limits<std::uint64_t>::max())
    return is_prime(static_cast<std::uint64_t>(m));

  PrimalityResult res;
  res.certificate = {PrimalityCertificate::Kind::probable, opt.rounds, opt.seed};
  for (std::uint32_t p : detail::kSmallPrimes)
    if (m % p == 0) return res;

  const BigInt nm1 = m - 1;
  const unsigned s = static_cast<unsigned>(boost::multiprecision::lsb(nm1));
  const BigInt d = nm1 >> s;
  if (!detail::strong_probable_prime(m, BigInt{2}, d, s)) return res;

  boost::random::mt19937_64 gen(opt.seed);
  boost::random::uniform_int_distribution<BigInt> pick(BigInt{3}, m - 2);
  for (unsigned i = 1; i < opt.rounds; ++i)
    if (!detail::strong_probable_prime(m, pick(gen), d, s)) return res;
  res.prime = true;
  return res;
}

// ---------------------------------------------------------------------------
// Primorials and CRT

/// Product of all primes <= bound (1 for bound < 2).
inline BigInt primorial(std::uint64_t bound) {
  BigInt acc{1};
  for (std::uint32_t p : primes_up_to(bound)) acc *= p;
  return acc;
}

namespace detail {

// Inverse of a modulo m (m > 1, gcd(a, m) = 1).
inline std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m) {
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = static_cast<std::int64_t>(m), new_r =
                      static_cast<std::int64_t>(a % m);
  while (new_r != 0) {
    const std::int64_t q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  if (r != 1) throw std::domain_error("inverse_mod: not invertible");
  return static_cast<std::uint64_t>(t < 0 ? t + static_cast<std::int64_t>(m) : t);
}

inline std::uint64_t mod_small(const BigInt& v, std::uint64_t p) {
  return static_cast<std::uint64_t>(v % p);
}

}  // namespace detail

/// Residue y in [1, prod primes] with, for every p:
///   y != 0 (mod p), and y != (n_j + 1)^{-1} (mod p) when p does not divide n_j + 1.
/// Each prime contributes its smallest admissible residue in {1, ..., p-1};
/// the residues are then combined by CRT.
inline BigInt crt_select_residue(const BigInt& n_j,
                                 std::span<const std::uint32_t> primes) {
  const BigInt np1 = n_j + 1;
  BigInt y{0};
  BigInt modulus{1};
  for (std::uint32_t p : primes) {
    if (p < 2) throw std::invalid_argument("crt_select_residue: bad modulus");
    const std::uint64_t np1_mod = detail::mod_small(np1, p);
    std::uint64_t forbidden = 0;  // 0 is always excluded
    bool has_inverse = np1_mod != 0;
    if (p == 2 && has_inverse)
      throw std::invalid_argument(
          "crt_select_residue: n_j + 1 must be even (n_j prime)");
    if (has_inverse) forbidden = detail::inverse_mod(np1_mod, p);
    std::uint64_t pick = 1;
    while (pick < p && has_inverse && pick == forbidden) ++pick;
    if (pick >= p)
      throw std::logic_error("crt_select_residue: no admissible residue");

    // y' = y + modulus * ((pick - y) * modulus^{-1} mod p)
    const std::uint64_t y_mod = detail::mod_small(y, p);
    const std::uint64_t m_inv = detail::inverse_mod(detail::mod_small(modulus, p), p);
    const std::uint64_t delta = (pick + p - y_mod) % p;
    y += modulus * detail::mulmod(delta, m_inv, p);
    modulus *= p;
  }
  if (y.is_zero()) y = modulus;  // empty prime list
  return y;
}

}  // namespace remset
