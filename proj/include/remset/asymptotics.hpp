#pragma once

// The limit constant c = sum_p 1/(p(p+1)) * prod_{q<p} (1 - 1/q) as a
// certified interval, and the running-extremum records of s(n) - c n.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "remset/arith.hpp"
#include "remset/remainders.hpp"

namespace remset {

/// Raised when a constant interval is too wide for the requested use.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr unsigned kGuardDigits = 10;

/// Fixed-point interval [lower, upper] for c; values are scaled integers
/// over 10^scale_digits.
struct ConstantInterval {
  std::uint64_t prime_bound = 0;
  unsigned digits = 0;
  unsigned scale_digits = 0;
  BigInt lower_scaled;
  BigInt upper_scaled;

  /// lower rounded down to `digits` decimals.
  std::string lower_string() const { return format(lower_scaled, false); }
  /// upper rounded up to `digits` decimals.
  std::string upper_string() const { return format(upper_scaled, true); }

  double lower() const { return to_double(lower_scaled); }
  double upper() const { return to_double(upper_scaled); }
  double midpoint() const { return to_double(lower_scaled + upper_scaled) / 2; }
  double width() const { return to_double(upper_scaled - lower_scaled); }

  /// Exact check that upper - lower <= 1/q.
  bool width_at_most_reciprocal(std::uint64_t q) const {
    return (upper_scaled - lower_scaled) * q <= pow10(scale_digits);
  }

  static BigInt pow10(unsigned k) { return boost::multiprecision::pow(BigInt{10}, k); }

 private:
  double to_double(const BigInt& v) const {
    // Keep 30 significant decimals before converting.
    const unsigned drop = scale_digits > 30 ? scale_digits - 30 : 0;
    const BigInt head = v / pow10(drop);
    return head.convert_to<double>() / std::pow(10.0, scale_digits - drop);
  }

  std::string format(const BigInt& v, bool round_up) const {
    const BigInt unit = pow10(scale_digits - digits);
    BigInt q = v / unit;
    if (round_up && q * unit != v) ++q;
    const BigInt whole_unit = pow10(digits);
    const BigInt whole = q / whole_unit;
    std::string frac = BigInt(q % whole_unit).str();
    if (frac.size() < digits) frac.insert(0, digits - frac.size(), '0');
    return digits == 0 ? whole.str() : whole.str() + "." + frac;
  }
};

/// Certified enclosure of c from the primes below prime_bound.
///
/// The partial sum runs over p < X with the running product carried as a
/// floor/ceil pair, so every rounding step moves lower down and upper up.
/// The omitted primes contribute at most
///   prod_{q<X} (1 - 1/q) * sum_{m>=X} 1/(m(m+1)) = prod_{q<X} (1 - 1/q) / X,
/// which is added to upper.
inline ConstantInterval compute_c(std::uint64_t prime_bound, unsigned digits) {
  if (prime_bound < 3) throw std::invalid_argument("compute_c: prime bound must be >= 3");
  if (digits == 0 || digits > 1000)
    throw std::invalid_argument("compute_c: digits must be in [1, 1000]");

  ConstantInterval ci;
  ci.prime_bound = prime_bound;
  ci.digits = digits;
  ci.scale_digits = digits + kGuardDigits;
  const BigInt scale = ConstantInterval::pow10(ci.scale_digits);

  BigInt prod_lo = scale, prod_hi = scale;
  BigInt sum_lo = 0, sum_hi = 0;
  BigInt q, r;
  for (std::uint32_t p : primes_up_to(prime_bound - 1)) {
    const std::uint64_t den = std::uint64_t{p} * (p + 1);
    sum_lo += prod_lo / den;
    boost::multiprecision::divide_qr(prod_hi, BigInt{den}, q, r);
    sum_hi += r.is_zero() ? q : q + 1;

    prod_lo = prod_lo * (p - 1) / p;
    boost::multiprecision::divide_qr(prod_hi * (p - 1), BigInt{p}, q, r);
    prod_hi = r.is_zero() ? q : q + 1;
  }
  boost::multiprecision::divide_qr(prod_hi, BigInt{prime_bound}, q, r);
  const BigInt tail = r.is_zero() ? q : q + 1;

  ci.lower_scaled = sum_lo;
  ci.upper_scaled = sum_hi + tail;
  return ci;
}

// ---------------------------------------------------------------------------
// Deviation records

enum class RecordKind { new_max, new_min };

inline const char* to_string(RecordKind k) {
  return k == RecordKind::new_max ? "new-max" : "new-min";
}

struct DeviationRecord {
  std::uint64_t n = 0;
  std::uint64_t s = 0;
  double deviation = 0;  // s(n) - c n at the interval midpoint
  RecordKind kind = RecordKind::new_max;
  double two_cuberoot = 0;
  /// The record could change status for some c inside the interval.
  bool ambiguous = false;
};

struct DeviationScan {
  std::vector<DeviationRecord> records;
  double max_ratio = 0;  // max |s(n) - c n| / n^{1/3}
  std::uint64_t max_ratio_n = 0;
};

/// Records over n = first, first+1, ... given s values for those n.
/// The scan starts at n = 2 in practice; S(1) is empty.
inline DeviationScan deviation_records(std::uint64_t first,
                                       std::span<const std::uint32_t> s,
                                       const ConstantInterval& c) {
  if (s.empty()) return {};
  const std::uint64_t last = first + s.size() - 1;
  if (c.width() * static_cast<double>(last) >= 0.5)
    throw PrecisionError("deviation scan to " + std::to_string(last) +
                         " needs a narrower interval for c; recompute with a "
                         "larger prime bound");
  const double mid = c.midpoint();
  const double half = c.width() / 2;

  DeviationScan out;
  struct Extremum {
    std::uint64_t n;
    double dev;
  };
  Extremum hi{0, -std::numeric_limits<double>::infinity()};
  Extremum lo{0, std::numeric_limits<double>::infinity()};

  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::uint64_t n = first + i;
    const double dev = static_cast<double>(s[i]) - mid * static_cast<double>(n);
    const double cbrt_n = std::cbrt(static_cast<double>(n));
    const double ratio = std::abs(dev) / cbrt_n;
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.max_ratio_n = n;
    }
    auto emit = [&](RecordKind kind, const Extremum& prev) {
      DeviationRecord rec{n, s[i], dev, kind, 2 * cbrt_n, false};
      if (prev.n != 0)
        rec.ambiguous = std::abs(dev - prev.dev) <= half * static_cast<double>(n - prev.n);
      out.records.push_back(rec);
    };
    if (i == 0) {
      // First point opens both extrema; it is reported once.
      emit(dev >= 0 ? RecordKind::new_max : RecordKind::new_min, hi);
      hi = lo = {n, dev};
      continue;
    }
    if (dev > hi.dev) {
      emit(RecordKind::new_max, hi);
      hi = {n, dev};
    } else if (dev < lo.dev) {
      emit(RecordKind::new_min, lo);
      lo = {n, dev};
    }
  }
  return out;
}

/// Records of s(n) - c n for 2 <= n <= to.
inline DeviationScan deviation_scan(std::uint64_t to, const ConstantInterval& c,
                                    const SpfTable& table, unsigned threads = 1) {
  if (to < 2) return {};
  if (c.width() * static_cast<double>(to) >= 0.5)
    throw PrecisionError("deviation scan to " + std::to_string(to) +
                         " needs a narrower interval for c; recompute with a "
                         "larger prime bound");
  const auto s = s_values(2, to, table, threads);
  return deviation_records(2, s, c);
}

}  // namespace remset
