// Acceptance run: one PASS/FAIL line per criterion, with timings.
// Exit status is the number of failed criteria (capped at 255).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "remset/asymptotics.hpp"
#include "remset/iterated.hpp"
#include "remset/remainders.hpp"
#include "remset/transfers.hpp"

using namespace remset;

namespace {

struct Outcome {
  bool pass = true;
  std::string problems;
  std::ostringstream detail;

  void fail(const std::string& why) {
    pass = false;
    problems += why + "; ";
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void criterion(const char* name, const std::function<void(Outcome&)>& body,
               std::optional<double> time_limit = std::nullopt) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  const double dt = seconds_since(t0);
  if (time_limit && dt >= *time_limit) {
    std::ostringstream why;
    why << "took " << dt << " s, limit " << *time_limit << " s";
    o.fail(why.str());
  }
  failures += !o.pass;
  std::printf("%s  %-28s [%8.2f s]  %s%s\n", o.pass ? "PASS" : "FAIL", name, dt,
              o.problems.c_str(), o.detail.str().c_str());
  std::fflush(stdout);
}

constexpr std::uint64_t kScanTo = 1'000'000;

}  // namespace

int main() {
  const unsigned threads = default_threads();
  std::printf("threads: %u\n", threads);

  criterion("golden values n=1..18", [](Outcome& o) {
    const std::uint32_t expect[] = {0, 1, 1, 1, 2, 1, 2, 2, 2, 3, 4, 2, 3, 3, 3, 4, 5, 3};
    const auto t = build_spf(18);
    std::vector<std::uint32_t> got;
    s_scan(1, 18, t, [&](std::uint64_t, std::uint32_t s) { got.push_back(s); });
    for (std::size_t i = 0; i < 18; ++i)
      if (got[i] != expect[i])
        o.fail("n=" + std::to_string(i + 1) + ": got " + std::to_string(got[i]) +
               ", expected " + std::to_string(expect[i]));
    if (o.pass) o.detail << "all 18 match";
  }, 1.0);

  criterion("record values", [](Outcome& o) {
    const auto t = build_spf(17'292);
    const std::pair<std::uint64_t, std::uint64_t> cases[] = {
        {131, 33}, {132, 30}, {17'291, 3'975}, {17'292, 3'971}};
    for (auto [n, s] : cases) {
      const auto got = s_value(n, t);
      o.detail << "s(" << n << ")=" << got << ' ';
      if (got != s) o.fail("s(" + std::to_string(n) + ") = " + std::to_string(got));
    }
  }, 1.0);

  // Shared data for the million-scale criteria.
  const auto t_sieve = Clock::now();
  const auto table = build_spf(2 * kScanTo + 1);
  std::printf("      sieve to %llu built in %.2f s\n",
              static_cast<unsigned long long>(table.limit()), seconds_since(t_sieve));
  std::vector<std::uint32_t> s(kScanTo + 2, 0);  // s[n], n <= kScanTo + 1

  criterion("diff scan to 10^6", [&](Outcome& o) {
    const auto sum = diff_scan(1, kScanTo, table,
                               [&](const DiffRow& r) {
                                 s[r.n] = static_cast<std::uint32_t>(r.s_n);
                                 s[r.n + 1] = static_cast<std::uint32_t>(r.s_next);
                               },
                               threads);
    o.detail << "rows=" << sum.rows << " max=" << sum.max_diff << " min=" << sum.min_diff;
    for (const auto& [d, n] : sum.first_decrease) o.detail << " first(-" << d << ")=" << n;
    if (sum.rows != kScanTo) o.fail("row count " + std::to_string(sum.rows));
    if (sum.max_diff != 1) o.fail("max diff " + std::to_string(sum.max_diff));
    if (sum.min_diff != -4) o.fail("min diff " + std::to_string(sum.min_diff));
    if (sum.first_decrease.count(4) == 0 || sum.first_decrease.at(4) != 17'291)
      o.fail("first decrease of 4 not at 17291");
  }, 600.0);

  std::optional<ConstantInterval> c;
  criterion("constant c, primes < 10^6", [&](Outcome& o) {
    c = compute_c(kScanTo, 12);
    char mid[32];
    std::snprintf(mid, sizeof mid, "%.4f", c->midpoint());
    o.detail << '[' << c->lower_string() << ", " << c->upper_string() << "] width="
             << c->width() << " midpoint~" << mid;
    if (!c->width_at_most_reciprocal(1'000'000)) o.fail("width exceeds 1e-6");
    if (std::string(mid) != "0.2296") o.fail(std::string("midpoint rounds to ") + mid);
  }, 30.0);

  criterion("oracle equivalences", [&](Outcome& o) {
    for (std::uint64_t n = 1; n <= 5000; ++n) {
      const auto ref = oracle::remainder_set(n);
      const auto v = remainder_set(n, table).to_vector();
      if (v != std::vector<std::uint64_t>(ref.begin(), ref.end())) {
        o.fail("remainder_set differs at n=" + std::to_string(n));
        break;
      }
    }
    for (std::uint64_t n = 3; n <= 5000; n += 2) {
      if (transfer_set_factored(n, factorize(n + 1, table)).elements !=
          transfer_set_naive(n, table).elements) {
        o.fail("transfer_set_factored differs at n=" + std::to_string(n));
        break;
      }
    }
    for (std::uint64_t n = 2; n <= 100'000; n += 2) {
      if (even_step(n).residues() != transfer_set_naive(n, table).residues()) {
        o.fail("even_step differs at n=" + std::to_string(n));
        break;
      }
    }
    for (std::uint64_t n = 1; n <= 100'000; ++n) {
      const std::uint64_t t = n == 1 ? 0 : transfer_set(n, table).size();
      if (s_value(n + 1, table) + t != s_value(n, table) + 1) {
        o.fail("s(n+1) = s(n) + 1 - |T| fails at n=" + std::to_string(n));
        break;
      }
    }
    if (o.pass)
      o.detail << "S(n) n<=5000, odd T n<=5000, even T n<=10^5, recurrence n<=10^5";
  });

  criterion("D_p error bound", [&](Outcome& o) {
    auto g = oracle::rng(2024);
    const std::uint32_t primes[] = {2, 3, 5, 7, 11, 13};
    Rational worst{0};
    for (int i = 0; i < 1000; ++i) {
      const auto p = primes[oracle::uniform(g, 0, 5)];
      const auto a = oracle::uniform(g, 0, 1'000'000);
      const auto t = oracle::uniform(g, 1, 1'000'000);
      const auto d = count_dp_interval(p, a, t, table);
      worst = std::max(worst, boost::abs(d.error) / static_cast<std::int64_t>(d.error_bound));
      if (!d.within_bound())
        o.fail("p=" + std::to_string(p) + " a=" + std::to_string(a) + " t=" + std::to_string(t));
    }
    o.detail << "1000 draws, max |E|/bound = " << boost::rational_cast<double>(worst);
  });

  criterion("transfer bound, odd n<=10^6", [&](Outcome& o) {
    std::uint64_t worst_n = 0;
    double worst_slack = 1e9;
    std::size_t largest = 0;
    for (std::uint64_t n = 3; n <= kScanTo; n += 2) {
      const auto rec = transfer_set(n, table);
      if (!transfer_bound_check(n, rec)) o.fail("n=" + std::to_string(n));
      if (s[n] + 1 != s[n + 1] + rec.size()) o.fail("|T| disagrees with scan at n=" + std::to_string(n));
      const double slack = transfer_bound(n) - static_cast<double>(rec.size());
      if (slack < worst_slack) worst_slack = slack, worst_n = n;
      largest = std::max(largest, rec.size());
    }
    o.detail << "max |T|=" << largest << ", least slack " << worst_slack << " at n=" << worst_n;
  });

  criterion("decrease construction", [&](Outcome& o) {
    const auto chain = construct_decrease_chain(4);
    const std::uint64_t base[] = {3, 11, 131};
    for (int j = 0; j < 3; ++j)
      if (chain[j].n != base[j]) o.fail("step " + std::to_string(j + 1) + " = " + chain[j].n.str());
    const auto& st = chain[3];
    if (!is_prime(st.n).prime) o.fail("step 4 not a probable prime");
    if (st.verified_transfers.size() < 5)
      o.fail(std::to_string(st.verified_transfers.size()) + " verified transfers");
    if (boost::multiprecision::gcd(st.Q, st.primorial) != 1) o.fail("gcd(Q, P) != 1");
    if (st.x > ConstructionOptions{}.x_budget) o.fail("x beyond budget");
    o.detail << "3, 11, 131, then " << st.n.str().size() << "-digit n at x=" << st.x << " with "
             << st.verified_transfers.size() << " verified transfers";
  }, 600.0);

  criterion("Pierce chains", [&](Outcome& o) {
    if (pierce_chain(35, 22).length() != 7) o.fail("P(35,22) != 7");
    for (std::uint64_t n = 3; n <= 10'000; ++n)
      if (!depth_relation_check(n)) o.fail("depth relation fails at n=" + std::to_string(n));
    double c0 = 1e9;
    std::uint64_t c0_n = 0;
    for (std::uint64_t n = 100; n <= 10'000; ++n) {
      const double ln = std::log(static_cast<double>(n));
      const double f = std::floor(ln / std::log(ln));
      const double ratio = static_cast<double>(pierce_max(n).length) / f;
      if (ratio < c0) c0 = ratio, c0_n = n;
    }
    o.detail << "P(35,22)=7, depth relation 3<=n<=10^4; observed min P(n)/floor(log n/log log n) = "
             << c0 << " at n=" << c0_n << " (100<=n<=10^4)";
  });

  criterion("iterated level bounds", [&](Outcome& o) {
    LevelSizer sizer(&table);
    for (std::uint64_t n = 1; n <= 100'000; ++n) {
      const auto st = sizer(n, 6);
      for (unsigned j = 0; j <= 6; ++j) {
        const auto sz = static_cast<std::int64_t>(st.sizes[j]);
        if (sz - 1 > st.maxima[j] ||
            st.maxima[j] > static_cast<std::int64_t>(n / (j + 2))) {
          o.fail("bound fails at n=" + std::to_string(n) + " j=" + std::to_string(j));
          break;
        }
      }
    }
    o.detail << "means:";
    for (unsigned j = 0; j <= 5; ++j) {
      double sum = 0;
      for (std::uint64_t n = 100'000; n <= 101'000; ++n)
        sum += static_cast<double>(sizer(n, j).sizes[j]) / static_cast<double>(n);
      const double mean = sum / 1001;
      o.detail << " j" << j << '=' << mean;
      const double lo = 1.0 / static_cast<double>(factorial(j + 2)), hi = 1.0 / (j + 2);
      if (mean < lo || mean > hi) {
        std::ostringstream why;
        why << "mean of s_" << j << "(n)/n = " << std::setprecision(9) << mean << " outside ["
            << lo << ", " << hi << "]";
        o.fail(why.str());
      }
    }
    std::uint64_t checked = 0;
    for (std::uint64_t n = 10'001; n <= 10'100; ++n)
      for (unsigned j = 0; j <= 3; ++j) {
        const auto wc = progression_witness_check(n, j, progression_witness(n, j));
        checked += wc.checked;
        if (!wc.holds)
          o.fail("witness progression fails at n=" + std::to_string(n) + " j=" + std::to_string(j));
      }
    o.detail << "; " << checked << " progression members verified";
  });

  criterion("deviation records to 10^6", [&](Outcome& o) {
    if (!c) c = compute_c(kScanTo, 12);
    const auto dev = deviation_records(
        2, std::span<const std::uint32_t>(s.data() + 2, kScanTo - 1), *c);
    std::size_t ambiguous = 0, beyond = 0;
    for (const auto& r : dev.records) {
      ambiguous += r.ambiguous;
      beyond += std::abs(r.deviation) > r.two_cuberoot;
    }
    o.detail << dev.records.size() << " records (" << ambiguous << " c-sensitive, " << beyond
             << " outside 2n^(1/3)); max |s(n)-cn|/n^(1/3) = " << dev.max_ratio
             << " at n=" << dev.max_ratio_n;
    if (dev.records.empty()) o.fail("no records");
  });

  std::printf("%d criteria failed\n", failures);
  return failures > 255 ? 255 : failures;
}
