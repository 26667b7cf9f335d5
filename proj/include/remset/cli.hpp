#pragma once

// Command-line front end. dispatch() is the whole program; tools/remset.cpp
// only forwards argv to it.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "remset/arith.hpp"
#include "remset/asymptotics.hpp"
#include "remset/iterated.hpp"
#include "remset/parallel.hpp"
#include "remset/remainders.hpp"
#include "remset/transfers.hpp"

namespace remset {

struct RunConfig {
  std::uint64_t sieve_limit = 1'000'000;
  bool sieve_limit_set = false;
  unsigned threads = default_threads();
  unsigned mr_rounds = 64;
  std::uint64_t x_budget = 1'000'000;
  std::string output_path;
  unsigned precision_digits = 12;
  std::uint64_t seed = 0x5eed;
};

/// Largest sieve built without an explicit --sieve-limit.
inline constexpr std::uint64_t kAutoSieveCap = 10'000'000;

/// Row-oriented CSV output that can be resumed after interruption.
///
/// Every `every` rows the file is flushed and `<out>.ckpt` records the next
/// n, the byte length of the file, the command signature and any extra state.
/// Reopening with the same signature truncates to that length and resumes.
class CheckpointedCsv {
 public:
  using State = std::map<std::string, std::string>;

  CheckpointedCsv(std::filesystem::path out, std::string header, std::string signature,
                  std::uint64_t every = 100'000)
      : out_(std::move(out)),
        ckpt_(out_.string() + ".ckpt"),
        header_(std::move(header)),
        signature_(std::move(signature)),
        every_(std::max<std::uint64_t>(every, 1)) {}

  /// Opens the file. Returns the n to resume from, or nullopt for a fresh run.
  std::optional<std::uint64_t> open() {
    std::optional<std::uint64_t> resume;
    if (std::filesystem::exists(ckpt_) && std::filesystem::exists(out_)) {
      std::ifstream in(ckpt_);
      State kv;
      for (std::string line; std::getline(in, line);) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
      }
      if (kv["signature"] == signature_ && kv.count("next") && kv.count("bytes")) {
        const auto bytes = std::stoull(kv["bytes"]);
        if (std::filesystem::file_size(out_) >= bytes) {
          std::filesystem::resize_file(out_, bytes);
          resume = std::stoull(kv["next"]);
          for (auto& [k, v] : kv)
            if (k.rfind("state.", 0) == 0) state_[k.substr(6)] = v;
        }
      }
    }
    if (resume) {
      file_.open(out_, std::ios::binary | std::ios::app);
    } else {
      std::filesystem::remove(ckpt_);
      file_.open(out_, std::ios::binary | std::ios::trunc);
      file_ << header_ << '\n';
    }
    if (!file_) throw std::runtime_error("cannot open " + out_.string());
    return resume;
  }

  const State& restored_state() const { return state_; }

  void set_state_provider(std::function<State()> fn) { provider_ = std::move(fn); }

  void row(std::uint64_t n, const std::string& line) {
    file_ << line << '\n';
    if (++pending_ >= every_) checkpoint(n + 1);
  }

  void finish() {
    file_.flush();
    file_.close();
    std::filesystem::remove(ckpt_);
  }

  /// Writes a checkpoint saying rows up to next - 1 are complete.
  void checkpoint(std::uint64_t next) {
    file_.flush();
    const auto bytes = static_cast<std::uint64_t>(file_.tellp());
    const auto tmp = ckpt_.string() + ".tmp";
    {
      std::ofstream c(tmp, std::ios::trunc);
      c << "signature=" << signature_ << '\n'
        << "next=" << next << '\n'
        << "bytes=" << bytes << '\n';
      if (provider_)
        for (const auto& [k, v] : provider_()) c << "state." << k << '=' << v << '\n';
    }
    std::filesystem::rename(tmp, ckpt_);
    pending_ = 0;
  }

  const std::filesystem::path& checkpoint_path() const { return ckpt_; }

 private:
  std::filesystem::path out_;
  std::filesystem::path ckpt_;
  std::string header_;
  std::string signature_;
  std::uint64_t every_;
  std::uint64_t pending_ = 0;
  std::ofstream file_;
  State state_;
  std::function<State()> provider_;
};

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string rational_str(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

// 64-bit FNV-1a, used to fingerprint very long decimals.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string big_str(const BigInt& v) {
  std::string s = v.str();
  if (s.size() <= 1000) return s;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(s));
  return "<" + std::to_string(s.size()) + " digits, fnv1a " + buf + ">";
}

class Runner {
 public:
  Runner(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

  const SpfTable& table(std::uint64_t need) {
    need = std::max<std::uint64_t>(need, 2);
    if (cfg_.sieve_limit_set && need > cfg_.sieve_limit)
      throw std::out_of_range("this command needs a sieve up to " + std::to_string(need) +
                              " but --sieve-limit is " + std::to_string(cfg_.sieve_limit));
    if (!cfg_.sieve_limit_set && need > kAutoSieveCap)
      throw std::out_of_range("this command needs a sieve up to " + std::to_string(need) +
                              "; pass --sieve-limit explicitly for sieves beyond " +
                              std::to_string(kAutoSieveCap));
    if (!table_ || table_->limit() < need) table_ = build_spf(need);
    return *table_;
  }

  int s(std::uint64_t n) {
    out_ << s_value(n, table(n)) << '\n';
    return 0;
  }

  int set(std::uint64_t n, bool list) {
    const auto rs = remainder_set(n, table(n));
    out_ << "s(" << n << ") = " << rs.count << '\n';
    if (list) {
      const auto v = rs.to_vector();
      for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? " " : "") << v[i];
      out_ << '\n';
    }
    return 0;
  }

  int scan(std::uint64_t from, std::uint64_t to, const std::string& path, std::uint64_t every) {
    if (from == 0) from = 1;
    const auto& t = table(to);
    if (path.empty()) {
      out_ << "n,s\n";
      s_scan(from, to, t, [&](std::uint64_t n, std::uint32_t s) { out_ << n << ',' << s << '\n'; },
             cfg_.threads);
      return 0;
    }
    CheckpointedCsv csv(path, "n,s",
                        "scan from=" + std::to_string(from) + " to=" + std::to_string(to), every);
    if (auto r = csv.open()) from = *r;
    s_scan(from, to, t,
           [&](std::uint64_t n, std::uint32_t s) {
             csv.row(n, std::to_string(n) + ',' + std::to_string(s));
           },
           cfg_.threads);
    csv.finish();
    return 0;
  }

  int constant(std::uint64_t bound, unsigned digits) {
    const auto ci = compute_c(bound, digits);
    out_ << '[' << ci.lower_string() << ", " << ci.upper_string() << "]\n";
    return 0;
  }

  int deviations(std::uint64_t to, std::uint64_t bound, const std::string& path) {
    const auto ci = compute_c(bound, cfg_.precision_digits);
    const auto scan = deviation_scan(to, ci, table(to), cfg_.threads);
    std::ofstream file;
    std::ostream* os = &out_;
    if (!path.empty()) {
      file.open(path, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot open " + path);
      os = &file;
    }
    *os << "n,s,deviation,kind,two_cuberoot\n";
    std::size_t ambiguous = 0;
    for (const auto& r : scan.records) {
      *os << r.n << ',' << r.s << ',' << fixed6(r.deviation) << ',' << to_string(r.kind) << ','
          << fixed6(r.two_cuberoot) << '\n';
      ambiguous += r.ambiguous;
    }
    if (!path.empty()) {
      out_ << "c in [" << ci.lower_string() << ", " << ci.upper_string() << "]\n"
           << "records " << scan.records.size() << " (" << ambiguous
           << " sensitive to c within its interval)\n"
           << "max |s(n) - c n| / n^(1/3) = " << fixed6(scan.max_ratio) << " at n = "
           << scan.max_ratio_n << '\n';
    }
    return 0;
  }

  int transfers(std::uint64_t n) {
    const auto& t = table(n + 1);
    const auto rec = transfer_set_naive(n, t);
    out_ << "n=" << n << " s(n)=" << s_value(n, t) << " s(n+1)=" << s_value(n + 1, t)
         << " |T|=" << rec.size() << '\n';
    for (const auto& e : rec.elements) {
      out_ << "r=" << e.r << ' ' << to_string(e.kind);
      if (e.kind == TransferKind::generic) out_ << " I=" << e.suffix_index << " p=" << e.p;
      out_ << '\n';
    }
    return 0;
  }

  int diff_scan_cmd(std::uint64_t to, const std::string& path, const std::string& records,
                    std::uint64_t every) {
    const auto& t = table(to + 1);
    DiffSummary summary;
    std::uint64_t from = 1;
    auto row_str = [](const DiffRow& r) {
      return std::to_string(r.n) + ',' + std::to_string(r.s_n) + ',' +
             std::to_string(r.s_next) + ',' + std::to_string(r.diff);
    };
    if (path.empty()) {
      out_ << "n,s_n,s_n_plus_1,diff\n";
      summary = diff_scan(1, to, t, [&](const DiffRow& r) { out_ << row_str(r) << '\n'; },
                          cfg_.threads);
    } else {
      CheckpointedCsv csv(path, "n,s_n,s_n_plus_1,diff", "diff-scan to=" + std::to_string(to),
                          every);
      if (auto r = csv.open()) {
        from = *r;
        summary = restore(csv.restored_state());
      }
      csv.set_state_provider([&] { return save(summary); });
      summary = diff_scan(from, to, t, [&](const DiffRow& r) { csv.row(r.n, row_str(r)); },
                          cfg_.threads, summary);
      csv.finish();
    }
    std::ofstream file;
    std::ostream* os = &out_;
    if (!records.empty()) {
      file.open(records, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot open " + records);
      os = &file;
    }
    *os << "decrease,first_n\n";
    for (const auto& [d, n] : summary.first_decrease) *os << d << ',' << n << '\n';
    if (!path.empty() || !records.empty())
      out_ << "max diff " << summary.max_diff << ", min diff " << summary.min_diff << '\n';
    return 0;
  }

  int construct(unsigned steps, std::uint64_t start_x) {
    ConstructionOptions opt;
    opt.primality = {cfg_.mr_rounds, cfg_.seed};
    opt.x_budget = cfg_.x_budget;
    opt.start_x = start_x;
    std::vector<ConstructionStep> chain;
    try {
      chain = construct_decrease_chain(steps, opt);
    } catch (const BudgetExceeded& e) {
      print_steps(e.completed);
      throw;
    }
    print_steps(chain);
    return 0;
  }

  int pierce(std::uint64_t n, std::optional<std::uint64_t> a) {
    if (a) {
      const auto c = pierce_chain(n, *a);
      for (std::size_t i = 0; i < c.terms.size(); ++i) out_ << (i ? " " : "") << c.terms[i];
      out_ << "\nP=" << c.length() << '\n';
    } else {
      const auto m = pierce_max(n);
      out_ << "P=" << m.length << " argmax_a=" << m.argmax << '\n';
    }
    return 0;
  }

  int pierce_scan(std::uint64_t to, const std::string& path, std::uint64_t every) {
    auto line = [](std::uint64_t n) {
      const auto m = pierce_max(n);
      return std::to_string(n) + ',' + std::to_string(m.length) + ',' + std::to_string(m.argmax);
    };
    if (path.empty()) {
      out_ << "n,P,argmax_a\n";
      for (std::uint64_t n = 1; n <= to; ++n) out_ << line(n) << '\n';
      return 0;
    }
    CheckpointedCsv csv(path, "n,P,argmax_a", "pierce to=" + std::to_string(to), every);
    std::uint64_t from = csv.open().value_or(1);
    for (std::uint64_t n = from; n <= to; ++n) csv.row(n, line(n));
    csv.finish();
    return 0;
  }

  int iterated(std::uint64_t n, unsigned max_j, bool list) {
    const auto prof = iterated_profile(n, max_j);
    for (std::size_t j = 0; j < prof.sizes.size(); ++j) {
      out_ << "j=" << j << " size=" << prof.sizes[j] << " max=";
      if (prof.maxima[j] < 0)
        out_ << '-';
      else
        out_ << prof.maxima[j];
      if (j < prof.witnesses.size()) out_ << " witness=" << prof.witnesses[j];
      out_ << '\n';
      if (list) {
        const auto m = prof.members(j);
        for (std::size_t i = 0; i < m.size(); ++i) out_ << (i ? " " : "") << m[i];
        out_ << '\n';
      }
    }
    return 0;
  }

  int bands(std::uint64_t from, std::uint64_t to, unsigned j, const std::string& path,
            std::uint64_t every) {
    if (from == 0) from = 1;
    const SpfTable* t = &table(std::max<std::uint64_t>(to, 2));
    auto line = [](const BandRow& r) {
      return std::to_string(r.n) + ',' + std::to_string(r.j) + ',' + std::to_string(r.s_j) +
             ',' + std::to_string(r.mod6) + ',' + (r.div5 ? "1" : "0");
    };
    if (path.empty()) {
      out_ << "n,j,s_j,mod6,div5\n";
      bands_scan(from, to, j, [&](const BandRow& r) { out_ << line(r) << '\n'; }, cfg_.threads, t);
      return 0;
    }
    CheckpointedCsv csv(path, "n,j,s_j,mod6,div5",
                        "bands from=" + std::to_string(from) + " to=" + std::to_string(to) +
                            " j=" + std::to_string(j),
                        every);
    if (auto r = csv.open()) from = *r;
    bands_scan(from, to, j, [&](const BandRow& r) { csv.row(r.n, line(r)); }, cfg_.threads, t);
    csv.finish();
    return 0;
  }

  int dp_count(std::uint32_t p, std::uint64_t a, std::uint64_t t) {
    const auto d = count_dp_interval(p, a, t, table(a + t));
    out_ << "exact=" << d.exact_count << " density=" << rational_str(d.density_term)
         << " error=" << rational_str(d.error) << " bound=" << d.error_bound
         << " within_bound=" << (d.within_bound() ? "yes" : "no") << '\n';
    return 0;
  }

 private:
  static CheckpointedCsv::State save(const DiffSummary& s) {
    std::string firsts;
    for (const auto& [d, n] : s.first_decrease)
      firsts += (firsts.empty() ? "" : ";") + std::to_string(d) + ':' + std::to_string(n);
    return {{"rows", std::to_string(s.rows)},
            {"max", std::to_string(s.max_diff)},
            {"min", std::to_string(s.min_diff)},
            {"first", firsts}};
  }

  static DiffSummary restore(const CheckpointedCsv::State& st) {
    DiffSummary s;
    s.rows = std::stoull(st.at("rows"));
    s.max_diff = std::stoll(st.at("max"));
    s.min_diff = std::stoll(st.at("min"));
    std::istringstream in(st.at("first"));
    for (std::string item; std::getline(in, item, ';');) {
      const auto colon = item.find(':');
      s.first_decrease[std::stoull(item.substr(0, colon))] = std::stoull(item.substr(colon + 1));
    }
    return s;
  }

  void print_steps(const std::vector<ConstructionStep>& chain) {
    for (const auto& st : chain) {
      out_ << "step " << st.j << '\n'
           << "  n = " << big_str(st.n) << '\n'
           << "  digits = " << st.n.str().size() << '\n';
      if (st.hard_wired) {
        out_ << "  source = hard-wired\n";
      } else {
        out_ << "  source = search\n"
             << "  primorial digits = " << st.primorial.str().size() << '\n'
             << "  y = " << big_str(st.y) << '\n'
             << "  x = " << st.x << '\n';
      }
      out_ << "  Q = " << big_str(st.Q) << '\n'
           << "  certificate = " << to_string(st.certificate.kind);
      if (st.certificate.kind == PrimalityCertificate::Kind::probable)
        out_ << " (rounds " << st.certificate.rounds << ", seed " << st.certificate.witness_seed
             << ')';
      out_ << '\n' << "  verified transfers = " << st.verified_transfers.size() << '\n';
      for (const auto& r : st.verified_transfers) out_ << "    r = " << big_str(r) << '\n';
    }
  }

  const RunConfig& cfg_;
  std::ostream& out_;
  std::optional<SpfTable> table_;
};

}  // namespace detail

/// Runs one CLI invocation. Exit codes: 0 success, 1 computation error,
/// 2 usage error.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Remainder sets, transfer sets, iterated remainders and Pierce chains"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read key=value option lines from a file (flags win)");

  RunConfig cfg;
  auto* limit_opt = app.add_option("--sieve-limit", cfg.sieve_limit, "Largest sieve to build");
  app.add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Seed for probable-prime witnesses");
  app.add_option("--mr-rounds", cfg.mr_rounds, "Miller-Rabin rounds for big integers")
      ->check(CLI::PositiveNumber);
  app.add_option("--x-budget", cfg.x_budget, "Search budget per construction step")
      ->check(CLI::PositiveNumber);
  app.add_option("--precision-digits", cfg.precision_digits, "Default decimal digits for c")
      ->check(CLI::Range(1u, 1000u));
  std::uint64_t every = 100'000;
  app.add_option("--checkpoint-every", every, "Rows between checkpoints")
      ->check(CLI::PositiveNumber);

  std::uint64_t n = 0, from = 1, to = 0, bound = 0, a_arg = 0, t_arg = 0;
  std::optional<std::uint64_t> a_opt;
  std::optional<std::uint64_t> to_opt;
  unsigned digits = 0, j = 0, steps = 0;
  std::uint32_t p = 0;
  bool list = false;
  std::string path, records;
  std::uint64_t start_x = 1;

  auto* s_cmd = app.add_subcommand("s", "Print s(n)");
  s_cmd->add_option("n", n)->required()->check(CLI::PositiveNumber);

  auto* set_cmd = app.add_subcommand("set", "Print s(n) and optionally S(n)");
  set_cmd->add_option("n", n)->required()->check(CLI::PositiveNumber);
  set_cmd->add_flag("--list", list, "List the members");

  auto* scan_cmd = app.add_subcommand("scan", "CSV n,s for a range");
  scan_cmd->add_option("--from", from)->check(CLI::PositiveNumber);
  scan_cmd->add_option("--to", to)->required()->check(CLI::PositiveNumber);
  scan_cmd->add_option("--out", path);

  std::uint64_t bound_default = 1'000'000;
  auto* c_cmd = app.add_subcommand("constant", "Certified interval for c");
  c_cmd->add_option("--prime-bound", bound_default)->check(CLI::Range(std::uint64_t{3}, kAutoSieveCap * 100));
  auto* digits_opt = c_cmd->add_option("--digits", digits)->check(CLI::Range(1u, 1000u));

  std::uint64_t dev_bound = 10'000'000;
  auto* dev_cmd = app.add_subcommand("deviations", "Records of s(n) - c n");
  dev_cmd->add_option("--to", to)->required()->check(CLI::PositiveNumber);
  dev_cmd->add_option("--out", path);
  dev_cmd->add_option("--prime-bound", dev_bound)->check(CLI::Range(std::uint64_t{3}, kAutoSieveCap * 100));

  auto* tr_cmd = app.add_subcommand("transfers", "Print T(n, n+1)");
  tr_cmd->add_option("n", n)->required()->check(CLI::PositiveNumber);

  auto* diff_cmd = app.add_subcommand("diff-scan", "CSV of s(n+1) - s(n) plus first decreases");
  diff_cmd->add_option("--to", to)->required()->check(CLI::PositiveNumber);
  diff_cmd->add_option("--out", path);
  diff_cmd->add_option("--records", records, "CSV decrease,first_n (default: stdout)");

  auto* con_cmd = app.add_subcommand("construct", "Chain of primes with growing decreases");
  con_cmd->add_option("--steps", steps)->required()->check(CLI::PositiveNumber);
  con_cmd->add_option("--start-x", start_x, "Resume the next search at this x")
      ->check(CLI::PositiveNumber);

  auto* pierce_cmd = app.add_subcommand("pierce", "Pierce chain for (n, a), P(n), or a CSV scan");
  pierce_cmd->add_option("n", n)->check(CLI::PositiveNumber);
  pierce_cmd->add_option("a", a_opt)->check(CLI::PositiveNumber);
  pierce_cmd->add_option("--to", to_opt)->check(CLI::PositiveNumber);
  pierce_cmd->add_option("--out", path);

  auto* it_cmd = app.add_subcommand("iterated", "Levels S_0(n), S_1(n), ...");
  it_cmd->add_option("n", n)->required()->check(CLI::PositiveNumber);
  it_cmd->add_option("--max-j", j)->required();
  it_cmd->add_flag("--list", list);

  auto* bands_cmd = app.add_subcommand("bands", "CSV n,j,s_j,mod6,div5");
  bands_cmd->add_option("--from", from)->check(CLI::PositiveNumber);
  bands_cmd->add_option("--to", to)->required()->check(CLI::PositiveNumber);
  bands_cmd->add_option("--j", j)->required()->check(CLI::PositiveNumber);
  bands_cmd->add_option("--out", path);

  auto* dp_cmd = app.add_subcommand("dp-count", "Count D_p in [a+1, a+t]");
  dp_cmd->add_option("--p", p)->required();
  dp_cmd->add_option("--a", a_arg)->required();
  dp_cmd->add_option("--t", t_arg)->required()->check(CLI::PositiveNumber);

  std::vector<std::string> argv_store{"remset"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  cfg.sieve_limit_set = limit_opt->count() > 0;
  cfg.output_path = path;

  detail::Runner run(cfg, out);
  try {
    if (s_cmd->parsed()) return run.s(n);
    if (set_cmd->parsed()) return run.set(n, list);
    if (scan_cmd->parsed()) {
      if (from > to) {
        err << "error: --from must not exceed --to\n";
        return 2;
      }
      return run.scan(from, to, path, every);
    }
    if (c_cmd->parsed()) {
      bound = bound_default;
      return run.constant(bound, digits_opt->count() ? digits : cfg.precision_digits);
    }
    if (dev_cmd->parsed()) return run.deviations(to, dev_bound, path);
    if (tr_cmd->parsed()) return run.transfers(n);
    if (diff_cmd->parsed()) return run.diff_scan_cmd(to, path, records, every);
    if (con_cmd->parsed()) return run.construct(steps, start_x);
    if (pierce_cmd->parsed()) {
      if (to_opt) return run.pierce_scan(*to_opt, path, every);
      if (n == 0) {
        err << "error: pierce needs <n> or --to\n\n" << pierce_cmd->help();
        return 2;
      }
      return run.pierce(n, a_opt);
    }
    if (it_cmd->parsed()) return run.iterated(n, j, list);
    if (bands_cmd->parsed()) return run.bands(from, to, j, path, every);
    if (dp_cmd->parsed()) return run.dp_count(p, a_arg, t_arg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace remset
