// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.  Statistical criteria use fixed seeds chosen before the runs.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "classify_checks.hpp"
#include "jacpair/harness.hpp"
#include "jacpair/smith.hpp"
#include "jacpair/theory.hpp"
#include "oracles.hpp"

using namespace jacpair;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    lines.push_back(std::string(ok ? "ok   " : "BAD  ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ExperimentConfig config(const char* json) { return ExperimentConfig::from_json(nlohmann::json::parse(json)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome aut_tables() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<const char*, std::uint64_t>> table{
      {"1", 1},      {"A2", 1},     {"A4", 2},       {"B4", 2},       {"A2+A2", 2},   {"E4", 6},
      {"A8", 4},     {"B8", 4},     {"C8", 4},       {"D8", 4},       {"A2+A4", 2},   {"A2+A2+A2", 6},
      {"A3", 2},     {"B3", 2},     {"A9", 2},       {"B9", 2},       {"A3+A3", 8},   {"A3+B3", 4},
      {"A2+A2+A3", 4}, {"A2+A2+B3", 4}, {"A3+E4", 12}, {"B3+E4", 12}};
  for (const auto& [text, want] : table) {
    const std::uint64_t got = count_aut_pairing(gram_of(PairingClass::parse(text)));
    o.check(got == want, std::string(text) + ": " + std::to_string(got) + " (table " + std::to_string(want) + ")");
  }
  const double dt = seconds_since(t0);
  o.check(dt < 10.0, "runtime " + fmt("%.2f s", dt));
  return o;
}

Outcome cyclic_probability() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Report rep = run_experiment(config(R"({"kind": "graph-cyclic", "n": 30, "q": 0.5, "trials": 10000, "seed": 1})"));
  const double prop = rep.rows.at(0).proportion;
  o.check(std::abs(prop - 0.7935) <= 0.013, "cyclic proportion " + fmt("%.4f", prop) + " vs 0.7935 +- 0.013");
  o.lines.push_back("     runtime " + fmt("%.1f s", seconds_since(t0)));
  return o;
}

Outcome pairing_frequencies() {
  Outcome o;
  for (const char* json : {R"({"kind": "graph-pairing-freq", "n": 20, "q": 0.5, "prime": 2, "max_order": 8,
                               "trials": 100000, "seed": 1})",
                           R"({"kind": "graph-pairing-freq", "n": 20, "q": 0.5, "prime": 3, "max_order": 9,
                               "trials": 100000, "seed": 1})"}) {
    ExperimentConfig cfg = config(json);
    Report rep = run_experiment(cfg);
    for (const auto& r : rep.rows) {
      if (r.key == "other") continue;
      const bool ok = std::isfinite(r.z_score) && std::abs(r.z_score) < 4.0;
      o.check(ok, "p=" + std::to_string(cfg.prime()) + " " + r.key + ": observed ratio " +
                      fmt("%.4f", r.observed_ratio) + " expected " + fmt("%.0f", r.expected_ratio) +
                      " z=" + fmt("%.2f", r.z_score));
    }
  }
  return o;
}

Outcome haar_frequencies() {
  Outcome o;
  for (long p : {2, 3}) {
    const Rational one_minus = 1 - Rational(Integer(1), Integer(p));
    o.check(*mu_n_finite(PairingClass(), p, 1).exact == one_minus,
            "p=" + std::to_string(p) + " mu_1(trivial) = 1-1/p exactly");
    Rational pooled = 0;
    for (const auto& c : enumerate_classes(p, 1))
      if (c.order() == p) pooled += *mu_n_finite(c, p, 1).exact;
    o.check(pooled == one_minus / Rational(Integer(p)),
            "p=" + std::to_string(p) + " pooled mu_1(Z/p) = (1-1/p)/p exactly");
    for (int n : {1, 2, 4}) {
      ExperimentConfig cfg;
      cfg.kind = ExperimentKind::HaarMu;
      cfg.primes = {p};
      cfg.n = n;
      cfg.trials = 100000;
      cfg.seed = 1;
      cfg.max_order = p * p;
      Report rep = run_experiment(cfg);
      std::uint64_t order_p = 0;
      for (const auto& r : rep.rows) {
        if (r.key == "other" || r.key == kPrecisionExceededKey) continue;
        if (PairingClass::parse(r.key).order() == p) order_p += r.observed_count;
        o.check(std::abs(r.z_score) < 3.0, "p=" + std::to_string(p) + " n=" + std::to_string(n) + " " + r.key +
                                               ": " + fmt("%.5f", r.proportion) + " vs " +
                                               fmt("%.5f", r.expected_ratio) + " z=" + fmt("%.2f", r.z_score));
      }
      o.check(rep.table.count(kPrecisionExceededKey) == 0, "no precision losses");
      if (n == 1) {
        const double want = one_minus.get_d() / static_cast<double>(p);
        const double z = stats::proportion_z(order_p, rep.table.total_trials, want);
        o.check(std::abs(z) < 3.0, "p=" + std::to_string(p) + " n=1 pooled Z/p " +
                                       fmt("%.5f", static_cast<double>(order_p) / rep.table.total_trials) +
                                       " vs " + fmt("%.5f", want) + " z=" + fmt("%.2f", z));
      }
    }
  }
  return o;
}

Outcome zero_sum_identity() {
  Outcome o;
  for (int n : {3, 5}) {
    ExperimentConfig zs;
    zs.kind = ExperimentKind::HaarMu;
    zs.primes = {3};
    zs.n = n;
    zs.zero_sum = true;
    zs.trials = 100000;
    zs.seed = 1;
    zs.max_order = 9;
    ExperimentConfig plain = zs;
    plain.zero_sum = false;
    plain.n = n - 1;
    Report a = run_experiment(zs), b = run_experiment(plain);
    for (const auto& r : a.rows) {
      if (r.key == kPrecisionExceededKey) continue;
      const std::uint64_t other = [&] {
        for (const auto& s : b.rows)
          if (s.key == r.key) return s.observed_count;
        return std::uint64_t{0};
      }();
      const double z = stats::two_sample_proportion_z(r.observed_count, a.table.total_trials, other, b.table.total_trials);
      o.check(std::abs(z) < 3.0, "n=" + std::to_string(n) + " " + r.key + ": zero-sum " +
                                     fmt("%.5f", r.proportion) + " vs size " + std::to_string(n - 1) + " " +
                                     fmt("%.5f", static_cast<double>(other) / b.table.total_trials) +
                                     " z=" + fmt("%.2f", z));
    }
  }
  return o;
}

Outcome moments() {
  Outcome o;
  Report haar = run_experiment(config(
      R"({"kind": "haar-moments", "prime": 3, "n": 8, "trials": 100000, "seed": 1, "targets": [[1], [1, 1], [2]]})"));
  for (const auto& r : haar.rows) {
    if (r.key == "p^rank") continue;
    o.check(std::abs(r.z_score) < 3.0, "Haar p=3 n=8 Sur(" + r.key + "): " + fmt("%.4f", r.proportion) +
                                           " vs " + fmt("%.0f", r.expected_ratio) + " z=" + fmt("%.2f", r.z_score));
  }
  for (long p : {2, 3}) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::GraphMoments;
    cfg.primes = {p};
    cfg.n = 30;
    cfg.q = 0.5;
    cfg.trials = 20000;
    cfg.seed = 1;
    cfg.targets = {{1}};
    Report rep = run_experiment(cfg);
    for (const auto& r : rep.rows)
      if (r.key == detail::kRankMomentKey)
        o.check(std::abs(r.z_score) < 3.0, "graphs p=" + std::to_string(p) + " mean p^rank " +
                                               fmt("%.4f", r.proportion) + " vs 2 z=" + fmt("%.2f", r.z_score));
  }
  return o;
}

Outcome constants() {
  Outcome o;
  auto within = [&](const char* name, const Prediction& v, double lo, double hi) {
    const double x = v.to_double();
    o.check(x > lo && x < hi, std::string(name) + " = " + v.to_string(12) + " in (" + fmt("%g", lo) + ", " +
                                  fmt("%g", hi) + ")");
    o.check(v.bound_double() < 1e-9, std::string(name) + " tail bound " + fmt("%.3g", v.bound_double()));
  };
  within("c_2", c_p(2), 0.4194, 0.4195);
  within("c_17", c_p(17), 0.9409, 0.9410);
  within("cyclic (all primes)", cyclic_probability_global(), 0.7935, 0.7936);
  within("cyclic (odd primes)", odd_cyclic_probability(), 0.9455, 0.9465);
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(8);
  int agree = 0, enumerated = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 4;
    IntMatrix m = oracle::random_matrix(rng, n, n, -5, 5);
    const FiniteAbelianGroup got = cokernel_invariants(m);
    bool ok = got == oracle::torsion_by_minors(m);
    if (auto brute = oracle::torsion_by_cosets(m)) {
      ++enumerated;
      ok = ok && got == *brute;
    }
    agree += ok;
  }
  o.check(agree == 200, "cokernel invariants agree on " + std::to_string(agree) + "/200 matrices (" +
                            std::to_string(enumerated) + " by coset enumeration)");
  o.check(enumerated >= 190, "coset enumeration covered " + std::to_string(enumerated) + " matrices");

  auto rep = checks::odd_classification_check(3, 4, 3000, 8);
  o.check(rep.ok(), "p=3, |Gamma| <= 81: " + std::to_string(rep.classes) + " classes, " +
                        std::to_string(rep.forms) + " forms checked against brute-force isomorphism" +
                        (rep.ok() ? "" : "; first failure: " + rep.failures.front()));

  bool identity = true;
  for (long p : {2, 3, 5})
    for (int k = 0; k <= 6; ++k) {
      Integer sum = 0;
      for (int j = 0; j <= k; ++j) sum += ipow(Integer(p), j * (j - 1) / 2) * gaussian_binomial(k, j, p);
      identity = identity && sum == rank_moment(k, p);
      if (k <= 4 && p <= 3)
        for (int j = 0; j <= k; ++j)
          identity = identity && gaussian_binomial(k, j, p) == oracle::count_subspaces(k, j, static_cast<int>(p));
    }
  o.check(identity, "q-binomial identity for k <= 6, p in {2,3,5}");
  return o;
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  Outcome o;
  if (cli.empty()) {
    o.check(false, "no CLI path given");
    return o;
  }
  fs::create_directories(work);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"simulate-graphs", R"({"kind": "graph-cyclic", "n": 16, "trials": 3000, "seed": 7})"},
      {"simulate-graphs", R"({"kind": "graph-pairing-freq", "n": 14, "prime": 2, "trials": 3000, "seed": 7})"},
      {"simulate-graphs", R"({"kind": "graph-two-primes", "n": 14, "trials": 3000, "seed": 7, "max_order": 12})"},
      {"simulate-graphs", R"({"kind": "graph-moments", "n": 14, "prime": 3, "trials": 3000, "seed": 7,
                              "targets": [[1], [1, 1]]})"},
      {"simulate-haar", R"({"kind": "haar-mu", "prime": 2, "n": 4, "trials": 5000, "seed": 7})"},
      {"simulate-haar", R"({"kind": "haar-mu", "prime": 3, "n": 4, "trials": 5000, "seed": 7, "zero_sum": true})"},
      {"simulate-haar", R"({"kind": "haar-moments", "prime": 3, "n": 6, "trials": 5000, "seed": 7,
                            "targets": [[1], [2]]})"}};
  int idx = 0;
  for (const auto& [sub, json] : runs) {
    const fs::path cfg = work / ("config" + std::to_string(idx) + ".json");
    std::ofstream(cfg) << json;
    const std::string kind = nlohmann::json::parse(json).at("kind");
    for (const char* format : {"csv", "json"}) {
      std::vector<std::string> outputs;
      bool ran = true;
      for (const char* threads : {"1", "4"}) {
        const fs::path out = work / ("out" + std::to_string(idx) + "_" + threads + "." + format);
        ran = ran && run_cli(cli, sub + " --config " + cfg.string() + " --threads " + threads + " --format " +
                                      format + " --out " + out.string()) == 0;
        outputs.push_back(slurp(out));
      }
      o.check(ran && !outputs[0].empty() && outputs[0] == outputs[1],
              kind + " " + format + ": threads 1 and 4 give identical bytes (" +
                  std::to_string(outputs[0].size()) + " bytes)");
    }
    ++idx;
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli;
  std::string workdir = (fs::temp_directory_path() / "jacpair_acceptance").string();
  bool verbose = false;
  app.add_option("--cli", cli, "path to the jacpair executable");
  app.add_option("--workdir", workdir, "directory for temporary reports");
  app.add_flag("--verbose", verbose, "print every individual check");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact Aut counts for the tabulated classes", aut_tables},
      {"cyclic Jacobian probability, n=30 q=.5, 10^4 trials", cyclic_probability},
      {"pairing-class ratios, n=20 q=.5, 10^5 trials, p=2 and p=3", pairing_frequencies},
      {"Haar class frequencies vs mu_n, p in {2,3}, n in {1,2,4}", haar_frequencies},
      {"zero-sum Sym_n vs Sym_(n-1), p=3, n in {3,5}", zero_sum_identity},
      {"surjection and p-rank moments", moments},
      {"prediction constants and tail bounds", constants},
      {"oracle equivalence", oracle_equivalence},
      {"byte-identical reports across thread counts", [&] { return determinism(cli, workdir); }}};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " (" << fmt("%.1f", dt)
              << " s)\n";
    for (const auto& line : o.lines)
      if (verbose || !o.pass || line.rfind("BAD", 0) == 0) std::cout << "    " << line << '\n';
    std::cout.flush();
    if (!o.pass) ++failures;
  }
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criterion(s) failed" : "acceptance: all passed")
            << '\n';
  return failures ? 1 : 0;
}
