#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacpair/classify.hpp"
#include "jacpair/errors.hpp"
#include "jacpair/frequency.hpp"
#include "jacpair/graph.hpp"
#include "jacpair/haar.hpp"
#include "jacpair/homs.hpp"
#include "jacpair/pairing.hpp"
#include "jacpair/stats.hpp"
#include "jacpair/theory.hpp"
#include "jacpair/version.hpp"

namespace jacpair {

enum class ExperimentKind { GraphCyclic, GraphPairingFreq, GraphTwoPrimes, GraphMoments, HaarMu, HaarMoments };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::GraphCyclic: return "graph-cyclic";
    case ExperimentKind::GraphPairingFreq: return "graph-pairing-freq";
    case ExperimentKind::GraphTwoPrimes: return "graph-two-primes";
    case ExperimentKind::GraphMoments: return "graph-moments";
    case ExperimentKind::HaarMu: return "haar-mu";
    case ExperimentKind::HaarMoments: return "haar-moments";
  }
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::GraphCyclic, ExperimentKind::GraphPairingFreq, ExperimentKind::GraphTwoPrimes,
                 ExperimentKind::GraphMoments, ExperimentKind::HaarMu, ExperimentKind::HaarMoments})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

inline bool is_graph_kind(ExperimentKind k) {
  return k == ExperimentKind::GraphCyclic || k == ExperimentKind::GraphPairingFreq ||
         k == ExperimentKind::GraphTwoPrimes || k == ExperimentKind::GraphMoments;
}

/// One experiment.  Fields not used by `kind` are ignored and not echoed.
/// `threads` affects scheduling only and is never part of a report.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::GraphCyclic;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  int n = 20;
  double q = 0.5;
  std::vector<std::int64_t> primes{2};   // one prime, or two for graph-two-primes
  std::int64_t max_order = 8;            // rows for classes with |Gamma| <= max_order
  std::optional<std::vector<std::int64_t>> group;  // graph-two-primes: restrict rows to this group
  std::int64_t catalog_bound = kDefaultCatalogBound;
  std::vector<std::vector<int>> targets{{1}};       // moment targets, as exponent lists
  bool zero_sum = false;
  int precision = 0;  // 0: largest supported for the prime
  int guard = kDefaultGuard;
  double precision_exceeded_limit = 1e-4;
  unsigned threads = 1;

  [[nodiscard]] std::int64_t prime() const { return primes.at(0); }

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (is_graph_kind(kind)) {
      if (n < 1) throw ConfigError("n must be >= 1");
      if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0,1)");
    }
    const std::size_t want = kind == ExperimentKind::GraphTwoPrimes ? 2 : 1;
    if (kind != ExperimentKind::GraphCyclic) {
      if (primes.size() != want) throw ConfigError("expected " + std::to_string(want) + " prime(s)");
      for (auto p : primes)
        if (!detail::is_prime_small(p)) throw ConfigError("not a prime: " + std::to_string(p));
      if (want == 2 && primes[0] == primes[1]) throw ConfigError("the two primes must differ");
    }
    if (max_order < 1) throw ConfigError("max_order must be >= 1");
    if (catalog_bound < 1) throw ConfigError("catalog_bound must be >= 1");
    if (kind == ExperimentKind::HaarMu || kind == ExperimentKind::HaarMoments) {
      if (n < 1 || (zero_sum && n < 2)) throw ConfigError("n too small for the Haar experiment");
      if (precision < 0 || precision > max_precision(prime()))
        throw ConfigError("precision must be in [1, " + std::to_string(max_precision(prime())) + "] or 0");
      if (guard < 1) throw ConfigError("guard must be >= 1");
      if (effective_precision() - guard < 2) throw ConfigError("precision too small for guard");
    }
    if (kind == ExperimentKind::HaarMoments || kind == ExperimentKind::GraphMoments) {
      if (targets.empty()) throw ConfigError("at least one moment target is required");
      for (const auto& t : targets) {
        if (t.empty()) throw ConfigError("moment targets must be nontrivial");
        for (int e : t)
          if (e < 1) throw ConfigError("target exponents must be >= 1");
        if (kind == ExperimentKind::HaarMoments && static_cast<int>(t.size()) > (zero_sum ? n - 1 : n))
          throw ConfigError("target has more parts than the matrix size");
      }
    }
  }

  [[nodiscard]] int effective_precision() const { return precision > 0 ? precision : max_precision(prime()); }

  [[nodiscard]] HaarOptions haar_options() const {
    HaarOptions o;
    o.precision = effective_precision();
    o.guard = guard;
    o.zero_sum = zero_sum;
    o.catalog_bound = catalog_bound;
    o.threads = threads;
    return o;
  }

  [[nodiscard]] GraphSampleConfig graph_config() const { return GraphSampleConfig{n, q, seed, true}; }

  /// Effective configuration: every field the experiment depends on.
  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["trials"] = trials;
    j["seed"] = seed;
    j["n"] = n;
    switch (kind) {
      case ExperimentKind::GraphCyclic:
        j["q"] = q;
        break;
      case ExperimentKind::GraphPairingFreq:
        j["q"] = q;
        j["primes"] = primes;
        j["max_order"] = max_order;
        j["catalog_bound"] = catalog_bound;
        break;
      case ExperimentKind::GraphTwoPrimes:
        j["q"] = q;
        j["primes"] = primes;
        j["max_order"] = max_order;
        j["group"] = group ? nlohmann::json(*group) : nlohmann::json(nullptr);
        j["catalog_bound"] = catalog_bound;
        break;
      case ExperimentKind::GraphMoments:
        j["q"] = q;
        j["primes"] = primes;
        j["targets"] = targets;
        break;
      case ExperimentKind::HaarMu:
      case ExperimentKind::HaarMoments:
        j["primes"] = primes;
        j["zero_sum"] = zero_sum;
        j["precision"] = effective_precision();
        j["guard"] = guard;
        j["precision_exceeded_limit"] = precision_exceeded_limit;
        if (kind == ExperimentKind::HaarMu) {
          j["max_order"] = max_order;
          j["catalog_bound"] = catalog_bound;
        } else {
          j["targets"] = targets;
        }
        break;
    }
    return j;
  }

  /// Parses a config object; unknown keys and ill-typed values are errors.
  static ExperimentConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    static const std::set<std::string> known{"kind",  "trials",  "seed",      "n",
                                             "q",     "primes",  "prime",     "max_order",
                                             "group", "targets", "zero_sum",  "precision",
                                             "guard", "catalog_bound", "precision_exceeded_limit", "threads"};
    for (const auto& [k, v] : j.items())
      if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
    try {
      if (!j.contains("kind")) throw ConfigError("config is missing 'kind'");
      c.kind = parse_kind(j.at("kind").get<std::string>());
      if (j.contains("trials")) c.trials = j.at("trials").get<std::uint64_t>();
      if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("n")) c.n = j.at("n").get<int>();
      if (j.contains("q")) c.q = j.at("q").get<double>();
      if (j.contains("prime") && j.contains("primes")) throw ConfigError("give either 'prime' or 'primes'");
      if (j.contains("prime")) c.primes = {j.at("prime").get<std::int64_t>()};
      if (j.contains("primes")) c.primes = j.at("primes").get<std::vector<std::int64_t>>();
      if (c.kind == ExperimentKind::GraphTwoPrimes && !j.contains("primes")) c.primes = {2, 3};
      if (j.contains("max_order")) c.max_order = j.at("max_order").get<std::int64_t>();
      if (j.contains("group") && !j.at("group").is_null())
        c.group = j.at("group").get<std::vector<std::int64_t>>();
      if (j.contains("targets")) c.targets = j.at("targets").get<std::vector<std::vector<int>>>();
      if (j.contains("zero_sum")) c.zero_sum = j.at("zero_sum").get<bool>();
      if (j.contains("precision")) c.precision = j.at("precision").get<int>();
      if (j.contains("guard")) c.guard = j.at("guard").get<int>();
      if (j.contains("catalog_bound")) c.catalog_bound = j.at("catalog_bound").get<std::int64_t>();
      if (j.contains("precision_exceeded_limit"))
        c.precision_exceeded_limit = j.at("precision_exceeded_limit").get<double>();
      if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

inline constexpr double kFlagSigma = 3.0;
inline constexpr double kFailSigma = 4.0;

/// One report line.  For ratio rows (class frequencies against the trivial
/// class) observed_ratio = count(trivial) / count(class) and expected_ratio =
/// |Gamma| |Aut|; for probability and moment rows they hold the observed and
/// predicted value.  NaN marks an undefined field.
struct ComparisonRow {
  std::string key;
  std::uint64_t observed_count = 0;
  std::uint64_t total = 0;
  double proportion = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double observed_ratio = std::numeric_limits<double>::quiet_NaN();
  double expected_ratio = std::numeric_limits<double>::quiet_NaN();
  double z_score = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] bool flagged() const { return std::isfinite(z_score) && std::abs(z_score) >= kFlagSigma; }
  [[nodiscard]] bool failed() const { return std::isfinite(z_score) && std::abs(z_score) >= kFailSigma; }
};

inline bool same_field(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

inline bool operator==(const ComparisonRow& a, const ComparisonRow& b) {
  return a.key == b.key && a.observed_count == b.observed_count && a.total == b.total &&
         same_field(a.proportion, b.proportion) && same_field(a.wilson_lo, b.wilson_lo) &&
         same_field(a.wilson_hi, b.wilson_hi) && same_field(a.observed_ratio, b.observed_ratio) &&
         same_field(a.expected_ratio, b.expected_ratio) && same_field(a.z_score, b.z_score);
}

struct Report {
  ExperimentConfig config;
  FrequencyTable table;
  std::vector<ComparisonRow> rows;
  std::vector<std::string> notes;  // run-level warnings (e.g. precision losses)

  [[nodiscard]] bool has_flags() const {
    if (!notes.empty()) return true;
    for (const auto& r : rows)
      if (r.flagged()) return true;
    return false;
  }
};

namespace detail {

inline ComparisonRow count_row(const std::string& key, std::uint64_t count, std::uint64_t total) {
  ComparisonRow r;
  r.key = key;
  r.observed_count = count;
  r.total = total;
  r.proportion = total ? static_cast<double>(count) / static_cast<double>(total) : 0.0;
  auto w = stats::wilson(count, total);
  r.wilson_lo = w.lo;
  r.wilson_hi = w.hi;
  return r;
}

inline ComparisonRow probability_row(const std::string& key, std::uint64_t count, std::uint64_t total,
                                     double predicted) {
  ComparisonRow r = count_row(key, count, total);
  r.observed_ratio = r.proportion;
  r.expected_ratio = predicted;
  r.z_score = stats::proportion_z(count, total, predicted);
  return r;
}

inline ComparisonRow ratio_row(const std::string& key, std::uint64_t count, std::uint64_t trivial,
                               std::uint64_t total, double expected) {
  ComparisonRow r = count_row(key, count, total);
  r.expected_ratio = expected;
  if (count > 0) r.observed_ratio = static_cast<double>(trivial) / static_cast<double>(count);
  if (count > 0 && trivial > 0) r.z_score = stats::log_ratio_z(trivial, count, expected);
  return r;
}

inline ComparisonRow moment_row(const std::string& key, const MomentSums& m, double expected) {
  ComparisonRow r;
  r.key = key;
  r.observed_count = m.used();
  r.total = m.trials;
  r.proportion = m.mean();
  const double se = m.std_error();
  r.wilson_lo = r.proportion - stats::kZ95 * se;
  r.wilson_hi = r.proportion + stats::kZ95 * se;
  r.observed_ratio = r.proportion;
  r.expected_ratio = expected;
  if (se > 0) r.z_score = (r.proportion - expected) / se;
  return r;
}

inline ComparisonRow rest_row(const FrequencyTable& t, const std::set<std::string>& listed) {
  std::uint64_t c = 0;
  for (const auto& [k, v] : t.counts)
    if (!listed.count(k) && k != kPrecisionExceededKey) c += v;
  return count_row("other", c, t.total_trials);
}

inline int max_exponent(std::int64_t p, std::int64_t max_order) {
  int m = 0;
  std::int64_t o = p;
  while (o <= max_order) {
    ++m;
    if (o > max_order / p) break;
    o *= p;
  }
  return m;
}

inline std::string target_text(std::int64_t p, const std::vector<int>& exps) {
  std::string s = "Sur(";
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (i) s += "x";
    s += ipow(Integer(static_cast<long>(p)), exps[i]).get_str();
  }
  return s + ")";
}

inline const std::string kRankMomentKey = "p^rank";

// One MomentSums per target, then one for p^rank.
struct MomentRun {
  std::vector<MomentSums> sums;
  std::uint64_t trials = 0;
  std::uint64_t precision_exceeded = 0;
  std::uint64_t discarded = 0;

  void merge(const MomentRun& o) {
    if (sums.size() < o.sums.size()) sums.resize(o.sums.size());
    for (std::size_t i = 0; i < o.sums.size(); ++i) sums[i].merge(o.sums[i]);
    trials += o.trials;
    precision_exceeded += o.precision_exceeded;
    discarded += o.discarded;
  }

  void fill_table(FrequencyTable& t) const {
    t = FrequencyTable{};
    t.add("sampled", trials - precision_exceeded);
    if (precision_exceeded) t.add(kPrecisionExceededKey, precision_exceeded);
    t.discarded = discarded;
  }
};

inline std::vector<ComparisonRow> moment_rows(const ExperimentConfig& cfg, const MomentRun& run) {
  std::vector<ComparisonRow> rows;
  const auto p = cfg.prime();
  MomentSums empty;
  auto at = [&](std::size_t i) -> const MomentSums& { return i < run.sums.size() ? run.sums[i] : empty; };
  for (std::size_t i = 0; i < cfg.targets.size(); ++i)
    rows.push_back(moment_row(target_text(p, cfg.targets[i]), at(i),
                              expected_surjections(PartitionType(cfg.targets[i]), p).get_d()));
  rows.push_back(moment_row(kRankMomentKey, at(cfg.targets.size()), rank_moment(1, p).get_d()));
  for (auto& r : rows) r.total = run.trials;
  return rows;
}

inline void add_moment_sample(MomentRun& run, const ExperimentConfig& cfg, const std::vector<int>& src) {
  const auto p = cfg.prime();
  run.sums.resize(cfg.targets.size() + 1);
  ++run.trials;
  for (std::size_t i = 0; i < cfg.targets.size(); ++i)
    run.sums[i].add(count_surjections(src, PartitionType(cfg.targets[i]).exponents(), p));
  run.sums.back().add(ipow(Integer(static_cast<long>(p)), src.size()));
}

}  // namespace detail

/// Cyclic vs noncyclic Jacobians of connected G(n, q).
inline Report run_graph_cyclic(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto gc = cfg.graph_config();
  Report rep{cfg, {}, {}, {}};
  rep.table = run_chunked<FrequencyTable>(
      cfg.trials, cfg.threads,
      [&](std::uint64_t b, std::uint64_t e) {
        FrequencyTable t;
        for (std::uint64_t trial = b; trial < e; ++trial) {
          auto s = sample_gnq_counted(gc, trial);
          t.discarded += s.attempts - 1;
          bool cyclic = true;
          if (s.graph.vertex_count() > 1) cyclic = cokernel_invariants(reduced_laplacian(s.graph)).is_cyclic();
          t.add(cyclic ? "cyclic" : "noncyclic");
        }
        return t;
      },
      [](FrequencyTable& a, const FrequencyTable& b) { a.merge(b); });
  const double pc = cyclic_probability_global().to_double();
  rep.rows.push_back(detail::probability_row("cyclic", rep.table.count("cyclic"), rep.table.total_trials, pc));
  rep.rows.push_back(
      detail::probability_row("noncyclic", rep.table.count("noncyclic"), rep.table.total_trials, 1.0 - pc));
  return rep;
}

/// Frequencies of the Sylow-p pairing class, each compared with the trivial
/// class through the expected ratio |Gamma| |Aut(Gamma, delta)|.
inline Report run_graph_pairing_freq(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto gc = cfg.graph_config();
  const auto p = cfg.prime();
  Report rep{cfg, {}, {}, {}};
  rep.table = run_chunked<FrequencyTable>(
      cfg.trials, cfg.threads,
      [&](std::uint64_t b, std::uint64_t e) {
        FrequencyTable t;
        ClassCache cache(cfg.catalog_bound);
        for (std::uint64_t trial = b; trial < e; ++trial) {
          auto s = sample_gnq_counted(gc, trial);
          t.discarded += s.attempts - 1;
          if (s.graph.vertex_count() <= 1) {
            t.add("1");
            continue;
          }
          t.add(cache.key(local_sylow_pairing(reduced_laplacian(s.graph), p)));
        }
        return t;
      },
      [](FrequencyTable& a, const FrequencyTable& b) { a.merge(b); });
  const std::uint64_t trivial = rep.table.count("1");
  std::set<std::string> listed;
  for (const auto& cls : enumerate_classes(p, detail::max_exponent(p, cfg.max_order))) {
    if (cls.order() > cfg.max_order) continue;
    const std::string key = cls.to_string();
    listed.insert(key);
    const double expected = Integer(cls.order() * aut_of_class(cls)).get_d();
    rep.rows.push_back(detail::ratio_row(key, rep.table.count(key), trivial, rep.table.total_trials, expected));
  }
  rep.rows.push_back(detail::rest_row(rep.table, listed));
  return rep;
}

/// Joint classes over two primes; the expected ratio multiplies the per-prime
/// |Gamma| |Aut|.
inline Report run_graph_two_primes(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto gc = cfg.graph_config();
  Report rep{cfg, {}, {}, {}};
  rep.table = run_chunked<FrequencyTable>(
      cfg.trials, cfg.threads,
      [&](std::uint64_t b, std::uint64_t e) {
        FrequencyTable t;
        ClassCache cache(cfg.catalog_bound);
        for (std::uint64_t trial = b; trial < e; ++trial) {
          auto s = sample_gnq_counted(gc, trial);
          t.discarded += s.attempts - 1;
          if (s.graph.vertex_count() <= 1) {
            t.add("1");
            continue;
          }
          const IntMatrix l = reduced_laplacian(s.graph);
          PairingClass joint;
          Integer order = 1;
          bool beyond = false;
          for (auto p : cfg.primes) {
            auto part = local_sylow_pairing(l, p);
            order *= part.pairing.order();
            if (const PairingClass* c = cache.classify(part)) {
              joint = joint + *c;
            } else {
              beyond = true;
            }
          }
          t.add(beyond ? other_key(order) : joint.to_string());
        }
        return t;
      },
      [](FrequencyTable& a, const FrequencyTable& b) { a.merge(b); });
  const std::uint64_t trivial = rep.table.count("1");
  std::optional<FiniteAbelianGroup> restrict;
  if (cfg.group) {
    std::vector<Integer> orders;
    for (auto o : *cfg.group) orders.emplace_back(static_cast<long>(o));
    restrict = FiniteAbelianGroup::from_cyclic_orders(orders);
  }
  const auto p1 = cfg.primes[0], p2 = cfg.primes[1];
  std::vector<PairingClass> joint;
  for (const auto& a : enumerate_classes(p1, detail::max_exponent(p1, cfg.max_order)))
    for (const auto& b : enumerate_classes(p2, detail::max_exponent(p2, cfg.max_order))) {
      PairingClass c = a + b;
      if (c.order() > cfg.max_order) continue;
      if (restrict && !(gram_of(c).group() == *restrict) && !c.is_trivial()) continue;
      joint.push_back(c);
    }
  std::sort(joint.begin(), joint.end());
  std::set<std::string> listed;
  for (const auto& c : joint) {
    const std::string key = c.to_string();
    listed.insert(key);
    const double expected = Integer(c.order() * aut_of_class(c)).get_d();
    rep.rows.push_back(detail::ratio_row(key, rep.table.count(key), trivial, rep.table.total_trials, expected));
  }
  rep.rows.push_back(detail::rest_row(rep.table, listed));
  return rep;
}

/// Surjection moments of the Sylow-p part of graph Jacobians, plus E[p^rank].
inline Report run_graph_moments(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto gc = cfg.graph_config();
  Report rep{cfg, {}, {}, {}};
  auto run = run_chunked<detail::MomentRun>(
      cfg.trials, cfg.threads,
      [&](std::uint64_t b, std::uint64_t e) {
        detail::MomentRun r;
        for (std::uint64_t trial = b; trial < e; ++trial) {
          auto g = sample_gnq_counted(gc, trial);
          r.discarded += g.attempts - 1;
          std::vector<int> src;
          if (g.graph.vertex_count() > 1) src = local_sylow_exponents(reduced_laplacian(g.graph), cfg.prime());
          detail::add_moment_sample(r, cfg, src);
        }
        return r;
      },
      [](detail::MomentRun& a, const detail::MomentRun& b) { a.merge(b); });
  run.fill_table(rep.table);
  rep.rows = detail::moment_rows(cfg, run);
  return rep;
}

/// Class frequencies of Haar-random symmetric matrices against mu_n.
inline Report run_haar_mu(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto p = cfg.prime();
  Report rep{cfg, {}, {}, {}};
  rep.table = estimate_mu_n(p, cfg.n, cfg.trials, cfg.seed, cfg.haar_options());
  const int size = cfg.zero_sum ? cfg.n - 1 : cfg.n;
  std::set<std::string> listed;
  for (const auto& cls : enumerate_classes(p, detail::max_exponent(p, cfg.max_order))) {
    if (cls.order() > cfg.max_order) continue;
    if (gram_of(cls).group().p_rank(Integer(static_cast<long>(p))) > size) continue;
    const std::string key = cls.to_string();
    listed.insert(key);
    const double predicted = mu_n_finite(cls, p, size).to_double();
    rep.rows.push_back(detail::probability_row(key, rep.table.count(key), rep.table.total_trials, predicted));
  }
  rep.rows.push_back(detail::rest_row(rep.table, listed));
  const auto pe = rep.table.count(kPrecisionExceededKey);
  rep.rows.push_back(detail::count_row(kPrecisionExceededKey, pe, rep.table.total_trials));
  if (static_cast<double>(pe) > cfg.precision_exceeded_limit * static_cast<double>(rep.table.total_trials))
    rep.notes.push_back("precision-exceeded frequency above limit");
  return rep;
}

/// Surjection moments of Haar-random cokernels, plus E[p^rank].
inline Report run_haar_moments(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto p = cfg.prime();
  const auto opts = cfg.haar_options();
  Report rep{cfg, {}, {}, {}};
  auto run = run_chunked<detail::MomentRun>(
      cfg.trials, cfg.threads,
      [&](std::uint64_t b, std::uint64_t e) {
        detail::MomentRun r;
        for (std::uint64_t trial = b; trial < e; ++trial) {
          auto a = draw_haar(p, cfg.n, cfg.seed, trial, opts);
          if (cfg.zero_sum) a = a.principal_block(cfg.n - 1);
          std::vector<int> src;
          bool exceeded = false;
          for (int v : cokernel_valuations(a)) {
            if (v >= a.precision - opts.guard) exceeded = true;
            if (v > 0) src.push_back(v);
          }
          if (exceeded) {
            ++r.trials;
            ++r.precision_exceeded;
            continue;
          }
          detail::add_moment_sample(r, cfg, src);
        }
        return r;
      },
      [](detail::MomentRun& a, const detail::MomentRun& b) { a.merge(b); });
  run.fill_table(rep.table);
  rep.rows = detail::moment_rows(cfg, run);
  if (static_cast<double>(run.precision_exceeded) > cfg.precision_exceeded_limit * static_cast<double>(cfg.trials))
    rep.notes.push_back("precision-exceeded frequency above limit");
  return rep;
}

inline Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::GraphCyclic: return run_graph_cyclic(cfg);
    case ExperimentKind::GraphPairingFreq: return run_graph_pairing_freq(cfg);
    case ExperimentKind::GraphTwoPrimes: return run_graph_two_primes(cfg);
    case ExperimentKind::GraphMoments: return run_graph_moments(cfg);
    case ExperimentKind::HaarMu: return run_haar_mu(cfg);
    case ExperimentKind::HaarMoments: return run_haar_moments(cfg);
  }
  throw ConfigError("unknown experiment kind");
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

inline const char* kCsvHeader =
    "class,observed_count,total,proportion,wilson_lo,wilson_hi,observed_ratio,expected_ratio,z_score";

namespace detail {

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline nlohmann::json json_number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline double number_from_json(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.key << ',' << r.observed_count << ',' << r.total << ',' << detail::csv_number(r.proportion) << ','
        << detail::csv_number(r.wilson_lo) << ',' << detail::csv_number(r.wilson_hi) << ','
        << detail::csv_number(r.observed_ratio) << ',' << detail::csv_number(r.expected_ratio) << ','
        << detail::csv_number(r.z_score) << '\n';
  }
}

inline nlohmann::json row_to_json(const ComparisonRow& r) {
  return nlohmann::json{{"class", r.key},
                        {"observed_count", r.observed_count},
                        {"total", r.total},
                        {"proportion", detail::json_number(r.proportion)},
                        {"wilson_lo", detail::json_number(r.wilson_lo)},
                        {"wilson_hi", detail::json_number(r.wilson_hi)},
                        {"observed_ratio", detail::json_number(r.observed_ratio)},
                        {"expected_ratio", detail::json_number(r.expected_ratio)},
                        {"z_score", detail::json_number(r.z_score)}};
}

inline ComparisonRow row_from_json(const nlohmann::json& j) {
  ComparisonRow r;
  r.key = j.at("class").get<std::string>();
  r.observed_count = j.at("observed_count").get<std::uint64_t>();
  r.total = j.at("total").get<std::uint64_t>();
  r.proportion = detail::number_from_json(j.at("proportion"));
  r.wilson_lo = detail::number_from_json(j.at("wilson_lo"));
  r.wilson_hi = detail::number_from_json(j.at("wilson_hi"));
  r.observed_ratio = detail::number_from_json(j.at("observed_ratio"));
  r.expected_ratio = detail::number_from_json(j.at("expected_ratio"));
  r.z_score = detail::number_from_json(j.at("z_score"));
  return r;
}

inline nlohmann::json report_to_json(const Report& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) rows.push_back(row_to_json(r));
  return nlohmann::json{{"software", kSoftwareName},
                        {"version", kVersion},
                        {"seed", rep.config.seed},
                        {"config", rep.config.to_json()},
                        {"total_trials", rep.table.total_trials},
                        {"discarded", rep.table.discarded},
                        {"counts", rep.table.counts},
                        {"notes", rep.notes},
                        {"rows", rows}};
}

/// Rows of a JSON report.
inline std::vector<ComparisonRow> rows_from_json(const nlohmann::json& j) {
  std::vector<ComparisonRow> rows;
  for (const auto& r : j.at("rows")) rows.push_back(row_from_json(r));
  return rows;
}

inline void emit_report(std::ostream& out, const Report& rep, ReportFormat fmt) {
  if (fmt == ReportFormat::Csv) {
    write_csv(out, rep.rows);
  } else {
    out << report_to_json(rep).dump(2) << '\n';
  }
}

/// Writes to `path`, or to `fallback` when the path is empty.
inline void emit_report(const std::string& path, const Report& rep, ReportFormat fmt, std::ostream& fallback) {
  if (path.empty()) {
    emit_report(fallback, rep, fmt);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file '" + path + "'");
  emit_report(out, rep, fmt);
  out.flush();
  if (!out) throw Error("failed writing output file '" + path + "'");
}

}  // namespace jacpair
