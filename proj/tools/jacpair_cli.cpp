// jacpair: command-line front end for the experiments, predictions and classifier.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jacpair/classify.hpp"
#include "jacpair/errors.hpp"
#include "jacpair/harness.hpp"
#include "jacpair/theory.hpp"
#include "jacpair/version.hpp"

namespace {

using namespace jacpair;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFlagged = 3;

struct RunFlags {
  std::string config_path;
  std::optional<std::string> kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<unsigned> threads;
  std::optional<int> n;
  std::optional<double> q;
  std::optional<std::vector<std::int64_t>> primes;
  std::optional<bool> zero_sum;
  std::string out;
  std::string format = "csv";
  bool strict = false;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--config", f.config_path, "experiment config (JSON)");
  sub->add_option("--kind", f.kind, "experiment kind when no config file is given");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--trials", f.trials, "number of trials");
  sub->add_option("--threads", f.threads, "worker threads (does not change results)");
  sub->add_option("--n", f.n, "graph or matrix size");
  sub->add_option("--q", f.q, "edge probability");
  sub->add_option("--prime", f.primes, "prime(s)")->expected(1, 2);
  sub->add_flag("--zero-sum{true}", f.zero_sum, "zero row/column sums (Haar)");
  sub->add_option("--out", f.out, "output file (default: stdout)");
  sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--strict", f.strict, "exit with status 3 when any row is flagged");
}

ExperimentConfig build_config(const RunFlags& f, const std::string& default_kind) {
  nlohmann::json j;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot open config file '" + f.config_path + "'");
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + f.config_path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  } else {
    j = nlohmann::json::object();
    j["kind"] = f.kind.value_or(default_kind);
  }
  if (f.kind) j["kind"] = *f.kind;
  if (f.seed) j["seed"] = *f.seed;
  if (f.trials) j["trials"] = *f.trials;
  if (f.n) j["n"] = *f.n;
  if (f.q) j["q"] = *f.q;
  if (f.primes) {
    j.erase("prime");
    j["primes"] = *f.primes;
  }
  if (f.zero_sum) j["zero_sum"] = *f.zero_sum;
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  if (f.threads) cfg.threads = *f.threads;
  return cfg;
}

int run_simulation(const RunFlags& f, bool graphs) {
  ExperimentConfig cfg = build_config(f, graphs ? "graph-cyclic" : "haar-mu");
  if (is_graph_kind(cfg.kind) != graphs)
    throw ConfigError("kind '" + to_string(cfg.kind) + "' belongs to " +
                      (graphs ? "simulate-haar" : "simulate-graphs"));
  const ReportFormat fmt = parse_format(f.format);
  Report rep = run_experiment(cfg);
  emit_report(f.out, rep, fmt, std::cout);
  for (const auto& r : rep.rows)
    if (r.flagged())
      std::cerr << (r.failed() ? "FAIL " : "flag ") << r.key << ": z = " << r.z_score << '\n';
  for (const auto& n : rep.notes) std::cerr << "flag: " << n << '\n';
  return f.strict && rep.has_flags() ? kExitFlagged : kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictFlags {
  std::string quantity;
  std::int64_t p = 2;
  int n = 0;
  int k = 1;
  int j = 0;
  std::string cls;
  std::vector<int> target;
  int terms = kDefaultFactorsPerPrime;
  std::int64_t prime_bound = kDefaultPrimeBound;
  bool zero_sum = false;
  int digits = 12;
  std::string format = "csv";
};

void print_prediction(const std::string& name, const Prediction& pr, const PredictFlags& f) {
  if (f.format == "json") {
    nlohmann::json j{{"quantity", name},
                     {"value", pr.to_string(f.digits)},
                     {"truncation_bound", pr.bound_double()},
                     {"terms_used", pr.terms_used}};
    if (pr.exact) j["exact"] = pr.exact->get_str();
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "quantity,value,truncation_bound,exact\n"
              << name << ',' << pr.to_string(f.digits) << ',' << pr.bound_double() << ','
              << (pr.exact ? pr.exact->get_str() : "") << '\n';
  }
}

void print_integer(const std::string& name, const Integer& v, const PredictFlags& f) {
  if (f.format == "json") {
    std::cout << nlohmann::json{{"quantity", name}, {"value", v.get_str()}, {"exact", v.get_str()}}.dump(2) << '\n';
  } else {
    std::cout << "quantity,value,truncation_bound,exact\n" << name << ',' << v.get_str() << ",0," << v.get_str() << '\n';
  }
}

int run_predict(const PredictFlags& f) {
  const auto& q = f.quantity;
  if (q == "c_p") {
    print_prediction("c_p(" + std::to_string(f.p) + ")", c_p(f.p, f.terms), f);
  } else if (q == "cyclic-p") {
    print_prediction("cyclic_p(" + std::to_string(f.p) + ")", cyclic_p_probability(f.p, f.terms), f);
  } else if (q == "cyclic") {
    print_prediction("cyclic_global", cyclic_probability_global(f.prime_bound, f.terms), f);
  } else if (q == "odd-cyclic") {
    print_prediction("odd_cyclic", odd_cyclic_probability(f.prime_bound, f.terms), f);
  } else if (q == "mu") {
    if (f.cls.empty()) throw ConfigError("--class is required");
    const PairingClass c = PairingClass::parse(f.cls);
    if (f.n > 0) {
      print_prediction("mu_" + std::to_string(f.n) + "(" + f.cls + ")",
                       f.zero_sum ? mu_n_zerosum(c, f.p, f.n) : mu_n_finite(c, f.p, f.n), f);
    } else {
      print_prediction("mu(" + f.cls + ")", mu_measure(c, f.p, f.terms), f);
    }
  } else if (q == "aut") {
    if (f.cls.empty()) throw ConfigError("--class is required");
    print_integer("aut(" + f.cls + ")", Integer(aut_of_class(PairingClass::parse(f.cls))), f);
  } else if (q == "moment") {
    if (f.target.empty()) throw ConfigError("--target is required");
    print_integer("sur_moment", expected_surjections(PartitionType(f.target), f.p), f);
  } else if (q == "rank-moment") {
    print_integer("rank_moment", rank_moment(f.k, f.p), f);
  } else if (q == "qbinom") {
    print_integer("gaussian_binomial", gaussian_binomial(f.k, f.j, f.p), f);
  } else {
    throw ConfigError("unknown quantity '" + q + "'");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// classify

PairingGram gram_from_json(const nlohmann::json& j) {
  const auto& ord = j.contains("orders") ? j.at("orders") : j.at("invariants");
  std::vector<Integer> orders;
  for (const auto& o : ord) orders.emplace_back(o.is_string() ? o.get<std::string>() : std::to_string(o.get<long>()));
  const auto& g = j.at("gram");
  const std::size_t k = orders.size();
  if (g.size() != k) throw ConfigError("gram must be " + std::to_string(k) + " x " + std::to_string(k));
  RationalMatrix m(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    if (g[a].size() != k) throw ConfigError("gram must be square");
    for (std::size_t b = 0; b < k; ++b) {
      const auto& x = g[a][b];
      Rational v(x.is_string() ? x.get<std::string>() : std::to_string(x.get<long>()));
      v.canonicalize();
      m(a, b) = v;
    }
  }
  return PairingGram(std::move(orders), std::move(m));
}

int run_classify(const std::string& path, std::int64_t catalog_bound, const std::string& format) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("input file '" + path + "' is not valid JSON: " + e.what());
  }
  PairingGram pg;
  std::string source;
  try {
    if (j.is_object() && j.contains("gram")) {
      pg = gram_from_json(j);
      source = "gram";
    } else {
      pg = jacobian_with_pairing(j.get<Graph>());
      source = "graph";
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed input: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid input: ") + e.what());
  }
  const PairingClass c = classify(pg, catalog_bound);
  const std::uint64_t aut = aut_of_class(c);
  if (format == "json") {
    std::cout << nlohmann::json{{"source", source},
                                {"group", pg.group().to_string()},
                                {"class", c.to_string()},
                                {"aut", aut}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "group,class,aut\n\"" << pg.group().to_string() << "\"," << c.to_string() << ',' << aut << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jacobians of random graphs with their duality pairings"};
  app.set_version_flag("--version", std::string(kSoftwareName) + " " + kVersion);
  app.require_subcommand(1);

  RunFlags graph_flags, haar_flags;
  auto* sg = app.add_subcommand("simulate-graphs", "Monte Carlo over connected G(n, q)");
  add_run_flags(sg, graph_flags);
  auto* sh = app.add_subcommand("simulate-haar", "Monte Carlo over Haar-random symmetric p-adic matrices");
  add_run_flags(sh, haar_flags);

  PredictFlags pf;
  auto* sp = app.add_subcommand("predict", "Evaluate a predicted probability or moment");
  sp->add_option("quantity", pf.quantity,
                 "c_p | cyclic-p | cyclic | odd-cyclic | mu | aut | moment | rank-moment | qbinom")
      ->required();
  sp->add_option("--p", pf.p, "prime");
  sp->add_option("--n", pf.n, "matrix size (mu: finite n; 0 for the limit)");
  sp->add_option("--k", pf.k, "k for rank-moment and qbinom");
  sp->add_option("--j", pf.j, "j for qbinom");
  sp->add_option("--class", pf.cls, "pairing class, e.g. A3+B3");
  sp->add_option("--target", pf.target, "target exponents, e.g. 1,1")->delimiter(',');
  sp->add_option("--terms", pf.terms, "factors per prime");
  sp->add_option("--prime-bound", pf.prime_bound, "largest prime in global products");
  sp->add_flag("--zero-sum", pf.zero_sum, "zero-sum variant of mu_n");
  sp->add_option("--digits", pf.digits, "significant digits");
  sp->add_option("--format", pf.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string classify_path, classify_format = "csv";
  std::int64_t catalog_bound = kDefaultCatalogBound;
  auto* sc = app.add_subcommand("classify", "Classify a Gram matrix or the Jacobian of an edge list");
  sc->add_option("input", classify_path, "JSON file: {orders, gram} or {n, edges}")->required();
  sc->add_option("--catalog-bound", catalog_bound, "largest 2-group order searched");
  sc->add_option("--format", classify_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sg) return run_simulation(graph_flags, true);
    if (*sh) return run_simulation(haar_flags, false);
    if (*sp) return run_predict(pf);
    if (*sc) return run_classify(classify_path, catalog_bound, classify_format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
