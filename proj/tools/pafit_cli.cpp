// pafit: command-line front end over the C API.
//
// Exit codes: 0 success, 2 usage / config / io, 3 data or model mismatch,
// 4 numerical non-convergence, 1 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pafit/pafit.h"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNonconvergence = 4;

struct CliError {
  int code;
  std::string message;
};

int exit_code(pafit_status s) {
  switch (s) {
    case PAFIT_OK: return kOk;
    case PAFIT_ERR_INVALID_ARGUMENT:
    case PAFIT_ERR_CONFIG:
    case PAFIT_ERR_IO: return kUsage;
    case PAFIT_ERR_STRUCTURE:
    case PAFIT_ERR_LABELING:
    case PAFIT_ERR_DIMENSION:
    case PAFIT_ERR_PARSE:
    case PAFIT_ERR_DEGENERATE_DATA:
    case PAFIT_ERR_EMPTY_DATA:
    case PAFIT_ERR_SIZE_GUARD: return kData;
    case PAFIT_ERR_NONCONVERGENCE: return kNonconvergence;
    case PAFIT_ERR_INTERNAL: return kInternal;
  }
  return kInternal;
}

void check(pafit_status s) {
  if (s != PAFIT_OK) throw CliError{exit_code(s), std::string(pafit_status_name(s)) + ": " + pafit_last_error()};
}

// Owns a string returned by the library.
struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { pafit_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct History {
  pafit_history* h = nullptr;
  ~History() { pafit_history_free(h); }
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CliError{kUsage, flag + ": '" + item + "' is not a number"};
    }
  }
  if (out.empty()) throw CliError{kUsage, flag + ": empty list"};
  return out;
}

// pi / gamma flags: K from pi, gamma must hold K^2 row-major entries.
std::pair<std::vector<double>, std::vector<double>> hpam_flags(const std::optional<std::string>& pi,
                                                                const std::optional<std::string>& gamma) {
  if (!pi || !gamma) throw CliError{kUsage, "HPAM needs --pi and --gamma"};
  auto p = parse_list(*pi, "--pi");
  auto g = parse_list(*gamma, "--gamma");
  if (g.size() != p.size() * p.size())
    throw CliError{kUsage, "--gamma has " + std::to_string(g.size()) + " entries but --pi implies K = " +
                               std::to_string(p.size()) + " (expected " + std::to_string(p.size() * p.size()) + ")"};
  return {std::move(p), std::move(g)};
}

void write_text(const std::string& path, const std::string& text) {
  // Temp file + rename, so an interrupted run never leaves a partial file.
  const std::string tmp = path + ".tmp.cli";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError{kUsage, "cannot write " + path};
    out << text;
    if (!out.flush()) throw CliError{kUsage, "cannot write " + path};
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw CliError{kUsage, "cannot write " + path};
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kUsage, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Machine output goes to --out when given, else stdout; human text then moves to stderr.
void emit(const std::optional<std::string>& out, const std::string& text) {
  if (out)
    write_text(*out, text);
  else
    std::cout << text << (text.empty() || text.back() == '\n' ? "" : "\n");
}

std::ostream& human(const std::optional<std::string>& out) { return out ? std::cout : std::cerr; }

struct SimulateArgs {
  std::string model;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::optional<double> a, delta;
  std::optional<std::string> pi, gamma, out;
};

int cmd_simulate(const SimulateArgs& args) {
  json cfg = {{"model", args.model}, {"n", args.n}, {"seed", args.seed}};
  if (args.model == "bo" || args.model == "general") {
    if (!args.a) throw CliError{kUsage, "--model " + args.model + " needs --a"};
    cfg["bo_a"] = *args.a;
  }
  if (args.model == "general") {
    if (!args.delta) throw CliError{kUsage, "--model general needs --delta"};
    cfg["delta"] = *args.delta;
  }
  if (args.model == "hpam") {
    auto [p, g] = hpam_flags(args.pi, args.gamma);
    cfg["hpam"] = {{"pi", p}, {"gamma", g}};
  }
  OwnedString resolved;
  check(pafit_sim_config_resolve(cfg.dump().c_str(), &resolved.p));
  human(args.out) << "config: " << resolved.str() << "\n";

  History h;
  check(pafit_simulate(resolved.p, &h.h));
  OwnedString csv;
  check(pafit_history_to_csv(h.h, &csv.p));
  emit(args.out, csv.str());
  pafit_history_info info{};
  check(pafit_history_info_get(h.h, &info));
  human(args.out) << "simulated n=" << info.n << " edges=" << info.n << " max_degree=" << info.max_degree
                  << " self_loops=" << info.self_loops << " communities=" << info.K << "\n";
  return kOk;
}

struct FitArgs {
  std::string model, input;
  double eps = 1e-3, max = 100.0;
  std::string denominator = "exact";
  std::optional<std::string> out;
};

int cmd_fit(const FitArgs& args) {
  json cfg = {{"model", args.model}, {"input", args.input}};
  if (args.model == "bo")
    cfg["domain"] = {{"eps", args.eps}, {"max", args.max}};
  else
    cfg["denominator"] = args.denominator;
  human(args.out) << "config: " << cfg.dump() << "\n";

  History h;
  check(pafit_history_read_csv(args.input.c_str(), &h.h));
  OwnedString report;
  bool converged = false;
  if (args.model == "bo") {
    check(pafit_fit_bo_json(h.h, args.eps, args.max, &report.p));
    converged = json::parse(report.str()).at("converged").get<bool>();
  } else {
    int conv = 0;
    check(pafit_fit_hpam_json(h.h, args.denominator.c_str(), &report.p, &conv));
    converged = conv != 0;
  }
  emit(args.out, report.str());
  if (!converged) {
    std::cerr << "error: optimizer did not converge\n";
    return kNonconvergence;
  }
  return kOk;
}

struct LimitsArgs {
  std::string model;
  std::optional<double> a0;
  double tail_tol = 1e-12;
  std::size_t k_max = 1000;
  std::optional<std::string> pi, gamma, out;
};

int cmd_limits(const LimitsArgs& args) {
  OwnedString report;
  if (args.model == "bo") {
    if (!args.a0) throw CliError{kUsage, "--model bo needs --a0"};
    json cfg = {{"model", "bo"}, {"a0", *args.a0}, {"tail_tol", args.tail_tol}, {"k_max", args.k_max}};
    human(args.out) << "config: " << cfg.dump() << "\n";
    check(pafit_limits_bo_json(*args.a0, args.tail_tol, args.k_max, &report.p));
  } else {
    auto [p, g] = hpam_flags(args.pi, args.gamma);
    json cfg = {{"model", "hpam"}, {"pi", p}, {"gamma", g}};
    human(args.out) << "config: " << cfg.dump() << "\n";
    check(pafit_limits_hpam_json(p.size(), p.data(), g.data(), &report.p));
  }
  emit(args.out, report.str());
  return kOk;
}

struct ExperimentArgs {
  std::string config;
  std::optional<std::string> output_dir;
};

int cmd_experiment(const ExperimentArgs& args) {
  json cfg;
  try {
    cfg = json::parse(read_text(args.config));
  } catch (const json::parse_error& e) {
    throw CliError{kUsage, "config: invalid JSON: " + std::string(e.what())};
  }
  if (args.output_dir && cfg.is_object()) cfg["output_path"] = *args.output_dir;
  OwnedString resolved;
  check(pafit_experiment_config_resolve(cfg.dump().c_str(), &resolved.p));
  std::cout << "config: " << resolved.str() << "\n";

  OwnedString summary, warnings;
  check(pafit_run_experiment(resolved.p, 1, nullptr, &summary.p, &warnings.p));
  for (const auto& w : json::parse(warnings.str())) std::cerr << "warning: " << w.get<std::string>() << "\n";
  const std::string dir = json::parse(resolved.str()).at("output_path").get<std::string>();
  std::cout << summary.str();
  std::cout << "wrote " << dir << "/raw_estimates.csv and " << dir << "/summary.csv\n";
  return kOk;
}

struct IngestArgs {
  std::string input;
  std::optional<std::size_t> n_limit;
  double top_fraction = 0.05;
  std::vector<std::string> blocklist;
  std::optional<std::string> labels, out, report;
};

int cmd_ingest(const IngestArgs& args) {
  json req = {{"input", args.input}, {"top_fraction", args.top_fraction}};
  std::vector<std::string> prefixes;
  for (const auto& b : args.blocklist) {
    std::stringstream ss(b);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) prefixes.push_back(item);
  }
  req["blocklist"] = prefixes;
  req["n_limit"] = args.n_limit ? json(*args.n_limit) : json(nullptr);
  req["labels"] = args.labels ? json(*args.labels) : json(nullptr);
  human(args.out) << "config: " << req.dump() << "\n";

  History h;
  OwnedString report;
  check(pafit_ingest(req.dump().c_str(), &h.h, &report.p));
  OwnedString csv;
  check(pafit_history_to_csv(h.h, &csv.p));
  emit(args.out, csv.str());
  if (args.report)
    write_text(*args.report, report.str() + "\n");
  else
    human(args.out) << report.str() << "\n";
  pafit_history_info info{};
  check(pafit_history_info_get(h.h, &info));
  human(args.out) << "history n=" << info.n << " communities=" << info.K << " max_degree=" << info.max_degree << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pafit: preferential attachment simulation and maximum likelihood fitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pafit_version()));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a growth history and write it as CSV");
  simulate->add_option("--model", sim.model, "Growth model")
      ->required()
      ->check(CLI::IsMember({"lcd", "bo", "hpam", "general"}));
  simulate->add_option("--n", sim.n, "Number of nodes")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--a", sim.a, "Buckley-Osthus parameter a (bo, general)");
  simulate->add_option("--delta", sim.delta, "Exponent of f(d) = d^delta (general)");
  simulate->add_option("--pi", sim.pi, "Membership distribution, comma-separated (hpam)");
  simulate->add_option("--gamma", sim.gamma, "Interaction matrix, K*K comma-separated row-major (hpam)");
  simulate->add_option("--out", sim.out, "Output CSV path (default: standard output)");

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Fit a model to a history CSV by maximum likelihood");
  fitc->add_option("--model", fit.model, "Model to fit")->required()->check(CLI::IsMember({"bo", "hpam"}));
  fitc->add_option("--input", fit.input, "History CSV")->required();
  fitc->add_option("--eps", fit.eps, "Lower end of the search domain for a (bo)")->capture_default_str();
  fitc->add_option("--max", fit.max, "Upper end of the search domain for a (bo)")->capture_default_str();
  fitc->add_option("--denominator", fit.denominator, "Likelihood denominator (hpam)")
      ->check(CLI::IsMember({"exact", "scaled"}))
      ->capture_default_str();
  fitc->add_option("--out", fit.out, "Output JSON path (default: standard output)");

  LimitsArgs lim;
  auto* limits = app.add_subcommand("limits", "Limiting degree law, asymptotic variance, HPAM fixed points");
  limits->add_option("--model", lim.model, "Model")->required()->check(CLI::IsMember({"bo", "hpam"}));
  limits->add_option("--a0", lim.a0, "True Buckley-Osthus parameter (bo)");
  limits->add_option("--tail-tol", lim.tail_tol, "Truncation tolerance for p_k (bo)")->capture_default_str();
  limits->add_option("--k-max", lim.k_max, "Maximum reported degree (bo)")->capture_default_str();
  limits->add_option("--pi", lim.pi, "Membership distribution, comma-separated (hpam)");
  limits->add_option("--gamma", lim.gamma, "Interaction matrix, K*K comma-separated row-major (hpam)");
  limits->add_option("--out", lim.out, "Output JSON path (default: standard output)");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a JSON config");
  experiment->add_option("--config", exp.config, "Experiment config JSON")->required();
  experiment->add_option("--output-dir", exp.output_dir, "Override the config's output_path");

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest", "Build a labeled history from receiver,sender,timestamp records");
  ingest->add_option("--input", ing.input, "Transaction CSV")->required();
  ingest->add_option("--n-limit", ing.n_limit, "Use only the first N records (default: all)");
  ingest->add_option("--top-fraction", ing.top_fraction, "Share of most active ids labeled as super nodes")
      ->capture_default_str();
  ingest->add_option("--blocklist", ing.blocklist, "Id prefixes to drop (comma-separated, repeatable)");
  ingest->add_option("--labels", ing.labels, "Optional id,community file overriding the activity labeling");
  ingest->add_option("--out", ing.out, "Output history CSV (default: standard output)");
  ingest->add_option("--report", ing.report, "Drop report JSON path (default: printed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (fitc->parsed()) return cmd_fit(fit);
    if (limits->parsed()) return cmd_limits(lim);
    if (experiment->parsed()) return cmd_experiment(exp);
    if (ingest->parsed()) return cmd_ingest(ing);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
