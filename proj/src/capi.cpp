#include "pafit/pafit.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "pafit/bo_infer.hpp"
#include "pafit/error.hpp"
#include "pafit/experiments.hpp"
#include "pafit/file_util.hpp"
#include "pafit/graph_core.hpp"
#include "pafit/hpam_infer.hpp"
#include "pafit/ingest.hpp"
#include "pafit/json_io.hpp"
#include "pafit/pa_sim.hpp"

struct pafit_history {
  pafit::GrowthHistory history;
};

namespace {

thread_local std::string last_error;

pafit_status status_of(pafit::ErrorCode code) {
  using pafit::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return PAFIT_ERR_INVALID_ARGUMENT;
    case ErrorCode::structure: return PAFIT_ERR_STRUCTURE;
    case ErrorCode::labeling: return PAFIT_ERR_LABELING;
    case ErrorCode::dimension: return PAFIT_ERR_DIMENSION;
    case ErrorCode::parse: return PAFIT_ERR_PARSE;
    case ErrorCode::io: return PAFIT_ERR_IO;
    case ErrorCode::config: return PAFIT_ERR_CONFIG;
    case ErrorCode::degenerate_data: return PAFIT_ERR_DEGENERATE_DATA;
    case ErrorCode::empty_data: return PAFIT_ERR_EMPTY_DATA;
    case ErrorCode::nonconvergence: return PAFIT_ERR_NONCONVERGENCE;
    case ErrorCode::size_guard: return PAFIT_ERR_SIZE_GUARD;
  }
  return PAFIT_ERR_INTERNAL;
}

// Runs body, translating exceptions into status codes and the thread's error message.
template <typename F>
pafit_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return PAFIT_OK;
  } catch (const pafit::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return PAFIT_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PAFIT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PAFIT_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PAFIT_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  pafit::require(p != nullptr, pafit::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

pafit::HpamParams params_from(size_t K, const double* pi, const double* gamma) {
  need(pi, "pi");
  need(gamma, "gamma");
  pafit::require(K >= 1, pafit::ErrorCode::invalid_argument, "K must be positive");
  return pafit::HpamParams(std::vector<double>(pi, pi + K), std::vector<double>(gamma, gamma + K * K));
}

}  // namespace

extern "C" {

const char* pafit_version(void) { return "0.1.0"; }

const char* pafit_status_name(pafit_status status) {
  switch (status) {
    case PAFIT_OK: return "ok";
    case PAFIT_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PAFIT_ERR_STRUCTURE: return "structure";
    case PAFIT_ERR_LABELING: return "labeling";
    case PAFIT_ERR_DIMENSION: return "dimension";
    case PAFIT_ERR_PARSE: return "parse";
    case PAFIT_ERR_IO: return "io";
    case PAFIT_ERR_CONFIG: return "config";
    case PAFIT_ERR_DEGENERATE_DATA: return "degenerate_data";
    case PAFIT_ERR_EMPTY_DATA: return "empty_data";
    case PAFIT_ERR_NONCONVERGENCE: return "nonconvergence";
    case PAFIT_ERR_SIZE_GUARD: return "size_guard";
    case PAFIT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pafit_last_error(void) { return last_error.c_str(); }

void pafit_string_free(char* s) { std::free(s); }

pafit_status pafit_simulate(const char* config_json, pafit_history** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out, "out");
    const auto config = pafit::sim_config_from_json(config_json);
    *out = new pafit_history{pafit::simulate(config)};
  });
}

pafit_status pafit_sim_config_resolve(const char* config_json, char** out_json) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out_json, "out_json");
    *out_json = dup_string(pafit::sim_config_to_json(pafit::sim_config_from_json(config_json)));
  });
}

pafit_status pafit_history_read_csv(const char* path, pafit_history** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pafit_history{pafit::read_history_csv(path)};
  });
}

pafit_status pafit_history_write_csv(const pafit_history* history, const char* path) {
  return guarded([&] {
    need(history, "history");
    need(path, "path");
    pafit::write_history_csv(history->history, path);
  });
}

pafit_status pafit_history_to_csv(const pafit_history* history, char** out_csv) {
  return guarded([&] {
    need(history, "history");
    need(out_csv, "out_csv");
    *out_csv = dup_string(pafit::history_to_csv(history->history));
  });
}

pafit_status pafit_history_info_get(const pafit_history* history, pafit_history_info* out) {
  return guarded([&] {
    need(history, "history");
    need(out, "out");
    const auto& h = history->history;
    out->n = h.size();
    out->K = h.num_communities();
    out->labeled = h.labeled() ? 1 : 0;
    out->max_degree = h.empty() ? 0 : pafit::degree_counts(h).max_degree();
    out->self_loops = 0;
    for (const auto& e : h.events()) out->self_loops += e.self_loop() ? 1 : 0;
  });
}

void pafit_history_free(pafit_history* history) { delete history; }

pafit_status pafit_bo_loglik(const pafit_history* history, double a, double* out) {
  return guarded([&] {
    need(history, "history");
    need(out, "out");
    *out = pafit::bo_loglik(pafit::degree_counts(history->history), a);
  });
}

pafit_status pafit_bo_score(const pafit_history* history, double a, double* out) {
  return guarded([&] {
    need(history, "history");
    need(out, "out");
    *out = pafit::bo_score(pafit::degree_counts(history->history), a);
  });
}

pafit_status pafit_fit_bo(const pafit_history* history, double eps, double max, pafit_bo_fit* out) {
  return guarded([&] {
    need(history, "history");
    need(out, "out");
    const auto fit = pafit::bo_mle(pafit::degree_counts(history->history), pafit::BoDomain{eps, max});
    out->a_hat = fit.a_hat;
    out->loglik = fit.loglik;
    out->std_error = pafit::bo_standard_error(fit.a_hat, history->history.size());
    out->iterations = fit.iterations;
    out->converged = fit.converged ? 1 : 0;
    out->at_boundary = fit.at_boundary ? 1 : 0;
  });
}

pafit_status pafit_fit_bo_json(const pafit_history* history, double eps, double max, char** out_json) {
  return guarded([&] {
    need(history, "history");
    need(out_json, "out_json");
    const pafit::BoDomain domain{eps, max};
    const auto fit = pafit::bo_mle(pafit::degree_counts(history->history), domain);
    *out_json = dup_string(pafit::bo_fit_to_json(fit, history->history.size(), domain));
  });
}

pafit_status pafit_fit_hpam_json(const pafit_history* history, const char* denominator, char** out_json,
                                 int* converged) {
  return guarded([&] {
    need(history, "history");
    need(out_json, "out_json");
    pafit::require(history->history.labeled(), pafit::ErrorCode::labeling,
                   "HPAM fitting requires membership labels in the history");
    pafit::GammaFitOptions options;
    if (denominator) {
      const std::string d(denominator);
      pafit::require(d == "exact" || d == "scaled", pafit::ErrorCode::invalid_argument,
                     "denominator must be exact or scaled");
      options.mode = d == "exact" ? pafit::Denominator::exact : pafit::Denominator::scaled;
    }
    const auto fit = pafit::hpam_mle(pafit::community_stats(history->history), options);
    *out_json = dup_string(pafit::hpam_fit_to_json(fit, history->history.size()));
    if (converged) *converged = fit.converged ? 1 : 0;
  });
}

pafit_status pafit_limits_bo_json(double a0, double tail_tol, size_t k_max, char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    *out_json = dup_string(pafit::limit_report_bo_to_json(pafit::limit_report_bo(a0, tail_tol, k_max)));
  });
}

pafit_status pafit_sigma2_beta(double a0, double* sigma2, double* beta, double* avar) {
  return guarded([&] {
    const auto sb = pafit::sigma2_beta(a0);
    if (sigma2) *sigma2 = sb.sigma2;
    if (beta) *beta = sb.beta;
    if (avar) *avar = sb.avar;
  });
}

pafit_status pafit_limits_hpam(size_t K, const double* pi, const double* gamma, double* p0_out, double* theta0_out,
                               double* residual_out) {
  return guarded([&] {
    const auto limits = pafit::hpam_limits(params_from(K, pi, gamma));
    if (p0_out) std::copy(limits.p0.begin(), limits.p0.end(), p0_out);
    if (theta0_out) std::copy(limits.theta0.begin(), limits.theta0.end(), theta0_out);
    if (residual_out) *residual_out = limits.residual;
  });
}

pafit_status pafit_limits_hpam_json(size_t K, const double* pi, const double* gamma, char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    *out_json = dup_string(pafit::hpam_limits_to_json(pafit::hpam_limits(params_from(K, pi, gamma))));
  });
}

pafit_status pafit_experiment_config_resolve(const char* config_json, char** out_json) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out_json, "out_json");
    *out_json = dup_string(pafit::experiment_config_to_json(pafit::parse_experiment_config(config_json)));
  });
}

pafit_status pafit_run_experiment(const char* config_json, int write_outputs, char** raw_csv, char** summary_csv,
                                  char** warnings_json) {
  return guarded([&] {
    need(config_json, "config_json");
    const auto config = pafit::parse_experiment_config(config_json);
    const auto result = pafit::run_experiment(config);
    if (write_outputs) pafit::write_experiment_outputs(result, config.output_path);
    put_string(raw_csv, pafit::raw_estimates_csv(result.raw));
    put_string(summary_csv, pafit::summary_csv(result.summary));
    put_string(warnings_json, nlohmann::json(result.warnings).dump());
  });
}

pafit_status pafit_normality_json(const double* estimates, size_t count, uint64_t n, double a0, char** out_json) {
  return guarded([&] {
    need(estimates, "estimates");
    need(out_json, "out_json");
    const auto rep = pafit::normality_diagnostic(std::vector<double>(estimates, estimates + count), n, a0);
    nlohmann::json j = {{"count", rep.count},   {"sigma2", rep.sigma2},
                        {"beta", rep.beta},     {"mean", rep.mean},
                        {"std", rep.std},       {"ks_distance", rep.ks_distance},
                        {"degenerate", rep.degenerate}, {"qq", rep.qq}};
    *out_json = dup_string(j.dump(2));
  });
}

pafit_status pafit_ingest(const char* request_json, pafit_history** out, char** report_json) {
  return guarded([&] {
    need(request_json, "request_json");
    need(out, "out");
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(request_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw pafit::ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    if (!req.is_object()) throw pafit::ConfigError("", "expected an object");
    for (const auto& [key, value] : req.items()) {
      (void)value;
      if (key != "input" && key != "n_limit" && key != "top_fraction" && key != "blocklist" && key != "labels")
        throw pafit::ConfigError("/" + key, "unknown field");
    }
    if (!req.contains("input") || !req["input"].is_string()) throw pafit::ConfigError("/input", "expected a path");
    std::size_t n_limit = static_cast<std::size_t>(-1);
    if (req.contains("n_limit") && !req["n_limit"].is_null()) {
      if (!req["n_limit"].is_number_unsigned()) throw pafit::ConfigError("/n_limit", "expected a positive integer");
      n_limit = req["n_limit"].get<std::size_t>();
    }
    pafit::LabelingRule rule;
    if (req.contains("top_fraction")) {
      if (!req["top_fraction"].is_number()) throw pafit::ConfigError("/top_fraction", "expected a number");
      rule.top_fraction = req["top_fraction"].get<double>();
    }
    std::vector<std::string> blocklist;
    if (req.contains("blocklist")) blocklist = req["blocklist"].get<std::vector<std::string>>();

    std::map<std::string, pafit::Community> labels;
    const bool has_labels = req.contains("labels") && !req["labels"].is_null();
    if (has_labels) labels = pafit::parse_labels(pafit::read_file(req["labels"].get<std::string>()));

    const auto edges = pafit::read_edges(req["input"].get<std::string>());
    std::size_t removed = 0;
    const auto kept = pafit::filter_addresses(edges, blocklist, &removed);
    pafit::require(!kept.records.empty(), pafit::ErrorCode::empty_data, "every record was removed by the blocklist");
    auto built = pafit::build_history(kept, n_limit, rule, has_labels ? &labels : nullptr);
    built.report.dropped_blocked = removed;
    put_string(report_json, pafit::ingest_report_json(built.report));
    *out = new pafit_history{std::move(built.history)};
  });
}

pafit_status pafit_export_transactions(const pafit_history* history, char** transactions_csv, char** labels_csv) {
  return guarded([&] {
    need(history, "history");
    put_string(transactions_csv, pafit::export_transactions(history->history));
    if (labels_csv) *labels_csv = history->history.labeled() ? dup_string(pafit::export_labels(history->history)) : nullptr;
  });
}

}  // extern "C"
