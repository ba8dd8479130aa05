#include "pafit/json_io.hpp"

#include <cmath>

#include <json.hpp>

#include "pafit/error.hpp"

namespace pafit {

using nlohmann::json;

namespace {

json optional_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

std::string sim_config_to_json(const SimConfig& c) {
  json j;
  j["model"] = model_name(c.model);
  j["n"] = c.n;
  j["seed"] = c.seed;
  j["bo_a"] = optional_real(c.bo_a);
  j["delta"] = optional_real(c.delta);
  if (c.hpam)
    j["hpam"] = {{"K", c.hpam->K()}, {"pi", to_vector(c.hpam->pi())}, {"gamma", to_vector(c.hpam->gamma())}};
  else
    j["hpam"] = nullptr;
  return j.dump();
}

SimConfig sim_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "model" && key != "n" && key != "seed" && key != "bo_a" && key != "delta" && key != "hpam")
      throw ConfigError("/" + key, "unknown field");
  }
  SimConfig c;
  try {
    if (!j.contains("model") || !j["model"].is_string()) throw ConfigError("/model", "expected a model name");
    c.model = model_from_name(j["model"].get<std::string>());
    if (!j.contains("n") || !j["n"].is_number_unsigned()) throw ConfigError("/n", "expected a positive integer");
    c.n = j["n"].get<std::uint64_t>();
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw ConfigError("/seed", "expected a non-negative integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("bo_a") && !j["bo_a"].is_null()) {
      if (!j["bo_a"].is_number()) throw ConfigError("/bo_a", "expected a number");
      c.bo_a = j["bo_a"].get<double>();
    }
    if (j.contains("delta") && !j["delta"].is_null()) {
      if (!j["delta"].is_number()) throw ConfigError("/delta", "expected a number");
      c.delta = j["delta"].get<double>();
    }
    if (j.contains("hpam") && !j["hpam"].is_null()) {
      const json& h = j["hpam"];
      if (!h.is_object() || !h.contains("pi") || !h.contains("gamma"))
        throw ConfigError("/hpam", "expected {\"pi\": [...], \"gamma\": [...]}");
      c.hpam.emplace(h["pi"].get<std::vector<double>>(), h["gamma"].get<std::vector<double>>());
      if (h.contains("K") && h["K"].get<std::uint64_t>() != c.hpam->K())
        throw ConfigError("/hpam/K", "does not match the length of pi");
    }
  } catch (const json::exception& e) {
    throw ConfigError("", e.what());
  }
  c.validate();
  return c;
}

std::string limit_report_bo_to_json(const LimitReportBo& r) {
  json j;
  j["a0"] = r.a0;
  j["tail_tol"] = r.tail_tol;
  j["truncation_index"] = r.p.truncation_index();
  j["capped"] = r.p.capped;
  j["p"] = r.p.p;
  j["tail_mass"] = r.p.tail_mass;
  j["sigma2"] = r.asymptotics.sigma2;
  j["beta"] = r.asymptotics.beta;
  j["avar"] = r.asymptotics.avar;
  return j.dump(2);
}

std::string hpam_limits_to_json(const HpamLimits& l) {
  json j;
  j["K"] = l.K;
  j["p0"] = l.p0;
  j["theta0"] = l.theta0;
  j["residual"] = l.residual;
  j["iterations"] = l.iterations;
  return j.dump(2);
}

double bo_standard_error(double a_hat, std::uint64_t n) {
  return std::sqrt(sigma2_beta(a_hat).avar / static_cast<double>(n));
}

std::string bo_fit_to_json(const BoFitResult& fit, std::uint64_t n, const BoDomain& domain) {
  json j;
  j["model"] = "BO";
  j["n"] = n;
  j["a_hat"] = fit.a_hat;
  j["loglik"] = fit.loglik;
  j["std_error"] = bo_standard_error(fit.a_hat, n);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["at_boundary"] = fit.at_boundary;
  j["method"] = fit.method;
  j["domain"] = {{"eps", domain.eps}, {"max", domain.max}};
  return j.dump(2);
}

std::string hpam_fit_to_json(const HpamFitResult& fit, std::uint64_t n) {
  json j;
  j["model"] = "HPAM";
  j["n"] = n;
  j["K"] = fit.pi_hat.size();
  j["pi_hat"] = fit.pi_hat;
  j["gamma_hat"] = fit.gamma_hat;
  j["loglik"] = fit.loglik;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["grad_norm"] = fit.grad_norm;
  j["identifiable"] = fit.identifiable;
  j["warnings"] = fit.warnings;
  return j.dump(2);
}

}  // namespace pafit
