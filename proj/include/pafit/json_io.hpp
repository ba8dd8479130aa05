#pragma once

// JSON forms of configurations, fits and limit reports. Matrices are
// row-major arrays next to their declared K.

#include <string>

#include "pafit/bo_infer.hpp"
#include "pafit/hpam_infer.hpp"
#include "pafit/pa_sim.hpp"

namespace pafit {

/// {"model", "n", "seed", "bo_a", "delta", "hpam": {"K", "pi", "gamma"}}; absent
/// optional parameters are null. Parsing rejects unknown fields.
std::string sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const std::string& text);

/// {"a0", "tail_tol", "truncation_index", "p", "tail_mass", "sigma2", "beta", "avar"}
std::string limit_report_bo_to_json(const LimitReportBo& report);
/// {"K", "p0", "theta0", "residual", "iterations"}
std::string hpam_limits_to_json(const HpamLimits& limits);

/// BO fit with the plug-in standard error sqrt(avar(a_hat) / n).
std::string bo_fit_to_json(const BoFitResult& fit, std::uint64_t n, const BoDomain& domain);
std::string hpam_fit_to_json(const HpamFitResult& fit, std::uint64_t n);

/// sqrt(avar(a) / n), the plug-in standard error of the BO MLE.
double bo_standard_error(double a_hat, std::uint64_t n);

}  // namespace pafit
