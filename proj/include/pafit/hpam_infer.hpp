#pragma once

// HPAM likelihood with observed memberships, MLEs of pi and gamma, the
// fixed-point limits p0 / theta0, the limit log-likelihood, and an exact
// marginal likelihood by enumeration for small graphs.

#include <cstdint>
#include <string>
#include <vector>

#include "pafit/graph_core.hpp"

namespace pafit {

/// Step-k denominator of the attachment law for a node in community l:
///   exact:  sum_j gamma_lj N_j^{k-1} + gamma_ll
///   scaled: sum_j gamma_lj N_j^{k-1} / k   (k >= 2; k = 1 always uses exact,
///           where the scaled form would be zero)
enum class Denominator { exact, scaled };

/// Scaled log-likelihood (1/n) log L including the pi term. In exact mode it
/// is exactly (1/n) log of the product of step probabilities (degree factors
/// included); the scaled mode drops the degree factors, which do not depend
/// on the parameters.
double hpam_loglik(const CommunityStats& stats, const HpamParams& params, Denominator mode = Denominator::exact);

/// d hpam_loglik / d gamma_ij for i <= j, treating gamma_ij = gamma_ji as one
/// variable. Returned as a symmetric K x K row-major matrix.
std::vector<double> hpam_gamma_gradient(const CommunityStats& stats, const HpamParams& params,
                                        Denominator mode = Denominator::exact);

struct PiEstimate {
  std::vector<double> pi;
  std::vector<std::string> warnings;  // one per empty community
};

/// pi_j = T_j / n.
PiEstimate pi_mle(const CommunityStats& stats);

struct GammaFitOptions {
  Denominator mode = Denominator::exact;
  double grad_tol = 1e-7;  // infinity norm of the gradient in log-parameters
  std::size_t max_iterations = 100000;
};

struct HpamFitResult {
  std::vector<double> pi_hat;
  std::vector<double> gamma_hat;  // K x K row-major, symmetric, gamma_11 = 1
  double loglik = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  /// Per-entry flag (K x K): false where a community touching the entry is
  /// empty, so the entry is left at its initial value.
  std::vector<bool> identifiable;
  std::vector<std::string> warnings;
};

/// Maximizes the gamma part of the likelihood with gamma_11 pinned to 1 and
/// the upper triangle free. Works in log-parameters, where the objective is
/// concave; steps use the Newton direction with backtracking from step 1
/// (plain gradient direction when the Hessian is numerically singular).
/// pi_hat is filled from pi_mle.
HpamFitResult gamma_mle(const CommunityStats& stats, const HpamParams& init, const GammaFitOptions& options = {});
/// gamma_mle from the all-ones initializer.
HpamFitResult hpam_mle(const CommunityStats& stats, const GammaFitOptions& options = {});

struct HpamLimits {
  Community K = 0;
  std::vector<double> p0;      // K, sums to 2
  std::vector<double> theta0;  // K x K symmetric, upper triangle sums to 1
  double residual = 0.0;       // recomputed from p0 after the iteration
  std::size_t iterations = 0;
};

/// Solves p_j (1 - sum_l pi_l gamma_lj / sum_k gamma_lk p_k) = pi_j by the
/// damped iteration p <- (p + pi + p * S(p)) / 2 from p = 2 pi.
HpamLimits fixed_point_p(const HpamParams& params, double tol = 1e-12, std::size_t max_iterations = 100000);
/// Infinity-norm residual of the fixed-point equations at p.
double fixed_point_residual(const HpamParams& params, const std::vector<double>& p);
/// theta_ij for i != j: pi_i g_ij p_j / D_i + pi_j g_ji p_i / D_j; theta_ii = pi_i g_ii p_i / D_i,
/// with D_i = sum_k g_ik p_k.
std::vector<double> theta_from_p(const HpamParams& params, const std::vector<double>& p);
/// fixed_point_p followed by theta_from_p.
HpamLimits hpam_limits(const HpamParams& params, double tol = 1e-12);

/// sum_{i<=j} theta0_ij log gamma_ij - sum_i pi0_i log(sum_j gamma_ij p0_j).
/// gamma is K x K row-major (symmetric, positive).
double limit_loglik_hpam(const std::vector<double>& gamma, const HpamParams& truth);
double limit_loglik_hpam(const std::vector<double>& gamma, const HpamLimits& limits, const HpamParams& truth);
/// Gradient of limit_loglik_hpam with respect to gamma_ij, i <= j (symmetric matrix).
std::vector<double> limit_loglik_hpam_gradient(const std::vector<double>& gamma, const HpamLimits& limits,
                                               const HpamParams& truth);

/// log P(attachments | labels) for an unlabeled history and 0-based labels
/// (no pi factors).
double conditional_log_likelihood(const GrowthHistory& history, const std::vector<Community>& labels,
                                  const HpamParams& params);

/// log sum over all K^n labelings of the exact HPAM likelihood. Memberships
/// on the input are ignored. Guarded to n <= 14 and K^n <= 2^24.
double marginal_loglik_bruteforce(const GrowthHistory& history, const HpamParams& params);

}  // namespace pafit
