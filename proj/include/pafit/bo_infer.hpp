#pragma once

// Buckley-Osthus likelihood, score and MLE, plus the limiting degree law and
// the asymptotic variance of the MLE.

#include <cstdint>
#include <string>
#include <vector>

#include "pafit/graph_core.hpp"

namespace pafit {

struct BoFitResult {
  double a_hat = 0.0;
  double loglik = 0.0;  // scaled log-likelihood at a_hat
  std::size_t iterations = 0;
  bool converged = false;
  bool at_boundary = false;
  std::string method;  // "bisection", "golden-section" or "boundary"
};

/// Scaled log-likelihood
///   (1/n) [ sum_{k>=0} Z_{>k+1} log(a+k) - sum_{k=1}^n log(a + (k-1)/k) ].
/// It differs from (1/n) log L_n(a) by the parameter-free constant log(n!)/n.
double bo_loglik(const DegreeCounts& counts, double a);

/// log L_n(a): the exact log-probability of any history with these degree
/// counts, i.e. the log of the product of its step probabilities.
double bo_log_likelihood(const DegreeCounts& counts, double a);

/// d/da of bo_loglik.
double bo_score(const DegreeCounts& counts, double a);

/// Maximizes bo_loglik over the domain. The score is scanned on a geometric
/// grid; a single + to - sign change is refined by bisection on the score,
/// several candidate maxima fall back to golden-section search on the
/// log-likelihood. A maximizer on the domain edge is flagged, not an error.
BoFitResult bo_mle(const DegreeCounts& counts, const BoDomain& domain = {});

/// Limiting degree law p_k truncated at index K, with the mass and first
/// moment beyond K carried in closed form:
///   p_{>K} = (K + 1 + 2 a0) / (a0 + 1) p_{K+1},
///   sum_{j>K} j p_j = p_{>K} ((a0 + 1) K + 2 a0) / a0.
struct PkSequence {
  double a0 = 0.0;
  double tail_tol = 0.0;
  std::vector<double> p;  // p[k-1] = p_k, k = 1..K
  double tail_mass = 0.0;
  double tail_first_moment = 0.0;
  bool capped = false;  // stopped at k_max before p_{>K} < tail_tol

  std::size_t truncation_index() const noexcept { return p.size(); }
  double at(std::size_t k) const { return p.at(k - 1); }
  /// sum_k p_k including the closed-form tail.
  double total() const;
  /// sum_k k p_k including the closed-form tail.
  double first_moment() const;
};

PkSequence limit_pk(double a0, double tail_tol = 1e-12, std::size_t k_max = std::size_t{1} << 20);

/// p_{>k} for the limiting law at a0 (closed form through the Gamma function).
double limit_tail_mass(double a0, double k);

/// sum_{k>=0} p_{>k+1} log(a+k) - log(a+1) with p at a0.
double limit_loglik(double a, double a0);
/// d/da of limit_loglik.
double limit_loglik_derivative(double a, double a0);

struct Sigma2Beta {
  double sigma2 = 0.0;
  double beta = 0.0;
  double avar = 0.0;  // sigma2 / beta^2
};

Sigma2Beta sigma2_beta(double a0, double tail_tol = 1e-12);

struct LimitReportBo {
  double a0 = 0.0;
  double tail_tol = 0.0;
  PkSequence p;
  Sigma2Beta asymptotics;
};

LimitReportBo limit_report_bo(double a0, double tail_tol = 1e-12, std::size_t k_max = 1000);

}  // namespace pafit
