#include "pafit/hpam_infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "pafit/error.hpp"
#include "pafit/series.hpp"

namespace pafit {

namespace {

using Pair = std::pair<Community, Community>;

void check_dims(const CommunityStats& stats, Community K) {
  require(stats.K == K, ErrorCode::dimension,
          "statistics have K = " + std::to_string(stats.K) + " but parameters have K = " + std::to_string(K));
  require(stats.n >= 1, ErrorCode::degenerate_data, "empty history");
}

void check_gamma(const std::vector<double>& gamma, Community K) {
  require(gamma.size() == std::size_t{K} * K, ErrorCode::dimension, "gamma must be K x K");
  for (double g : gamma) require(std::isfinite(g) && g > 0.0, ErrorCode::invalid_argument, "gamma must be positive");
}

bool exact_at(Denominator mode, std::size_t k) { return mode == Denominator::exact || k == 1; }

// Unscaled denominator sum_j gamma_lj N_j (+ gamma_ll in exact mode).
double step_denominator(const CommunityStats& s, const double* gamma, std::size_t k, Denominator mode) {
  const Community K = s.K;
  const Community l = s.labels[k - 1];
  const auto N = s.N_before(k);
  double d = 0.0;
  for (Community j = 0; j < K; ++j) d += gamma[l * K + j] * static_cast<double>(N[j]);
  if (exact_at(mode, k)) d += gamma[l * K + l];
  return d;
}

// n * loglik without the pi and degree-factorial terms.
double gamma_part(const CommunityStats& s, const double* gamma, Denominator mode) {
  const Community K = s.K;
  CompensatedSum sum;
  for (Community i = 0; i < K; ++i)
    for (Community j = i; j < K; ++j)
      if (s.M_at(i, j) != 0) sum.add(static_cast<double>(s.M_at(i, j)) * std::log(gamma[i * K + j]));
  for (std::size_t k = 1; k <= s.n; ++k) {
    double d = step_denominator(s, gamma, k, mode);
    if (!exact_at(mode, k)) d /= static_cast<double>(k);
    sum.add(-std::log(d));
  }
  return sum.value();
}

double pi_part(const CommunityStats& s, const std::vector<double>& pi) {
  CompensatedSum sum;
  for (Community j = 0; j < s.K; ++j)
    if (s.T[j] != 0) sum.add(static_cast<double>(s.T[j]) * std::log(pi[j]));
  return sum.value();
}

// Coefficient of gamma_ab (a <= b) in the unscaled step-k denominator.
double coefficient(const CommunityStats& s, std::size_t k, Community a, Community b, Denominator mode) {
  const Community l = s.labels[k - 1];
  const auto N = s.N_before(k);
  if (a == b) return a == l ? static_cast<double>(N[l]) + (exact_at(mode, k) ? 1.0 : 0.0) : 0.0;
  if (a == l) return static_cast<double>(N[b]);
  if (b == l) return static_cast<double>(N[a]);
  return 0.0;
}

std::vector<double> gamma_gradient_raw(const CommunityStats& s, const double* gamma, Denominator mode) {
  const Community K = s.K;
  std::vector<double> grad(std::size_t{K} * K, 0.0);
  std::vector<CompensatedSum> acc(std::size_t{K} * K);
  for (std::size_t k = 1; k <= s.n; ++k) {
    const double d = step_denominator(s, gamma, k, mode);
    for (Community a = 0; a < K; ++a)
      for (Community b = a; b < K; ++b) {
        const double c = coefficient(s, k, a, b, mode);
        if (c != 0.0) acc[a * K + b].add(c / d);
      }
  }
  const double n = static_cast<double>(s.n);
  for (Community a = 0; a < K; ++a)
    for (Community b = a; b < K; ++b) {
      const double g = (static_cast<double>(s.M_at(a, b)) / gamma[a * K + b] - acc[a * K + b].value()) / n;
      grad[a * K + b] = g;
      grad[b * K + a] = g;
    }
  return grad;
}

// Cholesky solve of A x = b for small symmetric positive definite A.
bool cholesky_solve(std::vector<double> A, std::vector<double>& b, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double d = A[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= A[j * m + k] * A[j * m + k];
    if (!(d > 1e-14 * std::max(1.0, std::abs(A[j * m + j])))) return false;
    A[j * m + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < m; ++i) {
      double v = A[i * m + j];
      for (std::size_t k = 0; k < j; ++k) v -= A[i * m + k] * A[j * m + k];
      A[i * m + j] = v / A[j * m + j];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= A[i * m + k] * b[k];
    b[i] = v / A[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double v = b[i];
    for (std::size_t k = i + 1; k < m; ++k) v -= A[k * m + i] * b[k];
    b[i] = v / A[i * m + i];
  }
  return true;
}

struct LogObjective {
  const CommunityStats& s;
  Denominator mode;
  std::vector<Pair> free;
  std::vector<double> gamma;  // full K x K, fixed entries stay put

  void set(const std::vector<double>& u) {
    const Community K = s.K;
    for (std::size_t p = 0; p < free.size(); ++p) {
      const auto [a, b] = free[p];
      gamma[a * K + b] = gamma[b * K + a] = std::exp(u[p]);
    }
  }
  double value(const std::vector<double>& u) {
    set(u);
    return gamma_part(s, gamma.data(), mode) / static_cast<double>(s.n);
  }
  // Gradient and Hessian with respect to u at the current gamma.
  void derivatives(std::vector<double>& g, std::vector<double>& H) {
    const Community K = s.K;
    const std::size_t m = free.size();
    std::vector<CompensatedSum> gs(m), hs(m * m);
    std::vector<double> w(m);
    for (std::size_t k = 1; k <= s.n; ++k) {
      const double d = step_denominator(s, gamma.data(), k, mode);
      for (std::size_t p = 0; p < m; ++p) {
        const auto [a, b] = free[p];
        w[p] = gamma[a * K + b] * coefficient(s, k, a, b, mode) / d;
      }
      for (std::size_t p = 0; p < m; ++p) {
        if (w[p] == 0.0) continue;
        gs[p].add(-w[p]);
        hs[p * m + p].add(-w[p]);
        for (std::size_t q = 0; q < m; ++q)
          if (w[q] != 0.0) hs[p * m + q].add(w[p] * w[q]);
      }
    }
    const double n = static_cast<double>(s.n);
    g.assign(m, 0.0);
    H.assign(m * m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
      const auto [a, b] = free[p];
      g[p] = (static_cast<double>(s.M_at(a, b)) + gs[p].value()) / n;
      for (std::size_t q = 0; q < m; ++q) H[p * m + q] = hs[p * m + q].value() / n;
    }
  }
};

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double hpam_loglik(const CommunityStats& stats, const HpamParams& params, Denominator mode) {
  check_dims(stats, params.K());
  const std::vector<double> pi(params.pi().begin(), params.pi().end());
  double total = pi_part(stats, pi) + gamma_part(stats, params.gamma().data(), mode);
  if (mode == Denominator::exact) total += stats.log_degree_factorial;
  return total / static_cast<double>(stats.n);
}

std::vector<double> hpam_gamma_gradient(const CommunityStats& stats, const HpamParams& params, Denominator mode) {
  check_dims(stats, params.K());
  return gamma_gradient_raw(stats, params.gamma().data(), mode);
}

PiEstimate pi_mle(const CommunityStats& stats) {
  require(stats.n >= 1, ErrorCode::degenerate_data, "empty history");
  PiEstimate est;
  est.pi.resize(stats.K);
  for (Community j = 0; j < stats.K; ++j) {
    est.pi[j] = static_cast<double>(stats.T[j]) / static_cast<double>(stats.n);
    if (stats.T[j] == 0) est.warnings.push_back("community " + std::to_string(j + 1) + " has no nodes");
  }
  return est;
}

HpamFitResult gamma_mle(const CommunityStats& stats, const HpamParams& init, const GammaFitOptions& options) {
  check_dims(stats, init.K());
  require(options.grad_tol > 0.0 && options.max_iterations >= 1, ErrorCode::invalid_argument,
          "invalid optimizer options");
  const Community K = stats.K;
  const HpamParams start = init.normalized();

  HpamFitResult result;
  auto pi = pi_mle(stats);
  result.pi_hat = pi.pi;
  result.warnings = pi.warnings;
  result.identifiable.assign(std::size_t{K} * K, true);

  LogObjective obj{stats, options.mode, {}, std::vector<double>(start.gamma().begin(), start.gamma().end())};
  std::vector<double> u;
  for (Community a = 0; a < K; ++a)
    for (Community b = a; b < K; ++b) {
      if (stats.T[a] == 0 || stats.T[b] == 0) {
        result.identifiable[a * K + b] = result.identifiable[b * K + a] = false;
        continue;
      }
      if (a == 0 && b == 0) continue;
      obj.free.emplace_back(a, b);
      u.push_back(std::log(start.gamma(a, b)));
    }
  if (std::find(result.identifiable.begin(), result.identifiable.end(), false) != result.identifiable.end())
    result.warnings.push_back("gamma entries touching an empty community are unidentifiable; kept at initial values");

  const std::size_t m = obj.free.size();
  double f = obj.value(u);
  std::vector<double> g, H;
  for (;;) {
    obj.set(u);
    obj.derivatives(g, H);
    result.grad_norm = inf_norm(g);
    if (result.grad_norm < options.grad_tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;
    ++result.iterations;

    std::vector<double> dir = g;
    std::vector<double> negH(m * m);
    for (std::size_t i = 0; i < m * m; ++i) negH[i] = -H[i];
    if (!cholesky_solve(negH, dir, m)) dir = g;
    double slope = 0.0;
    for (std::size_t p = 0; p < m; ++p) slope += g[p] * dir[p];
    if (!(slope > 0.0)) {
      dir = g;
      slope = 0.0;
      for (double x : g) slope += x * x;
    }

    double step = 1.0;
    bool moved = false;
    std::vector<double> trial(m);
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      for (std::size_t p = 0; p < m; ++p) trial[p] = u[p] + step * dir[p];
      const double ft = obj.value(trial);
      if (std::isfinite(ft) && ft >= f + 1e-4 * step * slope) {
        u = trial;
        f = ft;
        moved = true;
        break;
      }
    }
    if (!moved) break;  // no ascent possible at machine precision
  }
  obj.set(u);
  result.gamma_hat = obj.gamma;

  const double total = pi_part(stats, result.pi_hat) + gamma_part(stats, result.gamma_hat.data(), options.mode) +
                       (options.mode == Denominator::exact ? stats.log_degree_factorial : 0.0);
  result.loglik = total / static_cast<double>(stats.n);
  return result;
}

HpamFitResult hpam_mle(const CommunityStats& stats, const GammaFitOptions& options) {
  return gamma_mle(stats, HpamParams::uniform(stats.K), options);
}

namespace {

// D_l = sum_k gamma_lk p_k and S_j = sum_l pi_l gamma_lj / D_l.
void fixed_point_terms(const HpamParams& params, const std::vector<double>& p, std::vector<double>& D,
                       std::vector<double>& S) {
  const Community K = params.K();
  D.assign(K, 0.0);
  S.assign(K, 0.0);
  for (Community l = 0; l < K; ++l)
    for (Community k = 0; k < K; ++k) D[l] += params.gamma(l, k) * p[k];
  for (Community j = 0; j < K; ++j)
    for (Community l = 0; l < K; ++l) S[j] += params.pi(l) * params.gamma(l, j) / D[l];
}

}  // namespace

double fixed_point_residual(const HpamParams& params, const std::vector<double>& p) {
  require(p.size() == params.K(), ErrorCode::dimension, "p must have K entries");
  std::vector<double> D, S;
  fixed_point_terms(params, p, D, S);
  double r = 0.0;
  for (Community j = 0; j < params.K(); ++j) r = std::max(r, std::abs(p[j] * (1.0 - S[j]) - params.pi(j)));
  return r;
}

HpamLimits fixed_point_p(const HpamParams& params, double tol, std::size_t max_iterations) {
  require(tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
  const Community K = params.K();
  HpamLimits out;
  out.K = K;
  std::vector<double> p(K), D, S;
  for (Community j = 0; j < K; ++j) p[j] = 2.0 * params.pi(j);
  out.residual = fixed_point_residual(params, p);
  while (out.residual >= tol && out.iterations < max_iterations) {
    fixed_point_terms(params, p, D, S);
    for (Community j = 0; j < K; ++j) p[j] = 0.5 * p[j] + 0.5 * (params.pi(j) + p[j] * S[j]);
    ++out.iterations;
    out.residual = fixed_point_residual(params, p);
  }
  if (out.residual >= tol)
    fail(ErrorCode::nonconvergence, "fixed point did not converge: residual " + std::to_string(out.residual) +
                                        " after " + std::to_string(out.iterations) + " iterations");
  out.p0 = std::move(p);
  return out;
}

std::vector<double> theta_from_p(const HpamParams& params, const std::vector<double>& p) {
  require(p.size() == params.K(), ErrorCode::dimension, "p must have K entries");
  const Community K = params.K();
  std::vector<double> D, S;
  fixed_point_terms(params, p, D, S);
  std::vector<double> theta(std::size_t{K} * K, 0.0);
  for (Community i = 0; i < K; ++i) {
    theta[i * K + i] = params.pi(i) * params.gamma(i, i) * p[i] / D[i];
    for (Community j = i + 1; j < K; ++j) {
      const double t =
          params.pi(i) * params.gamma(i, j) * p[j] / D[i] + params.pi(j) * params.gamma(j, i) * p[i] / D[j];
      theta[i * K + j] = theta[j * K + i] = t;
    }
  }
  return theta;
}

HpamLimits hpam_limits(const HpamParams& params, double tol) {
  HpamLimits out = fixed_point_p(params, tol);
  out.theta0 = theta_from_p(params, out.p0);
  return out;
}

double limit_loglik_hpam(const std::vector<double>& gamma, const HpamLimits& limits, const HpamParams& truth) {
  const Community K = truth.K();
  check_gamma(gamma, K);
  require(limits.K == K && limits.theta0.size() == std::size_t{K} * K, ErrorCode::dimension,
          "limits do not match the parameters");
  CompensatedSum sum;
  for (Community i = 0; i < K; ++i) {
    for (Community j = i; j < K; ++j) sum.add(limits.theta0[i * K + j] * std::log(gamma[i * K + j]));
    double d = 0.0;
    for (Community j = 0; j < K; ++j) d += gamma[i * K + j] * limits.p0[j];
    sum.add(-truth.pi(i) * std::log(d));
  }
  return sum.value();
}

double limit_loglik_hpam(const std::vector<double>& gamma, const HpamParams& truth) {
  return limit_loglik_hpam(gamma, hpam_limits(truth), truth);
}

std::vector<double> limit_loglik_hpam_gradient(const std::vector<double>& gamma, const HpamLimits& limits,
                                               const HpamParams& truth) {
  const Community K = truth.K();
  check_gamma(gamma, K);
  std::vector<double> D(K, 0.0);
  for (Community i = 0; i < K; ++i)
    for (Community j = 0; j < K; ++j) D[i] += gamma[i * K + j] * limits.p0[j];
  std::vector<double> grad(std::size_t{K} * K, 0.0);
  for (Community i = 0; i < K; ++i)
    for (Community j = i; j < K; ++j) {
      double g = limits.theta0[i * K + j] / gamma[i * K + j] - truth.pi(i) * limits.p0[j] / D[i];
      if (i != j) g -= truth.pi(j) * limits.p0[i] / D[j];
      grad[i * K + j] = grad[j * K + i] = g;
    }
  return grad;
}

double conditional_log_likelihood(const GrowthHistory& history, const std::vector<Community>& labels,
                                  const HpamParams& params) {
  const Community K = params.K();
  require(labels.size() == history.size(), ErrorCode::dimension, "one label per node required");
  for (Community l : labels) require(l < K, ErrorCode::labeling, "label out of range");
  std::vector<double> N(K, 0.0);
  std::vector<std::uint64_t> degree(history.size(), 0);
  CompensatedSum sum;
  for (const auto& e : history.events()) {
    const Community l = labels[e.node - 1];
    double d = params.gamma(l, l);
    for (Community j = 0; j < K; ++j) d += params.gamma(l, j) * N[j];
    if (e.self_loop()) {
      sum.add(std::log(params.gamma(l, l) / d));
      N[l] += 2;
      degree[e.node - 1] = 2;
    } else {
      const Community lt = labels[e.target - 1];
      sum.add(std::log(params.gamma(l, lt) * static_cast<double>(degree[e.target - 1]) / d));
      N[l] += 1;
      N[lt] += 1;
      ++degree[e.target - 1];
      degree[e.node - 1] = 1;
    }
  }
  return sum.value();
}

namespace {

// Streaming log-sum-exp; terms are folded in a fixed order.
class LogSumExp {
 public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  double value() const { return max_ + std::log(sum_); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

struct Enumerator {
  const GrowthHistory& history;
  const HpamParams& params;
  std::vector<std::uint64_t> target_degree;  // degree of the target just before each step
  std::vector<double> log_pi;
  std::vector<Community> labels;
  LogSumExp total;

  void visit(std::size_t k, std::vector<double>& N, double acc) {
    if (k == history.size()) {
      total.add(acc);
      return;
    }
    const Community K = params.K();
    const auto& e = history.events()[k];
    for (Community l = 0; l < K; ++l) {
      labels[k] = l;
      double d = params.gamma(l, l);
      for (Community j = 0; j < K; ++j) d += params.gamma(l, j) * N[j];
      double step;
      Community other;
      if (e.self_loop()) {
        step = std::log(params.gamma(l, l) / d);
        other = l;
      } else {
        other = labels[e.target - 1];
        step = std::log(params.gamma(l, other) * static_cast<double>(target_degree[k]) / d);
      }
      N[l] += 1;
      N[other] += 1;
      visit(k + 1, N, acc + log_pi[l] + step);
      N[l] -= 1;
      N[other] -= 1;
    }
  }
};

}  // namespace

double marginal_loglik_bruteforce(const GrowthHistory& history, const HpamParams& params) {
  const std::size_t n = history.size();
  const Community K = params.K();
  require(n >= 1, ErrorCode::degenerate_data, "empty history");
  require(n <= 14, ErrorCode::size_guard, "brute-force marginal likelihood is limited to n <= 14");
  require(std::log2(static_cast<double>(K)) * static_cast<double>(n) <= 24.0, ErrorCode::size_guard,
          "brute-force marginal likelihood is limited to K^n <= 2^24 labelings");

  Enumerator en{history, params, std::vector<std::uint64_t>(n, 0), {}, std::vector<Community>(n, 0), {}};
  std::vector<std::uint64_t> degree(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = history.events()[k];
    if (e.self_loop()) {
      degree[k] = 2;
    } else {
      en.target_degree[k] = degree[e.target - 1];
      ++degree[e.target - 1];
      degree[k] = 1;
    }
  }
  for (Community l = 0; l < K; ++l) en.log_pi.push_back(std::log(params.pi(l)));
  std::vector<double> N(K, 0.0);
  en.visit(0, N, 0.0);
  return en.total.value();
}

}  // namespace pafit
