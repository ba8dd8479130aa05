#include "pafit/bo_infer.hpp"

#include <cmath>
#include <optional>

#include <boost/math/special_functions/gamma.hpp>

#include "pafit/error.hpp"
#include "pafit/series.hpp"

namespace pafit {

namespace {

constexpr double kScoreTol = 1e-9;
constexpr double kWidthTol = 1e-10;
constexpr std::size_t kGridPoints = 256;
constexpr std::size_t kMaxRefine = 200;

void check_param(double a, const char* name) {
  require(std::isfinite(a) && a > 0.0, ErrorCode::invalid_argument, std::string(name) + " must be positive");
}

// q(x) = p_{>x+1} = Gamma(2a0+1)/Gamma(a0) * Gamma(x+a0+1)/Gamma(x+2a0+2), continuous in x.
double q_at(double x, double a0) {
  return std::exp(std::lgamma(2 * a0 + 1) - std::lgamma(a0)) * boost::math::tgamma_delta_ratio(x + a0 + 1, a0 + 1);
}

// Number of exactly summed leading terms. The Euler-Maclaurin remainder of
// sum_{k>=K} q(k) h(k) for the h used here is below q(K) / (K+1)^4.
std::size_t head_length(double a0, double tail_tol) {
  double q = a0 / (2 * a0 + 1);
  std::size_t k = 0;
  while (k < 16 || q / std::pow(static_cast<double>(k + 1), 4) >= tail_tol) {
    q *= (k + a0 + 1) / (k + 2 * a0 + 2);
    ++k;
    if (k >= 10'000'000) break;
  }
  return k;
}

// sum_{k>=0} p_{>k+1} h(k): exact head by the ratio recursion of p_{>k+1},
// closed-form Gamma expression inside the tail integral.
template <typename H>
double tail_weighted_series(double a0, double tail_tol, H h) {
  const std::size_t K = head_length(a0, tail_tol);
  CompensatedSum sum;
  double q = a0 / (2 * a0 + 1);  // p_{>1} = 1 - p_1
  for (std::size_t k = 0; k < K; ++k) {
    sum.add(q * h(static_cast<double>(k)));
    q *= (k + a0 + 1) / (k + 2 * a0 + 2);
  }
  sum.add(euler_maclaurin_tail([&](double x) { return q_at(x, a0) * h(x); }, static_cast<double>(K)));
  return sum.value();
}

constexpr double kSeriesTol = 1e-12;

}  // namespace

double bo_loglik(const DegreeCounts& counts, double a) {
  check_param(a, "a");
  const std::uint64_t n = counts.n();
  require(n >= 1, ErrorCode::degenerate_data, "empty degree counts");
  const auto tail = counts.tail_counts();
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < tail.size(); ++k)
    if (tail[k + 1] != 0) sum.add(static_cast<double>(tail[k + 1]) * std::log(a + static_cast<double>(k)));
  for (std::uint64_t k = 1; k <= n; ++k) {
    const double dk = static_cast<double>(k);
    sum.add(-std::log(a + (dk - 1.0) / dk));
  }
  return sum.value() / static_cast<double>(n);
}

double bo_log_likelihood(const DegreeCounts& counts, double a) {
  check_param(a, "a");
  const std::uint64_t n = counts.n();
  require(n >= 1, ErrorCode::degenerate_data, "empty degree counts");
  const auto tail = counts.tail_counts();
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < tail.size(); ++k)
    if (tail[k + 1] != 0) sum.add(static_cast<double>(tail[k + 1]) * std::log(a + static_cast<double>(k)));
  for (std::uint64_t k = 1; k <= n; ++k) {
    const double dk = static_cast<double>(k);
    sum.add(-std::log(dk * a + dk - 1.0));
  }
  return sum.value();
}

double bo_score(const DegreeCounts& counts, double a) {
  check_param(a, "a");
  const std::uint64_t n = counts.n();
  require(n >= 1, ErrorCode::degenerate_data, "empty degree counts");
  const auto tail = counts.tail_counts();
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < tail.size(); ++k)
    if (tail[k + 1] != 0) sum.add(static_cast<double>(tail[k + 1]) / (a + static_cast<double>(k)));
  for (std::uint64_t k = 1; k <= n; ++k) {
    const double dk = static_cast<double>(k);
    sum.add(-1.0 / (a + (dk - 1.0) / dk));
  }
  return sum.value() / static_cast<double>(n);
}

BoFitResult bo_mle(const DegreeCounts& counts, const BoDomain& domain) {
  domain.validate();
  require(counts.n() >= 2, ErrorCode::degenerate_data, "BO MLE needs n >= 2 (the likelihood is constant for n = 1)");

  std::vector<double> grid(kGridPoints);
  const double ratio = std::pow(domain.max / domain.eps, 1.0 / static_cast<double>(kGridPoints - 1));
  for (std::size_t i = 0; i < kGridPoints; ++i) grid[i] = domain.eps * std::pow(ratio, static_cast<double>(i));
  grid.front() = domain.eps;
  grid.back() = domain.max;

  std::vector<double> score(kGridPoints);
  for (std::size_t i = 0; i < kGridPoints; ++i) score[i] = bo_score(counts, grid[i]);

  // Candidate maximizers: domain edges where the score points outward, and
  // grid cells where the score crosses from + to -.
  std::vector<std::size_t> brackets;
  for (std::size_t i = 0; i + 1 < kGridPoints; ++i)
    if (score[i] > 0.0 && score[i + 1] <= 0.0) brackets.push_back(i);
  const bool left_edge = score.front() < 0.0;
  const bool right_edge = score.back() > 0.0;
  const std::size_t candidates = brackets.size() + (left_edge ? 1 : 0) + (right_edge ? 1 : 0);

  BoFitResult result;
  if (candidates == 1 && brackets.empty()) {
    result.a_hat = left_edge ? domain.eps : domain.max;
    result.at_boundary = true;
    result.converged = true;
    result.method = "boundary";
  } else if (candidates == 1) {
    double lo = grid[brackets.front()];
    double hi = grid[brackets.front() + 1];
    double a = hi;
    bool done = false;
    while (result.iterations < kMaxRefine) {
      if (hi - lo < kWidthTol) {
        a = 0.5 * (lo + hi);
        done = true;
        break;
      }
      a = 0.5 * (lo + hi);
      ++result.iterations;
      const double s = bo_score(counts, a);
      if (std::abs(s) < kScoreTol) {
        done = true;
        break;
      }
      (s > 0.0 ? lo : hi) = a;
    }
    result.a_hat = a;
    result.converged = done;
    result.method = "bisection";
  } else {
    // Several sign changes: golden-section on the log-likelihood inside each
    // bracket, then keep the best candidate (edges included).
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    std::optional<double> best_a;
    double best_ll = -INFINITY;
    bool all_converged = true;
    auto consider = [&](double a) {
      const double ll = bo_loglik(counts, a);
      if (!best_a || ll > best_ll) {
        best_a = a;
        best_ll = ll;
      }
    };
    if (left_edge) consider(domain.eps);
    if (right_edge) consider(domain.max);
    for (std::size_t i : brackets) {
      double lo = grid[i], hi = grid[i + 1];
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double f1 = bo_loglik(counts, x1), f2 = bo_loglik(counts, x2);
      std::size_t it = 0;
      while (hi - lo >= kWidthTol && it < kMaxRefine) {
        ++it;
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = bo_loglik(counts, x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = bo_loglik(counts, x1);
        }
      }
      all_converged = all_converged && hi - lo < kWidthTol;
      result.iterations += it;
      consider(0.5 * (lo + hi));
    }
    result.a_hat = *best_a;
    result.at_boundary = result.a_hat == domain.eps || result.a_hat == domain.max;
    result.converged = all_converged;
    result.method = "golden-section";
  }
  result.loglik = bo_loglik(counts, result.a_hat);
  return result;
}

double PkSequence::total() const {
  CompensatedSum s;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s.add(*it);
  s.add(tail_mass);
  return s.value();
}

double PkSequence::first_moment() const {
  CompensatedSum s;
  for (std::size_t k = p.size(); k >= 1; --k) s.add(static_cast<double>(k) * p[k - 1]);
  s.add(tail_first_moment);
  return s.value();
}

PkSequence limit_pk(double a0, double tail_tol, std::size_t k_max) {
  check_param(a0, "a0");
  require(tail_tol > 0.0, ErrorCode::invalid_argument, "tail_tol must be positive");
  require(k_max >= 1, ErrorCode::invalid_argument, "k_max must be at least 1");
  PkSequence seq;
  seq.a0 = a0;
  seq.tail_tol = tail_tol;
  double pk = (a0 + 1) / (2 * a0 + 1);
  for (std::size_t k = 1;; ++k) {
    seq.p.push_back(pk);
    const double next = pk * (static_cast<double>(k + 1) + a0 - 2) / (static_cast<double>(k + 1) + 2 * a0);
    const double tail = (static_cast<double>(k) + 1 + 2 * a0) / (a0 + 1) * next;  // p_{>k}
    if (tail < tail_tol || k >= k_max) {
      seq.tail_mass = tail;
      seq.tail_first_moment = tail * ((a0 + 1) * static_cast<double>(k) + 2 * a0) / a0;
      seq.capped = tail >= tail_tol;
      break;
    }
    pk = next;
  }
  return seq;
}

double limit_tail_mass(double a0, double k) {
  check_param(a0, "a0");
  if (k <= 0) return 1.0;
  return q_at(k - 1, a0);
}

double limit_loglik(double a, double a0) {
  check_param(a, "a");
  check_param(a0, "a0");
  // Split into a constant at a0 plus a difference that is computed directly,
  // so values at nearby a compare to full relative precision.
  const double at_truth =
      tail_weighted_series(a0, kSeriesTol, [a0](double k) { return std::log(a0 + k); }) - std::log(a0 + 1);
  if (a == a0) return at_truth;
  const double shift = a - a0;
  const double diff = tail_weighted_series(a0, kSeriesTol, [=](double k) { return std::log1p(shift / (a0 + k)); }) -
                      std::log1p(shift / (a0 + 1));
  return at_truth + diff;
}

double limit_loglik_derivative(double a, double a0) {
  check_param(a, "a");
  check_param(a0, "a0");
  return tail_weighted_series(a0, kSeriesTol, [a](double k) { return 1.0 / (a + k); }) - 1.0 / (a + 1);
}

Sigma2Beta sigma2_beta(double a0, double tail_tol) {
  check_param(a0, "a0");
  require(tail_tol > 0.0, ErrorCode::invalid_argument, "tail_tol must be positive");
  const double s1 = tail_weighted_series(a0, tail_tol, [a0](double k) { return 1.0 / (a0 + k); });
  const double s2 = tail_weighted_series(a0, tail_tol, [a0](double k) { return 1.0 / ((a0 + k) * (a0 + k)); });
  const double c = 1.0 / (a0 + 1);
  Sigma2Beta out;
  out.sigma2 = s2 - 2 * c * s1 + c * c;
  out.beta = s2 - c * c;
  out.avar = out.sigma2 / (out.beta * out.beta);
  return out;
}

LimitReportBo limit_report_bo(double a0, double tail_tol, std::size_t k_max) {
  LimitReportBo report;
  report.a0 = a0;
  report.tail_tol = tail_tol;
  report.p = limit_pk(a0, tail_tol, k_max);
  report.asymptotics = sigma2_beta(a0, tail_tol);
  return report;
}

}  // namespace pafit
