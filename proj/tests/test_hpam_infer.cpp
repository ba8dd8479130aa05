#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "pafit/bo_infer.hpp"
#include "pafit/error.hpp"
#include "pafit/hpam_infer.hpp"
#include "pafit/pa_sim.hpp"

using namespace pafit;

namespace {

const HpamParams kTruth({0.3, 0.7}, {1, 0.5, 0.5, 1.5});

SimConfig hpam_config(const HpamParams& p) {
  SimConfig c;
  c.model = Model::HPAM;
  c.hpam = p;
  return c;
}

AttachEvent lev(NodeIndex node, NodeIndex target, Community m, Community t) { return {node, target, m, t}; }

double log_product_of_steps(const GrowthHistory& h, const HpamParams& p) {
  double s = 0.0;
  GrowthHistory prefix({}, p.K());
  for (std::size_t k = 1; k <= h.size(); ++k) {
    s += std::log(step_probability(prefix, h.event(k), hpam_config(p)));
    prefix = append_event(prefix, h.event(k), p.K());
  }
  return s;
}

// gamma with gamma_ij = gamma_ji = value for one pair.
std::vector<double> with_pair(std::vector<double> g, Community K, Community i, Community j, double value) {
  g[i * K + j] = value;
  g[j * K + i] = value;
  return g;
}

HpamParams two_by_two(double g12, double g22, std::vector<double> pi = {0.3, 0.7}) {
  return HpamParams(std::move(pi), {1, g12, g12, g22});
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("exact-mode likelihood equals the product of step probabilities") {
  const HpamParams three({0.2, 0.3, 0.5}, {1, 2, 0.5, 2, 1, 1, 0.5, 1, 3});
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto& p = seed % 2 ? kTruth : three;
    const auto h = simulate_hpam(1 + 13 * seed, p, seed);
    const auto s = community_stats(h);
    for (const auto& eval : {p, HpamParams::uniform(p.K())}) {
      const double n = static_cast<double>(h.size());
      CHECK(n * hpam_loglik(s, eval) == doctest::Approx(log_product_of_steps(h, eval)).epsilon(1e-11));
    }
  }
}

TEST_CASE("one community reduces to BO at a = 1") {
  const HpamParams one({1.0}, {1.0});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto h = simulate_hpam(50 + seed * 100, one, seed);
    const double n = static_cast<double>(h.size());
    CHECK(hpam_loglik(community_stats(h), one) ==
          doctest::Approx(bo_log_likelihood(degree_counts(h), 1.0) / n).epsilon(1e-12));
  }
}

TEST_CASE("scaled and exact denominators differ by constants plus O(log n / n)") {
  const auto h = simulate_hpam(1000, kTruth, 5);
  const auto s = community_stats(h);
  const double n = 1000.0;
  const double constants = (std::lgamma(n + 1) - s.log_degree_factorial) / n;
  for (const auto& p : {kTruth, two_by_two(2.0, 0.3), two_by_two(0.2, 5.0)}) {
    const double residual = hpam_loglik(s, p, Denominator::scaled) - hpam_loglik(s, p, Denominator::exact) - constants;
    CHECK(residual >= 0.0);
    CHECK(residual < 0.02);
  }
}

TEST_CASE("pi MLE is the membership frequency") {
  const auto s = community_stats(GrowthHistory({lev(1, 1, 1, 1), lev(2, 1, 2, 1), lev(3, 2, 2, 2), lev(4, 4, 1, 1)}, 2));
  const auto est = pi_mle(s);
  CHECK(est.pi == std::vector<double>{0.5, 0.5});
  CHECK(est.warnings.empty());
  const auto empty = pi_mle(community_stats(GrowthHistory({lev(1, 1, 1, 1), lev(2, 1, 1, 1)}, 3)));
  CHECK(empty.pi == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(empty.warnings.size() == 2);
}

TEST_CASE("gamma gradient matches central differences") {
  const auto s = community_stats(simulate_hpam(800, kTruth, 8));
  for (auto mode : {Denominator::exact, Denominator::scaled})
    for (const auto& p : {kTruth, two_by_two(1, 1), two_by_two(3, 0.2), two_by_two(0.1, 0.1), two_by_two(2, 7)}) {
      const auto grad = hpam_gamma_gradient(s, p, mode);
      CHECK(grad[1] == grad[2]);
      for (auto [i, j] : {std::pair<Community, Community>{0, 0}, {0, 1}, {1, 1}}) {
        const double g = p.gamma(i, j), h = 1e-6 * g;
        const std::vector<double> base(p.gamma().begin(), p.gamma().end());
        const HpamParams up(std::vector<double>(p.pi().begin(), p.pi().end()), with_pair(base, 2, i, j, g + h));
        const HpamParams dn(std::vector<double>(p.pi().begin(), p.pi().end()), with_pair(base, 2, i, j, g - h));
        const double fd = (hpam_loglik(s, up, mode) - hpam_loglik(s, dn, mode)) / (2 * h);
        CHECK(grad[i * 2 + j] == doctest::Approx(fd).epsilon(1e-5).scale(1e-8));
      }
    }
}

TEST_CASE("gamma MLE: symmetric, pinned, stationary") {
  for (auto mode : {Denominator::exact, Denominator::scaled}) {
    const auto s = community_stats(simulate_hpam(3000, kTruth, 17));
    const auto fit = hpam_mle(s, {mode});
    REQUIRE(fit.converged);
    CHECK(fit.gamma_hat[0] == 1.0);
    CHECK(fit.gamma_hat[1] == fit.gamma_hat[2]);
    CHECK(fit.pi_hat[0] + fit.pi_hat[1] == doctest::Approx(1.0));
    CHECK(fit.grad_norm < 1e-7);
    const HpamParams at(fit.pi_hat, fit.gamma_hat);
    CHECK(fit.loglik == doctest::Approx(hpam_loglik(s, at, mode)).epsilon(1e-14));
    // Local optimality along each free coordinate.
    for (auto [i, j] : {std::pair<Community, Community>{0, 1}, {1, 1}})
      for (double f : {0.99, 1.01}) {
        const HpamParams moved(fit.pi_hat, with_pair(fit.gamma_hat, 2, i, j, f * fit.gamma_hat[i * 2 + j]));
        CHECK(hpam_loglik(s, moved, mode) <= fit.loglik);
      }
  }
}

TEST_CASE("gamma MLE recovers uniform interaction") {
  const HpamParams uniform({0.4, 0.6}, {1, 1, 1, 1});
  const auto fit = hpam_mle(community_stats(simulate_hpam(2000, uniform, 23)));
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.gamma_hat[1] - 1.0) < 0.2);
  CHECK(std::abs(fit.gamma_hat[3] - 1.0) < 0.2);
}

TEST_CASE("gamma MLE flags pairs touching an empty community") {
  // Two-community data read as a three-community history: community 3 is empty.
  const auto sim = simulate_hpam(300, HpamParams({0.5, 0.5}, {1, 1, 1, 1}), 2);
  const auto s = community_stats(GrowthHistory(std::vector<AttachEvent>(sim.events().begin(), sim.events().end()), 3));
  const auto fit = hpam_mle(s);
  CHECK(fit.converged);
  CHECK(fit.identifiable[1]);
  CHECK_FALSE(fit.identifiable[2]);
  CHECK_FALSE(fit.identifiable[8]);
  CHECK(fit.gamma_hat[2] == 1.0);
  CHECK_FALSE(fit.warnings.empty());
  CHECK(code_of([&] { gamma_mle(s, kTruth); }) == ErrorCode::dimension);
}

TEST_CASE("fixed point: closed-form cases") {
  const auto u = fixed_point_p(HpamParams({0.25, 0.75}, {3, 3, 3, 3}));
  CHECK(u.p0[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(u.p0[1] == doctest::Approx(1.5).epsilon(1e-12));
  const auto one = fixed_point_p(HpamParams({1.0}, {2.0}));
  CHECK(one.p0[0] == doctest::Approx(2.0).epsilon(1e-12));
  // Uniform gamma: theta_ij = pi_i pi_j (i < j counted twice), theta_ii = pi_i^2.
  const auto th = theta_from_p(HpamParams({0.25, 0.75}, {1, 1, 1, 1}), u.p0);
  CHECK(th[0] == doctest::Approx(0.0625));
  CHECK(th[1] == doctest::Approx(0.375));
  CHECK(th[3] == doctest::Approx(0.5625));
}

TEST_CASE("fixed point agrees with an independent Newton solve") {
  for (const auto& p : {kTruth, two_by_two(4.0, 0.1, {0.6, 0.4}), two_by_two(0.05, 2.0, {0.5, 0.5})}) {
    const auto lim = fixed_point_p(p);
    CHECK(lim.residual < 1e-11);
    CHECK(lim.p0[0] + lim.p0[1] == doctest::Approx(2.0).epsilon(1e-12));
    // Newton on F(p) = p_j (1 - sum_l pi_l g_lj / D_l) - pi_j with a finite-difference Jacobian.
    auto F = [&](const std::vector<double>& q) {
      std::vector<double> out(2);
      for (Community j = 0; j < 2; ++j) {
        double S = 0.0;
        for (Community l = 0; l < 2; ++l) S += p.pi(l) * p.gamma(l, j) / (p.gamma(l, 0) * q[0] + p.gamma(l, 1) * q[1]);
        out[j] = q[j] * (1.0 - S) - p.pi(j);
      }
      return out;
    };
    std::vector<double> q = {2 * p.pi(0), 2 * p.pi(1)};
    for (int it = 0; it < 100; ++it) {
      const auto f = F(q);
      double J[2][2];
      for (int c = 0; c < 2; ++c) {
        auto qh = q;
        qh[c] += 1e-7;
        const auto fh = F(qh);
        for (int r = 0; r < 2; ++r) J[r][c] = (fh[r] - f[r]) / 1e-7;
      }
      const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
      q[0] -= (J[1][1] * f[0] - J[0][1] * f[1]) / det;
      q[1] -= (-J[1][0] * f[0] + J[0][0] * f[1]) / det;
    }
    CHECK(q[0] == doctest::Approx(lim.p0[0]).epsilon(1e-8));
    CHECK(q[1] == doctest::Approx(lim.p0[1]).epsilon(1e-8));
    CHECK(fixed_point_residual(p, q) < 1e-9);
  }
}

TEST_CASE("limit edge shares sum to one") {
  const HpamParams three({0.2, 0.3, 0.5}, {1, 2, 0.5, 2, 1, 1, 0.5, 1, 3});
  for (const auto& p : {kTruth, three}) {
    const auto lim = hpam_limits(p);
    double upper = 0.0, mass = 0.0;
    for (Community i = 0; i < p.K(); ++i) {
      mass += lim.p0[i];
      for (Community j = i; j < p.K(); ++j) upper += lim.theta0[i * p.K() + j];
      for (Community j = 0; j < p.K(); ++j) CHECK(lim.theta0[i * p.K() + j] == lim.theta0[j * p.K() + i]);
    }
    CHECK(upper == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mass == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("limit log-likelihood: scale invariance and maximizer at the truth") {
  const auto lim = hpam_limits(kTruth);
  const std::vector<double> g = {2, 0.7, 0.7, 0.4};
  const std::vector<double> g5 = {10, 3.5, 3.5, 2};
  CHECK(limit_loglik_hpam(g, kTruth) == doctest::Approx(limit_loglik_hpam(g5, kTruth)).epsilon(1e-13));

  const std::vector<double> truth(kTruth.gamma().begin(), kTruth.gamma().end());
  for (double d : limit_loglik_hpam_gradient(truth, lim, kTruth)) CHECK(std::abs(d) < 1e-10);

  // Cyclic golden-section search over log gamma_12, log gamma_22 with gamma_11 = 1.
  double u[2] = {0.0, 0.0};
  auto value = [&](double u0, double u1) {
    const double a = std::exp(u0), b = std::exp(u1);
    return limit_loglik_hpam({1, a, a, b}, lim, kTruth);
  };
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int cycle = 0; cycle < 60; ++cycle)
    for (int c = 0; c < 2; ++c) {
      double lo = u[c] - 2.0, hi = u[c] + 2.0;
      while (hi - lo > 1e-10) {
        const double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
        const double f1 = c == 0 ? value(x1, u[1]) : value(u[0], x1);
        const double f2 = c == 0 ? value(x2, u[1]) : value(u[0], x2);
        (f1 < f2 ? lo : hi) = f1 < f2 ? x1 : x2;
      }
      u[c] = 0.5 * (lo + hi);
    }
  CHECK(std::abs(std::exp(u[0]) - 0.5) < 1e-4);
  CHECK(std::abs(std::exp(u[1]) - 1.5) < 1e-4);
}

TEST_CASE("limit gradient matches central differences") {
  const auto lim = hpam_limits(kTruth);
  const std::vector<double> g = {1, 0.9, 0.9, 0.6};
  const auto grad = limit_loglik_hpam_gradient(g, lim, kTruth);
  for (auto [i, j] : {std::pair<Community, Community>{0, 0}, {0, 1}, {1, 1}}) {
    const double h = 1e-6;
    const double fd = (limit_loglik_hpam(with_pair(g, 2, i, j, g[i * 2 + j] + h), lim, kTruth) -
                       limit_loglik_hpam(with_pair(g, 2, i, j, g[i * 2 + j] - h), lim, kTruth)) /
                      (2 * h);
    CHECK(grad[i * 2 + j] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("marginal likelihood: one community is the plain likelihood") {
  const auto h = simulate_bo(10, 1.0, 4);
  CHECK(marginal_loglik_bruteforce(h, HpamParams({1.0}, {1.0})) ==
        doctest::Approx(bo_log_likelihood(degree_counts(h), 1.0)).epsilon(1e-12));
}

TEST_CASE("marginal likelihood is invariant under relabeling communities") {
  const auto h = simulate_hpam(9, kTruth, 31).without_labels();
  const HpamParams swapped({0.7, 0.3}, {1.5, 0.5, 0.5, 1});
  CHECK(marginal_loglik_bruteforce(h, kTruth) == doctest::Approx(marginal_loglik_bruteforce(h, swapped)).epsilon(1e-12));
}

TEST_CASE("marginal likelihood agrees with a Monte Carlo average over labelings") {
  const auto h = simulate_hpam(8, kTruth, 32).without_labels();
  const double exact = std::exp(marginal_loglik_bruteforce(h, kTruth));
  std::mt19937_64 rng(5);
  std::bernoulli_distribution second(0.7);
  const int draws = 40000;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < draws; ++r) {
    std::vector<Community> labels(h.size());
    for (auto& l : labels) l = second(rng) ? 1 : 0;
    const double w = std::exp(conditional_log_likelihood(h, labels, kTruth));
    sum += w;
    sumsq += w * w;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sumsq / draws - mean * mean) / draws);
  CHECK(std::abs(mean - exact) < 3 * se);
}

TEST_CASE("marginal likelihood guards its enumeration size") {
  CHECK(code_of([] { marginal_loglik_bruteforce(simulate_bo(15, 1.0, 1), kTruth); }) == ErrorCode::size_guard);
  const HpamParams big({0.25, 0.25, 0.25, 0.25}, std::vector<double>(16, 1.0));
  CHECK(code_of([&] { marginal_loglik_bruteforce(simulate_bo(13, 1.0, 1), big); }) == ErrorCode::size_guard);
}

TEST_CASE("likelihood normalizes over all labeled histories") {
  for (const auto& p : {kTruth, two_by_two(3.0, 0.2, {0.5, 0.5})})
    for (std::size_t n = 1; n <= 3; ++n) {
      double labeled = 0.0, marginal = 0.0;
      std::function<void(const GrowthHistory&)> rec = [&](const GrowthHistory& h) {
        if (h.size() == n) {
          labeled += std::exp(static_cast<double>(n) * hpam_loglik(community_stats(h), p));
          return;
        }
        for (const auto& e : legal_next_events(h, hpam_config(p))) rec(append_event(h, e, 2));
      };
      rec(GrowthHistory({}, 2));
      std::function<void(const GrowthHistory&)> plain = [&](const GrowthHistory& h) {
        if (h.size() == n) {
          marginal += std::exp(marginal_loglik_bruteforce(h, p));
          return;
        }
        SimConfig c;
        c.model = Model::LCD;
        for (const auto& e : legal_next_events(h, c)) plain(append_event(h, e, 1));
      };
      plain(GrowthHistory());
      CHECK(labeled == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(marginal == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("likelihood depends on arrival order, not only on the counts") {
  // Same T, M and final community degrees; different order of arrivals.
  const GrowthHistory first({lev(1, 1, 1, 1), lev(2, 1, 2, 1), lev(3, 3, 2, 2)}, 2);
  const GrowthHistory second({lev(1, 1, 1, 1), lev(2, 2, 2, 2), lev(3, 1, 2, 1)}, 2);
  const auto a = community_stats(first), b = community_stats(second);
  CHECK(a.T == b.T);
  CHECK(a.M == b.M);
  CHECK(a.N_final == b.N_final);
  CHECK(hpam_loglik(a, kTruth) != doctest::Approx(hpam_loglik(b, kTruth)));
}

TEST_CASE("a single misclassified node moves the scaled likelihood by O(1/n)") {
  for (std::uint64_t n : {1000, 4000}) {
    const auto h = simulate_hpam(n, kTruth, 41);
    std::vector<AttachEvent> events(h.events().begin(), h.events().end());
    const NodeIndex v = n / 2;
    const Community flipped = events[v - 1].membership == Community{1} ? 2 : 1;
    for (auto& e : events) {
      if (e.node == v) e.membership = flipped;
      if (e.target == v) e.target_membership = flipped;
    }
    const double delta = hpam_loglik(community_stats(GrowthHistory(events, 2)), kTruth) -
                         hpam_loglik(community_stats(h), kTruth);
    CHECK(std::abs(delta) * static_cast<double>(n) < 30.0);
  }
}
