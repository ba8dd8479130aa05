#include "pafit/pa_sim.hpp"

#include <cmath>
#include <string>

#include "pafit/cumulative_tree.hpp"
#include "pafit/error.hpp"
#include "pafit/rng.hpp"

namespace pafit {

const char* model_name(Model model) noexcept {
  switch (model) {
    case Model::LCD: return "LCD";
    case Model::BO: return "BO";
    case Model::HPAM: return "HPAM";
    case Model::GENERAL_F: return "GENERAL_F";
  }
  return "?";
}

Model model_from_name(std::string_view name) {
  if (name == "LCD" || name == "lcd") return Model::LCD;
  if (name == "BO" || name == "bo") return Model::BO;
  if (name == "HPAM" || name == "hpam") return Model::HPAM;
  if (name == "GENERAL_F" || name == "general") return Model::GENERAL_F;
  fail(ErrorCode::invalid_argument, "unknown model '" + std::string(name) + "'");
}

namespace {

void check_size(std::uint64_t n) { require(n >= 1, ErrorCode::invalid_argument, "n must be at least 1"); }

void check_a(double a) {
  require(std::isfinite(a) && a > 0.0, ErrorCode::invalid_argument, "a must be positive");
}

void check_delta(double delta) {
  require(std::isfinite(delta) && delta > 0.0, ErrorCode::invalid_argument, "delta must be positive");
}

AttachEvent plain(NodeIndex node, NodeIndex target) { return {node, target, std::nullopt, std::nullopt}; }

// Samples with a cumulative-sum tree over per-node weights weight(d); the
// self-loop weight is a. Covers BO with a < 1 and the general f model.
template <typename WeightFn>
GrowthHistory simulate_weighted(std::uint64_t n, double a, std::uint64_t seed, WeightFn weight) {
  Rng rng(seed);
  CumulativeTree tree(n);
  std::vector<std::uint64_t> degree(n, 0);
  std::vector<AttachEvent> events;
  events.reserve(n);

  auto bump = [&](std::size_t v, std::uint64_t by) {
    const double before = degree[v] == 0 ? 0.0 : weight(degree[v]);
    degree[v] += by;
    tree.add(v, weight(degree[v]) - before);
  };

  events.push_back(plain(1, 1));
  bump(0, 2);
  for (std::uint64_t i = 1; i < n; ++i) {
    const double existing = tree.prefix(i);
    const double u = rng.uniform01() * (existing + a);
    const NodeIndex node = i + 1;
    if (u >= existing) {
      events.push_back(plain(node, node));
      bump(i, 2);
    } else {
      const std::size_t v = tree.find(u, i);
      events.push_back(plain(node, v + 1));
      bump(v, 1);
      bump(i, 1);
    }
  }
  return GrowthHistory(std::move(events));
}

}  // namespace

void SimConfig::validate() const {
  check_size(n);
  switch (model) {
    case Model::LCD: break;
    case Model::BO:
      require(bo_a.has_value(), ErrorCode::invalid_argument, "BO model needs bo_a");
      check_a(*bo_a);
      break;
    case Model::GENERAL_F:
      require(bo_a.has_value() && delta.has_value(), ErrorCode::invalid_argument, "GENERAL_F model needs bo_a and delta");
      check_a(*bo_a);
      check_delta(*delta);
      break;
    case Model::HPAM:
      require(hpam.has_value(), ErrorCode::invalid_argument, "HPAM model needs hpam parameters");
      break;
  }
}

GrowthHistory simulate_lcd(std::uint64_t n, std::uint64_t seed) { return simulate_bo(n, 1.0, seed); }

GrowthHistory simulate_bo(std::uint64_t n, double a, std::uint64_t seed) {
  check_size(n);
  check_a(a);
  if (a < 1.0) return simulate_weighted(n, a, seed, [a](std::uint64_t d) { return static_cast<double>(d) + a - 1.0; });

  Rng rng(seed);
  std::vector<NodeIndex> endpoints;  // node v appears d(v) times
  endpoints.reserve(2 * n);
  std::vector<AttachEvent> events;
  events.reserve(n);
  events.push_back(plain(1, 1));
  endpoints.insert(endpoints.end(), {1, 1});

  for (std::uint64_t i = 1; i < n; ++i) {
    const double di = static_cast<double>(i);
    const double edge_mass = 2.0 * di;
    const double node_mass = di * (a - 1.0);
    const double u = rng.uniform01() * ((a + 1.0) * di + a);
    const NodeIndex node = i + 1;
    NodeIndex target = node;
    if (u < edge_mass) {
      target = endpoints[rng.below(2 * i)];
    } else if (u < edge_mass + node_mass) {
      target = rng.below(i) + 1;
    }
    events.push_back(plain(node, target));
    endpoints.push_back(node);
    endpoints.push_back(target);
  }
  return GrowthHistory(std::move(events));
}

GrowthHistory simulate_general_f(std::uint64_t n, double a, double delta, std::uint64_t seed) {
  check_size(n);
  check_a(a);
  check_delta(delta);
  return simulate_weighted(n, a, seed, [a, delta](std::uint64_t d) {
    return std::pow(static_cast<double>(d), delta) + a - 1.0;
  });
}

GrowthHistory simulate_hpam(std::uint64_t n, const HpamParams& params, std::uint64_t seed) {
  check_size(n);
  const Community K = params.K();
  Rng rng(seed);

  auto draw_membership = [&]() -> Community {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (Community j = 0; j + 1 < K; ++j) {
      acc += params.pi(j);
      if (u < acc) return j;
    }
    return K - 1;
  };

  // Per-community endpoint lists: node v in C_l appears d(v) times in by_community[l].
  std::vector<std::vector<NodeIndex>> by_community(K);
  std::vector<Community> label(n);
  std::vector<AttachEvent> events;
  events.reserve(n);

  const Community first = draw_membership();
  label[0] = first;
  events.push_back({1, 1, first + 1, first + 1});
  by_community[first].insert(by_community[first].end(), {1, 1});

  std::vector<double> mass(K);
  for (std::uint64_t i = 1; i < n; ++i) {
    const NodeIndex node = i + 1;
    const Community k = draw_membership();
    label[i] = k;
    double total = params.gamma(k, k);
    for (Community l = 0; l < K; ++l) {
      mass[l] = params.gamma(k, l) * static_cast<double>(by_community[l].size());
      total += mass[l];
    }
    double u = rng.uniform01() * total;
    Community chosen = K;  // K means self-loop
    for (Community l = 0; l < K; ++l) {
      if (by_community[l].empty()) continue;
      if (u < mass[l]) {
        chosen = l;
        break;
      }
      u -= mass[l];
    }
    if (chosen == K) {
      events.push_back({node, node, k + 1, k + 1});
      by_community[k].insert(by_community[k].end(), {node, node});
    } else {
      const auto& pool = by_community[chosen];
      const NodeIndex target = pool[rng.below(pool.size())];
      events.push_back({node, target, k + 1, chosen + 1});
      by_community[k].push_back(node);
      by_community[chosen].push_back(target);
    }
  }
  return GrowthHistory(std::move(events), K);
}

GrowthHistory simulate(const SimConfig& config) {
  config.validate();
  switch (config.model) {
    case Model::LCD: return simulate_lcd(config.n, config.seed);
    case Model::BO: return simulate_bo(config.n, *config.bo_a, config.seed);
    case Model::HPAM: return simulate_hpam(config.n, *config.hpam, config.seed);
    case Model::GENERAL_F: return simulate_general_f(config.n, *config.bo_a, *config.delta, config.seed);
  }
  fail(ErrorCode::invalid_argument, "unknown model");
}

double step_probability(const GrowthHistory& prefix, const AttachEvent& event, const SimConfig& config) {
  config.validate();
  const std::uint64_t i = prefix.size();
  const NodeIndex node = i + 1;
  require(event.node == node, ErrorCode::structure, "event does not extend the prefix by one node");
  require(event.target >= 1 && event.target <= node, ErrorCode::structure, "event target outside [1, node]");

  const bool hpam = config.model == Model::HPAM;
  double pi_factor = 1.0;
  if (hpam) {
    require(event.labeled() && (prefix.labeled() || prefix.empty()), ErrorCode::labeling,
            "HPAM step probabilities need labeled prefix and event");
    const Community k = *event.membership;
    require(k >= 1 && k <= config.hpam->K(), ErrorCode::labeling, "event membership outside 1..K");
    const Community expected = event.self_loop() ? k : prefix.membership(event.target);
    require(*event.target_membership == expected, ErrorCode::labeling, "event target_membership inconsistent");
    pi_factor = config.hpam->pi(k - 1);
  }
  if (i == 0) return event.self_loop() ? pi_factor : 0.0;

  const auto degree = node_degrees(prefix);
  const double di = static_cast<double>(i);
  const double d_target = event.self_loop() ? 0.0 : static_cast<double>(degree[event.target - 1]);

  switch (config.model) {
    case Model::LCD:
      return (event.self_loop() ? 1.0 : d_target) / (2.0 * di + 1.0);
    case Model::BO: {
      const double a = *config.bo_a;
      return (event.self_loop() ? a : d_target + a - 1.0) / ((a + 1.0) * di + a);
    }
    case Model::GENERAL_F: {
      const double a = *config.bo_a;
      const double delta = *config.delta;
      double f_sum = 0.0;
      for (auto d : degree) f_sum += std::pow(static_cast<double>(d), delta);
      const double denom = f_sum + di * (a - 1.0) + a;
      require(denom > 0.0, ErrorCode::invalid_argument, "general-f attachment weights are not positive");
      return (event.self_loop() ? a : std::pow(d_target, delta) + a - 1.0) / denom;
    }
    case Model::HPAM: {
      const HpamParams& p = *config.hpam;
      const Community k = *event.membership - 1;
      std::vector<double> N(p.K(), 0.0);
      for (std::uint64_t v = 0; v < i; ++v) N[prefix.membership(v + 1) - 1] += static_cast<double>(degree[v]);
      double denom = p.gamma(k, k);
      for (Community l = 0; l < p.K(); ++l) denom += p.gamma(k, l) * N[l];
      const double numer = event.self_loop() ? p.gamma(k, k) : p.gamma(k, *event.target_membership - 1) * d_target;
      return pi_factor * numer / denom;
    }
  }
  fail(ErrorCode::invalid_argument, "unknown model");
}

std::vector<AttachEvent> legal_next_events(const GrowthHistory& prefix, const SimConfig& config) {
  const NodeIndex node = prefix.size() + 1;
  const NodeIndex last_target = prefix.empty() ? 1 : node;
  std::vector<AttachEvent> out;
  if (config.model != Model::HPAM) {
    if (prefix.empty()) return {plain(1, 1)};
    for (NodeIndex t = 1; t <= last_target; ++t) out.push_back(plain(node, t));
    return out;
  }
  const Community K = config.hpam->K();
  for (Community m = 1; m <= K; ++m) {
    if (prefix.empty()) {
      out.push_back({1, 1, m, m});
      continue;
    }
    for (NodeIndex t = 1; t <= last_target; ++t)
      out.push_back({node, t, m, t == node ? m : prefix.membership(t)});
  }
  return out;
}

GrowthHistory append_event(const GrowthHistory& prefix, const AttachEvent& event, Community K) {
  std::vector<AttachEvent> events(prefix.events().begin(), prefix.events().end());
  events.push_back(event);
  return GrowthHistory(std::move(events), K);
}

std::vector<double> expected_degree_counts_bo(std::uint64_t n, double a) {
  check_size(n);
  check_a(a);
  std::vector<double> N(n + 2, 0.0);
  N[2] = 1.0;
  for (std::uint64_t m = 1; m < n; ++m) {
    const double dm = static_cast<double>(m);
    const double D = (a + 1.0) * dm + a;
    // Highest reachable degree after this step is m + 2; update top-down so
    // N[k-1] still holds the time-m value when N[k] is updated.
    for (std::uint64_t k = m + 2; k >= 3; --k) {
      const double dk = static_cast<double>(k);
      N[k] += ((dk + a - 2.0) * N[k - 1] - (dk + a - 1.0) * N[k]) / D;
    }
    const double n1 = N[1];
    N[2] += (a + a * n1 - (a + 1.0) * N[2]) / D;
    N[1] += ((a + 1.0) * dm - a * n1) / D;
  }
  return N;
}

}  // namespace pafit
