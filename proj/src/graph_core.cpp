#include "pafit/graph_core.hpp"

#include <cmath>
#include <numeric>

#include "pafit/error.hpp"

namespace pafit {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::structure: return "structure";
    case ErrorCode::labeling: return "labeling";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    case ErrorCode::degenerate_data: return "degenerate_data";
    case ErrorCode::empty_data: return "empty_data";
    case ErrorCode::nonconvergence: return "nonconvergence";
    case ErrorCode::size_guard: return "size_guard";
  }
  return "unknown";
}

GrowthHistory::GrowthHistory(std::vector<AttachEvent> events, Community num_communities)
    : events_(std::move(events)), num_communities_(num_communities) {
  require(num_communities_ >= 1, ErrorCode::invalid_argument, "number of communities must be positive");
  if (events_.empty()) return;

  labeled_ = events_.front().labeled();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const AttachEvent& e = events_[i];
    const NodeIndex k = i + 1;
    const std::string where = "event " + std::to_string(k);
    require(e.node == k, ErrorCode::structure, where + ": node index " + std::to_string(e.node) + " out of arrival order");
    require(e.target >= 1 && e.target <= e.node, ErrorCode::structure,
            where + ": target " + std::to_string(e.target) + " must lie in [1, node]");
    if (k == 1) require(e.self_loop(), ErrorCode::structure, "event 1 must be a self-loop");

    require(e.membership.has_value() == e.target_membership.has_value(), ErrorCode::labeling,
            where + ": membership and target_membership must be both present or both absent");
    require(e.labeled() == labeled_, ErrorCode::labeling, where + ": mixed labeled and unlabeled events");
    if (!labeled_) continue;

    require(*e.membership >= 1 && *e.membership <= num_communities_, ErrorCode::labeling,
            where + ": membership outside 1..K");
    const Community expected = e.self_loop() ? *e.membership : *events_[e.target - 1].membership;
    require(*e.target_membership == expected, ErrorCode::labeling,
            where + ": target_membership disagrees with the target's membership");
  }
}

Community GrowthHistory::membership(NodeIndex v) const {
  require(labeled_, ErrorCode::labeling, "history carries no memberships");
  return *events_.at(v - 1).membership;
}

GrowthHistory GrowthHistory::prefix(std::size_t n) const {
  require(n <= events_.size(), ErrorCode::invalid_argument, "prefix longer than history");
  return GrowthHistory(std::vector<AttachEvent>(events_.begin(), events_.begin() + static_cast<std::ptrdiff_t>(n)),
                       num_communities_);
}

GrowthHistory GrowthHistory::without_labels() const {
  std::vector<AttachEvent> stripped;
  stripped.reserve(events_.size());
  for (const auto& e : events_) stripped.push_back({e.node, e.target, std::nullopt, std::nullopt});
  return GrowthHistory(std::move(stripped), 1);
}

DegreeCounts::DegreeCounts(std::map<std::uint64_t, std::uint64_t> counts) : counts_(std::move(counts)) {
  std::uint64_t degree_sum = 0;
  for (auto it = counts_.begin(); it != counts_.end();) {
    require(it->first >= 1, ErrorCode::structure, "degree 0 cannot occur in a growth history");
    if (it->second == 0) {
      it = counts_.erase(it);
      continue;
    }
    n_ += it->second;
    degree_sum += it->first * it->second;
    ++it;
  }
  require(degree_sum == 2 * n_, ErrorCode::structure,
          "degree sum " + std::to_string(degree_sum) + " != 2n = " + std::to_string(2 * n_));
}

DegreeCounts DegreeCounts::from_degrees(std::span<const std::uint64_t> degrees) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (auto d : degrees) ++counts[d];
  return DegreeCounts(std::move(counts));
}

std::uint64_t DegreeCounts::count(std::uint64_t degree) const {
  auto it = counts_.find(degree);
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t DegreeCounts::max_degree() const noexcept {
  return counts_.empty() ? 0 : counts_.rbegin()->first;
}

std::vector<std::uint64_t> DegreeCounts::tail_counts() const {
  const std::uint64_t dmax = max_degree();
  std::vector<std::uint64_t> tail(dmax + 1, 0);
  std::uint64_t running = 0;
  auto it = counts_.rbegin();
  for (std::uint64_t k = dmax + 1; k-- > 0;) {
    tail[k] = running;  // nodes with degree > k
    if (it != counts_.rend() && it->first == k) {
      running += it->second;
      ++it;
    }
  }
  return tail;
}

HpamParams::HpamParams(std::vector<double> pi, std::vector<double> gamma)
    : pi_(std::move(pi)), gamma_(std::move(gamma)) {
  const std::size_t K = pi_.size();
  require(K >= 1, ErrorCode::invalid_argument, "pi must be non-empty");
  require(gamma_.size() == K * K, ErrorCode::dimension,
          "gamma has " + std::to_string(gamma_.size()) + " entries, expected K^2 = " + std::to_string(K * K));
  double total = 0.0;
  for (double p : pi_) {
    require(std::isfinite(p) && p > 0.0, ErrorCode::invalid_argument, "pi entries must be positive");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::invalid_argument, "pi must sum to 1");
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      const double g = gamma_[i * K + j];
      require(std::isfinite(g) && g > 0.0, ErrorCode::invalid_argument, "gamma entries must be positive");
      const double h = gamma_[j * K + i];
      require(std::abs(g - h) <= 1e-12 * std::max(g, h), ErrorCode::invalid_argument, "gamma must be symmetric");
    }
  }
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j) gamma_[j * K + i] = gamma_[i * K + j];
}

HpamParams HpamParams::normalized() const {
  std::vector<double> g = gamma_;
  const double scale = gamma_[0];
  for (double& x : g) x /= scale;
  return HpamParams(pi_, std::move(g));
}

HpamParams HpamParams::uniform(Community K) {
  require(K >= 1, ErrorCode::invalid_argument, "K must be positive");
  return HpamParams(std::vector<double>(K, 1.0 / K), std::vector<double>(std::size_t{K} * K, 1.0));
}

void BoDomain::validate() const {
  require(std::isfinite(eps) && std::isfinite(max) && eps > 0.0 && eps < max, ErrorCode::invalid_argument,
          "domain must satisfy 0 < eps < max");
}

std::vector<std::uint64_t> node_degrees(const GrowthHistory& history) {
  std::vector<std::uint64_t> degree(history.size(), 0);
  for (const auto& e : history.events()) {
    if (e.self_loop()) {
      degree[e.node - 1] += 2;
    } else {
      degree[e.node - 1] += 1;
      degree[e.target - 1] += 1;
    }
  }
  return degree;
}

DegreeCounts degree_counts(const GrowthHistory& history) {
  const auto degrees = node_degrees(history);
  return DegreeCounts::from_degrees(degrees);
}

CommunityStats community_stats(const GrowthHistory& history) {
  require(history.labeled() || history.empty(), ErrorCode::labeling,
          "community statistics need membership labels on every event");
  CommunityStats s;
  s.n = history.size();
  s.K = history.num_communities();
  const std::size_t K = s.K;
  s.T.assign(K, 0);
  s.N_final.assign(K, 0);
  s.M.assign(K * K, 0);
  s.N_path.reserve(s.n * K);
  s.labels.reserve(s.n);

  for (const auto& e : history.events()) {
    s.N_path.insert(s.N_path.end(), s.N_final.begin(), s.N_final.end());
    const Community j = *e.membership - 1;
    const Community l = *e.target_membership - 1;
    s.labels.push_back(j);
    ++s.T[j];
    if (e.self_loop()) {
      s.N_final[j] += 2;
      ++s.M[j * K + j];
    } else {
      s.N_final[j] += 1;
      s.N_final[l] += 1;
      ++s.M[j * K + l];
      if (j != l) ++s.M[l * K + j];
    }
  }

  for (auto d : node_degrees(history)) s.log_degree_factorial += std::lgamma(static_cast<double>(d));
  return s;
}

}  // namespace pafit
