#pragma once

// Growth histories and the sufficient statistics every likelihood is built from.
//
// Conventions used throughout the library:
//   * nodes are numbered 1..n in arrival order; event k is the arrival of node k;
//   * community labels in histories and files are 1..K, while vector positions
//     (pi, gamma, T, N, M) are 0-based;
//   * a self-loop adds 2 to the degree of its node.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pafit {

using NodeIndex = std::uint64_t;
using Community = std::uint32_t;

struct AttachEvent {
  NodeIndex node = 0;
  NodeIndex target = 0;  // == node for a self-loop
  std::optional<Community> membership;
  std::optional<Community> target_membership;

  bool self_loop() const noexcept { return node == target; }
  bool labeled() const noexcept { return membership.has_value(); }

  friend bool operator==(const AttachEvent&, const AttachEvent&) = default;
};

/// Ordered record of attachment events. Immutable once constructed; the
/// constructor checks every structural and labeling invariant.
class GrowthHistory {
 public:
  GrowthHistory() = default;
  explicit GrowthHistory(std::vector<AttachEvent> events, Community num_communities = 1);

  std::span<const AttachEvent> events() const noexcept { return events_; }
  /// 1-based access: event(k) is the arrival of node k.
  const AttachEvent& event(NodeIndex k) const { return events_.at(k - 1); }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  Community num_communities() const noexcept { return num_communities_; }
  bool labeled() const noexcept { return labeled_; }

  /// Membership label (1-based) of node v; requires labeled().
  Community membership(NodeIndex v) const;

  /// First n events.
  GrowthHistory prefix(std::size_t n) const;
  /// Same attachments, memberships stripped (K reset to 1).
  GrowthHistory without_labels() const;

  friend bool operator==(const GrowthHistory&, const GrowthHistory&) = default;

 private:
  std::vector<AttachEvent> events_;
  Community num_communities_ = 1;
  bool labeled_ = false;
};

/// Z_k^n: number of nodes of degree k in the final graph (sparse).
class DegreeCounts {
 public:
  DegreeCounts() = default;
  /// Validates sum_k Z_k = n and sum_k k Z_k = 2n.
  explicit DegreeCounts(std::map<std::uint64_t, std::uint64_t> counts);
  /// Builds counts from a per-node degree list.
  static DegreeCounts from_degrees(std::span<const std::uint64_t> degrees);

  std::uint64_t n() const noexcept { return n_; }
  const std::map<std::uint64_t, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t count(std::uint64_t degree) const;
  std::uint64_t max_degree() const noexcept;
  /// Z_{>k} for k = 0..max_degree (single suffix-sum pass).
  std::vector<std::uint64_t> tail_counts() const;

  friend bool operator==(const DegreeCounts&, const DegreeCounts&) = default;

 private:
  std::map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

/// T_j^n, N_j^{k-1} along the path, and the symmetric edge counts M_ij^n.
struct CommunityStats {
  std::size_t n = 0;
  Community K = 0;
  std::vector<std::uint64_t> T;        // K
  std::vector<std::uint64_t> N_path;   // n x K row-major; row k-1 holds N^{k-1}
  std::vector<std::uint64_t> N_final;  // N^n
  std::vector<std::uint64_t> M;        // K x K, symmetric
  std::vector<Community> labels;       // l_k (0-based), k = 1..n
  double log_degree_factorial = 0.0;   // sum_v log (d(v) - 1)!

  std::span<const std::uint64_t> N_before(std::size_t k) const {
    return {N_path.data() + (k - 1) * K, K};
  }
  std::uint64_t M_at(Community i, Community j) const { return M[i * K + j]; }
};

/// Membership distribution and symmetric interaction matrix of the HPAM.
/// gamma is row-major K x K. The likelihood is homogeneous in gamma, so
/// gamma_11 = 1 is a convention (see normalized()), not a requirement.
class HpamParams {
 public:
  HpamParams(std::vector<double> pi, std::vector<double> gamma);

  Community K() const noexcept { return static_cast<Community>(pi_.size()); }
  std::span<const double> pi() const noexcept { return pi_; }
  std::span<const double> gamma() const noexcept { return gamma_; }
  double pi(Community j) const { return pi_[j]; }
  double gamma(Community i, Community j) const { return gamma_[i * K() + j]; }

  /// gamma rescaled so that gamma_11 = 1.
  HpamParams normalized() const;
  /// K communities, uniform pi, all gamma equal to 1.
  static HpamParams uniform(Community K);

  friend bool operator==(const HpamParams&, const HpamParams&) = default;

 private:
  std::vector<double> pi_;
  std::vector<double> gamma_;
};

/// Search domain [eps, max] for the Buckley-Osthus parameter.
struct BoDomain {
  double eps = 1e-3;
  double max = 100.0;

  void validate() const;
  bool contains(double a) const noexcept { return a >= eps && a <= max; }
};

std::vector<std::uint64_t> node_degrees(const GrowthHistory& history);
DegreeCounts degree_counts(const GrowthHistory& history);
CommunityStats community_stats(const GrowthHistory& history);

// GrowthHistory CSV: header `node,target,membership,target_membership`.
std::string history_to_csv(const GrowthHistory& history);
GrowthHistory history_from_csv(const std::string& text);
void write_history_csv(const GrowthHistory& history, const std::string& path);
GrowthHistory read_history_csv(const std::string& path);

}  // namespace pafit
