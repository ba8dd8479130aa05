#pragma once

#include <cstddef>
#include <vector>

namespace pafit {

/// Binary indexed (Fenwick) tree over nonnegative weights: O(log n) point
/// updates, prefix sums, and inverse-CDF lookup for weighted sampling.
class CumulativeTree {
 public:
  explicit CumulativeTree(std::size_t size) : tree_(size + 1, 0.0), size_(size) {
    top_ = 1;
    while (top_ * 2 <= size_) top_ *= 2;
  }

  std::size_t size() const noexcept { return size_; }

  /// weight[index] += delta (0-based index).
  void add(std::size_t index, double delta) {
    for (std::size_t i = index + 1; i <= size_; i += i & (~i + 1)) tree_[i] += delta;
  }

  /// Sum of weights [0, count).
  double prefix(std::size_t count) const {
    double s = 0.0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  /// Smallest 0-based index i with prefix(i + 1) > target, clamped to
  /// [0, limit - 1]. Callers draw target from [0, prefix(limit)); the clamp
  /// only absorbs rounding at the upper edge.
  std::size_t find(double target, std::size_t limit) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next <= size_ && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    return pos < limit ? pos : limit - 1;
  }

 private:
  std::vector<double> tree_;
  std::size_t size_;
  std::size_t top_;
};

}  // namespace pafit
