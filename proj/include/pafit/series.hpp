#pragma once

#include <cmath>
#include <functional>

namespace pafit {

/// Neumaier (improved Kahan-Babuska) compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// sum_{k >= start} g(k) for g smooth and algebraically decaying on [start, inf):
///   int_start^inf g + g(start)/2 - g'(start)/12 + g'''(start)/720.
/// The integral uses double-exponential (exp-sinh) quadrature; derivatives use
/// central stencils with step 1/2. The omitted Euler-Maclaurin remainder is of
/// order |g^(5)(start)| / 30240.
double euler_maclaurin_tail(const std::function<double(double)>& g, double start);

}  // namespace pafit
