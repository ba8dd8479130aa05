#include "pafit/series.hpp"

#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace pafit {

double euler_maclaurin_tail(const std::function<double(double)>& g, double start) {
  // integrate() is non-const for finite-start ranges; one instance per thread.
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = integrator.integrate(g, start, std::numeric_limits<double>::infinity(), 1e-15);

  constexpr double h = 0.5;
  const double gm2 = g(start - 2 * h), gm1 = g(start - h), g0 = g(start), gp1 = g(start + h), gp2 = g(start + 2 * h);
  const double d1 = (gm2 - 8 * gm1 + 8 * gp1 - gp2) / (12 * h);
  const double d3 = (gp2 - 2 * gp1 + 2 * gm1 - gm2) / (2 * h * h * h);
  return integral + g0 / 2 - d1 / 12 + d3 / 720;
}

}  // namespace pafit
