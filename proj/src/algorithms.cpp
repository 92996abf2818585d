#include "onm/algorithms.hpp"

#include <cmath>

namespace onm::algorithms {

OnmState onm_step(const oracles::LossOracle& oracle, const OnmState& state) {
  const Vector g = oracle.gradient(state.t, state.x);
  const linalg::SymMatrix h = oracle.hessian(state.t, state.x);
  try {
    return {state.x - linalg::solve_symmetric(h, g), state.t + 1};
  } catch (const linalg::SingularMatrix& e) {
    throw SingularHessian("Hessian singular at round " + std::to_string(state.t) + ": " + e.what(),
                          state.t);
  }
}

Vector ogd_step(const oracles::LossOracle& oracle, const Vector& x, int t,
                const OgdConfig& config) {
  return x - config.eta * oracle.gradient(t, x);
}

std::pair<double, double> quadratic_map_fixed_points(double c, double v) {
  if (!(c > 0.0) || !(v > 0.0)) throw std::invalid_argument("need c > 0 and v > 0");
  const double disc = 1.0 - 4.0 * c * v;
  if (disc < 0.0) {
    throw NoRealFixedPoint("no real fixed point: 4cv = " + std::to_string(4.0 * c * v) + " > 1",
                           disc);
  }
  const double root = std::sqrt(disc);
  // Rationalized lower root avoids cancellation for small 4cv.
  const double lower = 2.0 * v / (1.0 + root);
  const double upper = (1.0 + root) / (2.0 * c);
  return {lower, upper};
}

QuadraticMapParams QuadraticMapParams::make(double c, double v) {
  const auto [lower, upper] = quadratic_map_fixed_points(c, v);
  QuadraticMapParams p;
  p.c = c;
  p.v = v;
  p.x_lower = lower;
  p.x_upper = upper;
  return p;
}

std::vector<double> quadratic_map_iterate(const QuadraticMapParams& params, double x0,
                                          std::size_t n) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("x0 must be nonnegative");
  if (n < 1) throw std::invalid_argument("need at least one iterate");
  std::vector<double> out;
  out.reserve(n);
  double x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    x = params.c * x * x + params.v;
    out.push_back(x);
  }
  return out;
}

QuadraticMapLimit quadratic_map_converge(const QuadraticMapParams& params, double x0) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("x0 must be nonnegative");
  QuadraticMapLimit lim;
  double x = x0;
  for (std::size_t k = 0; k < 100000; ++k) {
    const double next = params.c * x * x + params.v;
    ++lim.iterations;
    if (std::abs(next - x) <= 1e-14) {
      lim.value = next;
      lim.converged = true;
      return lim;
    }
    x = next;
  }
  lim.value = x;
  return lim;
}

}  // namespace onm::algorithms
