#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "onm/linalg.hpp"
#include "onm/oracles.hpp"

namespace onm::algorithms {

using linalg::Vector;

class SingularHessian : public std::runtime_error {
 public:
  SingularHessian(const std::string& what, int round)
      : std::runtime_error(what), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

struct OnmState {
  Vector x;
  int t = 0;
};

// x_{t+1} = x_t - H_t(x_t)^{-1} grad f_t(x_t), unit step, one solve per round.
OnmState onm_step(const oracles::LossOracle& oracle, const OnmState& state);

struct OgdConfig {
  double eta;
  explicit OgdConfig(double step) : eta(step) {
    if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  }
};

// x_{t+1} = x_t - eta * grad f_t(x_t), unconstrained.
Vector ogd_step(const oracles::LossOracle& oracle, const Vector& x, int t, const OgdConfig& config);

class NoRealFixedPoint : public std::runtime_error {
 public:
  NoRealFixedPoint(const std::string& what, double discriminant)
      : std::runtime_error(what), discriminant_(discriminant) {}
  double discriminant() const { return discriminant_; }

 private:
  double discriminant_;
};

// Fixed points of x -> c x^2 + v: roots of c x^2 - x + v.  Returns
// (x_lower, x_upper); throws NoRealFixedPoint when 4cv > 1.
std::pair<double, double> quadratic_map_fixed_points(double c, double v);

struct QuadraticMapParams {
  double c = 0.0;
  double v = 0.0;
  double x_lower = 0.0;
  double x_upper = 0.0;

  static QuadraticMapParams make(double c, double v);
};

// Iterates x_{k+1} = c x_k^2 + v; returns (x_1, ..., x_n).
std::vector<double> quadratic_map_iterate(const QuadraticMapParams& params, double x0,
                                          std::size_t n);

struct QuadraticMapLimit {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Runs the map until |x_{k+1} - x_k| <= 1e-14 or 1e5 steps.
QuadraticMapLimit quadratic_map_converge(const QuadraticMapParams& params, double x0);

}  // namespace onm::algorithms
