#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "onm/linalg.hpp"

namespace onm::oracles {

using linalg::SymMatrix;
using linalg::Vector;

struct Evaluation {
  double value = 0.0;
  Vector gradient;
  SymMatrix hessian;
};

// Per-round loss interface: value, gradient and Hessian queries at (t, x).
// Implementations are immutable after construction and safe to share across
// threads; every query is pure.
class LossOracle {
 public:
  virtual ~LossOracle() = default;
  virtual std::size_t dimension() const = 0;
  virtual int rounds() const = 0;
  virtual double value(int t, const Vector& x) const = 0;
  virtual Vector gradient(int t, const Vector& x) const = 0;
  virtual SymMatrix hessian(int t, const Vector& x) const = 0;
  virtual Evaluation evaluate(int t, const Vector& x) const {
    return {value(t, x), gradient(t, x), hessian(t, x)};
  }
};

class SensorCoincidence : public std::runtime_error {
 public:
  SensorCoincidence(const std::string& what, std::size_t sensor_index)
      : std::runtime_error(what), sensor_index_(sensor_index) {}
  std::size_t sensor_index() const { return sensor_index_; }

 private:
  std::size_t sensor_index_;
};

class DerivativeMismatch : public std::runtime_error {
 public:
  DerivativeMismatch(const std::string& what, std::string component, double deviation)
      : std::runtime_error(what), component_(std::move(component)), deviation_(deviation) {}
  const std::string& component() const { return component_; }
  double deviation() const { return deviation_; }

 private:
  std::string component_;
  double deviation_;
};

class DegenerateOptimum : public std::runtime_error {
 public:
  DegenerateOptimum(const std::string& what, int round, double smallest_singular)
      : std::runtime_error(what), round_(round), smallest_singular_(smallest_singular) {}
  int round() const { return round_; }
  double smallest_singular() const { return smallest_singular_; }

 private:
  int round_;
  double smallest_singular_;
};

class NoInteriorMinimum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Newton polish left the gradient above tolerance (or walked away from the
// grid minimum); the caller treats the round as failed.
class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SensorArray {
  std::vector<Vector> positions;

  explicit SensorArray(std::vector<Vector> p) : positions(std::move(p)) {
    if (positions.empty()) throw std::invalid_argument("sensor array needs at least one sensor");
  }
  std::size_t count() const { return positions.size(); }
};

// Sum of squared range residuals: f(x) = sum_i (||x - a_i|| - d_i)^2.
double localization_value(const Vector& x, const SensorArray& sensors,
                          const std::vector<double>& measured);
Evaluation localization_loss(const Vector& x, const SensorArray& sensors,
                             const std::vector<double>& measured);

// f(x) = 1/2 x^T A x - b^T x.
Evaluation quadratic_loss(const Vector& x, const SymMatrix& a, const Vector& b);

// The same quadratic replayed every round.
class QuadraticOracle : public LossOracle {
 public:
  QuadraticOracle(SymMatrix a, Vector b, int rounds = 1);
  std::size_t dimension() const override { return b_.size(); }
  int rounds() const override { return rounds_; }
  double value(int t, const Vector& x) const override;
  Vector gradient(int t, const Vector& x) const override;
  SymMatrix hessian(int t, const Vector& x) const override;

 private:
  SymMatrix a_;
  Vector b_;
  int rounds_;
};

// Range-based localization with a per-round measurement table.
class LocalizationOracle : public LossOracle {
 public:
  LocalizationOracle(SensorArray sensors, std::vector<std::vector<double>> measurements);
  std::size_t dimension() const override { return sensors_.positions.front().size(); }
  int rounds() const override { return static_cast<int>(measurements_.size()); }
  double value(int t, const Vector& x) const override;
  Vector gradient(int t, const Vector& x) const override;
  SymMatrix hessian(int t, const Vector& x) const override;
  Evaluation evaluate(int t, const Vector& x) const override;
  const SensorArray& sensors() const { return sensors_; }

 private:
  const std::vector<double>& row(int t) const;
  SensorArray sensors_;
  std::vector<std::vector<double>> measurements_;
};

// Coordinate-separable smooth nonconvex family with a moving center path:
//   f_t(x) = sum_i a_i s_i^2/2 + b_i s_i^3/6 + c_i s_i^4/12,  s = x - z_t.
// With a_i > 0 each center is a nondegenerate local minimum, and the
// regularity constants have closed forms used as ground truth in tests.
class SeparablePolyOracle : public LossOracle {
 public:
  SeparablePolyOracle(std::vector<Vector> centers, Vector a, Vector b, Vector c);
  std::size_t dimension() const override { return a_.size(); }
  int rounds() const override { return static_cast<int>(centers_.size()); }
  double value(int t, const Vector& x) const override;
  Vector gradient(int t, const Vector& x) const override;
  SymMatrix hessian(int t, const Vector& x) const override;

  const Vector& center(int t) const { return centers_[static_cast<std::size_t>(t)]; }
  // min_i |a_i|: exact curvature floor at the centers.
  double curvature_floor() const;
  // max_i (|b_i| + |c_i| * radius): valid Hessian Lipschitz constant on the
  // radius-ball around any center.
  double hessian_variation(double radius) const;
  // Euclidean norm of per-coordinate worst-case gradient magnitudes on the
  // radius-ball: a valid value-Lipschitz constant there.
  double value_slope(double radius) const;

 private:
  std::vector<Vector> centers_;
  Vector a_, b_, c_;
};

struct DerivativeReport {
  double gradient_deviation = 0.0;
  std::size_t gradient_index = 0;
  double gradient_tolerance = 0.0;
  double hessian_deviation = 0.0;
  std::size_t hessian_row = 0;
  std::size_t hessian_col = 0;
  double hessian_tolerance = 0.0;
  double value_step = 0.0;
  double gradient_step = 0.0;
};

// Central finite differences of the value against the analytic gradient and
// of the gradient against the analytic Hessian.  Throws DerivativeMismatch
// when a deviation exceeds its tolerance.
DerivativeReport check_derivatives(const LossOracle& oracle, int t, const Vector& x);

// Basin-radius policy: the cap applied on top of the sampling radius when
// deriving gamma.  full_basin keeps the Lemma 2 radius min{beta, 2h/3L};
// half_basin caps at h/3L, which leaves slack h/6L for per-round motion.
enum class GammaPolicy { full_basin, half_basin };

struct ConstantsMeta {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  std::size_t sampled_rounds = 0;
  double sample_radius = 0.0;
  GammaPolicy policy = GammaPolicy::full_basin;
};

struct RegularityConstants {
  double h = 0.0;      // lower bound on smallest Hessian singular value at optima
  double L = 0.0;      // Hessian Lipschitz modulus within beta of each optimum
  double beta = 0.0;   // radius on which L was measured (after any policy cap)
  double ell = 0.0;    // value Lipschitz modulus within gamma of each optimum
  double gamma = 0.0;  // min{beta, 2h/(3L)}
  double v_bar = 0.0;  // max per-round optimum motion
  double V_bar = 0.0;  // total variation of the optima sequence
  ConstantsMeta meta;

  static RegularityConstants make(double h, double L, double beta, double ell,
                                  double v_bar, double V_bar, ConstantsMeta meta = {});

  // 3L/(2h): the quadratic-map coefficient; 0 when L = 0.
  double contraction_coefficient() const { return L > 0.0 ? 3.0 * L / (2.0 * h) : 0.0; }
  // 2h/(3L), infinite when L = 0.
  double basin_cap() const {
    return L > 0.0 ? 2.0 * h / (3.0 * L) : std::numeric_limits<double>::infinity();
  }
  // gamma - (3L/2h) gamma^2: the motion budget of the basin-retention lemma.
  double motion_budget() const { return gamma - contraction_coefficient() * gamma * gamma; }
};

// Sample-based estimation of (h, L, ell) around the given per-round optima,
// plus v_bar/V_bar from the optima sequence.  beta = min(radius, policy cap).
// Deterministic for a fixed seed; enlarging `samples` never decreases L or
// ell because draws are keyed per round and consumed in sample-major order.
// `round_stride` > 1 restricts L/ell sampling to every stride-th round (plus
// the last); h, v_bar and V_bar always use every round.
RegularityConstants estimate_constants(const LossOracle& oracle, const std::vector<Vector>& optima,
                                       double radius, std::size_t samples,
                                       std::uint64_t seed = 0,
                                       GammaPolicy policy = GammaPolicy::full_basin,
                                       std::size_t round_stride = 1);

struct Box {
  Vector lower;
  Vector upper;
};

enum class OptimumMode { minimize, stationary };

// Grid scan over the box followed by Newton polish to ||grad|| <= 1e-12 (at
// most 50 steps).  In stationary mode the grid filter is skipped and the
// polish starts from *seed.  Returns a point with ||grad|| <= 1e-10 or throws.
Vector brute_force_optimum(const LossOracle& oracle, int t, const Box& box, std::size_t grid,
                           OptimumMode mode = OptimumMode::minimize,
                           const Vector* seed = nullptr);

}  // namespace onm::oracles
