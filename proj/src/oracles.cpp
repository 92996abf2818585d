#include "onm/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "onm/rng.hpp"

namespace onm::oracles {

namespace {

void require_round(int t, int rounds) {
  if (t < 0 || t >= rounds) {
    throw std::invalid_argument("round index " + std::to_string(t) + " outside [0, " +
                                std::to_string(rounds) + ")");
  }
}

}  // namespace

double localization_value(const Vector& x, const SensorArray& sensors,
                          const std::vector<double>& measured) {
  if (measured.size() != sensors.count()) {
    throw std::invalid_argument("measurement count does not match sensor count");
  }
  const std::size_t n = x.size();
  double total = 0.0;
  for (std::size_t i = 0; i < sensors.count(); ++i) {
    const Vector& a = sensors.positions[i];
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = x[k] - a[k];
      s += d * d;
    }
    const double r = std::sqrt(s);
    if (r <= 1e-9) {
      throw SensorCoincidence("evaluation point within 1e-9 of sensor " + std::to_string(i), i);
    }
    const double resid = r - measured[i];
    total += resid * resid;
  }
  return total;
}

Evaluation localization_loss(const Vector& x, const SensorArray& sensors,
                             const std::vector<double>& measured) {
  if (measured.size() != sensors.count()) {
    throw std::invalid_argument("measurement count does not match sensor count");
  }
  const std::size_t n = x.size();
  Evaluation out;
  out.gradient = Vector(n);
  out.hessian = SymMatrix(n);
  Vector u(n);
  for (std::size_t i = 0; i < sensors.count(); ++i) {
    const Vector& a = sensors.positions[i];
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = x[k] - a[k];
      s += d * d;
    }
    const double r = std::sqrt(s);
    if (r <= 1e-9) {
      throw SensorCoincidence("evaluation point within 1e-9 of sensor " + std::to_string(i), i);
    }
    const double resid = r - measured[i];
    out.value += resid * resid;
    for (std::size_t k = 0; k < n; ++k) u[k] = (x[k] - a[k]) / r;
    for (std::size_t k = 0; k < n; ++k) out.gradient[k] += 2.0 * resid * u[k];
    const double ratio = measured[i] / r;
    out.hessian.add_scaled_identity(2.0 * (1.0 - ratio));
    out.hessian.add_outer(u, 2.0 * ratio);
  }
  return out;
}

Evaluation quadratic_loss(const Vector& x, const SymMatrix& a, const Vector& b) {
  if (a.size() != x.size() || b.size() != x.size()) {
    throw std::invalid_argument("quadratic loss dimension mismatch");
  }
  Evaluation out;
  const Vector ax = a.matvec(x);
  out.value = 0.5 * dot(x, ax) - dot(b, x);
  out.gradient = ax - b;
  out.hessian = a;
  return out;
}

QuadraticOracle::QuadraticOracle(SymMatrix a, Vector b, int rounds)
    : a_(std::move(a)), b_(std::move(b)), rounds_(rounds) {
  if (a_.size() != b_.size()) throw std::invalid_argument("quadratic oracle dimension mismatch");
  if (rounds_ < 1) throw std::invalid_argument("round count must be positive");
}

double QuadraticOracle::value(int t, const Vector& x) const {
  require_round(t, rounds_);
  return quadratic_loss(x, a_, b_).value;
}

Vector QuadraticOracle::gradient(int t, const Vector& x) const {
  require_round(t, rounds_);
  return a_.matvec(x) - b_;
}

SymMatrix QuadraticOracle::hessian(int t, const Vector& x) const {
  require_round(t, rounds_);
  (void)x;
  return a_;
}

LocalizationOracle::LocalizationOracle(SensorArray sensors,
                                       std::vector<std::vector<double>> measurements)
    : sensors_(std::move(sensors)), measurements_(std::move(measurements)) {
  if (measurements_.empty()) throw std::invalid_argument("need at least one measurement round");
  const std::size_t dim = sensors_.positions.front().size();
  for (const auto& a : sensors_.positions) {
    if (a.size() != dim) throw std::invalid_argument("sensors must share one dimension");
  }
  for (const auto& row : measurements_) {
    if (row.size() != sensors_.count()) {
      throw std::invalid_argument("each measurement round needs one range per sensor");
    }
  }
}

const std::vector<double>& LocalizationOracle::row(int t) const {
  require_round(t, rounds());
  return measurements_[static_cast<std::size_t>(t)];
}

double LocalizationOracle::value(int t, const Vector& x) const {
  return localization_value(x, sensors_, row(t));
}

Vector LocalizationOracle::gradient(int t, const Vector& x) const {
  return localization_loss(x, sensors_, row(t)).gradient;
}

SymMatrix LocalizationOracle::hessian(int t, const Vector& x) const {
  return localization_loss(x, sensors_, row(t)).hessian;
}

Evaluation LocalizationOracle::evaluate(int t, const Vector& x) const {
  return localization_loss(x, sensors_, row(t));
}

SeparablePolyOracle::SeparablePolyOracle(std::vector<Vector> centers, Vector a, Vector b, Vector c)
    : centers_(std::move(centers)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (centers_.empty()) throw std::invalid_argument("need at least one center");
  const std::size_t n = a_.size();
  if (b_.size() != n || c_.size() != n) {
    throw std::invalid_argument("coefficient vectors must share one dimension");
  }
  for (const auto& z : centers_) {
    if (z.size() != n) throw std::invalid_argument("centers must match coefficient dimension");
  }
}

double SeparablePolyOracle::value(int t, const Vector& x) const {
  require_round(t, rounds());
  const Vector& z = centers_[static_cast<std::size_t>(t)];
  double total = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i) {
    const double s = x[i] - z[i];
    const double s2 = s * s;
    total += 0.5 * a_[i] * s2 + b_[i] * s2 * s / 6.0 + c_[i] * s2 * s2 / 12.0;
  }
  return total;
}

Vector SeparablePolyOracle::gradient(int t, const Vector& x) const {
  require_round(t, rounds());
  const Vector& z = centers_[static_cast<std::size_t>(t)];
  Vector g(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) {
    const double s = x[i] - z[i];
    g[i] = a_[i] * s + 0.5 * b_[i] * s * s + c_[i] * s * s * s / 3.0;
  }
  return g;
}

SymMatrix SeparablePolyOracle::hessian(int t, const Vector& x) const {
  require_round(t, rounds());
  const Vector& z = centers_[static_cast<std::size_t>(t)];
  SymMatrix h(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) {
    const double s = x[i] - z[i];
    h.set(i, i, a_[i] + b_[i] * s + c_[i] * s * s);
  }
  return h;
}

double SeparablePolyOracle::curvature_floor() const {
  double floor = std::numeric_limits<double>::infinity();
  for (double ai : a_) floor = std::min(floor, std::abs(ai));
  return floor;
}

double SeparablePolyOracle::hessian_variation(double radius) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i) {
    worst = std::max(worst, std::abs(b_[i]) + std::abs(c_[i]) * radius);
  }
  return worst;
}

double SeparablePolyOracle::value_slope(double radius) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i) {
    const double gi = std::abs(a_[i]) * radius + 0.5 * std::abs(b_[i]) * radius * radius +
                      std::abs(c_[i]) * radius * radius * radius / 3.0;
    sum += gi * gi;
  }
  return std::sqrt(sum);
}

DerivativeReport check_derivatives(const LossOracle& oracle, int t, const Vector& x) {
  const std::size_t n = oracle.dimension();
  if (x.size() != n) throw std::invalid_argument("point dimension mismatch");

  DerivativeReport report;
  report.value_step = 1e-6;
  report.gradient_step = 1e-5;

  const Vector g = oracle.gradient(t, x);
  const SymMatrix h = oracle.hessian(t, x);
  report.gradient_tolerance = std::max(1e-6, 1e-6 * norm(g));
  report.hessian_tolerance = std::max(1e-4, 1e-4 * operator_norm(h));

  Vector p = x;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = x[i] + report.value_step;
    const double fp = oracle.value(t, p);
    p[i] = x[i] - report.value_step;
    const double fm = oracle.value(t, p);
    p[i] = x[i];
    const double fd = (fp - fm) / (2.0 * report.value_step);
    const double dev = std::abs(fd - g[i]);
    if (dev > report.gradient_deviation) {
      report.gradient_deviation = dev;
      report.gradient_index = i;
    }
  }
  if (report.gradient_deviation > report.gradient_tolerance) {
    throw DerivativeMismatch(
        "finite differences disagree with gradient[" + std::to_string(report.gradient_index) +
            "] by " + std::to_string(report.gradient_deviation),
        "gradient[" + std::to_string(report.gradient_index) + "]", report.gradient_deviation);
  }

  for (std::size_t j = 0; j < n; ++j) {
    p[j] = x[j] + report.gradient_step;
    const Vector gp = oracle.gradient(t, p);
    p[j] = x[j] - report.gradient_step;
    const Vector gm = oracle.gradient(t, p);
    p[j] = x[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double fd = (gp[i] - gm[i]) / (2.0 * report.gradient_step);
      const double dev = std::abs(fd - h(i, j));
      if (dev > report.hessian_deviation) {
        report.hessian_deviation = dev;
        report.hessian_row = i;
        report.hessian_col = j;
      }
    }
  }
  if (report.hessian_deviation > report.hessian_tolerance) {
    throw DerivativeMismatch(
        "finite differences disagree with hessian(" + std::to_string(report.hessian_row) + "," +
            std::to_string(report.hessian_col) + ") by " + std::to_string(report.hessian_deviation),
        "hessian(" + std::to_string(report.hessian_row) + "," +
            std::to_string(report.hessian_col) + ")",
        report.hessian_deviation);
  }
  return report;
}

RegularityConstants RegularityConstants::make(double h, double L, double beta, double ell,
                                              double v_bar, double V_bar, ConstantsMeta meta) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be positive");
  if (!(L >= 0.0) || !std::isfinite(L)) throw std::invalid_argument("L must be nonnegative");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  if (!(ell > 0.0) || !std::isfinite(ell)) throw std::invalid_argument("ell must be positive");
  if (!(v_bar >= 0.0) || !(V_bar >= 0.0)) throw std::invalid_argument("variation must be nonnegative");
  RegularityConstants k;
  k.h = h;
  k.L = L;
  k.beta = beta;
  k.ell = ell;
  k.v_bar = v_bar;
  k.V_bar = V_bar;
  k.meta = meta;
  k.gamma = std::min(beta, k.basin_cap());
  return k;
}

RegularityConstants estimate_constants(const LossOracle& oracle, const std::vector<Vector>& optima,
                                       double radius, std::size_t samples, std::uint64_t seed,
                                       GammaPolicy policy, std::size_t round_stride) {
  if (optima.empty()) throw std::invalid_argument("need at least one optimum");
  if (optima.size() > static_cast<std::size_t>(oracle.rounds())) {
    throw std::invalid_argument("more optima than oracle rounds");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("radius must be positive");
  if (samples < 100) throw std::invalid_argument("need at least 100 samples");
  if (round_stride == 0) throw std::invalid_argument("round stride must be positive");

  const std::size_t n = oracle.dimension();
  const std::size_t rounds = optima.size();

  double h = std::numeric_limits<double>::infinity();
  std::vector<SymMatrix> hess_star(rounds);
  std::vector<double> value_star(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    const int ti = static_cast<int>(t);
    if (optima[t].size() != n) throw std::invalid_argument("optimum dimension mismatch");
    if (norm(oracle.gradient(ti, optima[t])) > 1e-8) {
      throw std::invalid_argument("optima[" + std::to_string(t) + "] is not stationary");
    }
    hess_star[t] = oracle.hessian(ti, optima[t]);
    value_star[t] = oracle.value(ti, optima[t]);
    const double smin = linalg::min_singular_value(hess_star[t]);
    if (smin <= 1e-10) {
      throw DegenerateOptimum("Hessian at optimum " + std::to_string(t) +
                                  " has smallest singular value " + std::to_string(smin),
                              ti, smin);
    }
    h = std::min(h, smin);
  }

  double v_bar = 0.0;
  double V_bar = 0.0;
  for (std::size_t t = 1; t < rounds; ++t) {
    const double step = distance(optima[t - 1], optima[t]);
    v_bar = std::max(v_bar, step);
    V_bar += step;
  }

  std::vector<std::size_t> sampled;
  for (std::size_t t = 0; t < rounds; t += round_stride) sampled.push_back(t);
  if (sampled.back() != rounds - 1) sampled.push_back(rounds - 1);

  std::vector<rng::Stream> curvature_streams;
  std::vector<rng::Stream> value_streams;
  curvature_streams.reserve(sampled.size());
  value_streams.reserve(sampled.size());
  for (std::size_t t : sampled) {
    curvature_streams.emplace_back(seed, t, rng::Purpose::constants_curvature);
    value_streams.emplace_back(seed, t, rng::Purpose::constants_value);
  }

  const auto cap = [&](double modulus) {
    if (modulus <= 0.0) return std::numeric_limits<double>::infinity();
    return policy == GammaPolicy::half_basin ? h / (3.0 * modulus) : 2.0 * h / (3.0 * modulus);
  };

  double L = 0.0;
  double ell = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t s = 0; s < sampled.size(); ++s) {
      const std::size_t t = sampled[s];
      const Vector dir(curvature_streams[s].next_unit_vector(n));
      const double dist = curvature_streams[s].next_open_unit() * radius;
      const Vector x = optima[t] + dist * dir;
      const double variation =
          linalg::operator_norm(oracle.hessian(static_cast<int>(t), x) - hess_star[t]);
      L = std::max(L, variation / dist);
    }
    const double ell_radius = std::min(radius, cap(L));
    for (std::size_t s = 0; s < sampled.size(); ++s) {
      const std::size_t t = sampled[s];
      const Vector dir(value_streams[s].next_unit_vector(n));
      const double dist = value_streams[s].next_open_unit() * ell_radius;
      const Vector x = optima[t] + dist * dir;
      const double gap = std::abs(oracle.value(static_cast<int>(t), x) - value_star[t]);
      ell = std::max(ell, gap / dist);
    }
  }

  ConstantsMeta meta;
  meta.samples = samples;
  meta.seed = seed;
  meta.rounds = rounds;
  meta.sampled_rounds = sampled.size();
  meta.sample_radius = radius;
  meta.policy = policy;
  const double beta = std::min(radius, cap(L));
  return RegularityConstants::make(h, L, beta, ell, v_bar, V_bar, meta);
}

Vector brute_force_optimum(const LossOracle& oracle, int t, const Box& box, std::size_t grid,
                           OptimumMode mode, const Vector* seed) {
  const std::size_t n = oracle.dimension();
  if (box.lower.size() != n || box.upper.size() != n) {
    throw std::invalid_argument("box dimension mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(box.lower[k] < box.upper[k])) throw std::invalid_argument("box must have positive extent");
  }

  Vector start(n);
  double grid_best = std::numeric_limits<double>::infinity();
  if (mode == OptimumMode::stationary) {
    if (seed == nullptr) throw std::invalid_argument("stationary mode needs a seed point");
    start = *seed;
  } else {
    if (grid < 50) throw std::invalid_argument("grid must be at least 50 per axis");
    if (n > 3) throw std::invalid_argument("grid scan supports dimension <= 3");
    std::vector<std::size_t> idx(n, 0);
    std::vector<std::size_t> best_idx(n, 0);
    Vector p(n);
    while (true) {
      for (std::size_t k = 0; k < n; ++k) {
        p[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * static_cast<double>(idx[k]) /
                                  static_cast<double>(grid - 1);
      }
      const double val = oracle.value(t, p);
      if (val < grid_best) {
        grid_best = val;
        best_idx = idx;
        start = p;
      }
      std::size_t k = 0;
      while (k < n && ++idx[k] == grid) {
        idx[k] = 0;
        ++k;
      }
      if (k == n) break;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (best_idx[k] == 0 || best_idx[k] == grid - 1) {
        throw NoInteriorMinimum("best grid value sits on the box boundary (axis " +
                                std::to_string(k) + ")");
      }
    }
  }

  Vector x = start;
  Vector g = oracle.gradient(t, x);
  for (int step = 0; step < 50 && norm(g) > 1e-12; ++step) {
    x = x - linalg::solve_symmetric(oracle.hessian(t, x), g);
    g = oracle.gradient(t, x);
  }
  if (norm(g) > 1e-10) {
    throw NoConvergence("Newton polish stalled with gradient norm " + std::to_string(norm(g)));
  }
  if (mode == OptimumMode::minimize && oracle.value(t, x) > grid_best + 1e-6) {
    throw NoConvergence("Newton polish walked away from the grid minimum");
  }
  return x;
}

}  // namespace onm::oracles
