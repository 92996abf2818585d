#include "onm/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "onm/algorithms.hpp"
#include "onm/linalg.hpp"
#include "onm/oracles.hpp"
#include "onm/rng.hpp"

namespace onm::verify {

using linalg::SymMatrix;
using linalg::Vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void record(PropertyResult& p, double margin) {
  ++p.cases;
  p.worst_margin = std::min(p.worst_margin, margin);
  if (margin < 0.0) {
    ++p.violations;
    p.pass = false;
  }
}

PropertyResult make_property(const std::string& name) {
  PropertyResult p;
  p.name = name;
  p.worst_margin = kInf;
  return p;
}

void finish(SuiteReport& report, const Timer& timer) {
  report.pass = true;
  for (auto& p : report.properties) {
    if (p.cases == 0 && p.violations == 0) p.worst_margin = 0.0;
    report.pass = report.pass && p.pass;
  }
  report.elapsed_seconds = timer.seconds();
}

std::string format_margin(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

Vector random_unit(rng::Stream& stream, std::size_t n) {
  return Vector(stream.next_unit_vector(n));
}

double uniform(rng::Stream& stream, double lo, double hi) {
  return lo + (hi - lo) * stream.next_unit();
}

double log_uniform(rng::Stream& stream, double lo, double hi) {
  return lo * std::exp(stream.next_unit() * std::log(hi / lo));
}

struct PlantedMatrix {
  SymMatrix m;
  double smin = 0.0;       // exact smallest eigenvalue magnitude
  Vector min_direction;    // its planted eigenvector
};

// Q diag(spectrum) Q^T with the smallest-magnitude eigenvalue well separated
// from the rest, so the minimal direction is unambiguous.
PlantedMatrix planted_matrix(rng::Stream& stream, std::size_t n) {
  const double scale = std::pow(10.0, uniform(stream, -1.0, 1.0));
  std::vector<double> spectrum(n);
  spectrum[0] = 0.1 * scale;
  for (std::size_t i = 1; i < n; ++i) spectrum[i] = log_uniform(stream, 0.6, 10.0) * scale;
  for (auto& lambda : spectrum) {
    if (stream.next_coin()) lambda = -lambda;
  }

  std::vector<double> q(n * n);
  for (auto& x : q) x = stream.next_gaussian();
  for (std::size_t c = 0; c < n; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        double proj = 0.0;
        for (std::size_t r = 0; r < n; ++r) proj += q[r * n + c] * q[r * n + prev];
        for (std::size_t r = 0; r < n; ++r) q[r * n + c] -= proj * q[r * n + prev];
      }
    }
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += q[r * n + c] * q[r * n + c];
    s = std::sqrt(s);
    for (std::size_t r = 0; r < n; ++r) q[r * n + c] /= s;
  }

  PlantedMatrix out;
  out.m = SymMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q[i * n + k] * spectrum[k] * q[j * n + k];
      out.m.set(i, j, s);
    }
  }
  out.smin = std::abs(spectrum[0]);
  std::vector<double> v(n);
  for (std::size_t r = 0; r < n; ++r) v[r] = q[r * n + 0];
  out.min_direction = Vector(std::move(v));
  return out;
}

struct LocalizationInstance {
  oracles::SensorArray sensors{{Vector{0.0, 0.0}}};
  Vector target;
};

std::vector<double> exact_ranges(const oracles::SensorArray& sensors, const Vector& x) {
  std::vector<double> d;
  d.reserve(sensors.count());
  for (const auto& a : sensors.positions) d.push_back(linalg::distance(a, x));
  return d;
}

// Random sensors with the target kept clear of all of them, so the loss is
// smooth and strongly curved on the sampling ball around the optimum.
LocalizationInstance random_localization(rng::Stream& stream, double min_distance) {
  while (true) {
    const std::size_t count = 3 + stream.next_u64() % 3;
    std::vector<Vector> positions;
    positions.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      positions.push_back(Vector{uniform(stream, -1.0, 1.0), uniform(stream, -1.0, 1.0)});
    }
    const Vector target{uniform(stream, -1.5, 1.5), uniform(stream, -1.5, 1.5)};
    bool clear = true;
    for (const auto& a : positions) {
      if (linalg::distance(a, target) < min_distance) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    LocalizationInstance inst{oracles::SensorArray(std::move(positions)), target};
    const auto eval = oracles::localization_loss(
        inst.target, inst.sensors, exact_ranges(inst.sensors, inst.target));
    if (linalg::min_singular_value(eval.hessian) < 0.1) continue;
    return inst;
  }
}

struct PolyInstance {
  Vector a, b, c;
  double h = 0.0;
  double L = 0.0;  // valid Hessian modulus on the unit ball around any center
};

PolyInstance random_poly(rng::Stream& stream, std::size_t n) {
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = uniform(stream, 0.5, 3.0);
    b[i] = uniform(stream, -2.0, 2.0);
    c[i] = uniform(stream, 0.1, 2.0);
  }
  PolyInstance inst{Vector(std::move(a)), Vector(std::move(b)), Vector(std::move(c)), 0.0, 0.0};
  oracles::SeparablePolyOracle probe({Vector(std::vector<double>(n, 0.0))}, inst.a, inst.b,
                                     inst.c);
  inst.h = probe.curvature_floor();
  // Two points in a radius-r ball can be 2r apart, hence the doubled radius.
  inst.L = probe.hessian_variation(2.0);
  return inst;
}

oracles::RegularityConstants poly_constants(const PolyInstance& inst,
                                            oracles::GammaPolicy policy) {
  double beta = 1.0;
  if (policy == oracles::GammaPolicy::half_basin && inst.L > 0.0) {
    beta = std::min(beta, inst.h / (3.0 * inst.L));
  }
  oracles::SeparablePolyOracle probe({Vector(std::vector<double>(inst.a.size(), 0.0))}, inst.a,
                                     inst.b, inst.c);
  oracles::ConstantsMeta meta;
  meta.sample_radius = 1.0;
  meta.policy = policy;
  return oracles::RegularityConstants::make(inst.h, inst.L, beta, probe.value_slope(1.0), 0.0,
                                            0.0, meta);
}

}  // namespace

SuiteReport run_lemma1(std::uint64_t seed) {
  const Timer timer;
  SuiteReport report;
  report.suite = "lemma1";
  auto inverse_norm = make_property("inverse_norm_reciprocal");
  auto gain_bound = make_property("gain_lower_bound");
  auto gain_sharp = make_property("gain_attained_at_min_direction");

  rng::Stream stream(seed, 0, rng::Purpose::instances);
  const int matrices = 120;
  for (int k = 0; k < matrices; ++k) {
    const std::size_t n = 2 + stream.next_u64() % 5;
    const PlantedMatrix planted = planted_matrix(stream, n);
    const double h = planted.smin;

    // ||M^-1|| via power iteration through the solver, seeded at the known
    // minimal direction.
    Vector y = planted.min_direction;
    for (int it = 0; it < 30; ++it) {
      y = linalg::solve_symmetric(planted.m, y);
      const double s = linalg::norm(y);
      y = (1.0 / s) * y;
    }
    const double inverse_norm_est = linalg::norm(linalg::solve_symmetric(planted.m, y));
    record(inverse_norm, 1e-7 - std::abs(inverse_norm_est * h - 1.0));

    double min_gain = kInf;
    for (int d = 0; d < 200; ++d) {
      const Vector v = random_unit(stream, n);
      min_gain = std::min(min_gain, linalg::norm(planted.m.matvec(v)));
    }
    record(gain_bound, min_gain / h - (1.0 - 1e-9));

    const double gain_at_min = linalg::norm(planted.m.matvec(planted.min_direction));
    record(gain_sharp, (1.0 + 1e-6) - gain_at_min / h);
  }

  report.properties = {inverse_norm, gain_bound, gain_sharp};
  finish(report, timer);
  return report;
}

SuiteReport run_lemma2(std::uint64_t seed, std::size_t cases) {
  const Timer timer;
  SuiteReport report;
  report.suite = "lemma2";
  auto strict = make_property("strict_contraction");
  auto quadratic = make_property("quadratic_bound");

  rng::Stream stream(seed, 1, rng::Purpose::instances);
  const std::size_t analytic_target = cases / 2;
  const std::size_t estimated_target = cases - analytic_target;

  // Every 40th instance deliberately starts outside the basin and must be
  // gated out as skipped, never checked.
  const auto run_case = [&](const oracles::LossOracle& oracle, const Vector& optimum,
                            const oracles::RegularityConstants& k, double e_lo_frac,
                            double e_hi_frac, bool outside) {
    const double gamma = k.gamma;
    const double e0 = outside ? gamma * uniform(stream, 1.05, 1.5)
                              : gamma * log_uniform(stream, e_lo_frac, e_hi_frac);
    if (e0 > gamma) {
      ++strict.skipped;
      ++quadratic.skipped;
      return;
    }
    const Vector x0 = optimum + e0 * random_unit(stream, oracle.dimension());
    const auto next = algorithms::onm_step(oracle, {x0, 0});
    const double e1 = linalg::distance(next.x, optimum);
    record(strict, e0 + 1e-9 - e1);
    record(quadratic, k.contraction_coefficient() * e0 * e0 + 1e-9 - e1);
  };

  std::size_t produced = 0;
  std::size_t iteration = 0;
  while (produced < analytic_target) {
    const bool outside = iteration++ % 40 == 39;
    const std::size_t n = 1 + stream.next_u64() % 4;
    const PolyInstance inst = random_poly(stream, n);
    const auto k = poly_constants(inst, oracles::GammaPolicy::full_basin);
    std::vector<double> center(n);
    for (auto& z : center) z = uniform(stream, -2.0, 2.0);
    oracles::SeparablePolyOracle oracle({Vector(center)}, inst.a, inst.b, inst.c);
    run_case(oracle, Vector(center), k, 1e-4, 1.0 - 1e-3, outside);
    if (!outside) ++produced;
  }

  produced = 0;
  iteration = 0;
  while (produced < estimated_target) {
    const bool outside = iteration++ % 40 == 39;
    const LocalizationInstance inst = random_localization(stream, 0.45);
    const std::vector<double> measured = exact_ranges(inst.sensors, inst.target);
    oracles::LocalizationOracle oracle(inst.sensors, {measured});
    const auto k = oracles::estimate_constants(oracle, {inst.target}, 0.15, 128,
                                               stream.next_u64(),
                                               oracles::GammaPolicy::full_basin);
    run_case(oracle, inst.target, k, 1e-3, 0.8, outside);
    if (!outside) ++produced;
  }

  report.properties = {strict, quadratic};
  finish(report, timer);
  return report;
}

SuiteReport run_lemma3(std::uint64_t seed, std::size_t cases, int rounds) {
  const Timer timer;
  SuiteReport report;
  report.suite = "lemma3";
  auto retention = make_property("error_stays_inside_basin");
  // worst_margin is the smallest (gamma - e_t)/gamma over all rounds.

  rng::Stream stream(seed, 2, rng::Purpose::instances);
  const std::size_t analytic_target = cases - cases * 3 / 8;

  const auto track = [&](const oracles::LossOracle& oracle, const std::vector<Vector>& optima,
                         const oracles::RegularityConstants& k) {
    const double gamma = k.gamma;
    const double e0 = 0.9 * gamma * uniform(stream, 0.05, 1.0);
    Vector x = optima.front() + e0 * random_unit(stream, oracle.dimension());
    double worst = (gamma - linalg::distance(x, optima.front())) / gamma;
    algorithms::OnmState state{x, 0};
    for (int t = 0; t + 1 < static_cast<int>(optima.size()); ++t) {
      state = algorithms::onm_step(oracle, state);
      const double e = linalg::distance(state.x, optima[static_cast<std::size_t>(t) + 1]);
      worst = std::min(worst, (gamma - e) / gamma);
    }
    record(retention, worst);
  };

  for (std::size_t produced = 0; produced < analytic_target; ++produced) {
    const std::size_t n = 1 + stream.next_u64() % 3;
    const PolyInstance inst = random_poly(stream, n);
    const auto k = poly_constants(inst, oracles::GammaPolicy::half_basin);
    const double budget = k.motion_budget();
    std::vector<Vector> centers;
    centers.reserve(static_cast<std::size_t>(rounds) + 1);
    std::vector<double> z0(n);
    for (auto& z : z0) z = uniform(stream, -2.0, 2.0);
    centers.push_back(Vector(std::move(z0)));
    for (int t = 0; t < rounds; ++t) {
      const double step = 0.95 * budget * uniform(stream, 0.2, 1.0);
      centers.push_back(centers.back() + step * random_unit(stream, n));
    }
    oracles::SeparablePolyOracle oracle(centers, inst.a, inst.b, inst.c);
    track(oracle, centers, k);
  }

  while (retention.cases < cases) {
    const LocalizationInstance inst = random_localization(stream, 0.7);
    const std::vector<double> pilot_ranges = exact_ranges(inst.sensors, inst.target);
    oracles::LocalizationOracle pilot(inst.sensors, {pilot_ranges});
    const auto k = oracles::estimate_constants(pilot, {inst.target}, 0.3, 128, stream.next_u64(),
                                               oracles::GammaPolicy::half_basin);
    const double budget = k.motion_budget();
    const double wander_radius = 0.15;
    std::vector<Vector> path{inst.target};
    for (int t = 0; t < rounds; ++t) {
      const double step = 0.95 * budget * uniform(stream, 0.2, 1.0);
      Vector proposed = path.back() + step * random_unit(stream, 2);
      const double off_center = linalg::distance(proposed, inst.target);
      if (off_center > wander_radius) {
        // Project back onto the wander ball; projection never lengthens the move.
        proposed = inst.target + (wander_radius / off_center) * (proposed - inst.target);
      }
      path.push_back(proposed);
    }
    std::vector<std::vector<double>> measurements;
    measurements.reserve(path.size());
    for (const auto& z : path) measurements.push_back(exact_ranges(inst.sensors, z));
    oracles::LocalizationOracle oracle(inst.sensors, std::move(measurements));
    track(oracle, path, k);
  }

  report.properties = {retention};
  finish(report, timer);
  return report;
}

SuiteReport run_lemma4() {
  const Timer timer;
  SuiteReport report;
  report.suite = "lemma4";
  auto residual = make_property("fixed_point_residual");
  auto from_below = make_property("nondecreasing_from_below");
  auto from_inside = make_property("nonincreasing_from_inside");
  auto rejects = make_property("rejects_complex_fixed_points");

  std::ostringstream detail;
  const double ratios[] = {0.1, 0.5, 0.9, 0.99};
  const double cs[] = {0.5, 1.0, 2.0, 5.0};

  const auto converge_check = [](PropertyResult& p, const algorithms::QuadraticMapParams& params,
                                 double x0, bool expect_nondecreasing,
                                 std::size_t& iterations_out) {
    double x = x0;
    bool monotone = true;
    std::size_t steps = 0;
    while (std::abs(x - params.x_lower) > 1e-12 && steps < 100000) {
      const double next = params.c * x * x + params.v;
      if (expect_nondecreasing ? (next < x - 1e-15) : (next > x + 1e-15)) monotone = false;
      x = next;
      ++steps;
    }
    iterations_out = steps;
    const auto limit = algorithms::quadratic_map_converge(params, x0);
    double margin = 1e-8 - std::abs(limit.value - params.x_lower);
    if (!monotone || !limit.converged || limit.iterations > 10000) margin = -1.0;
    record(p, margin);
  };

  for (const double ratio : ratios) {
    for (const double c : cs) {
      const double v = ratio / (4.0 * c);
      const auto params = algorithms::QuadraticMapParams::make(c, v);
      record(residual,
             1e-12 - std::abs(c * params.x_lower * params.x_lower + v - params.x_lower));
      record(residual,
             1e-12 - std::abs(c * params.x_upper * params.x_upper + v - params.x_upper));

      std::size_t max_iterations = 0;
      for (int i = 0; i < 10; ++i) {
        const double frac = static_cast<double>(i) / 9.0;
        std::size_t iterations = 0;
        converge_check(from_below, params, frac * params.x_lower, true, iterations);
        max_iterations = std::max(max_iterations, iterations);
      }
      const double span = params.x_upper - params.x_lower;
      const double fracs[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85, 0.999};
      for (const double frac : fracs) {
        std::size_t iterations = 0;
        converge_check(from_inside, params, params.x_lower + frac * span, false, iterations);
        max_iterations = std::max(max_iterations, iterations);
      }
      detail << "c=" << c << " v=" << v << ": x_lower=" << params.x_lower
             << " x_upper=" << params.x_upper << " max_iterations=" << max_iterations << "\n";
    }
  }

  try {
    algorithms::quadratic_map_fixed_points(1.0, 0.26);
    record(rejects, -1.0);
  } catch (const algorithms::NoRealFixedPoint&) {
    record(rejects, 0.0);
  }

  report.properties = {residual, from_below, from_inside, rejects};
  report.properties[1].detail = detail.str();
  finish(report, timer);
  return report;
}

namespace {

// Negative control: a constant offset on the reported gradient breaks the
// value/gradient consistency while leaving the gradient/Hessian pair intact,
// so only the gradient check may fire.
class SkewedGradientOracle : public oracles::LossOracle {
 public:
  SkewedGradientOracle(SymMatrix a, Vector b) : inner_(std::move(a), std::move(b)) {}
  std::size_t dimension() const override { return inner_.dimension(); }
  int rounds() const override { return 1; }
  double value(int t, const Vector& x) const override { return inner_.value(t, x); }
  Vector gradient(int t, const Vector& x) const override {
    Vector g = inner_.gradient(t, x);
    g[0] += 0.01;
    return g;
  }
  SymMatrix hessian(int t, const Vector& x) const override { return inner_.hessian(t, x); }

 private:
  oracles::QuadraticOracle inner_;
};

}  // namespace

SuiteReport run_derivatives(std::uint64_t seed, std::size_t points) {
  const Timer timer;
  SuiteReport report;
  report.suite = "derivatives";
  auto gradient = make_property("gradient_matches_value");
  auto hessian = make_property("hessian_matches_gradient");
  auto control = make_property("detects_wrong_gradient");

  rng::Stream stream(seed, 3, rng::Purpose::instances);

  const auto check = [&](const oracles::LossOracle& oracle, const Vector& x) {
    try {
      const auto r = oracles::check_derivatives(oracle, 0, x);
      record(gradient, (r.gradient_tolerance - r.gradient_deviation) / r.gradient_tolerance);
      record(hessian, (r.hessian_tolerance - r.hessian_deviation) / r.hessian_tolerance);
    } catch (const oracles::DerivativeMismatch&) {
      record(gradient, -1.0);
      record(hessian, -1.0);
    }
  };

  for (std::size_t p = 0; p < points; ++p) {
    switch (p % 3) {
      case 0: {
        const std::size_t n = 1 + stream.next_u64() % 5;
        const PlantedMatrix planted = planted_matrix(stream, n);
        std::vector<double> b(n), x(n);
        for (auto& e : b) e = stream.next_gaussian();
        for (auto& e : x) e = 2.0 * stream.next_gaussian();
        oracles::QuadraticOracle oracle(planted.m, Vector(std::move(b)));
        check(oracle, Vector(std::move(x)));
        break;
      }
      case 1: {
        const LocalizationInstance inst = random_localization(stream, 0.45);
        std::vector<double> measured;
        for (std::size_t i = 0; i < inst.sensors.count(); ++i) {
          measured.push_back(uniform(stream, 0.2, 2.0));
        }
        oracles::LocalizationOracle oracle(inst.sensors, {measured});
        Vector x = inst.target + 0.2 * random_unit(stream, 2);
        check(oracle, x);
        break;
      }
      default: {
        const std::size_t n = 1 + stream.next_u64() % 4;
        const PolyInstance inst = random_poly(stream, n);
        std::vector<double> center(n);
        for (auto& z : center) z = uniform(stream, -2.0, 2.0);
        oracles::SeparablePolyOracle oracle({Vector(center)}, inst.a, inst.b, inst.c);
        const Vector x =
            Vector(center) + uniform(stream, 0.0, 1.0) * random_unit(stream, n);
        check(oracle, x);
        break;
      }
    }
  }

  {
    const PlantedMatrix planted = planted_matrix(stream, 3);
    SkewedGradientOracle skewed(planted.m, Vector{1.0, -2.0, 0.5});
    try {
      oracles::check_derivatives(skewed, 0, Vector{0.7, 0.3, -1.1});
      record(control, -1.0);
    } catch (const oracles::DerivativeMismatch& e) {
      record(control, e.component().rfind("gradient", 0) == 0 ? 0.0 : -1.0);
    }
  }

  report.properties = {gradient, hessian, control};
  finish(report, timer);
  return report;
}

std::vector<SuiteReport> run_all(std::uint64_t seed) {
  return {run_lemma1(seed), run_lemma2(seed), run_lemma3(seed), run_lemma4(),
          run_derivatives(seed)};
}

std::string format_report(const SuiteReport& report) {
  std::ostringstream out;
  out << "suite " << report.suite << ": " << (report.pass ? "PASS" : "FAIL") << " ("
      << format_margin(report.elapsed_seconds) << " s)\n";
  for (const auto& p : report.properties) {
    out << "  " << p.name << "  " << (p.pass ? "pass" : "FAIL") << "  cases=" << p.cases
        << " violations=" << p.violations << " skipped=" << p.skipped
        << " worst_margin=" << format_margin(p.worst_margin) << "\n";
    if (!p.detail.empty()) {
      std::istringstream lines(p.detail);
      std::string line;
      while (std::getline(lines, line)) out << "    " << line << "\n";
    }
  }
  return out.str();
}

}  // namespace onm::verify
