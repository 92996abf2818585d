#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace onm::verify {

struct PropertyResult {
  std::string name;
  bool pass = true;
  std::size_t cases = 0;       // instances actually checked
  std::size_t violations = 0;
  std::size_t skipped = 0;     // precondition not met; never counts as failure
  double worst_margin = 0.0;   // smallest observed slack; negative means violated
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> properties;
  bool pass = true;
  double elapsed_seconds = 0.0;
};

// Inverse-norm bound equivalence: on planted-spectrum symmetric matrices,
// ||M^-1|| equals 1/h for h the smallest singular value, every direction has
// gain at least h, and the bound is sharp along the minimal eigenvector.
SuiteReport run_lemma1(std::uint64_t seed);

// One Newton step from inside the basin strictly shrinks the distance to the
// round optimum and obeys the quadratic bound (3L/2h) e^2.  Half analytic
// synthetic instances, half localization instances with estimated constants.
// Starts outside the basin are reported as skipped.
SuiteReport run_lemma2(std::uint64_t seed, std::size_t cases = 500);

// Basin retention: with per-round optimum motion at most 95% of
// gamma - (3L/2h) gamma^2, the tracking error stays below gamma for every
// round of every instance.
SuiteReport run_lemma3(std::uint64_t seed, std::size_t cases = 200, int rounds = 100);

// Quadratic-map convergence: fixed-point residuals, monotone convergence to
// the lower fixed point from [0, x_lower] (non-decreasing) and from
// [x_lower, x_upper) (non-increasing), and rejection when 4cv > 1.
SuiteReport run_lemma4();

// Finite-difference validation of every shipped oracle family, plus a
// negative control with a deliberately wrong gradient.
SuiteReport run_derivatives(std::uint64_t seed, std::size_t points = 100);

std::vector<SuiteReport> run_all(std::uint64_t seed);

std::string format_report(const SuiteReport& report);

}  // namespace onm::verify
