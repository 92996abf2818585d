#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "onm/linalg.hpp"
#include "onm/oracles.hpp"

namespace onm::analysis {

using linalg::Vector;
using oracles::RegularityConstants;

struct RoundRecord {
  int t = 0;
  Vector x;
  Vector x_star;
  double loss_at_x = 0.0;
  double loss_at_star = 0.0;
  double error = 0.0;  // ||x - x_star||
  std::optional<Vector> true_target;
};

// Builds a record and validates the minimization sanity check
// loss_at_x >= loss_at_star - 1e-9 (skipped in stationary-point mode).
RoundRecord make_round_record(int t, Vector x, Vector x_star, double loss_at_x,
                              double loss_at_star, std::optional<Vector> true_target = {},
                              bool minimization = true);

// Sum of per-round loss gaps.
double compute_regret(const std::vector<RoundRecord>& records);

// Sum of consecutive distances of the optima sequence.
double total_variation(const std::vector<Vector>& optima);

struct AssumptionCheck {
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Numeric form of the five regret-bound assumptions, evaluated against
// estimated constants and the realized initial error.
struct AssumptionChecklist {
  AssumptionCheck hessian_nonsingular;  // h > 1e-10
  AssumptionCheck hessian_lipschitz;    // L finite on a positive radius
  AssumptionCheck initial_in_basin;     // e0 <= gamma
  AssumptionCheck motion_bounded;       // v_bar <= gamma - (3L/2h) gamma^2
  AssumptionCheck value_lipschitz;      // ell > 0

  bool all_pass() const;
  std::string first_failure() const;
};

AssumptionChecklist evaluate_assumptions(const RegularityConstants& k, double e0);

class AssumptionViolated : public std::runtime_error {
 public:
  AssumptionViolated(const std::string& what, std::string assumption)
      : std::runtime_error(what), assumption_(std::move(assumption)) {}
  const std::string& assumption() const { return assumption_; }

 private:
  std::string assumption_;
};

class ConditionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Theorem1Result {
  double bound = 0.0;
  double delta = 0.0;   // (3L/2h)(e0^2 - eT^2)
  double factor = 0.0;  // ell / (1 - (3L/2h) gamma)
  AssumptionChecklist checklist;
};

// Bound ell/(1 - (3L/2h) gamma) * (V_T + delta).  Throws AssumptionViolated
// when the denominator is not strictly positive (gamma at or beyond 2h/3L).
// Soft assumption failures (motion, basin) are reported via the checklist.
Theorem1Result theorem1_bound(const RegularityConstants& k, double V_T, double e0, double eT);

struct Corollary1Result {
  double bound = 0.0;    // ell * E_lower
  double E_lower = 0.0;  // smaller fixed point of E -> cE^2 + (V_bar + e0)
  double E_upper = 0.0;  // larger fixed point
  double discriminant = 0.0;
};

// Constant bound ell * E_lower.  Throws ConditionFailed when
// V_bar + e0 > h/(6L) or gamma > E_upper (each with 1e-12 tolerance).
Corollary1Result corollary1_bound(const RegularityConstants& k, double e0);

struct TightnessScan {
  int points = 0;          // sampled y values in (0, (3L/2h) E_upper)
  int holding = 0;         // count with E_lower (1 - y) < V_T + delta
  bool for_all_y = false;
  bool for_some_y = false;
  double smallest_y = 0.0;  // smallest sampled y satisfying the condition (NaN if none)
  bool ybar_exists = false; // some sampled y has E_lower (1 - y) < h/(6L)
  double ybar = 0.0;        // smallest such y (NaN if none)
};

struct BoundComparisonReport {
  Theorem1Result theorem1;
  Corollary1Result corollary1;
  bool corollary_no_larger = false;
  TightnessScan tightness;
};

// Evaluates both bounds and scans the tightness condition at 100 points.
BoundComparisonReport bound_comparison(const RegularityConstants& k, double V_T, double e0,
                                       double eT);

struct RegretLedger {
  std::vector<RoundRecord> records;
  double regret = 0.0;
  double V_T = 0.0;
  double E_T = 0.0;  // sum of per-round errors
  std::optional<double> delta;
  std::optional<double> theorem1;
  std::optional<double> corollary1;
  std::optional<double> E_cap;  // E_lower backing the corollary bound
  std::optional<AssumptionChecklist> checklist;
  std::optional<RegularityConstants> constants;
  std::string bounds_note;  // why a bound value is absent, when it is

  static RegretLedger from_records(std::vector<RoundRecord> records, bool minimization = true);

  double e0() const { return records.front().error; }
  double eT() const { return records.back().error; }

  // Fills delta/theorem1/corollary1/checklist from the given constants.
  // Uncomputable bounds stay empty with the reason appended to bounds_note.
  void attach_bounds(const RegularityConstants& k);
};

}  // namespace onm::analysis
