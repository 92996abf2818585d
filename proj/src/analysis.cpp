#include "onm/analysis.hpp"

#include <cmath>
#include <limits>

namespace onm::analysis {

RoundRecord make_round_record(int t, Vector x, Vector x_star, double loss_at_x,
                              double loss_at_star, std::optional<Vector> true_target,
                              bool minimization) {
  if (!std::isfinite(loss_at_x) || !std::isfinite(loss_at_star)) {
    throw std::invalid_argument("round losses must be finite");
  }
  if (minimization && loss_at_x < loss_at_star - 1e-9) {
    throw std::invalid_argument("reference optimum is worse than the played point at round " +
                                std::to_string(t));
  }
  RoundRecord r;
  r.t = t;
  r.error = distance(x, x_star);
  r.x = std::move(x);
  r.x_star = std::move(x_star);
  r.loss_at_x = loss_at_x;
  r.loss_at_star = loss_at_star;
  r.true_target = std::move(true_target);
  return r;
}

double compute_regret(const std::vector<RoundRecord>& records) {
  if (records.empty()) throw std::invalid_argument("need at least one record");
  double total = 0.0;
  for (const auto& r : records) total += r.loss_at_x - r.loss_at_star;
  return total;
}

double total_variation(const std::vector<Vector>& optima) {
  if (optima.size() < 2) throw std::invalid_argument("need at least two optima");
  double total = 0.0;
  for (std::size_t t = 1; t < optima.size(); ++t) total += distance(optima[t - 1], optima[t]);
  return total;
}

bool AssumptionChecklist::all_pass() const {
  return hessian_nonsingular.pass && hessian_lipschitz.pass && initial_in_basin.pass &&
         motion_bounded.pass && value_lipschitz.pass;
}

std::string AssumptionChecklist::first_failure() const {
  if (!hessian_nonsingular.pass) return "hessian_nonsingular";
  if (!hessian_lipschitz.pass) return "hessian_lipschitz";
  if (!initial_in_basin.pass) return "initial_in_basin";
  if (!motion_bounded.pass) return "motion_bounded";
  if (!value_lipschitz.pass) return "value_lipschitz";
  return "";
}

AssumptionChecklist evaluate_assumptions(const RegularityConstants& k, double e0) {
  AssumptionChecklist c;
  c.hessian_nonsingular = {k.h > 1e-10, k.h, 1e-10};
  c.hessian_lipschitz = {std::isfinite(k.L) && k.L >= 0.0 && k.beta > 0.0, k.L, k.beta};
  c.initial_in_basin = {e0 <= k.gamma + 1e-12, e0, k.gamma};
  const double budget = k.motion_budget();
  c.motion_bounded = {k.v_bar <= budget + 1e-12, k.v_bar, budget};
  c.value_lipschitz = {k.ell > 0.0, k.ell, 0.0};
  return c;
}

Theorem1Result theorem1_bound(const RegularityConstants& k, double V_T, double e0, double eT) {
  if (!(V_T >= 0.0) || !(e0 >= 0.0) || !(eT >= 0.0)) {
    throw std::invalid_argument("V_T, e0 and eT must be nonnegative");
  }
  const double c = k.contraction_coefficient();
  const double denom = 1.0 - c * k.gamma;
  if (!(denom > 0.0)) {
    throw AssumptionViolated(
        "denominator 1 - (3L/2h)gamma = " + std::to_string(denom) +
            " is not positive: gamma must stay strictly inside (0, 2h/3L)",
        "basin_strictly_inside");
  }
  Theorem1Result out;
  out.delta = c * (e0 * e0 - eT * eT);
  out.factor = k.ell / denom;
  out.bound = out.factor * (V_T + out.delta);
  out.checklist = evaluate_assumptions(k, e0);
  return out;
}

Corollary1Result corollary1_bound(const RegularityConstants& k, double e0) {
  if (!(e0 >= 0.0)) throw std::invalid_argument("e0 must be nonnegative");
  const double v = k.V_bar + e0;
  const double limit = k.L > 0.0 ? k.h / (6.0 * k.L) : std::numeric_limits<double>::infinity();
  if (v > limit + 1e-12) {
    throw ConditionFailed("V_bar + e0 = " + std::to_string(v) + " exceeds h/(6L) = " +
                          std::to_string(limit));
  }
  const double c = k.contraction_coefficient();
  Corollary1Result out;
  out.discriminant = std::max(0.0, 1.0 - 4.0 * c * v);
  const double root = std::sqrt(out.discriminant);
  out.E_lower = v > 0.0 ? 2.0 * v / (1.0 + root) : 0.0;
  out.E_upper = c > 0.0 ? (1.0 + root) / (2.0 * c) : std::numeric_limits<double>::infinity();
  if (k.gamma > out.E_upper + 1e-12) {
    throw ConditionFailed("gamma = " + std::to_string(k.gamma) + " exceeds E_upper = " +
                          std::to_string(out.E_upper));
  }
  out.bound = k.ell * out.E_lower;
  return out;
}

BoundComparisonReport bound_comparison(const RegularityConstants& k, double V_T, double e0,
                                       double eT) {
  BoundComparisonReport report;
  report.theorem1 = theorem1_bound(k, V_T, e0, eT);
  report.corollary1 = corollary1_bound(k, e0);
  report.corollary_no_larger = report.corollary1.bound <= report.theorem1.bound + 1e-12;

  TightnessScan& scan = report.tightness;
  scan.points = 100;
  scan.smallest_y = std::numeric_limits<double>::quiet_NaN();
  scan.ybar = std::numeric_limits<double>::quiet_NaN();
  // (3L/2h) E_upper simplifies to (1 + sqrt(disc))/2, finite even when L = 0.
  const double y_cap = 0.5 * (1.0 + std::sqrt(report.corollary1.discriminant));
  const double rhs = V_T + report.theorem1.delta;
  const double remark_rhs = k.L > 0.0 ? k.h / (6.0 * k.L) : std::numeric_limits<double>::infinity();
  for (int j = 0; j < scan.points; ++j) {
    const double y = y_cap * (static_cast<double>(j) + 0.5) / static_cast<double>(scan.points);
    const double lhs = report.corollary1.E_lower * (1.0 - y);
    if (lhs < rhs) {
      ++scan.holding;
      if (std::isnan(scan.smallest_y)) scan.smallest_y = y;
    }
    if (lhs < remark_rhs && std::isnan(scan.ybar)) {
      scan.ybar = y;
      scan.ybar_exists = true;
    }
  }
  scan.for_all_y = scan.holding == scan.points;
  scan.for_some_y = scan.holding > 0;
  return report;
}

RegretLedger RegretLedger::from_records(std::vector<RoundRecord> records, bool minimization) {
  if (records.empty()) throw std::invalid_argument("need at least one record");
  RegretLedger ledger;
  ledger.records = std::move(records);
  ledger.regret = compute_regret(ledger.records);
  if (minimization && ledger.regret < -1e-9) {
    throw std::invalid_argument("negative regret in minimization mode");
  }
  std::vector<Vector> optima;
  optima.reserve(ledger.records.size());
  for (const auto& r : ledger.records) {
    optima.push_back(r.x_star);
    ledger.E_T += r.error;
  }
  ledger.V_T = optima.size() >= 2 ? total_variation(optima) : 0.0;
  return ledger;
}

void RegretLedger::attach_bounds(const RegularityConstants& k) {
  constants = k;
  try {
    const Theorem1Result t1 = theorem1_bound(k, V_T, e0(), eT());
    delta = t1.delta;
    theorem1 = t1.bound;
    checklist = t1.checklist;
  } catch (const AssumptionViolated& e) {
    checklist = evaluate_assumptions(k, e0());
    bounds_note += std::string("theorem1 unavailable: ") + e.what() + "; ";
  }
  try {
    const Corollary1Result c1 = corollary1_bound(k, e0());
    corollary1 = c1.bound;
    E_cap = c1.E_lower;
  } catch (const ConditionFailed& e) {
    bounds_note += std::string("corollary1 not applicable: ") + e.what() + "; ";
  }
}

}  // namespace onm::analysis
