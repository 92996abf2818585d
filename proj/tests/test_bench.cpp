#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onm/bench.hpp"
#include "onm/linalg.hpp"
#include "onm/oracles.hpp"
#include "onm/rng.hpp"

using namespace onm::bench;
using onm::linalg::SymMatrix;
using onm::linalg::Vector;
using onm::linalg::distance;
using onm::linalg::norm;
using onm::oracles::QuadraticOracle;
using onm::rng::Purpose;
using onm::rng::Stream;

namespace {

constexpr double kPi = 3.14159265358979323846;

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.name = "bench_test";
  config.horizon = 20;
  config.sigma_w = 1e-5;
  config.motion.kind = MotionKind::limited_variation;
  config.motion.amplitude = 0.001;
  config.replications = 5;
  config.master_seed = 42;
  return config;
}

const onm::analysis::RegretLedger& ledger_for(const ReplicationResult& rep, Algorithm algo) {
  for (const auto& r : rep.results) {
    if (r.algorithm == algo) return r.ledger;
  }
  throw std::logic_error("algorithm missing from replication");
}

}  // namespace

TEST_CASE("general-variation path fixture with frozen signs") {
  MotionModel motion;
  motion.kind = MotionKind::general_variation;
  motion.amplitude = 0.0025;
  motion.frozen_sign = true;
  Stream stream(1, 0, Purpose::target_path);
  const auto path = generate_target_path(motion, Vector{2.0, 1.0}, 3, stream);
  REQUIRE(path.size() == 4);
  const Vector v1 = path[1] - path[0];
  CHECK(v1[0] == doctest::Approx(0.0017677669529663686).epsilon(1e-15));
  CHECK(v1[1] == doctest::Approx(0.0017677669529663686).epsilon(1e-15));
  for (int t = 1; t <= 3; ++t) {
    const double step = distance(path[t], path[t - 1]);
    CHECK(step == doctest::Approx(0.0025 / std::sqrt(double(t))).epsilon(1e-14));
  }
}

TEST_CASE("limited-variation path stays absolutely summable") {
  MotionModel motion;
  motion.kind = MotionKind::limited_variation;
  motion.amplitude = 0.01;
  motion.frozen_sign = true;
  Stream stream(1, 0, Purpose::target_path);
  const auto path = generate_target_path(motion, Vector{2.0, 1.0}, 50, stream);
  double total = 0.0;
  for (int t = 1; t <= 50; ++t) {
    const double step = distance(path[t], path[t - 1]);
    CHECK(step == doctest::Approx(6.0 * 0.01 / (double(t) * double(t) * kPi * kPi))
                      .epsilon(1e-13));
    total += step;
  }
  CHECK(total < 0.01);
  CHECK(total > 0.0095);  // partial sums of 6/(pi^2 t^2) approach 1 from below
}

TEST_CASE("zero amplitude leaves the target fixed") {
  MotionModel motion;
  motion.amplitude = 0.0;
  Stream stream(1, 0, Purpose::target_path);
  const auto path = generate_target_path(motion, Vector{2.0, 1.0}, 10, stream);
  for (const auto& p : path) {
    CHECK(p[0] == 2.0);
    CHECK(p[1] == 1.0);
  }
}

TEST_CASE("custom displacements are applied verbatim") {
  MotionModel motion;
  motion.kind = MotionKind::custom;
  motion.displacements = {Vector{0.5, 0.0}, Vector{0.0, -0.25}};
  Stream stream(1, 0, Purpose::target_path);
  const auto path = generate_target_path(motion, Vector{0.0, 0.0}, 2, stream);
  CHECK(path[1][0] == 0.5);
  CHECK(path[2][1] == -0.25);
  CHECK_THROWS_AS(generate_target_path(motion, Vector{0.0, 0.0}, 0, stream),
                  std::invalid_argument);
}

TEST_CASE("path generation is reproducible for a fixed stream seed") {
  MotionModel motion;
  motion.kind = MotionKind::general_variation;
  motion.amplitude = 0.01;
  Stream first(9, 4, Purpose::target_path);
  Stream second(9, 4, Purpose::target_path);
  const auto a = generate_target_path(motion, Vector{2.0, 1.0}, 30, first);
  const auto b = generate_target_path(motion, Vector{2.0, 1.0}, 30, second);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t][0] == b[t][0]);
    CHECK(a[t][1] == b[t][1]);
  }
}

TEST_CASE("noiseless measurements are exact ranges") {
  const SensorArray sensors{{Vector{0.5, 0.5}, Vector{3.0, 1.0}}};
  Stream stream(1, 0, Purpose::measurement_noise);
  const auto d = generate_measurements(Vector{2.0, 1.0}, sensors, 0.0, stream);
  CHECK(d[0] == doctest::Approx(1.5811388300841898).epsilon(1e-16));
  CHECK(d[1] == 1.0);
  CHECK_THROWS_AS(generate_measurements(Vector{2.0, 1.0}, sensors, -1.0, stream),
                  std::invalid_argument);
}

TEST_CASE("measurement noise is reproducible and scales with sigma") {
  const SensorArray sensors{{Vector{0.5, 0.5}, Vector{0.0, 0.5}}};
  Stream first(3, 2, Purpose::measurement_noise);
  Stream second(3, 2, Purpose::measurement_noise);
  const auto a = generate_measurements(Vector{2.0, 1.0}, sensors, 1e-3, first);
  const auto b = generate_measurements(Vector{2.0, 1.0}, sensors, 1e-3, second);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  Stream third(3, 2, Purpose::measurement_noise);
  const auto c = generate_measurements(Vector{2.0, 1.0}, sensors, 1e-6, third);
  const double noise_a = a[0] - 1.5811388300841898;
  const double noise_c = c[0] - 1.5811388300841898;
  CHECK(noise_c == doctest::Approx(noise_a * 1e-3).epsilon(1e-9));
}

TEST_CASE("newton regret on a static quadratic collapses after round zero") {
  const QuadraticOracle oracle(SymMatrix::diagonal(Vector{2.0, 4.0}), Vector{2.0, 4.0}, 6);
  const std::vector<Vector> optima(6, Vector{1.0, 1.0});
  const auto results = run_protocol(oracle, optima, {}, Vector{0.0, 0.0},
                                    {Algorithm::onm, Algorithm::ogd}, 0.1);
  REQUIRE(results.size() == 2);
  const auto& onm_ledger = results[0].ledger;
  const auto& ogd_ledger = results[1].ledger;
  CHECK(results[0].algorithm == Algorithm::onm);

  const double round0_gap = onm_ledger.records[0].loss_at_x - onm_ledger.records[0].loss_at_star;
  CHECK(round0_gap == 3.0);  // f(0,0) - f(1,1) = 0 - (-3)
  CHECK(onm_ledger.regret == doctest::Approx(round0_gap).epsilon(1e-14));
  for (std::size_t t = 1; t < 6; ++t) {
    CHECK(onm_ledger.records[t].loss_at_x - onm_ledger.records[t].loss_at_star <= 1e-12);
  }
  CHECK(ogd_ledger.regret > onm_ledger.regret);
  CHECK_FALSE(onm_ledger.records[0].true_target.has_value());
}

TEST_CASE("protocol validates its inputs") {
  const QuadraticOracle oracle(SymMatrix::identity(2), Vector{0.0, 0.0}, 2);
  const std::vector<Vector> optima(2, Vector{0.0, 0.0});
  CHECK_THROWS_AS(run_protocol(oracle, {}, {}, Vector{0.0, 0.0}, {Algorithm::onm}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_protocol(oracle, std::vector<Vector>(3, Vector{0.0, 0.0}), {},
                               Vector{0.0, 0.0}, {Algorithm::onm}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_protocol(oracle, optima, {Vector{0.0, 0.0}}, Vector{0.0, 0.0},
                               {Algorithm::onm}, 0.1),
                  std::invalid_argument);
}

TEST_CASE("config validation and the default step size") {
  ExperimentConfig config = small_config();
  config.horizon = 100;
  CHECK(config.effective_eta() == 0.1);
  config.ogd_eta = 0.05;
  CHECK(config.effective_eta() == 0.05);
  config.ogd_eta.reset();

  config.estimation.samples = 99;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.estimation.samples = 128;
  config.search.grid = 49;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.search.grid = 51;
  config.algorithms = {Algorithm::onm, Algorithm::onm};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.algorithms = {Algorithm::onm, Algorithm::ogd};
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("noiseless motionless replication has zero regret") {
  ExperimentConfig config = small_config();
  config.sigma_w = 0.0;
  config.motion.amplitude = 0.0;
  config.horizon = 10;
  const ReplicationResult rep = run_replication(config, 0);
  REQUIRE_FALSE(rep.partial);
  REQUIRE(rep.results.size() == 2);
  const auto& onm_ledger = ledger_for(rep, Algorithm::onm);
  CHECK(onm_ledger.regret <= 1e-12);
  CHECK(onm_ledger.regret >= -1e-9);
  for (const auto& r : onm_ledger.records) {
    CHECK(r.error <= 1e-8);
    REQUIRE(r.true_target.has_value());
    CHECK(distance(*r.true_target, Vector{2.0, 1.0}) == 0.0);
  }
  REQUIRE(rep.constants.has_value());
  CHECK(rep.constants->V_bar <= 1e-8);
  CHECK(onm_ledger.theorem1.has_value());
}

TEST_CASE("replication pairs algorithms on one realization") {
  ExperimentConfig config = small_config();
  const ReplicationResult rep = run_replication(config, 1);
  REQUIRE_FALSE(rep.partial);
  const auto& onm_ledger = ledger_for(rep, Algorithm::onm);
  const auto& ogd_ledger = ledger_for(rep, Algorithm::ogd);
  REQUIRE(onm_ledger.records.size() == ogd_ledger.records.size());
  CHECK(onm_ledger.records.size() == static_cast<std::size_t>(config.horizon) + 1);
  for (std::size_t t = 0; t < onm_ledger.records.size(); ++t) {
    const auto& a = onm_ledger.records[t];
    const auto& b = ogd_ledger.records[t];
    CHECK(a.x_star[0] == b.x_star[0]);
    CHECK(a.x_star[1] == b.x_star[1]);
    CHECK(a.loss_at_star == b.loss_at_star);
  }
  // Both start from the shared x0, so round zero is identical.
  CHECK(onm_ledger.records[0].loss_at_x == ogd_ledger.records[0].loss_at_x);
  CHECK(rep.true_path.size() == rep.optima.size());

  // Bounds are attached to the Newton ledger only.
  CHECK(onm_ledger.constants.has_value());
  CHECK_FALSE(ogd_ledger.constants.has_value());
}

TEST_CASE("reference optima track the noiseless targets closely") {
  ExperimentConfig config = small_config();
  config.sigma_w = 0.0;
  const ReplicationResult rep = run_replication(config, 0);
  REQUIRE_FALSE(rep.partial);
  for (std::size_t t = 0; t < rep.optima.size(); ++t) {
    CHECK(distance(rep.optima[t], rep.true_path[t]) <= 1e-8);
  }
}

TEST_CASE("basin retention holds along a noiseless compliant run") {
  ExperimentConfig config = small_config();
  config.sigma_w = 0.0;
  config.motion.amplitude = 0.0015;
  config.horizon = 40;
  const ReplicationResult rep = run_replication(config, 2);
  REQUIRE_FALSE(rep.partial);
  REQUIRE(rep.constants.has_value());
  const auto& onm_ledger = ledger_for(rep, Algorithm::onm);
  REQUIRE(onm_ledger.checklist.has_value());
  CHECK(onm_ledger.checklist->all_pass());
  for (const auto& r : onm_ledger.records) CHECK(r.error <= rep.constants->gamma);
  CHECK(onm_ledger.regret <= *onm_ledger.theorem1 + 1e-6);
}

TEST_CASE("single-replication experiment matches the replication run") {
  ExperimentConfig config = small_config();
  config.replications = 1;
  const ExperimentReport report = run_experiment(config, 1);
  CHECK(report.completed == 1);
  CHECK(report.partial == 0);
  const ReplicationResult direct = run_replication(config, 0);
  const auto& onm_ledger = ledger_for(report.replications[0], Algorithm::onm);
  const auto& direct_ledger = ledger_for(direct, Algorithm::onm);
  CHECK(onm_ledger.regret == direct_ledger.regret);

  REQUIRE(report.regret_curves.size() == 2);
  const Curve& curve = report.regret_curves[0].second;
  double cumulative = 0.0;
  for (std::size_t t = 0; t < curve.mean.size(); ++t) {
    const auto& rec = direct_ledger.records[t];
    cumulative += rec.loss_at_x - rec.loss_at_star;
    CHECK(curve.mean[t] == cumulative);
    CHECK(curve.stderr_[t] == 0.0);
  }
}

TEST_CASE("adding replications preserves the earlier ones") {
  ExperimentConfig config = small_config();
  config.replications = 2;
  const ExperimentReport first = run_experiment(config, 1);
  config.replications = 4;
  const ExperimentReport second = run_experiment(config, 1);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = ledger_for(first.replications[i], Algorithm::onm);
    const auto& b = ledger_for(second.replications[i], Algorithm::onm);
    CHECK(a.regret == b.regret);
    CHECK(a.V_T == b.V_T);
    CHECK(first.replications[i].true_path.back()[0] == second.replications[i].true_path.back()[0]);
  }
}

TEST_CASE("thread count never changes the reduction") {
  ExperimentConfig config = small_config();
  config.replications = 6;
  const ExperimentReport serial = run_experiment(config, 1);
  const ExperimentReport parallel = run_experiment(config, 3);
  REQUIRE(serial.regret_curves.size() == parallel.regret_curves.size());
  for (std::size_t a = 0; a < serial.regret_curves.size(); ++a) {
    const Curve& s = serial.regret_curves[a].second;
    const Curve& p = parallel.regret_curves[a].second;
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      CHECK(s.mean[t] == p.mean[t]);
      CHECK(s.stderr_[t] == p.stderr_[t]);
    }
  }
}

TEST_CASE("curve statistics match a direct computation") {
  ExperimentConfig config = small_config();
  config.replications = 5;
  const ExperimentReport report = run_experiment(config, 2);
  REQUIRE(report.completed == 5);
  const std::size_t last = static_cast<std::size_t>(config.horizon);

  std::vector<double> finals;
  for (const auto& rep : report.replications) {
    finals.push_back(ledger_for(rep, Algorithm::onm).regret);
  }
  double mean = 0.0;
  for (double f : finals) mean += f;
  mean /= double(finals.size());
  double ss = 0.0;
  for (double f : finals) ss += (f - mean) * (f - mean);
  const double se = std::sqrt(ss / (finals.size() * (finals.size() - 1.0)));

  const Curve& curve = report.regret_curves[0].second;
  CHECK(curve.mean[last] == doctest::Approx(mean).epsilon(1e-12));
  CHECK(curve.stderr_[last] == doctest::Approx(se).epsilon(1e-10));
}

TEST_CASE("degenerate geometry yields partial replications, not aborts") {
  ExperimentConfig config = small_config();
  config.sensors = SensorArray{{Vector{0.0, 0.0}, Vector{0.0, 0.0}, Vector{0.0, 0.0}}};
  config.sigma_w = 0.0;
  config.motion.amplitude = 0.0;
  config.horizon = 3;
  config.replications = 2;
  const ExperimentReport report = run_experiment(config, 1);
  CHECK(report.completed == 0);
  CHECK(report.partial == 2);
  for (const auto& rep : report.replications) {
    CHECK(rep.partial);
    CHECK_FALSE(rep.failure.empty());
    CHECK(rep.results.empty());
  }
}

TEST_CASE("newton beats gradient descent on the moving-target benchmark") {
  ExperimentConfig config;
  config.name = "comparison";
  config.horizon = 200;
  config.sigma_w = 1e-4;
  config.motion.kind = MotionKind::general_variation;
  config.motion.amplitude = 0.0025;
  config.replications = 100;
  config.master_seed = 1;
  const ExperimentReport report = run_experiment(config);
  CHECK(report.completed == 100);
  const std::size_t last = static_cast<std::size_t>(config.horizon);
  REQUIRE(report.regret_curves.size() == 2);
  CHECK(report.regret_curves[0].first == Algorithm::onm);
  const double onm_final = report.regret_curves[0].second.mean[last];
  const double ogd_final = report.regret_curves[1].second.mean[last];
  CHECK(onm_final < ogd_final);
  CHECK(onm_final > 0.0);
}
