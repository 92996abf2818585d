#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "onm/algorithms.hpp"
#include "onm/analysis.hpp"
#include "onm/oracles.hpp"
#include "onm/rng.hpp"

namespace onm::bench {

using linalg::Vector;
using oracles::RegularityConstants;
using oracles::SensorArray;

enum class Algorithm { onm, ogd };
std::string algorithm_name(Algorithm a);

enum class MotionKind { general_variation, limited_variation, custom };

// Target motion.  general_variation: per-round displacement of norm
// amplitude/sqrt(t) with a Bernoulli sign.  limited_variation: displacement
// norm 6*amplitude/(t^2 pi^2), absolutely summable to amplitude.  custom:
// caller-supplied displacement list.
struct MotionModel {
  MotionKind kind = MotionKind::general_variation;
  double amplitude = 0.0025;
  bool frozen_sign = false;  // keep every sign positive instead of sampling b_t
  std::vector<Vector> displacements;  // custom only; one per round t = 1..T
};

struct EstimationSettings {
  double radius = 0.3;
  std::size_t samples = 128;
  std::size_t rounds_cap = 32;  // L/ell sampling visits at most this many rounds
};

struct SearchSettings {
  double box_half_width = 1.0;
  std::size_t grid = 51;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SensorArray sensors{{Vector{0.5, 0.5}, Vector{0.0, 0.5}, Vector{0.5, 0.0}}};
  Vector x0_star{2.0, 1.0};
  int horizon = 500;  // records cover t = 0..horizon
  double sigma_w = 1e-4;
  MotionModel motion;
  std::size_t replications = 200;
  std::uint64_t master_seed = 1;
  std::vector<Algorithm> algorithms{Algorithm::onm, Algorithm::ogd};
  oracles::GammaPolicy gamma_policy = oracles::GammaPolicy::half_basin;
  std::optional<double> ogd_eta;  // default 1/sqrt(horizon)
  EstimationSettings estimation;
  SearchSettings search;
  std::size_t trajectory_replications = 3;

  double effective_eta() const;
  void validate() const;  // throws std::invalid_argument with a field name
};

// Target positions for t = 0..horizon (length horizon+1).
std::vector<Vector> generate_target_path(const MotionModel& motion, const Vector& x0_star,
                                         int horizon, rng::Stream& stream);

// One round of Gaussian-perturbed ranges.
std::vector<double> generate_measurements(const Vector& x_star, const SensorArray& sensors,
                                          double sigma_w, rng::Stream& stream);

struct AlgorithmResult {
  Algorithm algorithm = Algorithm::onm;
  analysis::RegretLedger ledger;
};

// Play-then-observe protocol on an arbitrary oracle with precomputed
// per-round reference optima: each algorithm commits x_t, then the round-t
// loss is revealed for the record and the update.  All algorithms replay the
// identical oracle (paired comparison).  Also the test hook for swapping in
// non-localization oracles.
std::vector<AlgorithmResult> run_protocol(const oracles::LossOracle& oracle,
                                          const std::vector<Vector>& optima,
                                          const std::vector<Vector>& true_targets,
                                          const Vector& x0,
                                          const std::vector<Algorithm>& algorithms, double eta,
                                          bool minimization = true);

struct ReplicationResult {
  std::size_t replication = 0;
  bool partial = false;
  int failed_round = -1;
  std::string failure;
  std::vector<AlgorithmResult> results;
  std::vector<Vector> true_path;
  std::vector<Vector> optima;
  std::optional<RegularityConstants> constants;
  std::string constants_note;  // why constants are absent, when they are
};

ReplicationResult run_replication(const ExperimentConfig& config, std::size_t replication_index);

struct Curve {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::size_t completed = 0;
  std::size_t partial = 0;
  // Cumulative regret statistics per round over completed replications, in
  // the order of config.algorithms.
  std::vector<std::pair<Algorithm, Curve>> regret_curves;
  std::vector<ReplicationResult> replications;
};

// Runs all replications (threads = 0 picks hardware concurrency) and reduces
// in replication order, so thread count never changes the result.
ExperimentReport run_experiment(const ExperimentConfig& config, std::size_t threads = 0);

}  // namespace onm::bench
