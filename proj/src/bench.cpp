#include "onm/bench.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace onm::bench {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace

std::string algorithm_name(Algorithm a) { return a == Algorithm::onm ? "onm" : "ogd"; }

double ExperimentConfig::effective_eta() const {
  return ogd_eta ? *ogd_eta : 1.0 / std::sqrt(static_cast<double>(horizon));
}

void ExperimentConfig::validate() const {
  const std::size_t dim = x0_star.size();
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) {
    throw std::invalid_argument("sigma_w must be nonnegative");
  }
  for (const auto& a : sensors.positions) {
    if (a.size() != dim) throw std::invalid_argument("sensor dimension does not match x0_star");
  }
  if (!(motion.amplitude >= 0.0) || !std::isfinite(motion.amplitude)) {
    throw std::invalid_argument("motion.amplitude must be nonnegative");
  }
  if (motion.kind == MotionKind::custom) {
    if (motion.displacements.size() != static_cast<std::size_t>(horizon)) {
      throw std::invalid_argument("custom motion needs exactly horizon displacements");
    }
    for (const auto& d : motion.displacements) {
      if (d.size() != dim) throw std::invalid_argument("displacement dimension mismatch");
    }
  }
  if (algorithms.empty()) throw std::invalid_argument("need at least one algorithm");
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    for (std::size_t j = i + 1; j < algorithms.size(); ++j) {
      if (algorithms[i] == algorithms[j]) throw std::invalid_argument("duplicate algorithm");
    }
  }
  if (ogd_eta && !(*ogd_eta > 0.0)) throw std::invalid_argument("ogd_eta must be positive");
  if (!(estimation.radius > 0.0)) throw std::invalid_argument("estimation.radius must be positive");
  if (estimation.samples < 100) throw std::invalid_argument("estimation.samples must be >= 100");
  if (estimation.rounds_cap < 1) throw std::invalid_argument("estimation.rounds_cap must be >= 1");
  if (!(search.box_half_width > 0.0)) {
    throw std::invalid_argument("search.box_half_width must be positive");
  }
  if (search.grid < 50) throw std::invalid_argument("search.grid must be >= 50");
}

std::vector<Vector> generate_target_path(const MotionModel& motion, const Vector& x0_star,
                                         int horizon, rng::Stream& stream) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const std::size_t n = x0_star.size();
  std::vector<Vector> path;
  path.reserve(static_cast<std::size_t>(horizon) + 1);
  path.push_back(x0_star);
  for (int t = 1; t <= horizon; ++t) {
    const double sign = (motion.frozen_sign || !stream.next_coin()) ? 1.0 : -1.0;
    Vector step(n);
    switch (motion.kind) {
      case MotionKind::general_variation: {
        // norm amplitude/sqrt(t)
        const double scale =
            sign * motion.amplitude / std::sqrt(static_cast<double>(n) * static_cast<double>(t));
        for (std::size_t k = 0; k < n; ++k) step[k] = scale;
        break;
      }
      case MotionKind::limited_variation: {
        // norm 6*amplitude/(t^2 pi^2); sums to amplitude over all rounds
        const double tt = static_cast<double>(t);
        const double scale =
            sign * 6.0 * motion.amplitude / (std::sqrt(static_cast<double>(n)) * tt * tt * kPi * kPi);
        for (std::size_t k = 0; k < n; ++k) step[k] = scale;
        break;
      }
      case MotionKind::custom:
        step = motion.displacements[static_cast<std::size_t>(t - 1)];
        break;
    }
    path.push_back(path.back() + step);
  }
  return path;
}

std::vector<double> generate_measurements(const Vector& x_star, const SensorArray& sensors,
                                          double sigma_w, rng::Stream& stream) {
  if (!(sigma_w >= 0.0)) throw std::invalid_argument("sigma_w must be nonnegative");
  std::vector<double> d(sensors.count());
  for (std::size_t i = 0; i < sensors.count(); ++i) {
    d[i] = distance(x_star, sensors.positions[i]) + sigma_w * stream.next_gaussian();
  }
  return d;
}

std::vector<AlgorithmResult> run_protocol(const oracles::LossOracle& oracle,
                                          const std::vector<Vector>& optima,
                                          const std::vector<Vector>& true_targets,
                                          const Vector& x0,
                                          const std::vector<Algorithm>& algorithms, double eta,
                                          bool minimization) {
  const std::size_t rounds = optima.size();
  if (rounds == 0) throw std::invalid_argument("need at least one round");
  if (rounds > static_cast<std::size_t>(oracle.rounds())) {
    throw std::invalid_argument("more optima than oracle rounds");
  }
  if (!true_targets.empty() && true_targets.size() != rounds) {
    throw std::invalid_argument("true target count must match rounds");
  }

  const algorithms::OgdConfig ogd_config(eta);
  std::vector<AlgorithmResult> out;
  out.reserve(algorithms.size());
  for (const Algorithm algo : algorithms) {
    Vector x = x0;
    std::vector<analysis::RoundRecord> records;
    records.reserve(rounds);
    for (std::size_t t = 0; t < rounds; ++t) {
      const int ti = static_cast<int>(t);
      std::optional<Vector> target;
      if (!true_targets.empty()) target = true_targets[t];
      records.push_back(analysis::make_round_record(ti, x, optima[t], oracle.value(ti, x),
                                                    oracle.value(ti, optima[t]), std::move(target),
                                                    minimization));
      if (t + 1 < rounds) {
        if (algo == Algorithm::onm) {
          x = algorithms::onm_step(oracle, {x, ti}).x;
        } else {
          x = algorithms::ogd_step(oracle, x, ti, ogd_config);
        }
      }
    }
    out.push_back({algo, analysis::RegretLedger::from_records(std::move(records), minimization)});
  }
  return out;
}

ReplicationResult run_replication(const ExperimentConfig& config, std::size_t replication_index) {
  ReplicationResult result;
  result.replication = replication_index;

  rng::Stream path_stream(config.master_seed, replication_index, rng::Purpose::target_path);
  rng::Stream noise_stream(config.master_seed, replication_index, rng::Purpose::measurement_noise);

  result.true_path = generate_target_path(config.motion, config.x0_star, config.horizon,
                                          path_stream);
  const std::size_t rounds = result.true_path.size();

  std::vector<std::vector<double>> table;
  table.reserve(rounds);
  for (const auto& pos : result.true_path) {
    table.push_back(generate_measurements(pos, config.sensors, config.sigma_w, noise_stream));
  }
  const oracles::LocalizationOracle oracle(config.sensors, std::move(table));

  result.optima.reserve(rounds);
  const std::size_t dim = config.x0_star.size();
  for (std::size_t t = 0; t < rounds; ++t) {
    Vector lower(dim);
    Vector upper(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      lower[k] = result.true_path[t][k] - config.search.box_half_width;
      upper[k] = result.true_path[t][k] + config.search.box_half_width;
    }
    try {
      result.optima.push_back(oracles::brute_force_optimum(oracle, static_cast<int>(t),
                                                           {lower, upper}, config.search.grid));
    } catch (const std::exception& e) {
      result.partial = true;
      result.failed_round = static_cast<int>(t);
      result.failure = std::string("optimum search failed: ") + e.what();
      return result;
    }
  }

  try {
    const std::size_t stride =
        (rounds + config.estimation.rounds_cap - 1) / config.estimation.rounds_cap;
    result.constants = oracles::estimate_constants(
        oracle, result.optima, config.estimation.radius, config.estimation.samples,
        config.master_seed, config.gamma_policy, std::max<std::size_t>(1, stride));
  } catch (const std::exception& e) {
    result.constants_note = std::string("constants unavailable: ") + e.what();
  }

  try {
    result.results = run_protocol(oracle, result.optima, result.true_path, config.x0_star,
                                  config.algorithms, config.effective_eta());
  } catch (const algorithms::SingularHessian& e) {
    result.partial = true;
    result.failed_round = e.round();
    result.failure = e.what();
    result.results.clear();
    return result;
  } catch (const std::exception& e) {
    result.partial = true;
    result.failure = e.what();
    result.results.clear();
    return result;
  }

  if (result.constants) {
    // The regret bounds are statements about the Newton update only.
    for (auto& r : result.results) {
      if (r.algorithm == Algorithm::onm) r.ledger.attach_bounds(*result.constants);
    }
  }
  return result;
}

ExperimentReport run_experiment(const ExperimentConfig& config, std::size_t threads) {
  config.validate();

  ExperimentReport report;
  report.config = config;
  report.replications.resize(config.replications);

  std::size_t workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = std::min(workers, config.replications);

  if (workers <= 1) {
    for (std::size_t i = 0; i < config.replications; ++i) {
      report.replications[i] = run_replication(config, i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= config.replications) break;
        report.replications[i] = run_replication(config, i);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& rep : report.replications) {
    if (rep.partial) {
      ++report.partial;
    } else {
      ++report.completed;
    }
  }

  // Ordered Welford reduction of cumulative regret per round; identical for
  // any thread count because replication order is fixed.
  const std::size_t rounds = static_cast<std::size_t>(config.horizon) + 1;
  for (const Algorithm algo : config.algorithms) {
    Curve curve;
    curve.mean.assign(rounds, 0.0);
    curve.stderr_.assign(rounds, 0.0);
    std::vector<double> m2(rounds, 0.0);
    std::size_t count = 0;
    for (const auto& rep : report.replications) {
      if (rep.partial) continue;
      const analysis::RegretLedger* ledger = nullptr;
      for (const auto& r : rep.results) {
        if (r.algorithm == algo) ledger = &r.ledger;
      }
      if (ledger == nullptr) continue;
      ++count;
      double cumulative = 0.0;
      for (std::size_t t = 0; t < rounds; ++t) {
        const auto& rec = ledger->records[t];
        cumulative += rec.loss_at_x - rec.loss_at_star;
        const double delta = cumulative - curve.mean[t];
        curve.mean[t] += delta / static_cast<double>(count);
        m2[t] += delta * (cumulative - curve.mean[t]);
      }
    }
    if (count > 1) {
      for (std::size_t t = 0; t < rounds; ++t) {
        curve.stderr_[t] =
            std::sqrt(m2[t] / (static_cast<double>(count) * static_cast<double>(count - 1)));
      }
    }
    report.regret_curves.emplace_back(algo, std::move(curve));
  }
  return report;
}

}  // namespace onm::bench
