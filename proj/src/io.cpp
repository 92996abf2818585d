#include "onm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>

#include "onm/version.hpp"

namespace onm::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (allowed.count(item.key()) == 0) fail("unknown key '" + item.key() + "' in " + where);
  }
}

double get_number(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) fail("'" + key + "' must be a number");
  return j.at(key).get<double>();
}

linalg::Vector get_vector(const json& j, const std::string& key) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.empty()) fail("'" + key + "' must be a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) fail("'" + key + "' must contain only numbers");
    out.push_back(x.get<double>());
  }
  return linalg::Vector(std::move(out));
}

bench::MotionModel parse_motion(const json& j) {
  require_keys(j, "motion", {"kind", "amplitude", "frozen_sign", "displacements"});
  bench::MotionModel motion;
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "general_variation") {
      motion.kind = bench::MotionKind::general_variation;
    } else if (kind == "limited_variation") {
      motion.kind = bench::MotionKind::limited_variation;
    } else if (kind == "custom") {
      motion.kind = bench::MotionKind::custom;
    } else {
      fail("motion.kind must be general_variation, limited_variation or custom");
    }
  }
  if (j.contains("amplitude")) motion.amplitude = get_number(j, "amplitude");
  if (j.contains("frozen_sign")) {
    if (!j.at("frozen_sign").is_boolean()) fail("motion.frozen_sign must be a boolean");
    motion.frozen_sign = j.at("frozen_sign").get<bool>();
  }
  if (j.contains("displacements")) {
    for (const auto& row : j.at("displacements")) {
      if (!row.is_array()) fail("motion.displacements must be an array of arrays");
      std::vector<double> d;
      for (const auto& x : row) d.push_back(x.get<double>());
      motion.displacements.emplace_back(std::move(d));
    }
  }
  return motion;
}

std::string motion_kind_name(bench::MotionKind kind) {
  switch (kind) {
    case bench::MotionKind::general_variation:
      return "general_variation";
    case bench::MotionKind::limited_variation:
      return "limited_variation";
    case bench::MotionKind::custom:
      return "custom";
  }
  return "general_variation";
}

ordered_json vector_json(const linalg::Vector& v) {
  ordered_json arr = ordered_json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

const analysis::RegretLedger* find_ledger(const bench::ReplicationResult& rep,
                                          bench::Algorithm algo) {
  for (const auto& r : rep.results) {
    if (r.algorithm == algo) return &r.ledger;
  }
  return nullptr;
}

ordered_json check_json(const analysis::AssumptionCheck& c) {
  return ordered_json{{"pass", c.pass}, {"lhs", c.lhs}, {"rhs", c.rhs}};
}

struct RunningMean {
  double sum = 0.0;
  std::size_t count = 0;
  void add(double x) {
    sum += x;
    ++count;
  }
  ordered_json value() const {
    return count == 0 ? ordered_json(nullptr) : ordered_json(sum / static_cast<double>(count));
  }
};

}  // namespace

bench::ExperimentConfig config_from_json(const json& j) {
  require_keys(j, "config",
               {"name", "sensors", "x0_star", "horizon", "sigma_w", "motion", "replications",
                "master_seed", "algorithms", "gamma_policy", "ogd_eta", "estimation",
                "optimum_search", "trajectory_replications"});
  bench::ExperimentConfig config;
  try {
    if (j.contains("name")) config.name = j.at("name").get<std::string>();
    if (j.contains("sensors")) {
      std::vector<linalg::Vector> positions;
      for (const auto& row : j.at("sensors")) {
        if (!row.is_array()) fail("sensors must be an array of coordinate arrays");
        std::vector<double> p;
        for (const auto& x : row) p.push_back(x.get<double>());
        positions.emplace_back(std::move(p));
      }
      config.sensors = oracles::SensorArray(std::move(positions));
    }
    if (j.contains("x0_star")) config.x0_star = get_vector(j, "x0_star");
    if (j.contains("horizon")) config.horizon = j.at("horizon").get<int>();
    if (j.contains("sigma_w")) config.sigma_w = get_number(j, "sigma_w");
    if (j.contains("motion")) config.motion = parse_motion(j.at("motion"));
    if (j.contains("replications")) config.replications = j.at("replications").get<std::size_t>();
    if (j.contains("master_seed")) config.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("algorithms")) {
      config.algorithms.clear();
      for (const auto& name : j.at("algorithms")) {
        const std::string s = name.get<std::string>();
        if (s == "onm") {
          config.algorithms.push_back(bench::Algorithm::onm);
        } else if (s == "ogd") {
          config.algorithms.push_back(bench::Algorithm::ogd);
        } else {
          fail("algorithms must contain only 'onm' and 'ogd'");
        }
      }
    }
    if (j.contains("gamma_policy")) {
      const std::string s = j.at("gamma_policy").get<std::string>();
      if (s == "half_basin") {
        config.gamma_policy = oracles::GammaPolicy::half_basin;
      } else if (s == "full_basin") {
        config.gamma_policy = oracles::GammaPolicy::full_basin;
      } else {
        fail("gamma_policy must be half_basin or full_basin");
      }
    }
    if (j.contains("ogd_eta") && !j.at("ogd_eta").is_null()) {
      config.ogd_eta = get_number(j, "ogd_eta");
    }
    if (j.contains("estimation")) {
      const auto& e = j.at("estimation");
      require_keys(e, "estimation", {"radius", "samples", "rounds_cap"});
      if (e.contains("radius")) config.estimation.radius = get_number(e, "radius");
      if (e.contains("samples")) config.estimation.samples = e.at("samples").get<std::size_t>();
      if (e.contains("rounds_cap")) {
        config.estimation.rounds_cap = e.at("rounds_cap").get<std::size_t>();
      }
    }
    if (j.contains("optimum_search")) {
      const auto& s = j.at("optimum_search");
      require_keys(s, "optimum_search", {"box_half_width", "grid"});
      if (s.contains("box_half_width")) {
        config.search.box_half_width = get_number(s, "box_half_width");
      }
      if (s.contains("grid")) config.search.grid = s.at("grid").get<std::size_t>();
    }
    if (j.contains("trajectory_replications")) {
      config.trajectory_replications = j.at("trajectory_replications").get<std::size_t>();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(std::string("malformed config: ") + e.what());
  }

  try {
    config.validate();
  } catch (const std::exception& e) {
    fail(std::string("invalid config: ") + e.what());
  }
  return config;
}

bench::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

ordered_json config_to_json(const bench::ExperimentConfig& config) {
  ordered_json j;
  j["name"] = config.name;
  ordered_json sensors = ordered_json::array();
  for (const auto& a : config.sensors.positions) sensors.push_back(vector_json(a));
  j["sensors"] = sensors;
  j["x0_star"] = vector_json(config.x0_star);
  j["horizon"] = config.horizon;
  j["sigma_w"] = config.sigma_w;
  ordered_json motion;
  motion["kind"] = motion_kind_name(config.motion.kind);
  motion["amplitude"] = config.motion.amplitude;
  motion["frozen_sign"] = config.motion.frozen_sign;
  if (config.motion.kind == bench::MotionKind::custom) {
    ordered_json rows = ordered_json::array();
    for (const auto& d : config.motion.displacements) rows.push_back(vector_json(d));
    motion["displacements"] = rows;
  }
  j["motion"] = motion;
  j["replications"] = config.replications;
  j["master_seed"] = config.master_seed;
  ordered_json algos = ordered_json::array();
  for (const auto a : config.algorithms) algos.push_back(bench::algorithm_name(a));
  j["algorithms"] = algos;
  j["gamma_policy"] =
      config.gamma_policy == oracles::GammaPolicy::half_basin ? "half_basin" : "full_basin";
  j["ogd_eta"] = config.effective_eta();
  j["estimation"] = ordered_json{{"radius", config.estimation.radius},
                                 {"samples", config.estimation.samples},
                                 {"rounds_cap", config.estimation.rounds_cap}};
  j["optimum_search"] = ordered_json{{"box_half_width", config.search.box_half_width},
                                     {"grid", config.search.grid}};
  j["trajectory_replications"] = config.trajectory_replications;
  return j;
}

void write_regret_csv(const bench::ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,onm_regret_mean,onm_regret_stderr,ogd_regret_mean,ogd_regret_stderr\n";
  const bench::Curve* onm = nullptr;
  const bench::Curve* ogd = nullptr;
  for (const auto& [algo, curve] : report.regret_curves) {
    (algo == bench::Algorithm::onm ? onm : ogd) = &curve;
  }
  const std::size_t rounds = static_cast<std::size_t>(report.config.horizon) + 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0; t < rounds; ++t) {
    out << t << ',' << format_double(onm ? onm->mean[t] : nan) << ','
        << format_double(onm ? onm->stderr_[t] : nan) << ','
        << format_double(ogd ? ogd->mean[t] : nan) << ','
        << format_double(ogd ? ogd->stderr_[t] : nan) << '\n';
  }
}

void write_trajectory_csv(const bench::ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,replication,target_x,target_y,onm_x,onm_y,ogd_x,ogd_y\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t written = 0;
  for (const auto& rep : report.replications) {
    if (rep.partial) continue;
    if (written == report.config.trajectory_replications) break;
    ++written;
    const analysis::RegretLedger* onm = find_ledger(rep, bench::Algorithm::onm);
    const analysis::RegretLedger* ogd = find_ledger(rep, bench::Algorithm::ogd);
    for (std::size_t t = 0; t < rep.true_path.size(); ++t) {
      const auto& target = rep.true_path[t];
      out << t << ',' << rep.replication << ',' << format_double(target[0]) << ','
          << format_double(target.size() > 1 ? target[1] : nan) << ','
          << format_double(onm ? onm->records[t].x[0] : nan) << ','
          << format_double(onm && target.size() > 1 ? onm->records[t].x[1] : nan) << ','
          << format_double(ogd ? ogd->records[t].x[0] : nan) << ','
          << format_double(ogd && target.size() > 1 ? ogd->records[t].x[1] : nan) << '\n';
    }
  }
}

nlohmann::ordered_json summary_json(const bench::ExperimentReport& report,
                                    const RunManifest& manifest) {
  const auto& config = report.config;
  ordered_json j;
  j["experiment"] = config.name;
  j["horizon"] = config.horizon;
  j["replications"] = ordered_json{{"requested", config.replications},
                                   {"completed", report.completed},
                                   {"partial", report.partial}};
  j["master_seed"] = config.master_seed;
  j["ogd_eta"] = config.effective_eta();

  ordered_json final_regret;
  for (const auto& [algo, curve] : report.regret_curves) {
    if (curve.mean.empty() || report.completed == 0) {
      final_regret[bench::algorithm_name(algo)] = nullptr;
    } else {
      final_regret[bench::algorithm_name(algo)] =
          ordered_json{{"mean", curve.mean.back()}, {"stderr", curve.stderr_.back()}};
    }
  }
  j["final_regret"] = final_regret;

  RunningMean variation;
  double variation_min = std::numeric_limits<double>::infinity();
  double variation_max = 0.0;
  RunningMean onm_track;
  RunningMean ogd_track;
  std::size_t within_noise = 0;
  std::size_t track_count = 0;

  ordered_json checklist_totals = ordered_json::object();
  const char* names[] = {"hessian_nonsingular", "hessian_lipschitz", "initial_in_basin",
                         "motion_bounded", "value_lipschitz"};
  std::size_t pass_counts[5] = {0, 0, 0, 0, 0};
  std::size_t checklist_total = 0;
  ordered_json checklist_example;

  std::size_t t1_evaluated = 0;
  std::size_t t1_gated = 0;  // checklist passed
  std::size_t t1_satisfied = 0;
  RunningMean t1_mean;
  double t1_min_margin = std::numeric_limits<double>::infinity();
  std::size_t c1_evaluated = 0;
  std::size_t c1_satisfied = 0;
  std::size_t c1_prefix_ok = 0;
  RunningMean c1_mean;
  double c1_min_margin = std::numeric_limits<double>::infinity();

  ordered_json constants_block;
  bool have_constants = false;
  ordered_json failures = ordered_json::array();

  for (const auto& rep : report.replications) {
    if (rep.partial) {
      failures.push_back(ordered_json{{"replication", rep.replication},
                                      {"round", rep.failed_round},
                                      {"message", rep.failure}});
      continue;
    }
    const analysis::RegretLedger* onm = find_ledger(rep, bench::Algorithm::onm);
    const analysis::RegretLedger* ogd = find_ledger(rep, bench::Algorithm::ogd);
    const analysis::RegretLedger* any = onm ? onm : ogd;
    if (any) {
      variation.add(any->V_T);
      variation_min = std::min(variation_min, any->V_T);
      variation_max = std::max(variation_max, any->V_T);
    }
    if (!rep.true_path.empty()) {
      const auto& target = rep.true_path.back();
      ++track_count;
      if (onm) {
        const double dist = linalg::distance(onm->records.back().x, target);
        onm_track.add(dist);
        if (config.sigma_w > 0.0 && dist < 10.0 * config.sigma_w) ++within_noise;
      }
      if (ogd) ogd_track.add(linalg::distance(ogd->records.back().x, target));
    }
    if (rep.constants && !have_constants) {
      have_constants = true;
      const auto& k = *rep.constants;
      constants_block = ordered_json{
          {"h", k.h},
          {"L", k.L},
          {"beta", k.beta},
          {"ell", k.ell},
          {"gamma", k.gamma},
          {"v_bar", k.v_bar},
          {"V_bar", k.V_bar},
          {"estimation",
           ordered_json{{"samples", k.meta.samples},
                        {"seed", k.meta.seed},
                        {"rounds", k.meta.rounds},
                        {"sampled_rounds", k.meta.sampled_rounds},
                        {"sample_radius", k.meta.sample_radius},
                        {"policy", k.meta.policy == oracles::GammaPolicy::half_basin
                                       ? "half_basin"
                                       : "full_basin"}}}};
    }
    if (onm && onm->checklist) {
      ++checklist_total;
      const auto& c = *onm->checklist;
      const analysis::AssumptionCheck* checks[] = {&c.hessian_nonsingular, &c.hessian_lipschitz,
                                                   &c.initial_in_basin, &c.motion_bounded,
                                                   &c.value_lipschitz};
      for (int i = 0; i < 5; ++i) {
        if (checks[i]->pass) ++pass_counts[i];
      }
      if (checklist_example.is_null()) {
        checklist_example = ordered_json{{"hessian_nonsingular", check_json(c.hessian_nonsingular)},
                                         {"hessian_lipschitz", check_json(c.hessian_lipschitz)},
                                         {"initial_in_basin", check_json(c.initial_in_basin)},
                                         {"motion_bounded", check_json(c.motion_bounded)},
                                         {"value_lipschitz", check_json(c.value_lipschitz)}};
      }
      if (onm->theorem1) {
        ++t1_evaluated;
        t1_mean.add(*onm->theorem1);
        if (c.all_pass()) {
          ++t1_gated;
          const double margin = *onm->theorem1 - onm->regret;
          t1_min_margin = std::min(t1_min_margin, margin);
          if (onm->regret <= *onm->theorem1 + 1e-6) ++t1_satisfied;
        }
      }
      if (onm->corollary1 && onm->E_cap) {
        ++c1_evaluated;
        c1_mean.add(*onm->corollary1);
        const double margin = *onm->corollary1 - onm->regret;
        c1_min_margin = std::min(c1_min_margin, margin);
        if (onm->regret <= *onm->corollary1 + 1e-6) ++c1_satisfied;
        double prefix = 0.0;
        bool ok = true;
        for (const auto& record : onm->records) {
          prefix += record.error;
          if (!(prefix <= *onm->E_cap + 1e-6)) {
            ok = false;
            break;
          }
        }
        if (ok) ++c1_prefix_ok;
      }
    }
  }

  j["total_variation"] =
      variation.count == 0
          ? ordered_json(nullptr)
          : ordered_json{{"mean", variation.sum / static_cast<double>(variation.count)},
                         {"min", variation_min},
                         {"max", variation_max}};
  ordered_json tracking;
  tracking["onm"] = onm_track.count == 0
                        ? ordered_json(nullptr)
                        : ordered_json{{"final_distance_mean", onm_track.value()},
                                       {"fraction_within_10_sigma",
                                        config.sigma_w > 0.0 && track_count > 0
                                            ? ordered_json(static_cast<double>(within_noise) /
                                                           static_cast<double>(track_count))
                                            : ordered_json(nullptr)}};
  tracking["ogd"] = ogd_track.count == 0
                        ? ordered_json(nullptr)
                        : ordered_json{{"final_distance_mean", ogd_track.value()}};
  j["tracking_error_final"] = tracking;

  j["constants"] = have_constants ? constants_block : ordered_json(nullptr);

  ordered_json bounds;
  bounds["theorem1"] = ordered_json{
      {"evaluated", t1_evaluated},
      {"checklist_passed", t1_gated},
      {"satisfied", t1_satisfied},
      {"mean_bound", t1_mean.value()},
      {"min_margin", t1_gated == 0 ? ordered_json(nullptr) : ordered_json(t1_min_margin)}};
  bounds["corollary1"] = ordered_json{
      {"evaluated", c1_evaluated},
      {"satisfied", c1_satisfied},
      {"prefix_within_cap", c1_prefix_ok},
      {"mean_bound", c1_mean.value()},
      {"min_margin", c1_evaluated == 0 ? ordered_json(nullptr) : ordered_json(c1_min_margin)}};
  j["bounds"] = bounds;

  for (int i = 0; i < 5; ++i) {
    checklist_totals[names[i]] =
        ordered_json{{"pass", pass_counts[i]}, {"total", checklist_total}};
  }
  j["assumption_checklist"] = ordered_json{{"per_replication", checklist_totals},
                                           {"example", checklist_example}};
  j["failures"] = failures;

  j["manifest"] = ordered_json{{"config_path", manifest.config_path},
                               {"master_seed", manifest.master_seed},
                               {"tool_version", manifest.tool_version},
                               {"resolved_config", manifest.resolved_config}};
  return j;
}

void write_summary_json(const bench::ExperimentReport& report, const RunManifest& manifest,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << summary_json(report, manifest).dump(2) << '\n';
}

void write_manifest_json(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  ordered_json j{{"config_path", manifest.config_path},
                 {"master_seed", manifest.master_seed},
                 {"tool_version", manifest.tool_version},
                 {"timestamp", manifest.timestamp},
                 {"output_dir", manifest.output_dir},
                 {"threads", manifest.threads},
                 {"resolved_config", manifest.resolved_config}};
  out << j.dump(2) << '\n';
}

std::string current_utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

}  // namespace onm::io
