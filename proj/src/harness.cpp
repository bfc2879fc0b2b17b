#include "prbi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "prbi/baselines.hpp"

namespace prbi {

namespace {

std::vector<VehicleId> front_roster(int k) {
  std::vector<VehicleId> out;
  for (int v = 0; v < k; ++v) out.push_back(v);
  return out;
}

std::vector<VehicleId> full_fleet(int n) {
  std::vector<VehicleId> out;
  for (int v = 0; v < n; ++v) out.push_back(v);
  return out;
}

int thread_budget(int replicates) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int budget = static_cast<int>(hw);
  if (const char* env = std::getenv("FLEET_SIM_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) budget = static_cast<int>(parsed);
  }
  return std::max(1, std::min(budget, replicates));
}

struct ReplicateStats {
  std::vector<FrameLog> logs;
  long long flagged = 0;
  long long ver_sum = 0;
  int ver_min = 0;
  int ver_max = 0;
  bool converged = false;
  long long frames_to_convergence = 0;
  bool identified = false;
  double misclassified = 0.0;
};

ReplicateStats run_replicate(const ScenarioConfig& config, int replicate) {
  WorldConfig wc = config.world;
  wc.seed = config.world.seed + static_cast<std::uint64_t>(replicate);
  const WorldOracle oracle(wc);
  const int n = wc.n;

  ReplicateStats stats;
  stats.logs.reserve(config.frame_count);

  std::set<VehicleId> truth(wc.attacker_set.begin(), wc.attacker_set.end());

  if (config.method == Method::Prbi) {
    PrbiState state = make_prbi_state(n);
    long long flags_until_convergence = 0;
    for (int frame = 0; frame < config.frame_count; ++frame) {
      const FrameOutcome out = step(state, frame, oracle, config.prbi);
      FrameLog log;
      log.frame = frame;
      log.flagged = out.flagged;
      log.verifications = out.verifications;
      log.m = state.m;
      log.p_benign = state.p_benign;
      log.converged = state.converged;
      log.jaccard_truth =
          jaccard(out.perception, oracle.benign_reference(frame), config.prbi.tau_match);
      stats.logs.push_back(std::move(log));

      if (out.flagged) {
        ++stats.flagged;
        stats.ver_sum += out.verifications;
        if (stats.flagged == 1) {
          stats.ver_min = out.verifications;
          stats.ver_max = out.verifications;
        } else {
          stats.ver_min = std::min(stats.ver_min, out.verifications);
          stats.ver_max = std::max(stats.ver_max, out.verifications);
        }
        if (!state.converged) ++flags_until_convergence;
      }
      if (out.converged_now) {
        // the converging frame is itself flagged and already counted
        ++flags_until_convergence;
        stats.frames_to_convergence = flags_until_convergence;
      }
    }
    stats.converged = state.converged;
    if (stats.converged) {
      std::set<VehicleId> found(state.attackers.begin(), state.attackers.end());
      stats.identified = std::includes(found.begin(), found.end(), truth.begin(), truth.end());
      int wrong = 0;
      for (VehicleId v : found)
        if (truth.count(v) == 0) ++wrong;
      const int benign_count = n - static_cast<int>(truth.size());
      stats.misclassified =
          benign_count > 0 ? static_cast<double>(wrong) / benign_count : 0.0;
    }
    return stats;
  }

  // comparator methods share the flagging rule but replace the sampler
  DetectionSet d_ref = oracle.perceive(full_fleet(n), 0);
  {
    FrameLog log;
    log.frame = 0;
    log.p_benign.assign(n, 0.0);
    log.jaccard_truth = jaccard(d_ref, oracle.benign_reference(0), config.prbi.tau_match);
    stats.logs.push_back(std::move(log));
  }
  for (int frame = 1; frame < config.frame_count; ++frame) {
    const DetectionSet observed = oracle.perceive(full_fleet(n), frame);
    FrameLog log;
    log.frame = frame;
    log.p_benign.assign(n, 0.0);
    DetectionSet emitted;
    if (jaccard(observed, d_ref, config.prbi.tau_match) >= config.prbi.epsilon) {
      emitted = observed;
      d_ref = observed;
    } else {
      log.flagged = true;
      BaselineOutcome outcome;
      if (config.method == Method::RandomConsensus) {
        outcome = random_consensus_step(n, oracle, frame, d_ref, config.prbi.epsilon,
                                        config.prbi.tau_match, wc.seed);
      } else {
        outcome = sequential_split_step(n, oracle, frame, d_ref, config.prbi.epsilon,
                                        config.prbi.tau_match);
      }
      log.verifications = outcome.verifications;
      if (!outcome.collaborators.empty()) {
        emitted = oracle.perceive(outcome.collaborators, frame);
        d_ref = emitted;
      } else {
        emitted.frame = frame;
      }
      ++stats.flagged;
      stats.ver_sum += outcome.verifications;
      if (stats.flagged == 1) {
        stats.ver_min = outcome.verifications;
        stats.ver_max = outcome.verifications;
      } else {
        stats.ver_min = std::min(stats.ver_min, outcome.verifications);
        stats.ver_max = std::max(stats.ver_max, outcome.verifications);
      }
    }
    log.jaccard_truth =
        jaccard(emitted, oracle.benign_reference(frame), config.prbi.tau_match);
    stats.logs.push_back(std::move(log));
  }
  return stats;
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::Prbi:
      return "prbi";
    case Method::RandomConsensus:
      return "random_consensus";
    case Method::SequentialSplit:
      return "sequential_split";
  }
  throw std::logic_error("method_name: bad method");
}

Method method_from_name(const std::string& name) {
  if (name == "prbi") return Method::Prbi;
  if (name == "random_consensus") return Method::RandomConsensus;
  if (name == "sequential_split") return Method::SequentialSplit;
  throw std::invalid_argument("unknown method: " + name);
}

void validate_scenario(const ScenarioConfig& config) {
  const WorldConfig& w = config.world;
  if (w.n < 2) throw std::invalid_argument("n must be >= 2");
  if (w.n > 62) throw std::invalid_argument("n must be <= 62");
  std::set<VehicleId> seen;
  for (VehicleId v : w.attacker_set) {
    if (v < 0 || v >= w.n) throw std::invalid_argument("attacker id out of range");
    if (!seen.insert(v).second) throw std::invalid_argument("duplicate attacker id");
  }
  if (static_cast<int>(w.attacker_set.size()) > w.n - 1)
    throw std::invalid_argument("attacker_set must leave at least one benign vehicle");
  if (w.object_count < 1) throw std::invalid_argument("object_count must be >= 1");
  if (w.persist_prob < 0.0 || w.persist_prob > 1.0)
    throw std::invalid_argument("persist_prob must be in [0, 1]");
  if (w.jitter_sigma < 0.0) throw std::invalid_argument("jitter_sigma must be >= 0");
  if (w.miss_prob < 0.0 || w.miss_prob >= 1.0)
    throw std::invalid_argument("miss_prob must be in [0, 1)");
  if (w.speed_max < 0.0) throw std::invalid_argument("speed_max must be >= 0");
  if (w.attack_period < 1) throw std::invalid_argument("attack_period must be >= 1");
  if (w.attack_start < 1) throw std::invalid_argument("attack_start must be >= 1");
  if (w.delta_del < 0.0 || w.delta_del > 1.0)
    throw std::invalid_argument("delta_del must be in [0, 1]");
  if (w.delta_inj < 0.0 || w.delta_inj > 1.0)
    throw std::invalid_argument("delta_inj must be in [0, 1]");

  const PrbiConfig& p = config.prbi;
  if (p.epsilon <= 0.0 || p.epsilon >= 1.0)
    throw std::invalid_argument("epsilon must be in (0, 1)");
  if (p.window_size < 2) throw std::invalid_argument("window_size must be >= 2");
  if (p.alpha <= 0.0 || p.alpha >= 1.0) throw std::invalid_argument("alpha must be in (0, 1)");
  if (p.gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (p.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (p.tau_match <= 0.0 || p.tau_match > 1.0)
    throw std::invalid_argument("tau_match must be in (0, 1]");

  if (config.frame_count < 2) throw std::invalid_argument("frame_count must be >= 2");
  if (config.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate_scenario(config);
  const int replicates = config.replicates;
  std::vector<ReplicateStats> all(replicates);

  const int workers = thread_budget(replicates);
  if (workers <= 1) {
    for (int r = 0; r < replicates; ++r) all[r] = run_replicate(config, r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < replicates; r = next.fetch_add(1))
          all[r] = run_replicate(config, r);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  ScenarioResult result;
  ExperimentReport& rep = result.report;
  long long ver_sum = 0;
  long long conv_count = 0;
  long long frames_sum = 0;
  long long id_count = 0;
  double mc_sum = 0.0;
  bool any_flag = false;
  for (int r = 0; r < replicates; ++r) {
    ReplicateStats& s = all[r];
    rep.flagged_frames += s.flagged;
    ver_sum += s.ver_sum;
    if (s.flagged > 0) {
      if (!any_flag) {
        rep.ver_min = s.ver_min;
        rep.ver_max = s.ver_max;
        any_flag = true;
      } else {
        rep.ver_min = std::min(rep.ver_min, s.ver_min);
        rep.ver_max = std::max(rep.ver_max, s.ver_max);
      }
    }
    if (s.converged) {
      ++conv_count;
      frames_sum += s.frames_to_convergence;
      if (s.identified) ++id_count;
    }
    mc_sum += s.misclassified;
    result.logs.push_back(std::move(s.logs));
  }
  if (rep.flagged_frames > 0)
    rep.ver_avg = static_cast<double>(ver_sum) / static_cast<double>(rep.flagged_frames);
  if (conv_count > 0)
    rep.avg_frames = static_cast<double>(frames_sum) / static_cast<double>(conv_count);
  rep.id_rate = static_cast<double>(id_count) / replicates;
  rep.mc_rate = mc_sum / replicates;
  rep.converged_rate = static_cast<double>(conv_count) / replicates;
  for (const FrameLog& log : result.logs[0]) rep.m_trace.push_back(log.m);
  return result;
}

std::vector<ExperimentReport> sweep(const std::string& axis,
                                    const std::vector<std::string>& values,
                                    const ScenarioConfig& base) {
  auto as_double = [](const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad numeric value: " + s);
    return v;
  };
  auto as_int = [&](const std::string& s) {
    const double v = as_double(s);
    if (v != std::floor(v)) throw std::invalid_argument("expected integer value: " + s);
    return static_cast<int>(v);
  };
  auto ratio_roster = [](double ratio, int n, bool keep_empty) {
    if (keep_empty) return std::vector<VehicleId>{};
    const int k = static_cast<int>(
        std::clamp<long long>(std::llround(ratio * n), 1ll, static_cast<long long>(n - 1)));
    return front_roster(k);
  };

  std::vector<ExperimentReport> out;
  for (const std::string& value : values) {
    ScenarioConfig config = base;
    if (axis == "attacker_ratio") {
      config.world.attacker_set = ratio_roster(as_double(value), config.world.n, false);
    } else if (axis == "alpha") {
      config.prbi.alpha = as_double(value);
    } else if (axis == "window_size") {
      config.prbi.window_size = as_int(value);
    } else if (axis == "epsilon") {
      config.prbi.epsilon = as_double(value);
    } else if (axis == "attack_period") {
      config.world.attack_model = AttackModel::Intermittent;
      config.world.attack_period = as_int(value);
    } else if (axis == "rounding") {
      if (value == "floor")
        config.prbi.grouping_rounding = Rounding::Floor;
      else if (value == "ceil")
        config.prbi.grouping_rounding = Rounding::Ceil;
      else if (value == "nearest")
        config.prbi.grouping_rounding = Rounding::Nearest;
      else
        throw std::invalid_argument("bad rounding value: " + value);
    } else if (axis == "n") {
      const int n = as_int(value);
      const double ratio = base.world.n > 0 ? static_cast<double>(base.world.attacker_set.size()) /
                                                  base.world.n
                                            : 0.0;
      config.world.n = n;
      config.world.attacker_set = ratio_roster(ratio, n, base.world.attacker_set.empty());
    } else {
      throw std::invalid_argument("unknown sweep axis: " + axis);
    }
    out.push_back(run_scenario(config).report);
  }
  return out;
}

std::vector<double> trace_convergence(int n, int k, Rounding rounding, int frames) {
  if (frames < 1) throw std::invalid_argument("trace_convergence: frames must be >= 1");
  if (n < 2 || k < 1 || k > n - 1)
    throw std::invalid_argument("trace_convergence: need 2 <= n and 1 <= k <= n-1");
  const PrbiConfig defaults;
  const EffectiveAttackOracle oracle(n, front_roster(k));
  const DetectionSet d_ref = oracle.benign_set(0);

  CounterState counters = make_counters(n);
  std::vector<double> p(n, 0.0);
  double m = static_cast<double>(n - 1);
  std::vector<double> series;
  series.reserve(frames);
  for (int frame = 1; frame <= frames; ++frame) {
    const GroupPartition part = soft_sample(p, m, rounding);
    bool ok1 = true;
    bool ok2 = true;
    if (!part.group1.empty())
      ok1 = validate_group(part.group1, oracle.perceive(part.group1, frame), d_ref,
                           defaults.epsilon, defaults.tau_match);
    if (!part.group2.empty())
      ok2 = validate_group(part.group2, oracle.perceive(part.group2, frame), d_ref,
                           defaults.epsilon, defaults.tau_match);
    counters = apply_frame_counts(counters, part.group1, ok1, part.group2, ok2);
    m = estimate_attacker_count(counters);
    p = bayesian_update(counters, p, defaults.gamma, defaults.lambda);
    series.push_back(m);
  }
  return series;
}

ProbabilityTrace trace_probabilities(int n, int k, int frames) {
  if (frames < 1) throw std::invalid_argument("trace_probabilities: frames must be >= 1");
  if (n < 2 || k < 0 || k > n - 1)
    throw std::invalid_argument("trace_probabilities: need 2 <= n and 0 <= k <= n-1");
  const PrbiConfig defaults;
  const EffectiveAttackOracle oracle(n, front_roster(k));
  PrbiState state = make_prbi_state(n);

  ProbabilityTrace trace;
  trace.malicious.assign(n, {});
  bool seen_flag = false;
  for (int frame = 0; frame < frames; ++frame) {
    const FrameOutcome out = step(state, frame, oracle, defaults);
    if (out.flagged) seen_flag = true;
    if (out.converged_now && trace.converged_frame < 0) trace.converged_frame = frame;
    for (int v = 0; v < n; ++v)
      trace.malicious[v].push_back(seen_flag ? 1.0 - state.p_benign[v] : 0.0);
  }
  return trace;
}

CalibrationReport calibrate_world(const WorldConfig& world, double epsilon, double tau_match,
                                  int frames) {
  if (frames < 2) throw std::invalid_argument("calibrate_world: frames must be >= 2");
  const WorldOracle oracle(world);
  CalibrationReport rep;
  DetectionSet prev = oracle.benign_reference(0);
  for (int frame = 1; frame < frames; ++frame) {
    const DetectionSet benign = oracle.benign_reference(frame);
    const DetectionSet corrupted = oracle.corrupted_reference(frame);
    rep.benign.push_back(jaccard(benign, prev, tau_match));
    rep.adversarial.push_back(jaccard(corrupted, prev, tau_match));
    prev = benign;
  }
  const double count = static_cast<double>(rep.benign.size());
  double benign_sum = 0.0, adv_sum = 0.0;
  long long benign_pass = 0, adv_low = 0, adv_flag = 0;
  for (double v : rep.benign) {
    benign_sum += v;
    if (v >= epsilon) ++benign_pass;
  }
  for (double v : rep.adversarial) {
    adv_sum += v;
    if (v <= 0.35) ++adv_low;
    if (v < epsilon) ++adv_flag;
  }
  rep.benign_mean = benign_sum / count;
  rep.adversarial_mean = adv_sum / count;
  rep.benign_pass_rate = benign_pass / count;
  rep.adversarial_low_rate = adv_low / count;
  rep.adversarial_flag_rate = adv_flag / count;
  rep.separation_ok = rep.benign_mean >= 0.7 && rep.benign_mean <= 0.9 &&
                      rep.benign_pass_rate >= 0.99 && rep.adversarial_low_rate >= 0.99 &&
                      rep.adversarial_flag_rate >= 0.99;
  return rep;
}

std::string format_g6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

double round_g6(double value) { return std::strtod(format_g6(value).c_str(), nullptr); }

std::string frames_csv(const ScenarioResult& result, int n) {
  std::string out = "replicate,frame,flagged,verifications,m,converged,jaccard_truth";
  for (int v = 0; v < n; ++v) out += ",p_" + std::to_string(v);
  out += "\n";
  for (std::size_t r = 0; r < result.logs.size(); ++r) {
    for (const FrameLog& log : result.logs[r]) {
      out += std::to_string(r);
      out += "," + std::to_string(log.frame);
      out += "," + std::to_string(log.flagged ? 1 : 0);
      out += "," + std::to_string(log.verifications);
      out += "," + format_g6(log.m);
      out += "," + std::to_string(log.converged ? 1 : 0);
      out += "," + format_g6(log.jaccard_truth);
      for (double p : log.p_benign) out += "," + format_g6(p);
      out += "\n";
    }
  }
  return out;
}

std::string report_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["flagged_frames"] = report.flagged_frames;
  j["ver_min"] = report.ver_min;
  j["ver_max"] = report.ver_max;
  j["ver_avg"] = round_g6(report.ver_avg);
  j["avg_frames"] = round_g6(report.avg_frames);
  j["id_rate"] = round_g6(report.id_rate);
  j["mc_rate"] = round_g6(report.mc_rate);
  j["converged_rate"] = round_g6(report.converged_rate);
  nlohmann::json trace = nlohmann::json::array();
  for (double m : report.m_trace) trace.push_back(round_g6(m));
  j["m_trace"] = trace;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const std::string& axis, const std::vector<std::string>& values,
                      Method method, const std::vector<ExperimentReport>& reports) {
  if (values.size() != reports.size())
    throw std::invalid_argument("sweep_csv: values/reports size mismatch");
  std::string out = axis +
                    ",method,approximate,ver_min,ver_max,ver_avg,avg_frames,id_rate,mc_rate,"
                    "converged_rate,flagged_frames\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const ExperimentReport& r = reports[i];
    out += values[i];
    out += "," + method_name(method);
    out += "," + std::to_string(method == Method::Prbi ? 0 : 1);
    out += "," + std::to_string(r.ver_min);
    out += "," + std::to_string(r.ver_max);
    out += "," + format_g6(r.ver_avg);
    out += "," + format_g6(r.avg_frames);
    out += "," + format_g6(r.id_rate);
    out += "," + format_g6(r.mc_rate);
    out += "," + format_g6(r.converged_rate);
    out += "," + std::to_string(r.flagged_frames);
    out += "\n";
  }
  return out;
}

std::string calibration_csv(const CalibrationReport& report) {
  std::string out = "bin_low,bin_high,benign_count,adversarial_count\n";
  const int bins = 20;
  std::vector<long long> benign_hist(bins, 0), adv_hist(bins, 0);
  auto bin_of = [&](double v) {
    int b = static_cast<int>(v * bins);
    return std::clamp(b, 0, bins - 1);
  };
  for (double v : report.benign) ++benign_hist[bin_of(v)];
  for (double v : report.adversarial) ++adv_hist[bin_of(v)];
  for (int b = 0; b < bins; ++b) {
    out += format_g6(static_cast<double>(b) / bins);
    out += "," + format_g6(static_cast<double>(b + 1) / bins);
    out += "," + std::to_string(benign_hist[b]);
    out += "," + std::to_string(adv_hist[b]);
    out += "\n";
  }
  out += "summary,benign_mean," + format_g6(report.benign_mean) + ",\n";
  out += "summary,adversarial_mean," + format_g6(report.adversarial_mean) + ",\n";
  out += "summary,benign_pass_rate," + format_g6(report.benign_pass_rate) + ",\n";
  out += "summary,adversarial_low_rate," + format_g6(report.adversarial_low_rate) + ",\n";
  out += "summary,adversarial_flag_rate," + format_g6(report.adversarial_flag_rate) + ",\n";
  out += "summary,separation_ok," + std::to_string(report.separation_ok ? 1 : 0) + ",\n";
  return out;
}

}  // namespace prbi
