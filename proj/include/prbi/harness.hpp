#pragma once

#include <string>
#include <vector>

#include "prbi/defense.hpp"
#include "prbi/world.hpp"

namespace prbi {

enum class Method { Prbi, RandomConsensus, SequentialSplit };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

struct ScenarioConfig {
  WorldConfig world;
  PrbiConfig prbi;
  int frame_count = 100;
  Method method = Method::Prbi;
  int replicates = 50;
};

// throws std::invalid_argument on out-of-range fields
void validate_scenario(const ScenarioConfig& config);

struct FrameLog {
  int frame = 0;
  bool flagged = false;
  int verifications = 0;
  double m = 0.0;
  std::vector<double> p_benign;
  bool converged = false;
  double jaccard_truth = 0.0;  // emitted perception vs the benign rendering
};

struct ExperimentReport {
  long long flagged_frames = 0;
  int ver_min = 0;
  int ver_max = 0;
  double ver_avg = 0.0;
  double avg_frames = 0.0;  // flagged frames from first flag to convergence, inclusive
  double id_rate = 0.0;
  double mc_rate = 0.0;
  double converged_rate = 0.0;
  std::vector<double> m_trace;  // replicate 0
};

struct ScenarioResult {
  std::vector<std::vector<FrameLog>> logs;  // one inner vector per replicate
  ExperimentReport report;
};

// replicate r runs at seed world.seed + r; replicates execute in parallel
// (capped by FLEET_SIM_THREADS) and aggregate in index order
ScenarioResult run_scenario(const ScenarioConfig& config);

// axis in {attacker_ratio, alpha, window_size, epsilon, attack_period,
// rounding, n}; one report per value
std::vector<ExperimentReport> sweep(const std::string& axis,
                                    const std::vector<std::string>& values,
                                    const ScenarioConfig& base);

// per-frame m values from a continuous run with the hypothesis test
// disabled, against a fixed-geometry effective attacker
std::vector<double> trace_convergence(int n, int k, Rounding rounding, int frames);

struct ProbabilityTrace {
  std::vector<std::vector<double>> malicious;  // [vehicle][frame] = 1 - p_benign
  int converged_frame = -1;
};

ProbabilityTrace trace_probabilities(int n, int k, int frames);

struct CalibrationReport {
  std::vector<double> benign;       // jaccard(benign_t, benign_{t-1})
  std::vector<double> adversarial;  // jaccard(corrupted_t, benign_{t-1})
  double benign_mean = 0.0;
  double adversarial_mean = 0.0;
  double benign_pass_rate = 0.0;       // fraction with benign >= epsilon
  double adversarial_low_rate = 0.0;   // fraction with adversarial <= 0.35
  double adversarial_flag_rate = 0.0;  // fraction with adversarial < epsilon
  bool separation_ok = false;
};

CalibrationReport calibrate_world(const WorldConfig& world, double epsilon, double tau_match,
                                  int frames);

// all floats rendered with 6 significant digits
std::string format_g6(double value);
double round_g6(double value);

std::string frames_csv(const ScenarioResult& result, int n);
std::string report_json(const ExperimentReport& report);
std::string sweep_csv(const std::string& axis, const std::vector<std::string>& values,
                      Method method, const std::vector<ExperimentReport>& reports);
std::string calibration_csv(const CalibrationReport& report);

}  // namespace prbi
