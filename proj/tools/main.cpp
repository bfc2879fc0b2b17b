#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prbi/config_io.hpp"
#include "prbi/harness.hpp"
#include "prbi/theory.hpp"

namespace {

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const std::size_t begin = item.find_first_not_of(" \t");
    const std::size_t end = item.find_last_not_of(" \t");
    out.push_back(begin == std::string::npos ? "" : item.substr(begin, end - begin + 1));
  }
  return out;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replicates = 0;
  bool replicates_set = false;
  std::string method;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* config = cmd->add_option("--config", flags.config_path, "scenario config file");
  if (config_required) config->required();
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "base seed override")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--replicates", flags.replicates, "replicate count override")
      ->each([&flags](const std::string&) { flags.replicates_set = true; });
  cmd->add_option("--method", flags.method, "prbi | random_consensus | sequential_split");
}

prbi::ScenarioConfig resolve_config(const CommonFlags& flags) {
  prbi::ScenarioConfig config = prbi::load_scenario_config(flags.config_path);
  if (flags.seed_set) config.world.seed = flags.seed;
  if (flags.replicates_set) config.replicates = flags.replicates;
  if (!flags.method.empty()) {
    try {
      config.method = prbi::method_from_name(flags.method);
    } catch (const std::invalid_argument& e) {
      throw prbi::ConfigError(e.what());
    }
  }
  try {
    prbi::validate_scenario(config);
  } catch (const std::invalid_argument& e) {
    throw prbi::ConfigError(e.what());
  }
  return config;
}

int cmd_simulate(const CommonFlags& flags) {
  const prbi::ScenarioConfig config = resolve_config(flags);
  const prbi::ScenarioResult result = prbi::run_scenario(config);
  write_file(flags.out_dir, "frames.csv", prbi::frames_csv(result, config.world.n));
  write_file(flags.out_dir, "report.json", prbi::report_json(result.report));
  const prbi::ExperimentReport& r = result.report;
  std::printf("method=%s replicates=%d frames=%d\n", prbi::method_name(config.method).c_str(),
              config.replicates, config.frame_count);
  std::printf("flagged_frames=%lld ver_min=%d ver_max=%d ver_avg=%s\n", r.flagged_frames,
              r.ver_min, r.ver_max, prbi::format_g6(r.ver_avg).c_str());
  std::printf("avg_frames=%s id_rate=%s mc_rate=%s converged_rate=%s\n",
              prbi::format_g6(r.avg_frames).c_str(), prbi::format_g6(r.id_rate).c_str(),
              prbi::format_g6(r.mc_rate).c_str(), prbi::format_g6(r.converged_rate).c_str());
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& axis, const std::string& values_text) {
  const prbi::ScenarioConfig base = resolve_config(flags);
  const std::vector<std::string> values = split_csv_list(values_text);
  if (values.empty()) throw prbi::ConfigError("sweep: no values given");
  std::vector<prbi::ExperimentReport> reports;
  try {
    reports = prbi::sweep(axis, values, base);
  } catch (const std::invalid_argument& e) {
    throw prbi::ConfigError(e.what());
  }
  write_file(flags.out_dir, "sweep.csv", prbi::sweep_csv(axis, values, base.method, reports));
  std::printf("sweep axis=%s values=%zu method=%s -> sweep.csv\n", axis.c_str(), values.size(),
              prbi::method_name(base.method).c_str());
  return 0;
}

int cmd_theory(int nmax, const std::string& out_dir, bool write_csv) {
  const std::vector<prbi::CheckResult> checks = prbi::run_theory_checks(nmax);
  bool all_ok = true;
  std::printf("%-34s %-6s %s\n", "check", "status", "detail");
  for (const prbi::CheckResult& c : checks) {
    all_ok = all_ok && c.passed;
    std::printf("%-34s %-6s %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                c.detail.c_str());
  }
  if (write_csv) {
    std::string csv = "name,passed,detail\n";
    for (const prbi::CheckResult& c : checks) {
      std::string detail = c.detail;
      for (char& ch : detail)
        if (ch == '"') ch = '\'';
      csv += c.name + "," + (c.passed ? "1" : "0") + ",\"" + detail + "\"\n";
    }
    write_file(out_dir, "theory_checks.csv", csv);
  }
  return all_ok ? 0 : 1;
}

int cmd_trace(const CommonFlags& flags, int frames_override) {
  const prbi::ScenarioConfig config = resolve_config(flags);
  const int n = config.world.n;
  const int k = static_cast<int>(config.world.attacker_set.size());
  const int frames = frames_override > 0 ? frames_override : config.frame_count;

  if (k >= 1) {
    const std::vector<double> series =
        prbi::trace_convergence(n, k, config.prbi.grouping_rounding, frames);
    std::string csv = "frame,m\n";
    for (std::size_t i = 0; i < series.size(); ++i)
      csv += std::to_string(i + 1) + "," + prbi::format_g6(series[i]) + "\n";
    write_file(flags.out_dir, "m_series.csv", csv);
  }

  const prbi::ProbabilityTrace trace = prbi::trace_probabilities(n, k, frames);
  std::string csv = "frame";
  for (int v = 0; v < n; ++v) csv += ",malicious_" + std::to_string(v);
  csv += "\n";
  for (int f = 0; f < frames; ++f) {
    csv += std::to_string(f);
    for (int v = 0; v < n; ++v) csv += "," + prbi::format_g6(trace.malicious[v][f]);
    csv += "\n";
  }
  write_file(flags.out_dir, "probabilities.csv", csv);
  std::printf("trace n=%d k=%d frames=%d converged_frame=%d\n", n, k, frames,
              trace.converged_frame);
  return 0;
}

int cmd_calibrate(const CommonFlags& flags) {
  const prbi::ScenarioConfig config = resolve_config(flags);
  const int frames = std::max(config.frame_count, 1000);
  const prbi::CalibrationReport report =
      prbi::calibrate_world(config.world, config.prbi.epsilon, config.prbi.tau_match, frames);
  write_file(flags.out_dir, "calibration.csv", prbi::calibration_csv(report));
  std::printf("benign_mean=%s adversarial_mean=%s\n", prbi::format_g6(report.benign_mean).c_str(),
              prbi::format_g6(report.adversarial_mean).c_str());
  std::printf("benign_pass_rate=%s adversarial_low_rate=%s adversarial_flag_rate=%s\n",
              prbi::format_g6(report.benign_pass_rate).c_str(),
              prbi::format_g6(report.adversarial_low_rate).c_str(),
              prbi::format_g6(report.adversarial_flag_rate).c_str());
  std::printf("separation=%s\n", report.separation_ok ? "OK" : "FAILED");
  return report.separation_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic collaborative-perception defense simulator"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "run a scenario, write frames.csv + report.json");
  add_common(simulate, sim_flags, true);

  CommonFlags sweep_flags;
  std::string sweep_axis;
  std::string sweep_values;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep, write sweep.csv");
  add_common(sweep_cmd, sweep_flags, true);
  sweep_cmd->add_option("--axis", sweep_axis, "parameter to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();

  int theory_nmax = 12;
  std::string theory_out = ".";
  bool theory_csv = false;
  CLI::App* theory_cmd = app.add_subcommand("theory", "run the self-verification checks");
  theory_cmd->add_option("--nmax", theory_nmax, "largest fleet size for exhaustive enumeration")
      ->check(CLI::Range(2, 24));
  theory_cmd->add_option("--out", theory_out, "output directory for theory_checks.csv");
  theory_cmd->add_flag("--csv", theory_csv, "also write theory_checks.csv");

  CommonFlags trace_flags;
  int trace_frames = 0;
  CLI::App* trace_cmd =
      app.add_subcommand("trace", "write estimate and probability series for one scenario");
  add_common(trace_cmd, trace_flags, true);
  trace_cmd->add_option("--frames", trace_frames, "trace length override");

  CommonFlags cal_flags;
  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "check the benign/adversarial similarity separation");
  add_common(calibrate_cmd, cal_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags, sweep_axis, sweep_values);
    if (theory_cmd->parsed()) return cmd_theory(theory_nmax, theory_out, theory_csv);
    if (trace_cmd->parsed()) return cmd_trace(trace_flags, trace_frames);
    if (calibrate_cmd->parsed()) return cmd_calibrate(cal_flags);
  } catch (const prbi::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
