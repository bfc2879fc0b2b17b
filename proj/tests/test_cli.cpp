#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(CLI_PATH) + " " + args + " > cli_out.txt 2> cli_err.txt";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

void write_tiny_config(const std::string& path) {
  std::ofstream out(path);
  out << "n = 5\n"
         "attacker_set = 0\n"
         "seed = 3\n"
         "persist_prob = 0.98\n"
         "miss_prob = 0.01\n"
         "jitter_sigma = 0.04\n"
         "speed_max = 0.12\n"
         "frame_count = 20\n"
         "replicates = 2\n";
}

}  // namespace

TEST_CASE("cli requires a subcommand") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("cli theory checks pass") {
  CHECK(run_cli("theory --nmax 6") == 0);
  const std::string out = slurp("cli_out.txt");
  CHECK(out.find("PASS") != std::string::npos);
  CHECK(out.find("FAIL") == std::string::npos);
  CHECK(run_cli("theory --nmax 1") == 2);  // below the allowed range

  CHECK(run_cli("theory --nmax 6 --csv --out cli_tmp_theory") == 0);
  const std::string csv = slurp("cli_tmp_theory/theory_checks.csv");
  CHECK(csv.rfind("name,passed,detail", 0) == 0);
  CHECK(csv.find(",0,") == std::string::npos);
}

TEST_CASE("cli reports config problems on exit code 2") {
  CHECK(run_cli("simulate --config missing_config.conf") == 2);
  CHECK(slurp("cli_err.txt").find("config error:") != std::string::npos);

  std::ofstream("cli_bad.conf") << "frame_count = 1\n";
  CHECK(run_cli("simulate --config cli_bad.conf") == 2);
  std::remove("cli_bad.conf");

  write_tiny_config("cli_tiny.conf");
  CHECK(run_cli("simulate --config cli_tiny.conf --method voting") == 2);
}

TEST_CASE("cli simulate writes deterministic artifacts") {
  write_tiny_config("cli_tiny.conf");
  CHECK(run_cli("simulate --config cli_tiny.conf --out cli_tmp_a") == 0);
  const std::string stdout_text = slurp("cli_out.txt");
  CHECK(stdout_text.find("method=prbi") != std::string::npos);
  CHECK(stdout_text.find("converged_rate=") != std::string::npos);
  REQUIRE(exists("cli_tmp_a/frames.csv"));
  REQUIRE(exists("cli_tmp_a/report.json"));

  CHECK(run_cli("simulate --config cli_tiny.conf --out cli_tmp_b") == 0);
  CHECK(slurp("cli_tmp_a/frames.csv") == slurp("cli_tmp_b/frames.csv"));
  CHECK(slurp("cli_tmp_a/report.json") == slurp("cli_tmp_b/report.json"));

  // --seed is accepted and the run still produces well-formed artifacts; the
  // logged defense trajectory is noise-independent here, so no diff is expected
  CHECK(run_cli("simulate --config cli_tiny.conf --out cli_tmp_c --seed 99") == 0);
  REQUIRE(exists("cli_tmp_c/report.json"));
}

TEST_CASE("cli calibrate sees the seed through the world stream") {
  {
    std::ofstream out("cli_stock.conf");
    out << "n = 5\n"
           "attacker_set = 0\n"
           "seed = 3\n"
           "frame_count = 1000\n";
  }
  CHECK(run_cli("calibrate --config cli_stock.conf --out cli_cal_a") == 0);
  CHECK(run_cli("calibrate --config cli_stock.conf --out cli_cal_b --seed 99") == 0);
  const std::string cal_a = slurp("cli_cal_a/calibration.csv");
  const std::string cal_b = slurp("cli_cal_b/calibration.csv");
  REQUIRE(!cal_a.empty());
  REQUIRE(!cal_b.empty());
  // similarity scores are continuous draws, so the histograms differ by seed
  CHECK(cal_a != cal_b);
  std::remove("cli_stock.conf");
}

TEST_CASE("cli trace writes both series") {
  write_tiny_config("cli_tiny.conf");
  CHECK(run_cli("trace --config cli_tiny.conf --frames 6 --out cli_tmp_trace") == 0);
  CHECK(slurp("cli_out.txt").find("converged_frame=3") != std::string::npos);
  const std::string m_series = slurp("cli_tmp_trace/m_series.csv");
  CHECK(m_series.rfind("frame,m", 0) == 0);
  long long lines = 0;
  for (char ch : m_series)
    if (ch == '\n') ++lines;
  CHECK(lines == 7);
  const std::string probs = slurp("cli_tmp_trace/probabilities.csv");
  CHECK(probs.rfind("frame,malicious_0,malicious_1", 0) == 0);
}

TEST_CASE("cli sweep writes the table") {
  write_tiny_config("cli_tiny.conf");
  CHECK(run_cli("sweep --config cli_tiny.conf --axis epsilon --values 0.35,0.45 "
                "--out cli_tmp_sweep") == 0);
  const std::string csv = slurp("cli_tmp_sweep/sweep.csv");
  CHECK(csv.rfind("epsilon,method,approximate", 0) == 0);
  CHECK(csv.find("\n0.35,prbi,") != std::string::npos);
  CHECK(csv.find("\n0.45,prbi,") != std::string::npos);
  CHECK(run_cli("sweep --config cli_tiny.conf --axis gamma --values 0.5") == 2);
}
