#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

// Exercises the installed binary end to end: exit codes, output schemas,
// config handling, and byte-level reproducibility.

namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd =
      std::string(SPINSQ_BIN_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult res;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
    res.out.append(buf, got);
  }
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

fs::path temp_file(const std::string& stem) {
  static int counter = 0;
  return fs::temp_directory_path() /
         ("spinsq_test_" + std::to_string(getpid()) + "_" + stem + "_" +
          std::to_string(counter++));
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("").code == 2);                       // subcommand required
  CHECK(run_cli("sweep-chi --bogus 1").code == 2);    // unknown flag
  CHECK(run_cli("sweep-chi --chi 0.1").code == 2);    // missing --n
  CHECK(run_cli("sweep-chi --n 10 --chi 0.1 --kind banana").code == 2);
  CHECK(run_cli("sweep-chi --n 0 --chi 0.1").code == 2);   // domain error
  CHECK(run_cli("sweep-chi --n 10").code == 2);            // no chi given
  CHECK(run_cli("sweep-chi --n 10 --chi-range 0.1:1").code == 2);
  CHECK(run_cli("montecarlo --phi 2.0").code == 2);        // |phi| >= pi/2
}

TEST_CASE("numerical failures use a distinct exit code") {
  // Near chi = pi the twisted mean spin is degenerate.
  CHECK(run_cli("sweep-chi --n 20 --chi 3.14159 --kind interaction").code == 3);
}

TEST_CASE("sweep-chi CSV schema and reference row") {
  CmdResult res = run_cli("sweep-chi --n 40 --chi 0.122 --kind interaction");
  REQUIRE(res.code == 0);
  std::vector<std::string> lines = split_lines(res.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "N,chi,kind,delta_phi_w,delta_phi_f,xi2,fisher,sql,heisenberg");
  std::vector<std::string> f = split_csv(lines[1]);
  REQUIRE(f.size() == 9);
  CHECK(f[0] == "40");
  CHECK(std::stod(f[1]) == doctest::Approx(0.122).epsilon(1e-12));
  CHECK(f[2] == "interaction");
  CHECK(std::abs(std::stod(f[3]) - 0.06265) < 1e-4);
  CHECK(std::stod(f[7]) == doctest::Approx(1.0 / std::sqrt(40.0)).epsilon(1e-12));
}

TEST_CASE("sweep rows are sorted by N then chi") {
  CmdResult res =
      run_cli("sweep-chi --n 20,10 --chi 0.3,0.1 --kind interaction");
  REQUIRE(res.code == 0);
  std::vector<std::string> lines = split_lines(res.out);
  REQUIRE(lines.size() == 5);
  std::vector<std::pair<int, double>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = split_csv(lines[i]);
    seen.emplace_back(std::stoi(f[0]), std::stod(f[1]));
  }
  CHECK(seen == std::vector<std::pair<int, double>>{
                    {10, 0.1}, {10, 0.3}, {20, 0.1}, {20, 0.3}});
}

TEST_CASE("chi ranges are log spaced inclusive") {
  CmdResult res =
      run_cli("sweep-chi --n 10 --chi-range 0.1:1:3 --kind interaction");
  REQUIRE(res.code == 0);
  std::vector<std::string> lines = split_lines(res.out);
  REQUIRE(lines.size() == 4);
  CHECK(std::stod(split_csv(lines[1])[1]) ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::stod(split_csv(lines[2])[1]) ==
        doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
  CHECK(std::stod(split_csv(lines[3])[1]) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sweep-chi JSON schema carries measurement diagnostics") {
  CmdResult res = run_cli(
      "sweep-chi --n 10 --chi 0.5 --kind measurement --format json");
  REQUIRE(res.code == 0);
  nlohmann::json arr = nlohmann::json::parse(res.out);
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 1);
  const nlohmann::json& row = arr[0];
  for (const char* key :
       {"n", "chi", "kind", "delta_phi_w", "delta_phi_f", "xi2", "fisher",
        "sql", "heisenberg", "f_avg", "delta_phi_f_mean_bound",
        "delta_phi_f_mean_fisher", "jensen_gap", "quadrature_mass"}) {
    CHECK(row.contains(key));
  }
  CHECK(row["n"] == 10);
  CHECK(row["kind"] == "measurement");
  CHECK(std::abs(row["quadrature_mass"].get<double>() - 1.0) < 1e-6);
  CHECK(row["delta_phi_w"].get<double>() > 0.0);
}

TEST_CASE("sweep-n shares the sweep engine") {
  CmdResult res = run_cli("sweep-n --n 10,100 --chi 0.25 --kind interaction");
  REQUIRE(res.code == 0);
  std::vector<std::string> lines = split_lines(res.out);
  REQUIRE(lines.size() == 3);
  CHECK(split_csv(lines[1])[0] == "10");
  CHECK(split_csv(lines[2])[0] == "100");
}

TEST_CASE("optimal-chi CSV stays inside the expected window") {
  CmdResult res = run_cli("optimal-chi --n 40 --kind interaction");
  REQUIRE(res.code == 0);
  std::vector<std::string> lines = split_lines(res.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "N,kind,chi_opt,delta_phi_w_min,evaluations,bracket_lo,bracket_hi");
  std::vector<std::string> f = split_csv(lines[1]);
  REQUIRE(f.size() == 7);
  const double chi_opt = std::stod(f[2]);
  CHECK(chi_opt > 0.157);
  CHECK(chi_opt < 0.197);
  CHECK(std::stoi(f[4]) > 10);
}

TEST_CASE("wigner CSV and outcome flag") {
  CmdResult res =
      run_cli("wigner --n 6 --kind none --n-theta 3 --n-phi 4");
  REQUIRE(res.code == 0);
  std::vector<std::string> lines = split_lines(res.out);
  REQUIRE(lines.size() == 13);  // header + 3 x 4 grid
  CHECK(lines[0] == "theta,phi_az,w");

  CHECK(run_cli("wigner --n 6 --kind measurement --chi 1.0 --n-theta 3 "
                "--n-phi 4")
            .code == 2);  // missing --h
  CHECK(run_cli("wigner --n 6 --kind measurement --chi 1.0 --h 3 "
                "--n-theta 3 --n-phi 4")
            .code == 0);

  CmdResult js = run_cli("wigner --n 6 --kind none --n-theta 3 --n-phi 4 "
                         "--format json");
  REQUIRE(js.code == 0);
  nlohmann::json obj = nlohmann::json::parse(js.out);
  CHECK(obj["n"] == 6);
  CHECK(obj["w"].size() == 12);
  CHECK(obj["theta"].size() == 3);
}

TEST_CASE("montecarlo JSON summary matches the SQL reference") {
  CmdResult res = run_cli("montecarlo --n 20 --shots 50000 --seed 42");
  REQUIRE(res.code == 0);
  nlohmann::json obj = nlohmann::json::parse(res.out);
  for (const char* key : {"n", "kind", "chi", "phi", "shots", "seed",
                          "apply_alignment", "rms_error", "bias", "std_error"}) {
    CHECK(obj.contains(key));
  }
  CHECK_FALSE(obj.contains("workers"));
  CHECK(obj["shots"] == 50000);
  const double rms = obj["rms_error"].get<double>();
  const double se = obj["std_error"].get<double>();
  CHECK(std::abs(rms - 1.0 / std::sqrt(20.0)) <=
        0.05 / std::sqrt(20.0) + 3.0 * se);
}

TEST_CASE("montecarlo per-shot CSV export") {
  fs::path shots_none = temp_file("shots_none");
  CmdResult res = run_cli("montecarlo --n 10 --shots 200 --seed 3 --shots-out " +
                          shots_none.string());
  REQUIRE(res.code == 0);
  std::ifstream in(shots_none);
  REQUIRE(in.good());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::vector<std::string> lines = split_lines(text);
  REQUIRE(lines.size() == 201);
  CHECK(lines[0] == "shot_index,h,n_L,n_R,phi_hat");
  std::vector<std::string> f = split_csv(lines[1]);
  REQUIRE(f.size() == 5);
  CHECK(f[0] == "0");
  CHECK(f[1].empty());  // no mid-circuit outcome without the squeezer
  CHECK(std::stoi(f[2]) + std::stoi(f[3]) == 10);
  fs::remove(shots_none);

  fs::path shots_meas = temp_file("shots_meas");
  res = run_cli("montecarlo --n 10 --kind measurement --chi 0.8 --shots 200 "
                "--seed 3 --shots-out " +
                shots_meas.string());
  REQUIRE(res.code == 0);
  std::ifstream in2(shots_meas);
  REQUIRE(in2.good());
  std::string text2((std::istreambuf_iterator<char>(in2)),
                    std::istreambuf_iterator<char>());
  lines = split_lines(text2);
  REQUIRE(lines.size() == 201);
  f = split_csv(lines[1]);
  CHECK_FALSE(f[1].empty());
  CHECK(std::isfinite(std::stod(f[1])));
  fs::remove(shots_meas);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
  const std::string sweep =
      "sweep-chi --n 10,20 --chi 0.2,0.4 --kind measurement";
  CmdResult a = run_cli(sweep + " --workers 1");
  CmdResult b = run_cli(sweep + " --workers 4");
  CmdResult c = run_cli(sweep + " --workers 4");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(b.out == c.out);

  const std::string mc = "montecarlo --n 20 --kind interaction --chi 0.25 "
                         "--shots 20000 --seed 42";
  CmdResult d = run_cli(mc + " --workers 1");
  CmdResult e = run_cli(mc + " --workers 3");
  REQUIRE(d.code == 0);
  CHECK(d.out == e.out);
}

TEST_CASE("config file provides defaults and flags override") {
  fs::path cfg = temp_file("cfg");
  {
    std::ofstream out(cfg);
    out << "[montecarlo]\n"
        << "n=10\n"
        << "shots=500\n"
        << "seed=5\n";
  }
  CmdResult base = run_cli("--config " + cfg.string() + " montecarlo");
  REQUIRE(base.code == 0);
  nlohmann::json obj = nlohmann::json::parse(base.out);
  CHECK(obj["n"] == 10);
  CHECK(obj["shots"] == 500);
  CHECK(obj["seed"] == 5);

  CmdResult over =
      run_cli("--config " + cfg.string() + " montecarlo --shots 200");
  REQUIRE(over.code == 0);
  nlohmann::json obj2 = nlohmann::json::parse(over.out);
  CHECK(obj2["n"] == 10);
  CHECK(obj2["shots"] == 200);
  fs::remove(cfg);
}

TEST_CASE("design computes the requested quantities") {
  CHECK(run_cli("design").code == 2);

  CmdResult res =
      run_cli("design --energy-kev 100 --d-over-r 10 --current-na 1");
  REQUIRE(res.code == 0);
  nlohmann::json d = nlohmann::json::parse(res.out);
  CHECK(std::abs(d["beta"].get<double>() - 0.5482) < 1e-4);
  CHECK(std::abs(d["chi_int"].get<double>() - 0.122058) < 1e-5);
  CHECK(std::abs(d["mean_spacing_m"].get<double>() - 0.026332) < 1e-5);
  CHECK(std::abs(d["pair_coulomb_phase_rad"].get<double>() - 0.5055) < 1e-3);
  CHECK(d["path_m"] == 1.0);

  CmdResult geo = run_cli(
      "design --energy-kev 100 --d-over-r 10 --length-m 0.35 "
      "--separation-m 10e-6 --radius-m 1e-6");
  REQUIRE(geo.code == 0);
  nlohmann::json g = nlohmann::json::parse(geo.out);
  CHECK(g.contains("capacitance_f"));
  // The capacitance route and the closed cylindrical form must agree when
  // the geometry matches the quoted d/r.
  CHECK(std::abs(g["chi_int_general"].get<double>() -
                 g["chi_int"].get<double>()) < 1e-10);
}
