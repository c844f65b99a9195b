#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int rc = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + MFI_CLI_PATH + std::string(" ") + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (auto n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.rc = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / "mfi_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string row_value(const std::string& csv, const std::string& metric) {
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(metric + ",", 0) == 0) {
      auto a = line.find(',') + 1;
      return line.substr(a, line.find(',', a) - a);
    }
  }
  return "";
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("design prime-min-error reproduces the experiment plan") {
  auto d = scratch("design");
  auto r = run("design --method prime-min-error --B 40.378e6 --N 31 --res 65 --i 12 --f1 410e6 "
               "--c-mode paper-repro --out " + d.string());
  REQUIRE(r.rc == 0);
  const auto plan = slurp(d / "plan.json");
  CHECK(plan.find("\"common_factor\": 200") != std::string::npos);
  const auto rep = slurp(d / "report.csv");
  CHECK(std::stod(row_value(rep, "umr_m")) == doctest::Approx(23076.9).epsilon(1e-5));
  CHECK(std::stod(row_value(rep, "practical_umr_m")) == doctest::Approx(23077).epsilon(1e-3));
  CHECK(row_value(rep, "coprime") == "true");
  CHECK(row_value(rep, "hmse_m2") == row_value(rep, "crb_m2"));
}

TEST_CASE("design rips and the off-grid error path") {
  auto d = scratch("rips");
  auto r = run("design --method rips --B 40e6 --N 41 --f1 400e6 --c-mode paper-repro --out " +
               d.string());
  REQUIRE(r.rc == 0);
  CHECK(std::stod(row_value(slurp(d / "report.csv"), "umr_m")) == doctest::Approx(300.0));
  CHECK(slurp(d / "plan.json").find("\"step_hz\": 1000000.0") != std::string::npos);

  auto bad = run("design --method rips --B 40e6 --N 3 --res 65 --f1 400e6");
  CHECK(bad.rc != 0);
  CHECK(bad.out.rfind("error: off_grid:", 0) == 0);
  CHECK(std::count(bad.out.begin(), bad.out.end(), '\n') == 1);

  auto missing = run("design --method prime-min-error --B 40e6 --N 41");
  CHECK(missing.rc != 0);
  CHECK(missing.out.rfind("error: ", 0) == 0);
  auto unknown = run("design --method rips --bogus 1");
  CHECK(unknown.rc != 0);
  CHECK(unknown.out.rfind("error: ", 0) == 0);
}

TEST_CASE("design output round-trips through analyze bit for bit") {
  auto d = scratch("roundtrip");
  for (const std::string method :
       {"rips --B 40e6 --N 41 --f1 400e6", "prime-max-error --B 20e6 --N 21 --res 65 --f1 400e6",
        "towers --fN 500e6 --B 100e6 --N 6", "random --B 1e6 --N 8 --res 1e3 --f1 400e6 --seed 3",
        "constrained-optimal --B 12e6 --N 5 --res 1e6 --f1 400e6"}) {
    auto r = run("design --method " + method + " --snr 12 --out " + d.string());
    REQUIRE_MESSAGE(r.rc == 0, r.out);
    auto a = run("analyze --plan " + (d / "plan.json").string() + " --snr 12 --out " +
                 (d / "a").string());
    REQUIRE(a.rc == 0);
    CHECK(slurp(d / "report.csv") == slurp(d / "a" / "report.csv"));
  }
  auto j = run("analyze --plan " + (d / "plan.json").string() + " --format json");
  CHECK(j.rc == 0);
  CHECK(j.out.find("\"umr_m\"") != std::string::npos);
  auto none = run("analyze --plan " + (d / "nope.json").string());
  CHECK(none.rc != 0);
  CHECK(none.out.rfind("error: io:", 0) == 0);
}

TEST_CASE("design from a config file, exclusive with flags") {
  auto d = scratch("config");
  write(d / "design.json",
        R"({"method": "prime-min-error", "f1_hz": 400e6, "bandwidth_hz": 40e6, "count": 41,
            "resolution_hz": 65, "prime_index": 1, "c_mode": "paper-repro"})");
  auto r = run("design --config " + (d / "design.json").string() + " --out " + d.string());
  REQUIRE(r.rc == 0);
  CHECK(std::stod(row_value(slurp(d / "report.csv"), "practical_umr_m")) ==
        doctest::Approx(23193).epsilon(0.002));
  auto both = run("design --config " + (d / "design.json").string() + " --method rips");
  CHECK(both.rc != 0);
}

TEST_CASE("simulate is deterministic across worker counts") {
  auto d = scratch("simulate");
  write(d / "campaign.json", R"({
    "plans": [
      {"label": "rips", "design": {"method": "rips", "f1_hz": 400e6, "bandwidth_hz": 20e6, "count": 21}},
      {"label": "min-error", "design": {"method": "prime-min-error", "f1_hz": 400e6,
        "bandwidth_hz": 20e6, "count": 21, "resolution_hz": 65, "prime_index": 1}}
    ],
    "q0_m": 0.0, "snr_grid_db": [10, 20], "trials": 60, "seed": 5,
    "estimator": {"search_lo_m": -20, "search_hi_m": 20, "step_m": 0.01},
    "outputs": ["mse", "pf", "pa", "histogram"]
  })");
  auto a = run("simulate --config " + (d / "campaign.json").string() + " --out " + (d / "a").string(),
               "MFI_WORKERS=1");
  auto b = run("simulate --config " + (d / "campaign.json").string() + " --out " + (d / "b").string(),
               "MFI_WORKERS=4");
  REQUIRE(a.rc == 0);
  REQUIRE(b.rc == 0);
  for (const char* f : {"mse.csv", "pf.csv", "pa.csv", "histogram.csv"}) {
    const auto x = slurp(d / "a" / f);
    CHECK(!x.empty());
    CHECK(x == slurp(d / "b" / f));
  }
  CHECK(slurp(d / "a" / "mse.csv").rfind("label,snr_db,metric,value,stderr,mmse,hmse,crb,trials,seed", 0) == 0);

  auto s = run("simulate --config " + (d / "campaign.json").string() + " --seed 6 --out " +
               (d / "c").string());
  REQUIRE(s.rc == 0);
  CHECK(slurp(d / "a" / "mse.csv") != slurp(d / "c" / "mse.csv"));
}

TEST_CASE("simulate rejects invalid campaigns with every reason") {
  auto d = scratch("invalid");
  write(d / "bad.json", R"({
    "plans": [
      {"label": "x", "design": {"method": "rips", "f1_hz": 400e6, "bandwidth_hz": 20e6, "count": 21}},
      {"label": "x", "design": {"method": "rips", "f1_hz": 400e6, "bandwidth_hz": 20e6, "count": 21}}
    ],
    "q0_m": 0.0, "snr_grid_db": [], "trials": 0,
    "estimator": {"search_lo_m": -1, "search_hi_m": 1, "step_m": 0.01}
  })");
  auto r = run("simulate --config " + (d / "bad.json").string() + " --out " + d.string());
  CHECK(r.rc != 0);
  CHECK(r.out.rfind("error: validation:", 0) == 0);
  CHECK(r.out.find("trials") != std::string::npos);
  CHECK(r.out.find("snr") != std::string::npos);
  CHECK(r.out.find("label") != std::string::npos);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);
}

TEST_CASE("synth, replay and estimate") {
  auto d = scratch("replay");
  auto r = run("design --method prime-min-error --B 40.378e6 --N 31 --res 65 --i 12 --f1 410e6 "
               "--c-mode paper-repro --out " + d.string());
  REQUIRE(r.rc == 0);
  auto s = run("synth --plan " + (d / "plan.json").string() +
               " --q0 19.19 --snr 40 --experiments 4 --seed 9 --out " + d.string());
  REQUIRE_MESSAGE(s.rc == 0, s.out);
  auto rp = run("replay --record " + (d / "record.csv").string() +
                " --lo -1000 --hi 24000 --step 0.05 --out " + d.string());
  REQUIRE_MESSAGE(rp.rc == 0, rp.out);
  const auto csv = slurp(d / "replay.csv");
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "experiment_id,q_hat_m,q0_m,error_m,unwrap_ok,cost_at_min,grid_index,refined");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    auto a = line.find(',') + 1;
    const double qhat = std::stod(line.substr(a, line.find(',', a) - a));
    CHECK(std::abs(qhat - 19.19) <= 0.05);
    CHECK(line.find(",true,") != std::string::npos);
  }
  CHECK(rows == 4);
  CHECK(fs::exists(d / "replay_summary.csv"));
  CHECK(fs::exists(d / "replay_histogram.csv"));

  // drop one frequency row of the second experiment
  std::istringstream rec(slurp(d / "record.csv"));
  std::string cut;
  int seen = 0;
  std::string victim;
  while (std::getline(rec, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("experiment_id", 0) != 0) {
      const auto id = line.substr(0, line.find(','));
      if (victim.empty() && seen++ == 40) {
        victim = id;
        continue;
      }
    }
    cut += line + "\n";
  }
  write(d / "broken.csv", cut);
  auto bad = run("replay --record " + (d / "broken.csv").string() +
                 " --lo -1000 --hi 24000 --step 0.05");
  CHECK(bad.rc != 0);
  CHECK(bad.out.rfind("error: parse:", 0) == 0);
  CHECK(bad.out.find("'" + victim + "'") != std::string::npos);

  // biased record still replays
  std::string bias = "0.2";
  for (int k = 1; k < 31; ++k) bias += ",0.2";
  auto b = run("synth --plan " + (d / "plan.json").string() + " --q0 19.19 --bias " + bias +
               " --experiments 1 --out " + (d / "bias").string());
  REQUIRE_MESSAGE(b.rc == 0, b.out);
  auto rb = run("replay --record " + (d / "bias" / "record.csv").string() +
                " --lo 0 --hi 40 --step 0.01 --out " + (d / "bias").string());
  CHECK(rb.rc == 0);

  auto e = run("estimate --plan " + (d / "plan.json").string() + " --phases 0.1,0.2 --lo 0 --hi 10 --step 0.1");
  CHECK(e.rc != 0);
  CHECK(e.out.rfind("error: ", 0) == 0);
}
