#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "zeroone/commands.hpp"
#include "zeroone/config.hpp"
#include "zeroone/report.hpp"

using namespace zeroone;
using namespace zeroone::cli;
namespace fs = std::filesystem;

namespace {

const std::string kData = ZEROONE_TEST_DATA;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("zeroone_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run_binary(const std::string& args, std::string* output = nullptr) {
  const auto log = scratch("stdout.txt");
  const std::string cmd = std::string(ZEROONE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::ostringstream os;
    os << in.rdbuf();
    *output = os.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kDriftedBm = R"(
[diffusion]
mu = 1
sigma = 1
ell = -inf
r = inf
x0 = 0
[functional]
f = exp(-x)
)";

}  // namespace

TEST_CASE("config: required keys, defaults and overrides") {
  const auto cfg = parse_config(kDriftedBm);
  CHECK(cfg.mu == "1");
  CHECK(std::isinf(cfg.r));
  CHECK(cfg.sim.n_paths == 10000);
  CHECK(cfg.zero_one.horizons.size() == 4);
  CHECK(cfg.tol == doctest::Approx(1e-9));

  CHECK_THROWS_AS(parse_config("[diffusion]\nmu = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[diffusion]\nmu=0\nsigma=1\nell=0\nr=1\nx0=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[diffusion]\nmu=0\nsigma=1\nell=0\nr=one\nx0=0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[diffusion\nmu=0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kDriftedBm) + "[sim]\nL = -3\n"), ConfigError);

  const auto commented = parse_config(std::string(kDriftedBm) + "[sim]   ; window\nhorizon = 7 ; short\n# note\n");
  CHECK(commented.sim.horizon == 7.0);

  const auto windowed = parse_config(std::string(kDriftedBm) + "[sim]\nL = -3\nR = 4\nseed = 9\n");
  CHECK(windowed.sim.L == -3.0);
  CHECK(windowed.sim.seed == 9);
}

TEST_CASE("config: default window sits inside J") {
  auto cfg = parse_config("[diffusion]\nmu = 1 - x\nsigma = sqrt(2.5*x)\nell = 0\nr = inf\nx0 = 1\n");
  resolve_window(cfg);
  CHECK(cfg.sim.L > 0.0);
  CHECK(cfg.sim.L < 1.0);
  CHECK(cfg.sim.R == doctest::Approx(11.0));
}

TEST_CASE("config: expression errors carry the position") {
  auto cfg = parse_config("[diffusion]\nmu = 0\nsigma = 1 + * x\nell = -inf\nr = inf\nx0 = 0\n");
  try {
    coefficients(cfg);
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("position 4") != std::string::npos);
  }
}

TEST_CASE("report: non-finite numbers are strings, documents round-trip") {
  CHECK(report::number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(report::number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(report::number(0.25) == 0.25);

  const auto o = run_classify(parse_config(kDriftedBm));
  const std::string text = report::serialize(o.report);
  CHECK(report::serialize(report::Json::parse(text)) == text);
  CHECK(o.report["version"] == report::kToolVersion);
  CHECK(o.report["config"]["quad"]["tol"] == 1e-9);
  CHECK(!o.report["config"].contains("workers"));
}

TEST_CASE("check: BM passes") {
  const auto dir = scratch("bm");
  std::string out;
  CHECK(run_binary("check --config " + kData + "/bm.ini --out " + dir.string(), &out) == 0);
  const auto j = report::Json::parse(slurp(dir / "check.json"));
  CHECK(j["validation"]["all_pass"] == true);
  CHECK(j["exit_code"] == 0);
}

TEST_CASE("check: sigma = x on (-1, 1) fails at x = 0") {
  const auto dir = scratch("sigma_x");
  std::string out;
  CHECK(run_binary("check --config " + kData + "/sigma_x.ini --out " + dir.string(), &out) == 1);
  CHECK(out.find("x = 0") != std::string::npos);
  const auto j = report::Json::parse(slurp(dir / "check.json"));
  bool located = false;
  for (const auto& e : j["validation"]["entries"])
    if (e["status"] == "FAIL" && e["location"] == 0.0) located = true;
  CHECK(located);
}

TEST_CASE("check: malformed expression exits 2 with the position") {
  std::string out;
  CHECK(run_binary("check --config " + kData + "/malformed.ini --out " + scratch("bad").string(), &out) == 2);
  CHECK(out.find("position 4") != std::string::npos);
  CHECK(run_binary("check --config " + kData + "/does_not_exist.ini", &out) == 2);
  CHECK(run_binary("check", &out) == 2);
}

TEST_CASE("classify: drifted BM with f = exp(-x)") {
  const auto dir = scratch("dbm");
  std::string out;
  CHECK(run_binary("classify --config " + kData + "/drifted_bm.ini --out " + dir.string(), &out) == 0);
  CHECK(out.find("CONVERGES_AS") != std::string::npos);
  const auto j = report::Json::parse(slurp(dir / "classify.json"));
  CHECK(j["boundary_report"]["zero_one"]["r"]["functional"] == "CONVERGES_AS");
  CHECK(j["boundary_report"]["zero_one"]["ell"]["functional"] == "VACUOUS");
  CHECK(j["boundary_report"]["consistent"] == "true");
}

TEST_CASE("classify: BM with f = 1 is vacuous at both ends, A certain") {
  const auto o = run_classify(load_config(kData + "/bm.ini"));
  CHECK(o.exit_code == 0);
  const auto& b = o.report["boundary_report"];
  CHECK(b["zero_one"]["ell"]["functional"] == "VACUOUS");
  CHECK(b["zero_one"]["r"]["functional"] == "VACUOUS");
  CHECK(b["events"]["a_certain"] == "true");
}

TEST_CASE("classify: CIR with zero attainable has an ell verdict") {
  const auto o = run_classify(load_config(kData + "/cir.ini"));
  CHECK(o.exit_code == 0);
  const auto& b = o.report["boundary_report"];
  CHECK(b["events"]["ell_events"] == "C_ONLY");
  CHECK(b["zero_one"]["ell"]["functional"] != "VACUOUS");
  CHECK(b["zero_one"]["ell"]["criterion"].is_object());
}

TEST_CASE("classify: missing f and non-positive f") {
  auto cfg = load_config(kData + "/sigma_x.ini");
  CHECK_THROWS_AS(run_classify(cfg), ConfigError);
  auto bad = parse_config(kDriftedBm);
  bad.f = "x";
  CHECK(run_classify(bad).exit_code == 1);
}

TEST_CASE("verify: small drifted BM run, dumps and determinism") {
  auto cfg = load_config(kData + "/drifted_bm.ini");
  cfg.sim.n_paths = 600;
  cfg.sim.horizon = 30;
  cfg.zero_one.n_paths = 300;
  cfg.zero_one.horizons = {10, 20, 40};
  cfg.dump_paths = 3;
  cfg.out_dir = scratch("verify").string();
  std::ostringstream out, err;
  const int code = execute("verify", cfg, 1, out, err);
  CHECK(code != 4);
  CHECK(err.str().empty());
  const auto dump = slurp(fs::path(cfg.out_dir) / "verify_paths.jsonl");
  std::istringstream lines(dump);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto rec = report::Json::parse(line);
    CHECK(rec["seed"] == n);
    CHECK(rec["times"].size() == rec["phi"].size());
    ++n;
  }
  CHECK(n == 3);
  const auto a = run_verify(cfg, 1), b = run_verify(cfg, 3);
  CHECK(report::serialize(a.report) == report::serialize(b.report));
  CHECK(a.report["exit_code"] == code);
}

TEST_CASE("verify: nothing to test when every verdict is vacuous") {
  auto cfg = load_config(kData + "/bm.ini");
  cfg.sim.n_paths = 200;
  cfg.sim.horizon = 5;
  cfg.sim.L = -1;
  cfg.sim.R = 1;
  cfg.window_given = true;
  const auto o = run_verify(cfg, 1);
  CHECK(o.report["zero_one_law"]["verdict_agreement"] == "UNDERPOWERED");
  CHECK(o.exit_code == 5);
}
