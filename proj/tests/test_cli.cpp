#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and returns its exit status and stdout.
Run run(const std::string& args) {
  const std::string cmd = std::string(RLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("rlab_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("check-kernel certifies exp:2") {
  const Run r = run("check-kernel exp:2");
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  const auto& certs = rep["results"][0]["certificates"];
  bool seen = false;
  for (const auto& c : certs) {
    if (c["criterion"] == "radial-majorant") {
      seen = true;
      CHECK(std::abs(c["bound_value"].get<double>() - 1.0) <= 1e-6);
      CHECK(c["passed"].get<bool>());
    }
  }
  CHECK(seen);
}

TEST_CASE("check-kernel reports per-kernel errors") {
  const Run r = run("check-kernel exp:2 nope:1");
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  CHECK(rep["results"][1].contains("error"));
}

TEST_CASE("validation errors exit with the configuration status") {
  CHECK(run("check-kernel").code == 2);
  CHECK(run("verify --tolerance no.such.key=1").code == 2);
  CHECK(run("verify --only 99").code == 2);
  CHECK(run("estimate --family exp:1 --space p=2").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("counterexample CSV") {
  const Run r = run("counterexample --N 8");
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header == "N,ratio,theoretical_lower_bound");
  double n = 0, ratio = 0, bound = 0;
  char c1 = 0, c2 = 0;
  std::istringstream(row) >> n >> c1 >> ratio >> c2 >> bound;
  CHECK(n == 8);
  CHECK(bound == doctest::Approx(std::sqrt(8.0) / 4 * std::sqrt(1 - 1.0 / 256)));
  CHECK(ratio >= 0.7057);
}

TEST_CASE("estimate writes a witness") {
  const fs::path dir = scratch();
  const fs::path out = dir / "est.json";
  const Run r = run("estimate --family exp:1,exp:4 --space 'p=2,X=l2(2)' --s 1 --budget 200 --restarts 2 --seed 3 --h 0.0625 "
                    "--half-width 1 --out " + out.string());
  REQUIRE(r.code == 0);
  const auto rep = json::parse(slurp(out));
  CHECK(rep["result"]["value"].get<double>() > 0.0);
  const std::string witness = slurp(fs::path(out.string() + ".witness"));
  REQUIRE(witness.size() > 16);
  CHECK(witness.substr(0, 4) == "RLWT");
  fs::remove_all(dir);
}

TEST_CASE("verify runs single criteria and names failures") {
  const fs::path dir = scratch();
  const Run ok = run("verify --only counterexample --out " + (dir / "a.json").string());
  CHECK(ok.code == 0);
  CHECK(ok.out.find("[PASS]") != std::string::npos);
  CHECK(ok.out.find("counterexample") != std::string::npos);
  const auto rep = json::parse(slurp(dir / "a.json"));
  REQUIRE(rep["criteria"].size() == 1);
  CHECK(rep["criteria"][0]["id"] == 1);

  const Run bad = run("verify --only 3 --tolerance class_s.value=-1 --out " + (dir / "b.json").string());
  CHECK(bad.code == 1);
  CHECK(bad.out.find("[FAIL]") != std::string::npos);
  CHECK(bad.out.find("class-s") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("defaults table") {
  const Run r = run("defaults");
  CHECK(r.code == 0);
  CHECK(r.out.find("RLAB_SEED") != std::string::npos);
}
