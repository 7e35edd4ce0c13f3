// Acceptance driver: runs the suite twice through the command line tool and
// prints one PASS/FAIL line per criterion. The determinism line also requires
// the two reports to be byte-identical.

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_verify(const fs::path& out) {
  const std::string cmd = std::string(RLAB_CLI_PATH) + " verify --seed 7 --out '" + out.string() + "' >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / ("rlab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path a = dir / "first.json", b = dir / "second.json";

  const int code_a = run_verify(a);
  const int code_b = run_verify(b);
  if ((code_a != 0 && code_a != 1) || (code_b != 0 && code_b != 1)) {
    std::cerr << "verify did not produce a report (exit " << code_a << ", " << code_b << ")\n";
    return 2;
  }
  const std::string first = slurp(a), second = slurp(b);
  fs::remove_all(dir);

  const auto report = nlohmann::json::parse(first);
  const bool identical = !first.empty() && first == second;
  bool all = true;
  int count = 0;
  for (const auto& c : report.at("criteria")) {
    const int id = c.at("id").get<int>();
    const std::string name = c.at("name").get<std::string>();
    bool passed = c.at("passed").get<bool>();
    std::string note;
    if (name == "determinism") {
      passed = passed && identical;
      note = identical ? "  (reports byte-identical)" : "  (reports differ between runs)";
    }
    all = all && passed;
    ++count;
    std::cout << (passed ? "[PASS] " : "[FAIL] ") << id << " " << name << note << "\n";
  }
  if (count != 12) {
    std::cout << "[FAIL] expected 12 criteria, report has " << count << "\n";
    all = false;
  }
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
