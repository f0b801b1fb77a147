// SPDX-License-Identifier: Apache-2.0

// Exit-code contract of the command-line tool: 0 success, 1 usage, 2 data
// validation, 3 numerical failure. Drives the real binary (argv[1]).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string g_cli;

int run(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

int g_failures = 0;

void expect(int got, int want, const std::string& label) {
  if (got != want) {
    std::cerr << "FAIL " << label << ": exit " << got << ", expected " << want << "\n";
    ++g_failures;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_exit_codes <path-to-cli>\n";
    return 64;
  }
  g_cli = argv[1];

  const fs::path dir = fs::temp_directory_path() / "metacog_exit_codes";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string out = " --output-dir \"" + dir.string() + "\"";

  expect(run("gen-synthetic --law calibrated --n 50 --seed 1" + out), 0, "success");
  expect(run("--no-such-flag"), 1, "unknown flag");
  expect(run("fit-decay"), 1, "usage: no subcommand arguments");
  expect(run("ece --input \"" + (dir / "missing.jsonl").string() + "\"" + out), 2,
         "unreadable input");

  // A corpus whose every line is invalid: data validation.
  std::ofstream bad(dir / "bad.jsonl");
  bad << "{\"query_id\":\"q\",\"sample_id\":0,\"token_logprobs\":[0.5],\"correct\":true}\n";
  bad.close();
  expect(run("ece --input \"" + (dir / "bad.jsonl").string() + "\" --bins 1" + out), 2,
         "invalid line in strict mode");
  expect(run("ece --input \"" + (dir / "bad.jsonl").string() + "\" --bins 1 --lenient" + out),
         2, "lenient with zero accepted lines");

  expect(run("simulate --preset no-such-preset" + out), 2, "unknown preset");
  expect(run("simulate --preset trap-cdkc --variant grpo --steps 5" + out), 0,
         "variant override");
  expect(run("simulate --preset trap-cdkc --variant sarsa --steps 5" + out), 2,
         "unknown variant");
  expect(run("gen-synthetic --law zipf" + out), 2, "unknown law");

  if (g_failures == 0) std::cout << "exit-code contract holds\n";
  return g_failures;
}
