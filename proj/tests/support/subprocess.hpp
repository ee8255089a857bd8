#pragma once

// Minimal shell-out helper for exercising the command-line tool.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <sys/wait.h>

namespace subprocess {

struct RunResult {
  int exit_code;
  std::string output;  // stdout and stderr combined
};

inline RunResult run(const std::string& command) {
  const std::string full = command + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (pipe == nullptr) return {-1, "popen failed"};
  std::string output;
  char buffer[4096];
  std::size_t got;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) output.append(buffer, got);
  const int status = pclose(pipe);
  const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {exit_code, output};
}

// Path of the pairtest binary under test; ctest sets PAIRTEST_BIN.
inline std::string tool_path() {
  const char* env = std::getenv("PAIRTEST_BIN");
  return env != nullptr ? env : "./pairtest";
}

}  // namespace subprocess
