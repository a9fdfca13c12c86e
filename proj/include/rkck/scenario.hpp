#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rkck/constraint.hpp"
#include "rkck/types.hpp"

namespace rkck::scenario {

/// Kernel-table CSV used by every command (and by oracle tables, so engine
/// and closed-form output diff line by line). Multi-mode components are
/// semicolon-joined inside a cell.
std::string kernel_table_csv(const std::vector<LabelPair>& grid,
                             const std::vector<Complex>& values);

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
  unsigned long long seed = 0;     // affects only random test-grid generation
  long resource_cap = 20000;       // dimension cap (RKCK_RESOURCE_CAP override)
};

/// Validates and runs one scenario command ("kernel", "reduce", "product",
/// "propagate") against a JSON config string. Returns the produced files
/// (name → content); nothing is written on error.
std::map<std::string, std::string> run_command(const std::string& command,
                                               const std::string& config_text,
                                               const RunOptions& options);

/// run_command plus writing the files into options.out_dir.
void run_and_write(const std::string& command, const std::string& config_text,
                   const RunOptions& options);

}  // namespace rkck::scenario
