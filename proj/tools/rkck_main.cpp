#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rkck/scenario.hpp"
#include "rkck/types.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rkck::ValidationError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rkck — constrained quantization in truncated Fock spaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  unsigned long long seed = 0;

  for (const char* name : {"kernel", "reduce", "product", "propagate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads for grid evaluation");
    sub->add_option("--seed", seed, "seed for random test-grid generation");
  }

  CLI11_PARSE(app, argc, argv);

  rkck::scenario::RunOptions options;
  options.out_dir = out_dir;
  options.threads = threads;
  options.seed = seed;
  if (const char* cap = std::getenv("RKCK_RESOURCE_CAP")) {
    try {
      options.resource_cap = std::stol(cap);
    } catch (...) {
      std::cerr << "error: RKCK_RESOURCE_CAP is not an integer\n";
      return 1;
    }
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    rkck::scenario::run_and_write(command, read_file(config_path), options);
  } catch (const rkck::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const rkck::AmbiguityError& e) {
    std::cerr << "numerical ambiguity: " << e.what() << "\n";
    return 2;
  } catch (const rkck::ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
