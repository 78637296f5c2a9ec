// Copyright 2026 The biastomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "biastomo/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = biastomo::cli;
  CLI::App app{"Objective biased tomography with on/off detectors"};
  app.set_version_flag("--version", biastomo::kLibraryVersion);
  app.require_subcommand(1);

  cli::Options options;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"transfer", "spectrum of the transfer function G for a plan"},
      {"simulate", "sample no-count records for a state and plan"},
      {"reconstruct", "maximum-likelihood reconstruction with error bars"},
      {"wigner", "pointwise Wigner scan and back-transformed diagonals"},
      {"fisher", "element-wise Fisher error table for a state and plan"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", options.config, "JSON config file")->required();
    sub->add_option("--seed", seed, "RNG seed, overrides the config");
    sub->add_option("--out", options.out, "output directory")->capture_default_str();
    sub->add_option("--threshold", threshold, "relative eigenvalue threshold for G");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  const auto* chosen = app.get_subcommands().front();
  options.command = chosen->get_name();
  if (chosen->count("--seed") > 0) options.seed = seed;
  if (chosen->count("--threshold") > 0) options.threshold = threshold;
  return cli::run(options, std::cerr);
}
