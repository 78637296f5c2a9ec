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

#pragma once

// Subcommands behind the `biastomo` binary. Each one reads a JSON config,
// writes its files into the output directory and returns the exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "biastomo/io.hpp"

namespace biastomo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct Options {
  std::string command;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  std::optional<double> threshold;
};

/// Config after command-line overrides; this is what gets hashed.
Json effective_config(const Options& options);

/// {"config_hash", "version", "command"}.
Json meta_block(const std::string& command, const Json& config);

void cmd_transfer(const Json& config, const std::filesystem::path& base,
                  const std::filesystem::path& out);
void cmd_simulate(const Json& config, const std::filesystem::path& base,
                  const std::filesystem::path& out);
void cmd_reconstruct(const Json& config, const std::filesystem::path& base,
                     const std::filesystem::path& out);
void cmd_fisher(const Json& config, const std::filesystem::path& base,
                const std::filesystem::path& out);
void cmd_wigner(const Json& config, const std::filesystem::path& base,
                const std::filesystem::path& out);

/// Dispatches and maps exceptions to exit codes, reporting to `err`.
int run(const Options& options, std::ostream& err);

}  // namespace biastomo::cli
