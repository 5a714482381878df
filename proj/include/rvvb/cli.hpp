// Copyright 2026 The rvv-backport Authors.
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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rvvb/diagnostics.hpp"
#include "rvvb/translator.hpp"

namespace rvvb::cli
{

  enum class Preset { Vls, Vla };

  struct CliOptions
  {
    std::string subcommand;
    std::filesystem::path input;
    std::optional<std::filesystem::path> output;
    Strategy strategy = Strategy::Auto;
    std::optional<unsigned> vlen_bits;
    bool strict = false;
    bool strict_warnings = false;
    bool verbose = false;
    bool eliminate_redundant = false;

    // difftest
    std::uint64_t seed = 42;
    unsigned trials = 200;
    bool tail_undisturbed = false;
    bool serial = false;
    std::filesystem::path artifacts = "difftest-artifacts";

    // pipeline
    Preset preset = Preset::Vls;
    std::string cc;   // from RVVB_CC
    std::string as;   // from RVVB_AS
  };

  /// Process exit codes.
  inline constexpr int exitOk = 0;
  inline constexpr int exitUnsupported = 1;
  inline constexpr int exitInputError = 2;
  inline constexpr int exitWarnings = 3;
  inline constexpr int exitCompileFailed = 4;
  inline constexpr int exitAssembleFailed = 5;

  /// Translate exit code as a function of the diagnostic set.
  int exitCodeFor(const Diagnostics& diags, bool strict, bool strictWarnings);

  /// Default output path: the input with ".rvv071.s" appended.
  std::filesystem::path defaultOutput(const std::filesystem::path& input);

  /// Compiler flags for a preset (without input and output operands).
  std::vector<std::string> compilerFlags(Preset p);
  /// Assembler flags for RVV 0.7.1.
  std::vector<std::string> assemblerFlags();

  int cmdTranslate(const CliOptions& o, std::ostream& out, std::ostream& err);
  int cmdCheck(const CliOptions& o, std::ostream& out, std::ostream& err);
  int cmdDifftest(const CliOptions& o, std::ostream& out, std::ostream& err);
  int cmdPipeline(const CliOptions& o, std::ostream& out, std::ostream& err);

  /// Parse arguments (argv[0] is the program name), fill toolchain commands
  /// from the environment and dispatch.
  int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}
