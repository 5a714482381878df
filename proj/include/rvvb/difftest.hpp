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
#include <optional>
#include <string>
#include <vector>

#include "rvvb/emulator.hpp"
#include "rvvb/kernel.hpp"
#include "rvvb/translator.hpp"

namespace rvvb
{

  enum class Verdict
    {
      Pass,
      Mismatch,           // observable state differs after translation
      TranslationError,   // translator reported errors; nothing executed on 0.7.1
      ExecutionError,     // the translated program faulted on 0.7.1
      InvalidKernel       // the input is not a well-defined RVV 1.0 program
    };

  const char* verdictName(Verdict v);

  struct DiffReport
  {
    std::string kernel;
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::Pass;
    std::string detail;
    Diagnostics diagnostics;
    /// First diverging observation window and both byte strings.
    std::optional<std::size_t> window;
    std::vector<std::uint8_t> expected;
    std::vector<std::uint8_t> actual;
    /// The translator warned about tail-undisturbed semantics.
    bool tail_warning = false;
    /// Translation failed only because no scratch register was free.
    bool no_scratch = false;
    unsigned v071_runs = 0;

    bool pass() const { return verdict == Verdict::Pass; }

    /// One line: "k42: pass" / "k43: mismatch (window 0 at +0x10) ..."
    std::string summary() const;

    bool operator==(const DiffReport&) const = default;
  };

  /// Run the kernel under 1.0, translate it, run the translation under
  /// 0.7.1 and compare observation windows plus scalar registers that the
  /// translation did not claim as scratch. A second 1.0 run with agnostic
  /// elements set to ones rejects kernels that depend on agnostic values.
  DiffReport differentialCheck(const KernelSpec& spec, const TranslateOptions& opts);

  struct TrialOptions
  {
    std::uint64_t seed = 42;
    unsigned trials = 200;
    unsigned vlen_bits = 128;
    Strategy strategy = Strategy::Auto;
    /// Generate tail-undisturbed kernels whose tails are observed.
    bool tail_undisturbed = false;
    unsigned max_ops = 12;
  };

  /// Generator parameters for one trial seed.
  GenParams trialParams(std::uint64_t seed, const TrialOptions& opts);

  /// Reports ordered by seed. The serial version is the reference; the
  /// parallel one splits seeds across OpenMP threads.
  std::vector<DiffReport> runTrialsSerial(const TrialOptions& opts);
  std::vector<DiffReport> runTrialsParallel(const TrialOptions& opts);

}
