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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rvvb/asmtext.hpp"
#include "rvvb/cfg.hpp"
#include "rvvb/config_flow.hpp"
#include "rvvb/diagnostics.hpp"
#include "rvvb/isa_model.hpp"

namespace rvvb
{

  /// How lowering sequences obtain temporary scalar registers.
  enum class Strategy
    {
      Memory,     // spill temporaries and the vector configuration to the stack
      Register,   // use provably dead scratch registers, fail otherwise
      Auto        // Register when scratch registers are available, else Memory
    };

  const char* strategyName(Strategy s);
  std::optional<Strategy> strategyFromName(std::string_view name);

  struct TranslateOptions
  {
    TargetConfig cfg;
    Strategy strategy = Strategy::Auto;
    bool eliminate_redundant = false;
    bool verbose = false;
    const Catalog* catalog = nullptr;   // builtin when null
  };

  /// Translation decision for one instruction item.
  struct RewritePlan
  {
    AsmItem original;
    std::vector<AsmItem> replacement;
    Category category;
    Diagnostics diagnostics;
    /// Registers clobbered by a Register-strategy sequence.
    RegSet scratch;
    /// Strategy actually used by a lowering sequence.
    std::optional<Strategy> strategy;
  };

  /// Everything a lowering rule needs to know about its site.
  struct RewriteSite
  {
    AsmItem item;
    ConfigState state = ConfigState::unknown();
    /// Scalar registers that may be read after the item. Defaults to all.
    RegSet liveAfter = RegSet().set();
    TargetConfig cfg;
    Strategy strategy = Strategy::Auto;
    bool verbose = false;
  };

  /// Caller-saved registers in scratch preference order: t6..t0, a7..a0.
  const std::vector<int>& scratchPreference();

  /// Pick `needed` registers that `instr` does not mention and that are dead
  /// after it. nullopt when not enough are provably free.
  std::optional<std::vector<int>> selectScratch(const Instruction& instr, RegSet liveAfter,
                                                unsigned needed);
  std::optional<std::vector<int>> selectScratch(const ProgramUnit& unit,
                                                const Liveness& liveness, std::size_t index,
                                                unsigned needed);

  RewritePlan lowerConfig(const RewriteSite& site);
  RewritePlan lowerWholeRegister(const RewriteSite& site);
  RewritePlan lowerMemoryEew(const RewriteSite& site, const Catalog& catalog = Catalog::builtin());
  RewritePlan lowerCsrShim(const RewriteSite& site);

  /// Classify the site's instruction and build its plan.
  RewritePlan planRewrite(const RewriteSite& site, const Catalog& catalog = Catalog::builtin());

  struct TranslationResult
  {
    ProgramUnit unit;
    Diagnostics diagnostics;
    /// Union of registers clobbered by Register-strategy sequences.
    RegSet scratch;
    /// Redundant configuration sites found in the input.
    std::vector<RedundantConfig> redundant;

    bool ok() const
    { return not hasSeverity(diagnostics, Severity::Error); }
  };

  /// Rewrite an RVV 1.0 unit into RVV 0.7.1. Never throws on content;
  /// problems are reported as diagnostics.
  TranslationResult translateProgram(const ProgramUnit& unit, const TranslateOptions& opts);

}
