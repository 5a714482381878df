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
#include <string>
#include <vector>

#include "rvvb/asmtext.hpp"
#include "rvvb/cfg.hpp"
#include "rvvb/isa_model.hpp"

namespace rvvb
{

  /// Where the vl of a known configuration came from.
  struct AvlSource
  {
    enum class Kind { Unknown, Register, Immediate, VlMax };

    Kind kind = Kind::Unknown;
    int reg = -1;
    std::uint64_t imm = 0;

    static AvlSource unknown() { return {}; }
    static AvlSource fromReg(int r) { return { Kind::Register, r, 0 }; }
    static AvlSource fromImm(std::uint64_t v) { return { Kind::Immediate, -1, v }; }
    static AvlSource vlmax() { return { Kind::VlMax, -1, 0 }; }

    bool known() const { return kind != Kind::Unknown; }
    std::string str() const;

    bool operator==(const AvlSource&) const = default;
  };

  /// Lattice value for the vector configuration at a program point.
  struct ConfigState
  {
    enum class Kind { Bottom, Known, Unknown };

    Kind kind = Kind::Bottom;
    VTypeSpec spec;
    AvlSource avl;

    static ConfigState bottom() { return {}; }
    static ConfigState unknown() { ConfigState s; s.kind = Kind::Unknown; return s; }
    static ConfigState known(const VTypeSpec& spec, AvlSource avl)
    { return { Kind::Known, spec, avl }; }

    bool isKnown() const { return kind == Kind::Known; }
    std::string str() const;

    bool operator==(const ConfigState&) const = default;
  };

  /// Least upper bound. Equal states are kept; two known states with the
  /// same vtype but different AVL sources keep the vtype and lose the AVL.
  ConfigState join(const ConfigState& a, const ConfigState& b);

  /// Effect of one item on the configuration.
  ConfigState transfer(const AsmItem& item, const ConfigState& in);

  struct FlowResult
  {
    ControlFlowGraph cfg;
    std::vector<ConfigState> before;
    std::vector<ConfigState> after;
  };

  FlowResult analyze(const ProgramUnit& unit);

  struct RedundantConfig
  {
    std::size_t index = 0;
    std::string reason;
  };

  /// Configuration instructions that re-establish the state already in force
  /// and whose scalar result is unused.
  std::vector<RedundantConfig> findRedundantConfigs(const ProgramUnit& unit,
                                                    const FlowResult& flow,
                                                    const Liveness& liveness);
  std::vector<RedundantConfig> findRedundantConfigs(const ProgramUnit& unit,
                                                    const FlowResult& flow);

}
