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

#include <bitset>
#include <cstddef>
#include <string>
#include <vector>

#include "rvvb/asmtext.hpp"

namespace rvvb
{

  using RegSet = std::bitset<32>;

  enum class FlowKind
    {
      Normal,
      CondBranch,     // beq/bnez/...: target label plus fall-through
      Jump,           // j / jal x0: target label only
      Call,           // call / jal ra / jalr ra
      Return,         // ret / jr ra
      TailCall,       // tail
      IndirectJump    // jr / jalr to an unknown target
    };

  /// Scalar register reads/writes and control-flow role of one instruction.
  struct InstrEffects
  {
    RegSet reads;
    RegSet writes;
    FlowKind flow = FlowKind::Normal;
    std::string target;   // branch/jump label operand text
  };

  InstrEffects instructionEffects(const Instruction& instr);

  /// Caller-saved registers (ra, t0-t6, a0-a7).
  RegSet callerSaved();
  /// Registers live at a function return: a0, a1, sp, ra, gp, tp and s0-s11.
  RegSet liveAtReturn();
  /// Registers live at a tail call: arguments plus the return-live set.
  RegSet liveAtTailCall();

  struct BasicBlock
  {
    std::size_t first = 0;        // item index range [first, last)
    std::size_t last = 0;
    std::vector<std::size_t> succs;
    /// Registers observed by code outside the unit when control leaves
    /// from this block (return, unknown branch target, falling off the end).
    RegSet exitLive;
    /// Entered from outside the unit or through a taken label address.
    bool entryUnknown = false;
  };

  /// Conservative control-flow graph over the items of a unit. Labels start
  /// blocks; branches, jumps, calls and returns end them.
  struct ControlFlowGraph
  {
    std::vector<BasicBlock> blocks;
    std::vector<std::size_t> blockOf;              // item index -> block
    std::vector<std::vector<std::size_t>> preds;
  };

  ControlFlowGraph buildCfg(const ProgramUnit& unit);

  /// Index of the label item `target` refers to as seen from item `from`,
  /// honouring numeric local labels ("1f", "1b"); npos when not in the unit.
  std::size_t resolveLabel(const ProgramUnit& unit, const std::string& target, std::size_t from);

  /// Backward scalar-register liveness. `liveAfter[i]` is the set of registers
  /// that may be read after item i executes.
  struct Liveness
  {
    std::vector<RegSet> liveAfter;
    std::vector<RegSet> liveBefore;
  };

  Liveness computeLiveness(const ProgramUnit& unit, const ControlFlowGraph& cfg);

}
