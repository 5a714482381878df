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

#include "rvvb/cfg.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>

namespace rvvb
{

namespace
{

  const std::set<std::string, std::less<>> branchMnemonics = {
    "beq", "bne", "blt", "bge", "bltu", "bgeu", "bgt", "ble", "bgtu", "bleu",
    "beqz", "bnez", "blez", "bgez", "bltz", "bgtz", "c.beqz", "c.bnez" };

  const std::set<std::string, std::less<>> storeMnemonics = {
    "sb", "sh", "sw", "sd", "c.sw", "c.sd", "c.swsp", "c.sdsp" };

  RegSet allRegs()
  {
    RegSet r;
    r.set();
    r.reset(0);
    return r;
  }

  RegSet regs(std::initializer_list<int> list)
  {
    RegSet r;
    for (int i : list)
      r.set(i);
    return r;
  }

  RegSet argRegs()
  {
    using namespace reg;
    return regs({ a0, a1, a2, a3, a4, a5, a6, a7 });
  }

  void addOperandReads(const Instruction& instr, std::size_t from, RegSet& reads)
  {
    for (std::size_t i = from; i < instr.operands.size(); ++i)
      {
        const auto& op = instr.operands[i];
        if (op.kind == OperandKind::ScalarReg or op.kind == OperandKind::MemoryRef)
          reads.set(op.reg);
      }
  }

  std::string lastSymbol(const Instruction& instr)
  {
    for (auto it = instr.operands.rbegin(); it != instr.operands.rend(); ++it)
      if (it->kind == OperandKind::Symbol)
        return it->text;
    return {};
  }

  bool isNumericLabel(std::string_view name)
  {
    return not name.empty() and std::all_of(name.begin(), name.end(),
                                            [](unsigned char c) { return std::isdigit(c); });
  }

  std::vector<std::string> identifierTokens(std::string_view text)
  {
    std::vector<std::string> out;
    std::size_t i = 0;
    auto identChar = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) or c == '_' or c == '.' or c == '$';
    };
    while (i < text.size())
      {
        if (not identChar(text[i]))
          {
            ++i;
            continue;
          }
        std::size_t start = i;
        while (i < text.size() and identChar(text[i]))
          ++i;
        out.emplace_back(text.substr(start, i - start));
      }
    return out;
  }

}

RegSet callerSaved()
{
  using namespace reg;
  return regs({ ra, t0, t1, t2, t3, t4, t5, t6, a0, a1, a2, a3, a4, a5, a6, a7 });
}

RegSet liveAtReturn()
{
  using namespace reg;
  RegSet r = regs({ a0, a1, sp, ra, gp, tp, s0, s1 });
  for (int i = 18; i <= 27; ++i)   // s2..s11
    r.set(i);
  return r;
}

RegSet liveAtTailCall()
{
  return liveAtReturn() | argRegs();
}

InstrEffects instructionEffects(const Instruction& instr)
{
  InstrEffects fx;
  const auto& mn = instr.mnemonic;
  const auto& ops = instr.operands;

  if (branchMnemonics.contains(mn))
    {
      fx.flow = FlowKind::CondBranch;
      fx.target = lastSymbol(instr);
      addOperandReads(instr, 0, fx.reads);
    }
  else if (mn == "j" or mn == "c.j")
    {
      fx.flow = FlowKind::Jump;
      fx.target = lastSymbol(instr);
    }
  else if (mn == "jal" or mn == "call" or mn == "c.jal")
    {
      bool linkZero = ops.size() >= 2 and ops[0].isXReg(0);
      fx.target = lastSymbol(instr);
      if (mn == "jal" and linkZero)
        fx.flow = FlowKind::Jump;
      else
        {
          fx.flow = FlowKind::Call;
          fx.reads = argRegs() | regs({ reg::sp, reg::gp, reg::tp });
          fx.writes = callerSaved();
          if (ops.size() >= 2 and ops[0].kind == OperandKind::ScalarReg)
            fx.writes.set(ops[0].reg);
        }
    }
  else if (mn == "tail")
    {
      fx.flow = FlowKind::TailCall;
      fx.target = lastSymbol(instr);
      fx.reads = liveAtTailCall();
    }
  else if (mn == "ret")
    {
      fx.flow = FlowKind::Return;
      fx.reads = liveAtReturn();
    }
  else if (mn == "jr" or mn == "c.jr")
    {
      bool viaRa = not ops.empty() and ops[0].isXReg(reg::ra);
      fx.flow = viaRa ? FlowKind::Return : FlowKind::IndirectJump;
      fx.reads = viaRa ? liveAtReturn() : allRegs();
    }
  else if (mn == "jalr" or mn == "c.jalr")
    {
      // jalr rs | jalr rd, rs, imm | jalr rd, imm(rs)
      int rd = reg::ra;
      int rs = -1;
      if (ops.size() == 1)
        rs = ops[0].reg;
      else if (not ops.empty())
        {
          rd = ops[0].kind == OperandKind::ScalarReg ? ops[0].reg : reg::ra;
          rs = ops[1].reg;
        }
      if (rd == 0)
        {
          fx.flow = rs == reg::ra ? FlowKind::Return : FlowKind::IndirectJump;
          fx.reads = rs == reg::ra ? liveAtReturn() : allRegs();
        }
      else
        {
          fx.flow = FlowKind::Call;
          fx.reads = argRegs() | regs({ reg::sp, reg::gp, reg::tp });
          if (rs >= 0)
            fx.reads.set(rs);
          fx.writes = callerSaved();
          fx.writes.set(rd);
        }
    }
  else if (storeMnemonics.contains(mn) or mn.starts_with("csrw") or mn.starts_with("csrs") or
           mn.starts_with("csrc"))
    {
      addOperandReads(instr, 0, fx.reads);
    }
  else if (not ops.empty() and ops[0].kind == OperandKind::ScalarReg)
    {
      fx.writes.set(ops[0].reg);
      addOperandReads(instr, 1, fx.reads);
    }
  else
    addOperandReads(instr, 0, fx.reads);

  fx.reads.reset(0);
  fx.writes.reset(0);
  return fx;
}

std::size_t resolveLabel(const ProgramUnit& unit, const std::string& target, std::size_t from)
{
  const auto& items = unit.items;
  if (target.size() >= 2 and isNumericLabel(target.substr(0, target.size() - 1)) and
      (target.back() == 'f' or target.back() == 'b'))
    {
      auto name = target.substr(0, target.size() - 1);
      if (target.back() == 'f')
        {
          for (std::size_t i = from + 1; i < items.size(); ++i)
            if (items[i].kind == ItemKind::Label and items[i].label == name)
              return i;
        }
      else
        {
          for (std::size_t i = std::min(from + 1, items.size()); i-- > 0;)
            if (items[i].kind == ItemKind::Label and items[i].label == name)
              return i;
        }
      return std::string::npos;
    }
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].kind == ItemKind::Label and items[i].label == target)
      return i;
  return std::string::npos;
}

ControlFlowGraph buildCfg(const ProgramUnit& unit)
{
  const auto& items = unit.items;
  ControlFlowGraph g;
  g.blockOf.assign(items.size(), 0);
  if (items.empty())
    return g;

  // Labels whose address escapes (referenced other than as a direct branch
  // target) may be entered from anywhere.
  std::set<std::string, std::less<>> labels;
  for (const auto& it : items)
    if (it.kind == ItemKind::Label)
      labels.insert(it.label);

  std::set<std::string, std::less<>> taken;
  for (const auto& it : items)
    {
      if (it.kind == ItemKind::Label)
        continue;
      std::vector<std::string> toks;
      if (it.kind == ItemKind::Instruction)
        {
          auto fx = instructionEffects(*it.parsed);
          bool direct = fx.flow == FlowKind::CondBranch or fx.flow == FlowKind::Jump;
          for (const auto& op : it.parsed->operands)
            {
              if (direct and op.kind == OperandKind::Symbol and op.text == fx.target)
                continue;
              std::string_view text;
              if (op.kind == OperandKind::Symbol)
                text = op.text;
              else if (op.kind == OperandKind::MemoryRef)
                text = op.disp;
              for (auto& t : identifierTokens(text))
                toks.push_back(std::move(t));
            }
        }
      else
        toks = identifierTokens(it.codeText());
      for (auto& t : toks)
        {
          if (isNumericLabel(t))
            continue;
          if (labels.contains(t))
            taken.insert(t);
          else if (t.size() >= 2 and (t.back() == 'f' or t.back() == 'b') and
                   isNumericLabel(std::string_view(t).substr(0, t.size() - 1)))
            taken.insert(t.substr(0, t.size() - 1));
        }
    }

  // Block boundaries.
  std::vector<bool> starts(items.size() + 1, false);
  starts[0] = true;
  for (std::size_t i = 0; i < items.size(); ++i)
    {
      if (items[i].kind == ItemKind::Label)
        starts[i] = true;
      if (items[i].kind == ItemKind::Instruction and
          instructionEffects(*items[i].parsed).flow != FlowKind::Normal)
        starts[i + 1] = true;
    }
  for (std::size_t i = 0; i < items.size(); ++i)
    {
      if (starts[i])
        {
          BasicBlock b;
          b.first = i;
          g.blocks.push_back(b);
        }
      g.blocks.back().last = i + 1;
      g.blockOf[i] = g.blocks.size() - 1;
    }

  g.preds.assign(g.blocks.size(), {});
  for (std::size_t bi = 0; bi < g.blocks.size(); ++bi)
    {
      auto& b = g.blocks[bi];
      if (bi == 0)
        b.entryUnknown = true;
      for (std::size_t i = b.first; i < b.last; ++i)
        if (items[i].kind == ItemKind::Label and taken.contains(items[i].label))
          b.entryUnknown = true;

      // The terminator is the last instruction of the block, if it transfers control.
      FlowKind flow = FlowKind::Normal;
      std::string target;
      std::size_t termIndex = b.last - 1;
      for (std::size_t i = b.last; i-- > b.first;)
        if (items[i].kind == ItemKind::Instruction)
          {
            auto fx = instructionEffects(*items[i].parsed);
            flow = fx.flow;
            target = fx.target;
            termIndex = i;
            break;
          }

      bool hasNext = bi + 1 < g.blocks.size();
      auto fallThrough = [&] {
        if (hasNext)
          b.succs.push_back(bi + 1);
        else
          b.exitLive = allRegs();
      };
      auto toTarget = [&] {
        auto li = resolveLabel(unit, target, termIndex);
        if (li == std::string::npos)
          b.exitLive |= allRegs();
        else
          b.succs.push_back(g.blockOf[li]);
      };

      switch (flow)
        {
        case FlowKind::Normal:
        case FlowKind::Call:
          fallThrough();
          break;
        case FlowKind::CondBranch:
          toTarget();
          fallThrough();
          break;
        case FlowKind::Jump:
          toTarget();
          break;
        case FlowKind::Return:
        case FlowKind::TailCall:
        case FlowKind::IndirectJump:
          break;
        }
      std::sort(b.succs.begin(), b.succs.end());
      b.succs.erase(std::unique(b.succs.begin(), b.succs.end()), b.succs.end());
    }
  for (std::size_t bi = 0; bi < g.blocks.size(); ++bi)
    for (auto s : g.blocks[bi].succs)
      g.preds[s].push_back(bi);
  return g;
}

Liveness computeLiveness(const ProgramUnit& unit, const ControlFlowGraph& cfg)
{
  const auto& items = unit.items;
  Liveness lv;
  lv.liveAfter.assign(items.size(), RegSet{});
  lv.liveBefore.assign(items.size(), RegSet{});
  std::vector<RegSet> liveIn(cfg.blocks.size());

  auto transferBlock = [&](std::size_t bi, bool record) {
    const auto& b = cfg.blocks[bi];
    RegSet live = b.exitLive;
    for (auto s : b.succs)
      live |= liveIn[s];
    for (std::size_t i = b.last; i-- > b.first;)
      {
        if (record)
          lv.liveAfter[i] = live;
        const auto& it = items[i];
        if (it.kind == ItemKind::Instruction)
          {
            auto fx = instructionEffects(*it.parsed);
            live = (live & ~fx.writes) | fx.reads;
          }
        else if (it.kind == ItemKind::Raw)
          live = allRegs();
        live.reset(0);
        if (record)
          lv.liveBefore[i] = live;
      }
    return live;
  };

  std::deque<std::size_t> work;
  std::vector<bool> queued(cfg.blocks.size(), true);
  for (std::size_t bi = cfg.blocks.size(); bi-- > 0;)
    work.push_back(bi);
  while (not work.empty())
    {
      auto bi = work.front();
      work.pop_front();
      queued[bi] = false;
      auto in = transferBlock(bi, false);
      if (in != liveIn[bi])
        {
          liveIn[bi] = in;
          for (auto p : cfg.preds[bi])
            if (not queued[p])
              {
                queued[p] = true;
                work.push_back(p);
              }
        }
    }
  for (std::size_t bi = 0; bi < cfg.blocks.size(); ++bi)
    transferBlock(bi, true);
  return lv;
}

}
