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

#include "rvvb/config_flow.hpp"

#include <deque>

#include <fmt/format.h>

#include "rvvb/error.hpp"

namespace rvvb
{

std::string AvlSource::str() const
{
  switch (kind)
    {
    case Kind::Unknown: return "?";
    case Kind::Register: return scalarRegName(reg);
    case Kind::Immediate: return std::to_string(imm);
    case Kind::VlMax: return "vlmax";
    }
  return "?";
}

std::string ConfigState::str() const
{
  switch (kind)
    {
    case Kind::Bottom: return "bottom";
    case Kind::Unknown: return "unknown";
    case Kind::Known: return fmt::format("known({}, avl={})", spec.str(), avl.str());
    }
  return "?";
}

ConfigState join(const ConfigState& a, const ConfigState& b)
{
  if (a.kind == ConfigState::Kind::Bottom)
    return b;
  if (b.kind == ConfigState::Kind::Bottom)
    return a;
  if (a == b)
    return a;
  if (a.isKnown() and b.isKnown() and a.spec == b.spec)
    return ConfigState::known(a.spec, AvlSource::unknown());
  return ConfigState::unknown();
}

namespace
{

  unsigned sewLmulRatio(const VTypeSpec& s)
  {
    // SEW/LMUL scaled by 8 so fractional LMUL stays integral.
    return s.sew * 8 * lmulDenominator(s.lmul) / lmulNumerator(s.lmul);
  }

  bool writesVlCsr(const Instruction& instr)
  {
    if (not instr.mnemonic.starts_with("csr") or instr.mnemonic == "csrr")
      return false;
    for (const auto& op : instr.operands)
      if (op.kind == OperandKind::CsrName and (op.text == "vl" or op.text == "vtype"))
        return true;
    return false;
  }

  bool isFaultOnlyFirst(const std::string& mn)
  {
    return mn.starts_with("vl") and mn.ends_with("ff.v");
  }

}

ConfigState transfer(const AsmItem& item, const ConfigState& in)
{
  if (in.kind == ConfigState::Kind::Bottom)
    return in;
  if (item.kind == ItemKind::Raw)
    return ConfigState::unknown();
  if (item.kind != ItemKind::Instruction)
    return in;

  const Instruction& instr = *item.parsed;
  const auto& mn = instr.mnemonic;
  const auto& ops = instr.operands;

  if (mn == "vsetvli" or mn == "vsetivli")
    {
      VTypeSpec spec;
      try
        {
          spec = decodeVTypeOperands(instr);
        }
      catch (const RvvError&)
        {
          return ConfigState::unknown();
        }
      if (ops.size() < 2 or ops[0].kind != OperandKind::ScalarReg)
        return ConfigState::unknown();
      int rd = ops[0].reg;
      AvlSource avl;
      if (mn == "vsetivli")
        {
          if (ops[1].kind != OperandKind::Immediate)
            return ConfigState::unknown();
          avl = AvlSource::fromImm(static_cast<std::uint64_t>(ops[1].imm));
        }
      else if (ops[1].kind != OperandKind::ScalarReg)
        return ConfigState::unknown();
      else if (ops[1].reg != 0)
        avl = rd == ops[1].reg ? AvlSource::unknown() : AvlSource::fromReg(ops[1].reg);
      else if (rd != 0)
        avl = AvlSource::vlmax();
      else if (in.isKnown() and sewLmulRatio(in.spec) == sewLmulRatio(spec))
        avl = in.avl;   // vl kept
      else
        avl = AvlSource::unknown();
      return ConfigState::known(spec, avl);
    }

  if (mn == "vsetvl" or writesVlCsr(instr))
    return ConfigState::unknown();

  auto fx = instructionEffects(instr);
  if (fx.flow == FlowKind::Call or fx.flow == FlowKind::TailCall or
      fx.flow == FlowKind::IndirectJump)
    return ConfigState::unknown();

  ConfigState out = in;
  if (out.isKnown())
    {
      if (isFaultOnlyFirst(mn))
        out.avl = AvlSource::unknown();
      else if (out.avl.kind == AvlSource::Kind::Register and fx.writes.test(out.avl.reg))
        out.avl = AvlSource::unknown();
    }
  return out;
}

FlowResult analyze(const ProgramUnit& unit)
{
  FlowResult r;
  r.cfg = buildCfg(unit);
  const auto& items = unit.items;
  const auto& blocks = r.cfg.blocks;
  r.before.assign(items.size(), ConfigState::bottom());
  r.after.assign(items.size(), ConfigState::bottom());
  if (blocks.empty())
    return r;

  std::vector<ConfigState> blockOut(blocks.size(), ConfigState::bottom());
  auto blockIn = [&](std::size_t bi) {
    const auto& b = blocks[bi];
    if (b.entryUnknown or r.cfg.preds[bi].empty())
      return ConfigState::unknown();
    ConfigState s = ConfigState::bottom();
    for (auto p : r.cfg.preds[bi])
      s = join(s, blockOut[p]);
    return s;
  };

  std::deque<std::size_t> work;
  std::vector<bool> queued(blocks.size(), true);
  for (std::size_t bi = 0; bi < blocks.size(); ++bi)
    work.push_back(bi);
  while (not work.empty())
    {
      auto bi = work.front();
      work.pop_front();
      queued[bi] = false;
      ConfigState s = blockIn(bi);
      for (std::size_t i = blocks[bi].first; i < blocks[bi].last; ++i)
        {
          r.before[i] = s;
          s = transfer(items[i], s);
          r.after[i] = s;
        }
      if (s != blockOut[bi])
        {
          blockOut[bi] = s;
          for (auto succ : blocks[bi].succs)
            if (not queued[succ])
              {
                queued[succ] = true;
                work.push_back(succ);
              }
        }
    }
  return r;
}

std::vector<RedundantConfig> findRedundantConfigs(const ProgramUnit& unit, const FlowResult& flow,
                                                  const Liveness& liveness)
{
  std::vector<RedundantConfig> out;
  for (std::size_t i = 0; i < unit.items.size(); ++i)
    {
      const auto& item = unit.items[i];
      if (item.kind != ItemKind::Instruction)
        continue;
      const auto& instr = *item.parsed;
      if (instr.mnemonic != "vsetvli" and instr.mnemonic != "vsetivli")
        continue;
      const auto& before = flow.before[i];
      const auto& after = flow.after[i];
      if (not before.isKnown() or not before.avl.known() or before != after)
        continue;
      int rd = instr.operands[0].reg;
      if (rd != 0 and liveness.liveAfter[i].test(rd))
        continue;
      out.push_back({ i, fmt::format("configuration {} with avl {} is already in force",
                                     before.spec.str(), before.avl.str()) });
    }
  return out;
}

std::vector<RedundantConfig> findRedundantConfigs(const ProgramUnit& unit, const FlowResult& flow)
{
  return findRedundantConfigs(unit, flow, computeLiveness(unit, flow.cfg));
}

}
