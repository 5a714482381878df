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

#include "rvvb/translator.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "rvvb/error.hpp"

namespace rvvb
{

const char* strategyName(Strategy s)
{
  switch (s)
    {
    case Strategy::Memory: return "memory";
    case Strategy::Register: return "register";
    case Strategy::Auto: return "auto";
    }
  return "?";
}

std::optional<Strategy> strategyFromName(std::string_view name)
{
  if (name == "memory")
    return Strategy::Memory;
  if (name == "register")
    return Strategy::Register;
  if (name == "auto")
    return Strategy::Auto;
  return std::nullopt;
}

namespace
{

  Operand X(int r) { return Operand::xreg(r); }
  Operand Imm(std::int64_t v) { return Operand::immediate(v); }
  Operand Mem(int base, std::string disp = {}) { return Operand::memory(base, std::move(disp)); }
  Operand Tok(std::string t) { return Operand::vtypeToken(std::move(t)); }
  Operand Csr(std::string c) { return Operand::csr(std::move(c)); }

  using Seq = std::vector<Instruction>;

  void emit(Seq& s, std::string mn, std::vector<Operand> ops)
  {
    s.emplace_back(std::move(mn), std::move(ops));
  }

  void emitVsetvli(Seq& s, int rd, int avl, const std::vector<std::string>& toks)
  {
    std::vector<Operand> ops = { X(rd), X(avl) };
    for (const auto& t : toks)
      ops.push_back(Tok(t));
    emit(s, "vsetvli", std::move(ops));
  }

  Diagnostic diag(Severity sev, std::string code, std::string msg, const SourceLocation& loc)
  {
    return { sev, std::move(code), std::move(msg), loc };
  }

  std::string eolOf(const AsmItem& item)
  {
    return item.terminator.ends_with("\r\n") ? "\r\n" : "\n";
  }

  std::vector<AsmItem> materialize(const AsmItem& orig, Seq seq)
  {
    std::vector<AsmItem> out;
    auto comment = orig.trailingComment();
    auto eol = eolOf(orig);
    for (std::size_t k = 0; k < seq.size(); ++k)
      {
        seq[k].loc = orig.loc;
        auto item = AsmItem::synthesize(seq[k], k == 0 ? std::string_view(comment) : "", eol);
        out.push_back(std::move(item));
      }
    if (not out.empty())
      out.back().terminator = orig.terminator;
    return out;
  }

  RegSet mentioned(const Instruction& instr)
  {
    RegSet r;
    for (const auto& op : instr.operands)
      if (op.kind == OperandKind::ScalarReg or op.kind == OperandKind::MemoryRef)
        r.set(op.reg);
    return r;
  }

  /// Turn a plan into a failure: keep the line, preceded by an .error marker.
  void fail(RewritePlan& plan, Severity sev, const std::string& code, const std::string& msg)
  {
    plan.diagnostics.push_back(diag(sev, code, msg, plan.original.loc));
    AsmItem marker;
    marker.kind = ItemKind::Directive;
    marker.text = fmt::format("\t.error \"{}: {}\"", code, msg);
    marker.terminator = eolOf(plan.original);
    marker.loc = plan.original.loc;
    marker.synthesized = true;
    plan.replacement = { marker, plan.original };
    plan.strategy.reset();
    plan.scratch.reset();
  }

  RewritePlan identityPlan(const RewriteSite& site, Category cat)
  {
    RewritePlan plan;
    plan.original = site.item;
    plan.replacement = { site.item };
    plan.category = std::move(cat);
    return plan;
  }

  /// Registers for a lowering sequence: scratch registers under the register
  /// strategy, stack-saved temporaries under the memory strategy.
  struct Temps
  {
    Strategy used = Strategy::Memory;
    std::vector<int> regs;
    bool ok = false;
  };

  Temps chooseTemps(const RewriteSite& site, unsigned needed, unsigned memoryNeeded,
                    RewritePlan& plan)
  {
    const auto& instr = *site.item.parsed;
    Temps t;
    if (site.strategy != Strategy::Memory)
      {
        if (auto r = selectScratch(instr, site.liveAfter, needed))
          {
            t.used = Strategy::Register;
            t.regs = *r;
            t.ok = true;
            for (int x : t.regs)
              plan.scratch.set(x);
            if (site.verbose)
              {
                std::vector<std::string> names;
                for (int x : t.regs)
                  names.emplace_back(scalarRegName(x));
                plan.diagnostics.push_back(
                  diag(Severity::Note, "N_STRATEGY",
                       fmt::format("lowered {} with scratch register(s) {}", instr.mnemonic,
                                   fmt::join(names, ", ")),
                       site.item.loc));
              }
            return t;
          }
        if (site.strategy == Strategy::Register)
          {
            fail(plan, Severity::Error, "E_NO_SCRATCH",
                 fmt::format("no {} provably dead scratch register(s) for {}", needed,
                             instr.mnemonic));
            return t;
          }
      }

    // Memory strategy: temporaries are saved to and restored from the stack.
    for (const auto& op : instr.operands)
      if (op.kind == OperandKind::ScalarReg and op.reg == reg::sp)
        {
          fail(plan, Severity::Error, "E_SP_OPERAND",
               fmt::format("{} uses sp as a register operand; the memory strategy "
                           "needs a stack frame", instr.mnemonic));
          return t;
        }
    RegSet busy = mentioned(instr);
    for (int r : { reg::t0, reg::t1, reg::t2, reg::t3, reg::t4, reg::t5, reg::t6 })
      if (not busy.test(r) and t.regs.size() < memoryNeeded)
        t.regs.push_back(r);
    t.used = Strategy::Memory;
    t.ok = true;
    if (site.verbose)
      plan.diagnostics.push_back(
        diag(Severity::Note, "N_STRATEGY",
             fmt::format("lowered {} by saving state to the stack{}", instr.mnemonic,
                         site.strategy == Strategy::Auto ? " (no provably dead scratch register)"
                                                         : ""),
             site.item.loc));
    return t;
  }

  // 32-byte frame: temporaries at 0 and 8, vl at 16, vtype at 24.
  void saveConfigToStack(Seq& s, int a, int b)
  {
    emit(s, "addi", { X(reg::sp), X(reg::sp), Imm(-32) });
    emit(s, "sd", { X(a), Mem(reg::sp, "0") });
    emit(s, "sd", { X(b), Mem(reg::sp, "8") });
    emit(s, "csrr", { X(a), Csr("vtype") });
    emit(s, "sd", { X(a), Mem(reg::sp, "24") });
    emit(s, "csrr", { X(a), Csr("vl") });
    emit(s, "sd", { X(a), Mem(reg::sp, "16") });
  }

  void restoreConfigFromStack(Seq& s, int a, int b)
  {
    emit(s, "ld", { X(a), Mem(reg::sp, "16") });
    emit(s, "ld", { X(b), Mem(reg::sp, "24") });
    emit(s, "vsetvl", { X(reg::zero), X(a), X(b) });
    emit(s, "ld", { X(a), Mem(reg::sp, "0") });
    emit(s, "ld", { X(b), Mem(reg::sp, "8") });
    emit(s, "addi", { X(reg::sp), X(reg::sp), Imm(32) });
  }

  void saveConfigToRegs(Seq& s, int vtypeReg, int vlReg)
  {
    emit(s, "csrr", { X(vlReg), Csr("vl") });
    emit(s, "csrr", { X(vtypeReg), Csr("vtype") });
  }

  void restoreConfigFromRegs(Seq& s, int vtypeReg, int vlReg)
  {
    emit(s, "vsetvl", { X(reg::zero), X(vlReg), X(vtypeReg) });
  }

  /// Inside a 32-byte frame an sp-based access must address the caller's sp.
  Instruction rebaseSp(Seq& s, Instruction op, int temp)
  {
    bool usesSp = false;
    for (auto& o : op.operands)
      if (o.kind == OperandKind::MemoryRef and o.reg == reg::sp)
        {
          o = Mem(temp, o.disp);
          usesSp = true;
        }
    if (usesSp)
      emit(s, "addi", { X(temp), X(reg::sp), Imm(32) });
    return op;
  }

  int vectorDataReg(const Instruction& instr)
  {
    return not instr.operands.empty() and instr.operands[0].kind == OperandKind::VectorReg
      ? instr.operands[0].reg : -1;
  }

  void maskLayoutWarning(const RewriteSite& site, RewritePlan& plan)
  {
    const auto& instr = *site.item.parsed;
    bool memory = std::any_of(instr.operands.begin(), instr.operands.end(),
                              [](const Operand& o) { return o.kind == OperandKind::MemoryRef; });
    if (memory and vectorDataReg(instr) == 0)
      plan.diagnostics.push_back(
        diag(Severity::Warning, "W_MASK_LAYOUT",
             fmt::format("{} moves v0 through memory; mask bits are laid out differently "
                         "in RVV 0.7.1", instr.mnemonic),
             site.item.loc));
  }

  std::string lmulTokenFor(unsigned num, unsigned den)
  {
    if (den == 1)
      return "m" + std::to_string(num);
    return "mf" + std::to_string(den);
  }

}

const std::vector<int>& scratchPreference()
{
  using namespace reg;
  static const std::vector<int> order = { t6, t5, t4, t3, t2, t1, t0,
                                          a7, a6, a5, a4, a3, a2, a1, a0 };
  return order;
}

std::optional<std::vector<int>> selectScratch(const Instruction& instr, RegSet liveAfter,
                                              unsigned needed)
{
  RegSet busy = mentioned(instr) | liveAfter;
  std::vector<int> out;
  for (int r : scratchPreference())
    {
      if (out.size() == needed)
        break;
      if (not busy.test(r))
        out.push_back(r);
    }
  if (out.size() < needed)
    return std::nullopt;
  return out;
}

std::optional<std::vector<int>> selectScratch(const ProgramUnit& unit, const Liveness& liveness,
                                              std::size_t index, unsigned needed)
{
  const auto& item = unit.items.at(index);
  if (item.kind != ItemKind::Instruction)
    return std::nullopt;
  return selectScratch(*item.parsed, liveness.liveAfter.at(index), needed);
}

RewritePlan lowerConfig(const RewriteSite& site)
{
  const auto& instr = *site.item.parsed;
  const auto& ops = instr.operands;
  RewritePlan plan = identityPlan(site, classifyInstruction(instr, site.cfg));
  if (instr.mnemonic == "vsetvl")
    return plan;

  VTypeSpec spec;
  try
    {
      spec = decodeVTypeOperands(instr);
    }
  catch (const RvvError& err)
    {
      fail(plan, Severity::Error, err.code(), err.detail());
      return plan;
    }
  auto legal = checkV071Legal(spec, site.cfg);
  if (not legal.legal)
    {
      fail(plan, Severity::Error, legal.code, legal.reason);
      return plan;
    }

  if (spec.tail == Policy::Undisturbed)
    plan.diagnostics.push_back(
      diag(Severity::Warning, "W_TAIL_UNDISTURBED",
           "tail-undisturbed policy requested; RVV 0.7.1 zeroes tail elements", site.item.loc));
  if (site.verbose and (spec.tail != Policy::Unspecified or spec.mask != Policy::Unspecified))
    {
      auto all = spec.tokens();
      std::vector<std::string> dropped(all.begin() + 2, all.end());
      plan.diagnostics.push_back(
        diag(Severity::Note, "N_POLICY_DROPPED",
             fmt::format("policy token(s) {} dropped", fmt::join(dropped, ", ")), site.item.loc));
    }

  int rd = ops[0].reg;
  bool immediate = instr.mnemonic == "vsetivli";
  bool keepVl = not immediate and ops[0].isXReg(0) and ops[1].isXReg(0);

  Seq seq;
  if (immediate or keepVl)
    {
      auto temps = chooseTemps(site, 1, 1, plan);
      if (not temps.ok)
        return plan;
      int s = temps.regs[0];
      bool stack = temps.used == Strategy::Memory;
      if (stack)
        {
          emit(seq, "addi", { X(reg::sp), X(reg::sp), Imm(-16) });
          emit(seq, "sd", { X(s), Mem(reg::sp, "0") });
        }
      if (immediate)
        emit(seq, "li", { X(s), Imm(ops[1].imm) });
      else
        emit(seq, "csrr", { X(s), Csr("vl") });
      emitVsetvli(seq, rd, s, legal.tokens);
      if (stack)
        {
          emit(seq, "ld", { X(s), Mem(reg::sp, "0") });
          emit(seq, "addi", { X(reg::sp), X(reg::sp), Imm(16) });
        }
      plan.strategy = temps.used;
    }
  else if (spec.tail == Policy::Unspecified and spec.mask == Policy::Unspecified)
    return plan;
  else
    emitVsetvli(seq, rd, ops[1].reg, legal.tokens);

  plan.replacement = materialize(site.item, std::move(seq));
  return plan;
}

RewritePlan lowerWholeRegister(const RewriteSite& site)
{
  const auto& instr = *site.item.parsed;
  RewritePlan plan = identityPlan(site, classifyInstruction(instr, site.cfg));
  const auto* entry = Catalog::builtin().find(instr.mnemonic);
  if (not entry or not entry->lowering_rule)
    {
      fail(plan, Severity::Error, "E_UNSUPPORTED",
           fmt::format("{} is not a whole-register instruction", instr.mnemonic));
      return plan;
    }
  maskLayoutWarning(site, plan);

  std::vector<std::string> toks = { "e8", "m" + std::to_string(entry->lower_param) };
  Instruction op(entry->lower_target, instr.operands, instr.loc);

  auto temps = chooseTemps(site, 3, 2, plan);
  if (not temps.ok)
    return plan;
  Seq seq;
  if (temps.used == Strategy::Register)
    {
      int vt = temps.regs[0], vl = temps.regs[1], dummy = temps.regs[2];
      saveConfigToRegs(seq, vt, vl);
      emitVsetvli(seq, dummy, reg::zero, toks);
      seq.push_back(op);
      restoreConfigFromRegs(seq, vt, vl);
    }
  else
    {
      int a = temps.regs[0], b = temps.regs[1];
      saveConfigToStack(seq, a, b);
      emitVsetvli(seq, a, reg::zero, toks);
      seq.push_back(rebaseSp(seq, op, a));
      restoreConfigFromStack(seq, a, b);
    }
  plan.strategy = temps.used;
  plan.replacement = materialize(site.item, std::move(seq));
  return plan;
}

RewritePlan lowerMemoryEew(const RewriteSite& site, const Catalog& catalog)
{
  const auto& instr = *site.item.parsed;
  RewritePlan plan = identityPlan(site, classifyInstruction(instr, site.cfg, catalog));
  const auto* entry = catalog.find(instr.mnemonic);
  if (not entry or entry->lowering_rule != LowerRule::MemoryEEW)
    {
      fail(plan, Severity::Error, "E_UNSUPPORTED",
           fmt::format("{} is not an element-width memory instruction", instr.mnemonic));
      return plan;
    }
  maskLayoutWarning(site, plan);

  const unsigned eew = entry->lower_param;
  const std::string& target = entry->lower_target;
  Instruction op(target, instr.operands, instr.loc);

  if (not site.state.isKnown())
    {
      fail(plan, Severity::Error, "E_EEW_MISMATCH",
           fmt::format("{} needs the current SEW, but the vector configuration is not "
                       "statically known here", instr.mnemonic));
      return plan;
    }
  const auto& spec = site.state.spec;
  if (spec.sew == eew)
    {
      plan.replacement = materialize(site.item, { op });
      return plan;
    }

  bool indexed = target == "vlxe.v" or target == "vsxe.v";
  if (indexed)
    {
      fail(plan, Severity::Error, "E_UNSUPPORTED",
           fmt::format("{} uses {}-bit indices but SEW is {}; RVV 0.7.1 indexed accesses "
                       "take SEW-wide indices", instr.mnemonic, eew, spec.sew));
      return plan;
    }
  if (target == "vleff.v")
    {
      fail(plan, Severity::Error, "E_UNSUPPORTED",
           fmt::format("{} with SEW {} would lose the trimmed vl across the reconfiguration",
                       instr.mnemonic, spec.sew));
      return plan;
    }

  // EMUL = LMUL * EEW / SEW keeps the element count of the access.
  unsigned num = lmulNumerator(spec.lmul) * eew;
  unsigned den = lmulDenominator(spec.lmul) * spec.sew;
  auto g = std::gcd(num, den);
  num /= g;
  den /= g;
  if (den == 1 and num > 8)
    {
      fail(plan, Severity::Error, "E_UNSUPPORTED",
           fmt::format("{} under {} needs EMUL {} (more than 8 registers)", instr.mnemonic,
                       spec.str(), num));
      return plan;
    }
  if (den != 1)
    {
      // A fractional EMUL widens to one register: same element count, but
      // the 0.7.1 mask layout follows the new SEW/LMUL ratio.
      if (instr.hasMask())
        {
          fail(plan, Severity::Error, "E_UNSUPPORTED",
               fmt::format("masked {} under {} needs fractional EMUL {}/{}", instr.mnemonic,
                           spec.str(), num, den));
          return plan;
        }
      num = den = 1;
    }
  std::vector<std::string> toks = { "e" + std::to_string(eew), lmulTokenFor(num, den) };

  plan.diagnostics.push_back(
    diag(Severity::Warning, "W_EEW_WRAPPER",
         fmt::format("{} under {} wrapped in a save/reconfigure/restore sequence; review "
                     "manually", instr.mnemonic, spec.str()),
         site.item.loc));
  if (site.verbose)
    plan.diagnostics.push_back(
      diag(Severity::Note, "N_RECOMMEND",
           fmt::format("configure {},{} before this access to avoid the wrapper", toks[0],
                       toks[1]),
           site.item.loc));

  auto temps = chooseTemps(site, 2, 2, plan);
  if (not temps.ok)
    return plan;
  Seq seq;
  if (temps.used == Strategy::Register)
    {
      int vt = temps.regs[0], vl = temps.regs[1];
      saveConfigToRegs(seq, vt, vl);
      emitVsetvli(seq, reg::zero, vl, toks);
      seq.push_back(op);
      restoreConfigFromRegs(seq, vt, vl);
    }
  else
    {
      int a = temps.regs[0], b = temps.regs[1];
      saveConfigToStack(seq, a, b);
      emitVsetvli(seq, reg::zero, a, toks);
      seq.push_back(rebaseSp(seq, op, a));
      restoreConfigFromStack(seq, a, b);
    }
  plan.strategy = temps.used;
  plan.replacement = materialize(site.item, std::move(seq));
  return plan;
}

RewritePlan lowerCsrShim(const RewriteSite& site)
{
  const auto& instr = *site.item.parsed;
  RewritePlan plan = identityPlan(site, classifyInstruction(instr, site.cfg));
  const auto& ops = instr.operands;
  if (instr.mnemonic != "csrr" or ops.size() != 2 or ops[0].kind != OperandKind::ScalarReg)
    {
      fail(plan, Severity::Error, "E_UNSUPPORTED",
           fmt::format("only 'csrr rd, csr' reads can be translated"));
      return plan;
    }
  const int rd = ops[0].reg;
  const std::string& csr = ops[1].text;
  Seq seq;

  if (csr == "vcsr")
    plan.diagnostics.push_back(
      diag(Severity::Warning, "W_VCSR_SHIM",
           "vcsr read composed from vxrm and vxsat", site.item.loc));

  if (rd == reg::zero)
    {
      emit(seq, "nop", {});
      plan.replacement = materialize(site.item, std::move(seq));
      return plan;
    }

  if (csr == "vlenb" and site.cfg.vlen_bits)
    {
      emit(seq, "li", { X(rd), Imm(*site.cfg.vlen_bits / 8) });
      plan.replacement = materialize(site.item, std::move(seq));
      return plan;
    }

  if (csr == "vlenb")
    {
      // VLMAX at e8,m1 is VLEN/8.
      auto temps = chooseTemps(site, 2, 2, plan);
      if (not temps.ok)
        return plan;
      std::vector<std::string> toks = { "e8", "m1" };
      if (temps.used == Strategy::Register)
        {
          saveConfigToRegs(seq, temps.regs[0], temps.regs[1]);
          emitVsetvli(seq, rd, reg::zero, toks);
          restoreConfigFromRegs(seq, temps.regs[0], temps.regs[1]);
        }
      else
        {
          saveConfigToStack(seq, temps.regs[0], temps.regs[1]);
          emitVsetvli(seq, rd, reg::zero, toks);
          restoreConfigFromStack(seq, temps.regs[0], temps.regs[1]);
        }
      plan.strategy = temps.used;
      plan.replacement = materialize(site.item, std::move(seq));
      return plan;
    }

  // vcsr = vxrm << 1 | vxsat
  auto temps = chooseTemps(site, 1, 1, plan);
  if (not temps.ok)
    return plan;
  int s = temps.regs[0];
  bool stack = temps.used == Strategy::Memory;
  if (stack)
    {
      emit(seq, "addi", { X(reg::sp), X(reg::sp), Imm(-16) });
      emit(seq, "sd", { X(s), Mem(reg::sp, "0") });
    }
  emit(seq, "csrr", { X(rd), Csr("vxrm") });
  emit(seq, "slli", { X(rd), X(rd), Imm(1) });
  emit(seq, "csrr", { X(s), Csr("vxsat") });
  emit(seq, "or", { X(rd), X(rd), X(s) });
  if (stack)
    {
      emit(seq, "ld", { X(s), Mem(reg::sp, "0") });
      emit(seq, "addi", { X(reg::sp), X(reg::sp), Imm(16) });
    }
  plan.strategy = temps.used;
  plan.replacement = materialize(site.item, std::move(seq));
  return plan;
}

RewritePlan planRewrite(const RewriteSite& site, const Catalog& catalog)
{
  const auto& instr = *site.item.parsed;
  auto cat = classifyInstruction(instr, site.cfg, catalog);

  if (isVectorMnemonic(instr.mnemonic))
    if (const auto* e = catalog.find(instr.mnemonic); e and not matchesShape(instr, e->operand_shape))
      {
        RewritePlan plan = identityPlan(site, cat);
        plan.diagnostics.push_back(
          diag(Severity::Error, "E_PARSE",
               fmt::format("operands of {} do not match the form {}", instr.mnemonic,
                           e->operand_shape),
               site.item.loc));
        return plan;
      }

  switch (cat.kind)
    {
    case CategoryKind::NonVector:
    case CategoryKind::PassThrough:
      return identityPlan(site, cat);
    case CategoryKind::Rename:
      {
        RewritePlan plan = identityPlan(site, cat);
        Instruction renamed(cat.rename_target, instr.operands, instr.loc);
        plan.replacement = materialize(site.item, { renamed });
        return plan;
      }
    case CategoryKind::Unsupported:
      {
        RewritePlan plan = identityPlan(site, cat);
        fail(plan, Severity::Error, cat.code, fmt::format("{} ({})", cat.reason, cat.token));
        return plan;
      }
    case CategoryKind::Lower:
      switch (cat.rule)
        {
        case LowerRule::ConfigPolicy:
        case LowerRule::KeepVlConfig:
        case LowerRule::ImmediateConfig:
          return lowerConfig(site);
        case LowerRule::MemoryEEW:
          return lowerMemoryEew(site, catalog);
        case LowerRule::WholeRegister:
        case LowerRule::WholeRegisterMove:
          return lowerWholeRegister(site);
        case LowerRule::CsrShim:
          return lowerCsrShim(site);
        }
    }
  return identityPlan(site, cat);
}

namespace
{

  bool isMacroBlockStart(const AsmItem& item)
  {
    auto t = item.leadingToken();
    return t == ".macro" or t == ".rept" or t == ".irp" or t == ".irpc";
  }

}

TranslationResult translateProgram(const ProgramUnit& unit, const TranslateOptions& opts)
{
  const Catalog& catalog = opts.catalog ? *opts.catalog : Catalog::builtin();
  TranslationResult result;
  result.unit.source_name = unit.source_name;

  FlowResult flow = analyze(unit);
  Liveness liveness = computeLiveness(unit, flow.cfg);
  result.redundant = findRedundantConfigs(unit, flow, liveness);
  std::set<std::size_t> redundant;
  for (const auto& r : result.redundant)
    redundant.insert(r.index);

  auto& out = result.unit.items;
  auto& diags = result.diagnostics;

  for (std::size_t i = 0; i < unit.items.size(); ++i)
    {
      const AsmItem& item = unit.items[i];
      if (item.kind == ItemKind::Raw)
        {
          if (item.note == macroBlockNote)
            {
              if (isMacroBlockStart(item))
                diags.push_back(diag(Severity::Warning, "W_MACRO_PASSTHROUGH",
                                     "assembler macro block passed through unexpanded",
                                     item.loc));
            }
          else if (isVectorMnemonic(item.leadingToken()))
            diags.push_back(diag(Severity::Error, "E_PARSE",
                                 fmt::format("cannot decode vector instruction: {}", item.note),
                                 item.loc));
          out.push_back(item);
          continue;
        }
      if (item.kind != ItemKind::Instruction)
        {
          out.push_back(item);
          continue;
        }

      if (redundant.contains(i))
        {
          if (opts.verbose or opts.eliminate_redundant)
            diags.push_back(diag(Severity::Note, "N_REDUNDANT_CONFIG",
                                 opts.eliminate_redundant
                                   ? "redundant vector configuration removed"
                                   : "vector configuration already in force; it can be removed",
                                 item.loc));
          if (opts.eliminate_redundant)
            {
              // Keep the line structure when a label shares the line.
              if (not out.empty() and out.back().terminator.empty() and
                  item.terminator != ";")
                out.back().terminator = item.terminator;
              continue;
            }
        }

      RewriteSite site;
      site.item = item;
      site.state = flow.before[i];
      if (site.state.kind == ConfigState::Kind::Bottom)
        site.state = ConfigState::unknown();
      site.liveAfter = liveness.liveAfter[i];
      site.cfg = opts.cfg;
      site.strategy = opts.strategy;
      site.verbose = opts.verbose;

      RewritePlan plan = planRewrite(site, catalog);
      result.scratch |= plan.scratch;
      diags.insert(diags.end(), plan.diagnostics.begin(), plan.diagnostics.end());
      // A marker left by an earlier run is not repeated.
      if (plan.replacement.size() == 2 and plan.replacement.front().synthesized and not out.empty() and
          out.back().text == plan.replacement.front().text)
        plan.replacement.erase(plan.replacement.begin());
      for (auto& r : plan.replacement)
        out.push_back(std::move(r));
    }

  if (opts.cfg.strict)
    {
      std::vector<std::string> where;
      for (const auto& d : diags)
        if (d.severity == Severity::Error and d.code != "E_PARSE")
          where.push_back(fmt::format("{}:{}", d.loc.file, d.loc.line));
      if (not where.empty())
        diags.push_back(diag(Severity::Error, "E_UNSUPPORTED",
                             fmt::format("{} construct(s) cannot be translated: {}", where.size(),
                                         fmt::join(where, ", ")),
                             SourceLocation{ unit.source_name, 1 }));
    }
  return result;
}

}
