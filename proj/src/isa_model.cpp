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

#include "rvvb/isa_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rvvb/error.hpp"

namespace rvvb
{

  // Defined in the generated catalog_data.cpp.
  extern const char* const builtinCatalogText;

namespace
{

  struct LmulRow
  {
    Lmul lmul;
    const char* token;
    unsigned num;
    unsigned den;
  };

  constexpr LmulRow lmulRows[] = {
    { Lmul::MF8, "mf8", 1, 8 },
    { Lmul::MF4, "mf4", 1, 4 },
    { Lmul::MF2, "mf2", 1, 2 },
    { Lmul::M1,  "m1",  1, 1 },
    { Lmul::M2,  "m2",  2, 1 },
    { Lmul::M4,  "m4",  4, 1 },
    { Lmul::M8,  "m8",  8, 1 } };

  const LmulRow& row(Lmul l)
  { return lmulRows[static_cast<int>(l)]; }

  bool isPowerOfTwo(unsigned v)
  { return v != 0 and (v & (v - 1)) == 0; }

  std::vector<std::string> splitWords(std::string_view line)
  {
    std::vector<std::string> words;
    std::istringstream in{std::string(line)};
    std::string w;
    while (in >> w)
      words.push_back(w);
    return words;
  }

}

unsigned lmulNumerator(Lmul l)
{ return row(l).num; }

unsigned lmulDenominator(Lmul l)
{ return row(l).den; }

bool isFractional(Lmul l)
{ return row(l).den > 1; }

std::string lmulToken(Lmul l)
{ return row(l).token; }

std::optional<Lmul> lmulFromToken(std::string_view token)
{
  for (const auto& r : lmulRows)
    if (token == r.token)
      return r.lmul;
  return std::nullopt;
}

std::optional<Lmul> lmulFromInteger(unsigned value)
{
  switch (value)
    {
    case 1: return Lmul::M1;
    case 2: return Lmul::M2;
    case 4: return Lmul::M4;
    case 8: return Lmul::M8;
    default: return std::nullopt;
    }
}

std::vector<std::string> VTypeSpec::tokens() const
{
  std::vector<std::string> out{ "e" + std::to_string(sew), lmulToken(lmul) };
  if (tail != Policy::Unspecified)
    out.push_back(tail == Policy::Agnostic ? "ta" : "tu");
  if (mask != Policy::Unspecified)
    out.push_back(mask == Policy::Agnostic ? "ma" : "mu");
  return out;
}

std::string VTypeSpec::str() const
{
  std::string out;
  for (const auto& t : tokens())
    out += (out.empty() ? "" : ",") + t;
  return out;
}

void TargetConfig::validate() const
{
  if (elen_bits < 8 or not isPowerOfTwo(elen_bits) or elen_bits > 64)
    throw RvvError("E_CONFIG", fmt::format("ELEN {} must be a power of two in [8, 64]", elen_bits));
  if (vlen_bits)
    {
      if (not isPowerOfTwo(*vlen_bits))
        throw RvvError("E_CONFIG", fmt::format("VLEN {} is not a power of two", *vlen_bits));
      if (*vlen_bits < elen_bits or *vlen_bits > 65536)
        throw RvvError("E_CONFIG", fmt::format("VLEN {} must satisfy ELEN <= VLEN <= 65536", *vlen_bits));
    }
}

VTypeSpec decodeVTypeTokens(std::span<const std::string> tokens)
{
  // Assembler order: SEW, LMUL, tail policy, mask policy. `stage` is the
  // next slot that may be filled.
  VTypeSpec spec;
  int stage = 0;
  bool haveSew = false;

  auto fail = [](const std::string& msg) -> VTypeSpec { throw RvvError("E_VTYPE_SYNTAX", msg); };

  for (const auto& raw : tokens)
    {
      std::string t = raw;
      std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });

      int slot = -1;
      if (t.size() > 1 and t[0] == 'e' and std::isdigit(static_cast<unsigned char>(t[1])))
        {
          slot = 0;
          unsigned sew = 0;
          try { sew = static_cast<unsigned>(std::stoul(t.substr(1))); }
          catch (const std::exception&) { return fail("bad element width '" + raw + "'"); }
          if (sew != 8 and sew != 16 and sew != 32 and sew != 64)
            return fail("unsupported element width '" + raw + "'");
          if (stage > 0)
            return fail("duplicate or misplaced element width '" + raw + "'");
          spec.sew = sew;
          haveSew = true;
        }
      else if (auto l = lmulFromToken(t))
        {
          slot = 1;
          if (stage > 1)
            return fail("duplicate or misplaced LMUL '" + raw + "'");
          spec.lmul = *l;
        }
      else if (t == "ta" or t == "tu")
        {
          slot = 2;
          if (stage > 2)
            return fail("duplicate or misplaced tail policy '" + raw + "'");
          spec.tail = t == "ta" ? Policy::Agnostic : Policy::Undisturbed;
        }
      else if (t == "ma" or t == "mu")
        {
          slot = 3;
          if (stage > 3)
            return fail("duplicate or misplaced mask policy '" + raw + "'");
          spec.mask = t == "ma" ? Policy::Agnostic : Policy::Undisturbed;
        }
      else
        return fail("unknown vtype token '" + raw + "'");
      stage = slot + 1;
    }
  if (not haveSew)
    return fail("missing element width");
  return spec;
}

VTypeSpec decodeVTypeOperands(const Instruction& instr)
{
  std::vector<std::string> tokens;
  for (const auto& op : instr.operands)
    if (op.kind == OperandKind::VTypeToken)
      tokens.push_back(op.text);
  return decodeVTypeTokens(tokens);
}

Legality checkV071Legal(const VTypeSpec& spec, const TargetConfig& cfg)
{
  Legality result;
  if (isFractional(spec.lmul))
    {
      result.code = "E_FRACTIONAL_LMUL";
      result.reason = fmt::format("fractional LMUL {} cannot be expressed in RVV 0.7.1",
                                  lmulToken(spec.lmul));
      return result;
    }
  if (spec.sew > cfg.elen_bits)
    {
      result.code = "E_SEW_EXCEEDS_ELEN";
      result.reason = fmt::format("SEW {} exceeds the target ELEN of {}", spec.sew, cfg.elen_bits);
      return result;
    }
  result.legal = true;
  result.tokens = { "e" + std::to_string(spec.sew), lmulToken(spec.lmul) };
  return result;
}

const char* lowerRuleName(LowerRule r)
{
  switch (r)
    {
    case LowerRule::ConfigPolicy:      return "ConfigPolicy";
    case LowerRule::KeepVlConfig:      return "KeepVlConfig";
    case LowerRule::ImmediateConfig:   return "ImmediateConfig";
    case LowerRule::MemoryEEW:         return "MemoryEEW";
    case LowerRule::WholeRegister:     return "WholeRegister";
    case LowerRule::WholeRegisterMove: return "WholeRegisterMove";
    case LowerRule::CsrShim:           return "CsrShim";
    }
  return "?";
}

std::optional<LowerRule> lowerRuleFromName(std::string_view name)
{
  for (auto r : { LowerRule::ConfigPolicy, LowerRule::KeepVlConfig, LowerRule::ImmediateConfig,
                  LowerRule::MemoryEEW, LowerRule::WholeRegister, LowerRule::WholeRegisterMove,
                  LowerRule::CsrShim })
    if (name == lowerRuleName(r))
      return r;
  return std::nullopt;
}

const char* categoryKindName(CategoryKind k)
{
  switch (k)
    {
    case CategoryKind::NonVector:   return "NonVector";
    case CategoryKind::PassThrough: return "PassThrough";
    case CategoryKind::Rename:      return "Rename";
    case CategoryKind::Lower:       return "Lower";
    case CategoryKind::Unsupported: return "Unsupported";
    }
  return "?";
}

std::string Category::str() const
{
  switch (kind)
    {
    case CategoryKind::Rename:      return "Rename(" + rename_target + ")";
    case CategoryKind::Lower:       return std::string("Lower(") + lowerRuleName(rule) + ")";
    case CategoryKind::Unsupported: return "Unsupported(" + code + ")";
    default:                        return categoryKindName(kind);
    }
}

Catalog Catalog::parse(std::string_view text, std::string_view name)
{
  Catalog cat;
  int lineNo = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line))
    {
      ++lineNo;
      if (auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      auto words = splitWords(line);
      if (words.empty())
        continue;

      auto bad = [&](const std::string& why) {
        throw RvvError("E_CATALOG", fmt::format("{}:{}: {}", name, lineNo, why));
      };
      if (words.size() < 4)
        bad("expected: mnemonic versions shape rule");

      CatalogEntry e;
      e.mnemonic = words[0];
      if (words[1] == "both")
        e.present_in_v071 = e.present_in_v10 = true;
      else if (words[1] == "v10")
        e.present_in_v10 = true;
      else if (words[1] == "v071")
        e.present_in_v071 = true;
      else
        bad("unknown version set '" + words[1] + "'");
      e.operand_shape = words[2] == "-" ? std::string() : words[2];

      const auto& rule = words[3];
      if (rule == "pass")
        ;
      else if (rule == "config")
        e.config = true;
      else if (rule == "rename")
        {
          if (words.size() != 5)
            bad("rename needs a target");
          e.rename_071 = words[4];
        }
      else if (rule == "lower")
        {
          if (words.size() < 5)
            bad("lower needs a rule id");
          e.lowering_rule = lowerRuleFromName(words[4]);
          if (not e.lowering_rule)
            bad("unknown lowering rule '" + words[4] + "'");
          if (words.size() >= 6)
            e.lower_target = words[5];
          if (words.size() >= 7)
            e.lower_param = static_cast<unsigned>(std::stoul(words[6]));
        }
      else if (rule == "unsupported")
        {
          std::string reason;
          for (std::size_t i = 4; i < words.size(); ++i)
            reason += (reason.empty() ? "" : " ") + words[i];
          e.unsupported_reason = reason.empty() ? "no RVV 0.7.1 counterpart" : reason;
        }
      else
        bad("unknown rule '" + rule + "'");

      if (cat.index_.contains(e.mnemonic))
        bad("duplicate mnemonic '" + e.mnemonic + "'");
      cat.index_.emplace(e.mnemonic, cat.entries_.size());
      cat.entries_.push_back(std::move(e));
    }
  return cat;
}

Catalog Catalog::load(const std::string& path)
{
  std::ifstream in(path);
  if (not in)
    throw RvvError("E_IO", "cannot read catalog " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const Catalog& Catalog::builtin()
{
  static const Catalog instance = parse(builtinCatalogText, "builtin catalog");
  return instance;
}

const CatalogEntry* Catalog::find(std::string_view mnemonic) const
{
  auto it = index_.find(mnemonic);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::string> Catalog::loweringHelperMnemonics()
{
  return { "vsetvli", "vsetvl", "vle.v", "vse.v", "vmv.v.v" };
}

bool isVectorMnemonic(std::string_view mnemonic)
{
  return mnemonic.size() > 1 and mnemonic[0] == 'v';
}

bool matchesShape(const Instruction& instr, std::string_view shape)
{
  if (shape.empty())
    return true;
  std::vector<std::string_view> slots;
  std::size_t start = 0;
  while (start <= shape.size())
    {
      auto comma = shape.find(',', start);
      if (comma == std::string_view::npos)
        comma = shape.size();
      slots.push_back(shape.substr(start, comma - start));
      start = comma + 1;
    }

  const auto& ops = instr.operands;
  std::size_t i = 0;
  for (auto slot : slots)
    {
      if (slot == "M?")
        {
          if (i < ops.size() and ops[i].kind == OperandKind::MaskRef)
            ++i;
          continue;
        }
      if (slot == "T")
        {
          if (i >= ops.size() or ops[i].kind != OperandKind::VTypeToken)
            return false;
          while (i < ops.size() and ops[i].kind == OperandKind::VTypeToken)
            ++i;
          continue;
        }
      if (i >= ops.size())
        return false;
      const auto& op = ops[i++];
      bool ok = false;
      if (slot == "V")
        ok = op.kind == OperandKind::VectorReg;
      else if (slot == "X")
        ok = op.kind == OperandKind::ScalarReg;
      else if (slot == "F")
        ok = op.kind == OperandKind::FloatReg;
      else if (slot == "I")
        ok = op.kind == OperandKind::Immediate;
      else if (slot == "A")
        ok = op.kind == OperandKind::MemoryRef and (op.disp.empty() or (op.disp == "0"));
      else if (slot == "S")
        ok = op.kind == OperandKind::CsrName;
      else if (slot == "M")
        ok = op.kind == OperandKind::VectorReg and op.reg == 0;
      if (not ok)
        return false;
    }
  return i == ops.size();
}

namespace
{

  Category classifyConfig(const Instruction& instr, const TargetConfig& cfg)
  {
    if (instr.mnemonic == "vsetvl")
      return Category::passThrough();

    VTypeSpec spec;
    try
      {
        spec = decodeVTypeOperands(instr);
      }
    catch (const RvvError& err)
      {
        return Category::unsupported(err.code(), err.detail(), instr.mnemonic);
      }
    auto legal = checkV071Legal(spec, cfg);
    if (not legal.legal)
      {
        std::string token = isFractional(spec.lmul) ? lmulToken(spec.lmul) : "e" + std::to_string(spec.sew);
        return Category::unsupported(legal.code, legal.reason, token);
      }
    if (instr.mnemonic == "vsetivli")
      return Category::lower(LowerRule::ImmediateConfig);

    bool keepVl = instr.operands.size() >= 2 and instr.operands[0].isXReg(0) and instr.operands[1].isXReg(0);
    if (keepVl)
      return Category::lower(LowerRule::KeepVlConfig);
    if (spec.tail != Policy::Unspecified or spec.mask != Policy::Unspecified)
      return Category::lower(LowerRule::ConfigPolicy);
    return Category::passThrough();
  }

  Category classifyCsr(const Instruction& instr, const Catalog& catalog)
  {
    for (const auto& op : instr.operands)
      {
        if (op.kind != OperandKind::CsrName)
          continue;
        const auto* e = catalog.find("csr:" + op.text);
        if (not e)
          return Category::nonVector();
        if (e->present_in_v071)
          return Category::passThrough();
        if (instr.mnemonic != "csrr")
          return Category::unsupported("E_UNSUPPORTED",
                                       "only csrr reads of " + op.text + " can be translated",
                                       op.text);
        if (e->lowering_rule)
          return Category::lower(*e->lowering_rule);
        return Category::unsupported("E_UNSUPPORTED", e->unsupported_reason, op.text);
      }
    return Category::nonVector();
  }

}

Category classifyInstruction(const Instruction& instr, const TargetConfig& cfg, const Catalog& catalog)
{
  const auto& mn = instr.mnemonic;
  if (mn.starts_with("csr"))
    return classifyCsr(instr, catalog);
  if (not isVectorMnemonic(mn))
    return Category::nonVector();

  const auto* e = catalog.find(mn);
  if (not e)
    return Category::unsupported("E_UNSUPPORTED", "'" + mn + "' is not in the instruction catalog", mn);
  if (e->config)
    return classifyConfig(instr, cfg);
  if (e->present_in_v071)
    return Category::passThrough();
  if (e->unsupported())
    return Category::unsupported("E_UNSUPPORTED", e->unsupported_reason, mn);
  if (e->rename_071)
    return Category::renameTo(*e->rename_071);
  if (e->lowering_rule)
    {
      if (*e->lowering_rule == LowerRule::MemoryEEW and e->lower_param > cfg.elen_bits)
        return Category::unsupported("E_SEW_EXCEEDS_ELEN",
                                     fmt::format("{}-bit elements exceed the target ELEN of {}",
                                                 e->lower_param, cfg.elen_bits), mn);
      return Category::lower(*e->lowering_rule);
    }
  return Category::unsupported("E_UNSUPPORTED", "'" + mn + "' has no translation rule", mn);
}

}
