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

#include <random>
#include <set>

#include "doctest.h"
#include "rvvb/error.hpp"
#include "rvvb/isa_model.hpp"

using namespace rvvb;

namespace
{
  Instruction parse(const std::string& s)
  {
    auto i = parseInstruction(s, {});
    REQUIRE(i);
    return *i;
  }

  std::vector<std::string> toks(std::initializer_list<const char*> l)
  {
    return { l.begin(), l.end() };
  }

  // Build operands satisfying a catalog shape descriptor.
  Instruction fromShape(const CatalogEntry& e, std::mt19937_64& rng)
  {
    Instruction instr;
    instr.mnemonic = e.mnemonic;
    std::string shape = e.operand_shape;
    std::size_t start = 0;
    while (not shape.empty() and start <= shape.size())
      {
        auto comma = shape.find(',', start);
        if (comma == std::string::npos)
          comma = shape.size();
        auto slot = shape.substr(start, comma - start);
        start = comma + 1;
        if (slot == "V")
          instr.operands.push_back(Operand::vreg(8 + int(rng() % 4) * 4));
        else if (slot == "X")
          instr.operands.push_back(Operand::xreg(reg::a0 + int(rng() % 4)));
        else if (slot == "F")
          instr.operands.push_back(Operand::freg(10));
        else if (slot == "I")
          instr.operands.push_back(Operand::immediate(int(rng() % 8)));
        else if (slot == "A")
          instr.operands.push_back(Operand::memory(reg::a1));
        else if (slot == "M")
          instr.operands.push_back(Operand::vreg(0));
        else if (slot == "M?")
          {
            if (rng() % 2)
              instr.operands.push_back(Operand::mask());
          }
        else if (slot == "T")
          {
            instr.operands.push_back(Operand::vtypeToken("e32"));
            instr.operands.push_back(Operand::vtypeToken("m1"));
          }
      }
    return instr;
  }
}

TEST_CASE("classification examples")
{
  TargetConfig cfg;
  CHECK(classifyInstruction(parse("addi a0, a0, 16"), cfg).kind == CategoryKind::NonVector);

  auto r = classifyInstruction(parse("vfredusum.vs v8, v8, v9"), cfg);
  CHECK(r.kind == CategoryKind::Rename);
  CHECK(r.rename_target == "vfredsum.vs");

  auto imm = classifyInstruction(parse("vsetivli zero, 4, e32, m1, ta, ma"), cfg);
  CHECK(imm.kind == CategoryKind::Lower);
  CHECK(imm.rule == LowerRule::ImmediateConfig);

  auto whole = classifyInstruction(parse("vl1r.v v8, (a0)"), cfg);
  CHECK(whole.kind == CategoryKind::Lower);
  CHECK(whole.rule == LowerRule::WholeRegister);

  CHECK(classifyInstruction(parse("vle32.v v8, (a0)"), cfg).rule == LowerRule::MemoryEEW);
  CHECK(classifyInstruction(parse("vadd.vv v8, v8, v9"), cfg).kind == CategoryKind::PassThrough);
  CHECK(classifyInstruction(parse("vsetvli a3, a2, e32, m1"), cfg).kind ==
        CategoryKind::PassThrough);
  CHECK(classifyInstruction(parse("vsetvli a3, a2, e32, m1, ta, ma"), cfg).rule ==
        LowerRule::ConfigPolicy);
  CHECK(classifyInstruction(parse("vsetvli zero, zero, e32, m1"), cfg).rule ==
        LowerRule::KeepVlConfig);
  CHECK(classifyInstruction(parse("vsetvl t0, a1, a2"), cfg).kind == CategoryKind::PassThrough);
  CHECK(classifyInstruction(parse("csrr a5, vlenb"), cfg).rule == LowerRule::CsrShim);
  CHECK(classifyInstruction(parse("csrr a5, vcsr"), cfg).rule == LowerRule::CsrShim);
  CHECK(classifyInstruction(parse("csrr a5, vl"), cfg).kind == CategoryKind::PassThrough);
  CHECK(classifyInstruction(parse("csrr a5, vxrm"), cfg).kind == CategoryKind::PassThrough);
  CHECK(classifyInstruction(parse("csrr a5, vstart"), cfg).kind == CategoryKind::PassThrough);
  CHECK(classifyInstruction(parse("csrr a5, vxsat"), cfg).kind == CategoryKind::PassThrough);
  CHECK(classifyInstruction(parse("csrr a5, mstatus"), cfg).kind == CategoryKind::NonVector);
}

TEST_CASE("unsupported instructions carry a reason and the offending token")
{
  TargetConfig cfg;
  auto est = classifyInstruction(parse("vfrec7.v v8, v9"), cfg);
  CHECK(est.kind == CategoryKind::Unsupported);
  CHECK_FALSE(est.reason.empty());
  CHECK(est.token == "vfrec7.v");

  auto frac = classifyInstruction(parse("vsetvli a3, a2, e32, mf2, ta, ma"), cfg);
  CHECK(frac.kind == CategoryKind::Unsupported);
  CHECK(frac.code == "E_FRACTIONAL_LMUL");
  CHECK(frac.token == "mf2");

  auto unknown = classifyInstruction(parse("vfoo.vv v1, v2, v3"), cfg);
  CHECK(unknown.kind == CategoryKind::Unsupported);

  TargetConfig narrow;
  narrow.elen_bits = 32;
  CHECK(classifyInstruction(parse("vle64.v v8, (a0)"), narrow).code == "E_SEW_EXCEEDS_ELEN");
  CHECK(classifyInstruction(parse("vsetvli t0, a0, e64, m1"), narrow).code ==
        "E_SEW_EXCEEDS_ELEN");
}

TEST_CASE("vtype token decoding")
{
  auto a = decodeVTypeTokens(toks({ "e32", "m1", "ta", "ma" }));
  CHECK(a.sew == 32);
  CHECK(a.lmul == Lmul::M1);
  CHECK(a.tail == Policy::Agnostic);
  CHECK(a.mask == Policy::Agnostic);

  auto b = decodeVTypeTokens(toks({ "e8", "mf4" }));
  CHECK(b.sew == 8);
  CHECK(b.lmul == Lmul::MF4);
  CHECK(b.tail == Policy::Unspecified);
  CHECK(b.mask == Policy::Unspecified);

  auto c = decodeVTypeTokens(toks({ "e64", "m8", "tu", "mu" }));
  CHECK(c.sew == 64);
  CHECK(c.lmul == Lmul::M8);
  CHECK(c.tail == Policy::Undisturbed);
  CHECK(c.mask == Policy::Undisturbed);

  const std::vector<std::vector<std::string>> bad = {
    { "e7", "m1" },   { "e32", "m3" },      { "e32", "e16" },    { "e32", "m1", "ta", "tu" },
    { "e32", "m1", "ma", "mu" }, { "m1" },  { "e32", "m1", "xx" }, { "e32", "mf16" },
    { "e32", "m1", "ma", "ta" },
  };
  for (const auto& t : bad)
    CHECK_THROWS_WITH_AS(decodeVTypeTokens(t), doctest::Contains("E_VTYPE_SYNTAX"), RvvError);
}

TEST_CASE("vtype token round trip over the full grammar")
{
  const std::vector<std::string> sews = { "e8", "e16", "e32", "e64" };
  const std::vector<std::string> lmuls = { "mf8", "mf4", "mf2", "m1", "m2", "m4", "m8" };
  const std::vector<std::vector<std::string>> policies = {
    {}, { "ta" }, { "tu" }, { "ma" }, { "mu" },
    { "ta", "ma" }, { "ta", "mu" }, { "tu", "ma" }, { "tu", "mu" } };
  int n = 0;
  for (const auto& s : sews)
    for (const auto& l : lmuls)
      for (const auto& p : policies)
        {
          std::vector<std::string> list = { s, l };
          list.insert(list.end(), p.begin(), p.end());
          auto spec = decodeVTypeTokens(list);
          CHECK(spec.tokens() == list);
          CHECK(decodeVTypeTokens(spec.tokens()) == spec);
          ++n;
        }
  CHECK(n == 4 * 7 * 9);
}

TEST_CASE("0.7.1 legality")
{
  TargetConfig cfg;
  auto ok = checkV071Legal(decodeVTypeTokens(toks({ "e32", "m1", "ta", "ma" })), cfg);
  CHECK(ok.legal);
  CHECK(ok.tokens == toks({ "e32", "m1" }));

  auto frac = checkV071Legal(decodeVTypeTokens(toks({ "e8", "mf2" })), cfg);
  CHECK_FALSE(frac.legal);
  CHECK(frac.code == "E_FRACTIONAL_LMUL");

  TargetConfig narrow;
  narrow.elen_bits = 32;
  auto wide = checkV071Legal(decodeVTypeTokens(toks({ "e64", "m8" })), narrow);
  CHECK_FALSE(wide.legal);
  CHECK(wide.code == "E_SEW_EXCEEDS_ELEN");

  // Legal outputs never contain policy tokens.
  for (const char* pol : { "ta", "tu" })
    {
      auto r = checkV071Legal(decodeVTypeTokens(toks({ "e16", "m4", pol, "mu" })), cfg);
      REQUIRE(r.legal);
      for (const auto& t : r.tokens)
        CHECK((t[0] == 'e' or t[0] == 'm'));
      CHECK(r.tokens.size() == 2);
    }
}

TEST_CASE("VLMAX arithmetic")
{
  VTypeSpec s;
  s.sew = 32;
  s.lmul = Lmul::M1;
  CHECK(s.vlmax(128) == 4);
  s.lmul = Lmul::M8;
  CHECK(s.vlmax(128) == 32);
  s.sew = 8;
  s.lmul = Lmul::MF8;
  CHECK(s.vlmax(128) == 2);
  s.sew = 64;
  CHECK(s.vlmax(128) == 0);
}

TEST_CASE("target configuration validation")
{
  TargetConfig c;
  c.vlen_bits = 128;
  CHECK_NOTHROW(c.validate());
  c.vlen_bits = 32;
  CHECK_THROWS_AS(c.validate(), RvvError);
  c.vlen_bits = 96;
  CHECK_THROWS_AS(c.validate(), RvvError);
  c.vlen_bits = 1 << 17;
  CHECK_THROWS_AS(c.validate(), RvvError);
  c.vlen_bits = 1 << 16;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("catalog closure")
{
  const auto& cat = Catalog::builtin();
  REQUIRE(cat.entries().size() > 100);
  for (const auto& e : cat.entries())
    {
      if (e.rename_071)
        {
          CHECK_FALSE(e.present_in_v071);
          const auto* t = cat.find(*e.rename_071);
          REQUIRE_MESSAGE(t, e.mnemonic);
          CHECK_MESSAGE(t->present_in_v071, e.mnemonic);
        }
      if (e.lowering_rule and not e.lower_target.empty())
        {
          const auto* t = cat.find(e.lower_target);
          REQUIRE_MESSAGE(t, e.mnemonic);
          CHECK_MESSAGE(t->present_in_v071, e.mnemonic);
        }
    }
  for (const auto& mn : Catalog::loweringHelperMnemonics())
    {
      const auto* t = cat.find(mn);
      REQUIRE_MESSAGE(t, mn);
      CHECK(t->present_in_v071);
    }
}

TEST_CASE("rename table minimum")
{
  const auto& cat = Catalog::builtin();
  const std::vector<std::pair<std::string, std::string>> pairs = {
    { "vfredusum.vs", "vfredsum.vs" },
    { "vcpop.m", "vpopc.m" },
    { "vmandn.mm", "vmandnot.mm" },
    { "vmorn.mm", "vmornot.mm" },
  };
  for (const auto& [from, to] : pairs)
    {
      const auto* e = cat.find(from);
      REQUIRE(e);
      REQUIRE(e->rename_071);
      CHECK(*e->rename_071 == to);
    }
}

TEST_CASE("classification is total and deterministic over the catalog")
{
  std::mt19937_64 rng(11);
  TargetConfig cfg;
  const auto& cat = Catalog::builtin();
  for (int trial = 0; trial < 2000; ++trial)
    {
      const auto& e = cat.entries()[rng() % cat.entries().size()];
      if (e.mnemonic.starts_with("csr:"))
        continue;
      auto instr = fromShape(e, rng);
      CHECK_MESSAGE(matchesShape(instr, e.operand_shape), e.mnemonic);
      auto a = classifyInstruction(instr, cfg);
      auto b = classifyInstruction(instr, cfg);
      CHECK(a.str() == b.str());
      if (e.present_in_v071 and not e.config)
        CHECK(a.kind == CategoryKind::PassThrough);
    }
}

TEST_CASE("catalog text parsing")
{
  auto c = Catalog::parse("# comment\nvfoo.vv both V,V,V pass\nvbar.vv v10 V,V,V rename vfoo.vv\n");
  REQUIRE(c.entries().size() == 2);
  TargetConfig cfg;
  CHECK(classifyInstruction(parse("vbar.vv v1, v2, v3"), cfg, c).rename_target == "vfoo.vv");
  CHECK_THROWS_AS(Catalog::parse("vfoo.vv sometimes V pass\n"), RvvError);
  CHECK_THROWS_AS(Catalog::parse("vfoo.vv both V frobnicate\n"), RvvError);
}
