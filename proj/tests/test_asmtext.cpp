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

#include "doctest.h"
#include "rvvb/asmtext.hpp"
#include "rvvb/error.hpp"

using namespace rvvb;

namespace
{
  std::vector<const AsmItem*> ofKind(const ProgramUnit& u, ItemKind k)
  {
    std::vector<const AsmItem*> out;
    for (const auto& it : u.items)
      if (it.kind == k)
        out.push_back(&it);
    return out;
  }
}

TEST_CASE("scalar instruction tokenization")
{
  auto u = parseSource("addi sp, sp, -32", "t.s");
  REQUIRE(u.items.size() == 1);
  const auto& it = u.items[0];
  REQUIRE(it.kind == ItemKind::Instruction);
  CHECK(it.parsed->mnemonic == "addi");
  REQUIRE(it.parsed->operands.size() == 3);
  CHECK(it.parsed->operands[0].isXReg(reg::sp));
  CHECK(it.parsed->operands[1].isXReg(reg::sp));
  CHECK(it.parsed->operands[2].kind == OperandKind::Immediate);
  CHECK(it.parsed->operands[2].imm == -32);
}

TEST_CASE("label followed by a vector instruction")
{
  auto u = parseSource(".loop:\n\tvadd.vv v8, v8, v9", "t.s");
  REQUIRE(u.items.size() == 2);
  CHECK(u.items[0].kind == ItemKind::Label);
  CHECK(u.items[0].text == ".loop:");
  CHECK(u.items[0].label == ".loop");
  REQUIRE(u.items[1].kind == ItemKind::Instruction);
  const auto& ops = u.items[1].parsed->operands;
  REQUIRE(ops.size() == 3);
  CHECK(ops[0].kind == OperandKind::VectorReg);
  CHECK(ops[0].reg == 8);
  CHECK(ops[2].reg == 9);
  CHECK(u.items[1].loc.line == 2);
}

TEST_CASE("vsetvli operands are classified as registers and vtype tokens")
{
  auto u = parseSource("vsetvli a3, a2, e32, m1, ta, ma\n", "t.s");
  REQUIRE(u.items.size() == 1);
  const auto& ops = u.items[0].parsed->operands;
  REQUIRE(ops.size() == 6);
  CHECK(ops[0].isXReg(reg::a3));
  CHECK(ops[1].isXReg(reg::a2));
  for (std::size_t i = 2; i < 6; ++i)
    CHECK(ops[i].kind == OperandKind::VTypeToken);
  CHECK(ops[2].text == "e32");
  CHECK(ops[5].text == "ma");
}

TEST_CASE("operand kinds")
{
  auto instr = parseInstruction("vle32.v v8, (a0), v0.t", {});
  REQUIRE(instr);
  CHECK(instr->operands[1].kind == OperandKind::MemoryRef);
  CHECK(instr->operands[1].reg == reg::a0);
  CHECK(instr->operands[1].disp.empty());
  CHECK(instr->operands[2].kind == OperandKind::MaskRef);
  CHECK(instr->hasMask());

  auto ld = parseInstruction("ld ra, 24(sp)", {});
  REQUIRE(ld);
  CHECK(ld->operands[1].kind == OperandKind::MemoryRef);
  CHECK(ld->operands[1].disp == "24");
  CHECK(ld->operands[1].reg == reg::sp);

  auto csr = parseInstruction("csrr a5, vlenb", {});
  REQUIRE(csr);
  CHECK(csr->operands[1].kind == OperandKind::CsrName);

  auto fl = parseInstruction("vfmacc.vf v8, fa0, v9", {});
  REQUIRE(fl);
  CHECK(fl->operands[1].kind == OperandKind::FloatReg);
  CHECK(fl->operands[1].reg == 10);

  auto br = parseInstruction("bnez a0, .LBB0_1", {});
  REQUIRE(br);
  CHECK(br->operands[1].kind == OperandKind::Symbol);

  auto hex = parseInstruction("li a0, 0x10", {});
  REQUIRE(hex);
  CHECK(hex->operands[1].imm == 16);

  auto x = parseInstruction("add x5, x6, x31", {});
  REQUIRE(x);
  CHECK(x->operands[0].isXReg(5));
  CHECK(x->operands[2].isXReg(31));
}

TEST_CASE("mnemonic case is normalised but text is preserved")
{
  const std::string src = "\tVADD.VV v1, v2, v3  # sum\n";
  auto u = parseSource(src, "t.s");
  REQUIRE(u.items.size() == 1);
  CHECK(u.items[0].parsed->mnemonic == "vadd.vv");
  CHECK(u.items[0].trailingComment() == "# sum");
  CHECK(emitSource(u) == src);
}

TEST_CASE("statements separated by semicolons share a location")
{
  auto u = parseSource("li a0, 1; li a1, 2\n", "t.s");
  auto instrs = ofKind(u, ItemKind::Instruction);
  REQUIRE(instrs.size() == 2);
  CHECK(instrs[0]->loc == instrs[1]->loc);
  CHECK(instrs[1]->parsed->operands[1].imm == 2);
  CHECK(emitSource(u) == "li a0, 1; li a1, 2\n");
}

TEST_CASE("unrecognised operand syntax degrades to Raw with a note")
{
  auto u = parseSource("\tvadd.vv v8, (v9\n", "t.s");
  REQUIRE(u.items.size() == 1);
  CHECK(u.items[0].kind == ItemKind::Raw);
  CHECK_FALSE(u.items[0].note.empty());
  CHECK_FALSE(u.items[0].parsed.has_value());
}

TEST_CASE("macro bodies are kept raw")
{
  const std::string src = ".macro foo a\n\tvadd.vv v1, v2, v3\n.endm\n\tfoo 1\n";
  auto u = parseSource(src, "t.s");
  CHECK(emitSource(u) == src);
  CHECK(u.items[1].kind == ItemKind::Raw);
  CHECK(u.items[2].kind == ItemKind::Raw);
  CHECK_FALSE(u.items[1].note.empty());
}

TEST_CASE("items other than instructions carry no parsed payload")
{
  const std::string src =
    "\t.text\n# header\n\n.L1:\tvle32.v v8, (a0) // tail\n\tfoo bar baz(\n";
  auto u = parseSource(src, "t.s");
  for (const auto& it : u.items)
    CHECK(it.parsed.has_value() == (it.kind == ItemKind::Instruction));
  CHECK(ofKind(u, ItemKind::Directive).size() == 1);
  CHECK(ofKind(u, ItemKind::Comment).size() == 1);
  CHECK(ofKind(u, ItemKind::Blank).size() == 1);
  CHECK(ofKind(u, ItemKind::Label).size() == 1);
  CHECK(ofKind(u, ItemKind::Instruction).size() == 1);
  CHECK(emitSource(u) == src);
}

TEST_CASE("round trip on assorted layouts")
{
  const std::vector<std::string> inputs = {
    "",
    "\n",
    "no newline at end",
    "\tli a0, 1\r\n\tret\r\n",
    "a: b: c:\n",
    "lbl: li a0, 1 ; # trailing\n",
    "\t.string \"a;b#c//d\"\n",
    "  \t  \n\n\t# only comment\n",
    "\tvsetvli\tt0,a0,e8,mf2,tu,mu\n",
    "1:\n\tbnez a0, 1b\n\tj 1f\n1:\tret\n",
  };
  for (const auto& in : inputs)
    CHECK(emitSource(parseSource(in, "t.s")) == in);
}

TEST_CASE("parsing is total on random text and round-trips")
{
  std::mt19937_64 rng(7);
  const std::string alphabet =
    "abcdefghijklmnopqrstuvwxyz0123456789 \t\n\r,.:;#/()-+\"'_$v0tx";
  const std::vector<std::string> multi = { "\xc3\xa9", "\xe2\x82\xac", "\xf0\x9f\x98\x80" };
  for (int trial = 0; trial < 500; ++trial)
    {
      std::string text;
      auto len = rng() % 200;
      for (std::size_t i = 0; i < len; ++i)
        {
          if (rng() % 20 == 0)
            text += multi[rng() % multi.size()];
          else
            text += alphabet[rng() % alphabet.size()];
        }
      ProgramUnit u;
      REQUIRE_NOTHROW(u = parseSource(text, "rand.s"));
      CHECK(emitSource(u) == text);
      for (const auto& it : u.items)
        CHECK(it.loc.line >= 1);
    }
}

TEST_CASE("invalid UTF-8 is rejected with E_ENCODING")
{
  const std::string bad = "li a0, 1\n\xff\xfe\n";
  try
    {
      parseSource(bad, "bad.s");
      FAIL("expected an exception");
    }
  catch (const RvvError& e)
    {
      CHECK(e.code() == "E_ENCODING");
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  CHECK_FALSE(isValidUtf8("\xc3"));
  CHECK_FALSE(isValidUtf8("\xe2\x82"));
  CHECK(isValidUtf8("\xe2\x82\xac"));
}

TEST_CASE("synthesized items use the canonical layout")
{
  Instruction li("li", { Operand::xreg(reg::t6), Operand::immediate(16) });
  auto item = AsmItem::synthesize(li);
  CHECK(item.text == "\tli t6, 16");
  CHECK(item.terminator == "\n");

  ProgramUnit u;
  u.items.push_back(item);
  CHECK(emitSource(u) == "\tli t6, 16\n");
}

TEST_CASE("re-parsing synthesized instructions preserves structure")
{
  const std::vector<Instruction> samples = {
    { "vsetvli", { Operand::xreg(0), Operand::xreg(reg::t6), Operand::vtypeToken("e32"),
                   Operand::vtypeToken("m1") } },
    { "vle.v", { Operand::vreg(8), Operand::memory(reg::a0) } },
    { "sd", { Operand::xreg(reg::t0), Operand::memory(reg::sp, "16") } },
    { "csrr", { Operand::xreg(reg::t5), Operand::csr("vl") } },
    { "vadd.vv", { Operand::vreg(1), Operand::vreg(2), Operand::vreg(3), Operand::mask() } },
    { "vfmv.v.f", { Operand::vreg(4), Operand::freg(10) } },
    { "addi", { Operand::xreg(reg::sp), Operand::xreg(reg::sp), Operand::immediate(-32) } },
    { "bnez", { Operand::xreg(reg::a0), Operand::symbol(".LBB0_2") } },
  };
  for (const auto& s : samples)
    {
      auto item = AsmItem::synthesize(s);
      auto back = parseSource(item.text + item.terminator, "t.s");
      REQUIRE(back.items.size() == 1);
      REQUIRE(back.items[0].kind == ItemKind::Instruction);
      CHECK(back.items[0].parsed->sameAs(s));
      CHECK(back.items[0].parsed->operands.size() == s.operands.size());
    }
}
