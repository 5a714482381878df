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
#include <string_view>
#include <vector>

namespace rvvb
{

  struct SourceLocation
  {
    std::string file;
    int line = 1;

    bool operator==(const SourceLocation&) const = default;
  };

  enum class OperandKind
    {
      ScalarReg,
      VectorReg,
      FloatReg,
      Immediate,
      MemoryRef,     // disp(base)
      Symbol,        // labels, relocation expressions, anything else well formed
      VTypeToken,    // e32, m1, mf2, ta, tu, ma, mu
      CsrName,
      MaskRef        // v0.t
    };

  const char* operandKindName(OperandKind k);

  /// One operand as written. For registers `reg` is the architectural index;
  /// for a MemoryRef it is the base register and `disp` holds the displacement
  /// text (empty when the source wrote "(a0)").
  struct Operand
  {
    OperandKind kind = OperandKind::Symbol;
    std::string text;
    int reg = -1;
    std::int64_t imm = 0;
    std::string disp;

    static Operand xreg(int index);
    static Operand vreg(int index);
    static Operand freg(int index);
    static Operand immediate(std::int64_t value);
    static Operand memory(int base, std::string disp = {});
    static Operand symbol(std::string text);
    static Operand vtypeToken(std::string token);
    static Operand csr(std::string name);
    static Operand mask();

    bool isXReg(int index) const
    { return kind == OperandKind::ScalarReg and reg == index; }

    bool operator==(const Operand&) const = default;
  };

  struct Instruction
  {
    std::string mnemonic;            // lowercase
    std::vector<Operand> operands;
    SourceLocation loc;

    Instruction() = default;
    Instruction(std::string mn, std::vector<Operand> ops, SourceLocation l = {})
      : mnemonic(std::move(mn)), operands(std::move(ops)), loc(std::move(l))
    { }

    /// "mnemonic op1, op2" using each operand's text.
    std::string canonical() const;

    bool hasMask() const
    { return not operands.empty() and operands.back().kind == OperandKind::MaskRef; }

    /// Structural equality; the location is not compared.
    bool sameAs(const Instruction& other) const
    { return mnemonic == other.mnemonic and operands == other.operands; }
  };

  enum class ItemKind { Label, Directive, Instruction, Comment, Blank, Raw };

  const char* itemKindName(ItemKind k);

  /// One statement of the source. `text` followed by `terminator` reproduces
  /// the original bytes; the terminator is the line ending, a ';' separator,
  /// or empty when another statement follows on the same line (label).
  struct AsmItem
  {
    ItemKind kind = ItemKind::Blank;
    std::string text;
    std::string terminator;
    SourceLocation loc;
    std::optional<Instruction> parsed;
    std::string label;        // Label items: the defined name
    std::string note;         // Raw items: why the statement was not decoded
    bool synthesized = false;

    /// Canonical "\t<instr>" line for generated code.
    static AsmItem synthesize(const Instruction& instr, std::string_view comment = {},
                              std::string_view eol = "\n");

    /// First whitespace-delimited token of the statement, lowercased. Used to
    /// recognise vector mnemonics in Raw items.
    std::string leadingToken() const;

    /// Trailing "# ..." or "// ..." comment, if any.
    std::string trailingComment() const;

    /// The statement text without its trailing comment.
    std::string codeText() const;
  };

  struct ProgramUnit
  {
    std::vector<AsmItem> items;
    std::string source_name;
  };

  /// Split GNU-syntax RISC-V assembly into items. Never fails on content;
  /// throws RvvError(E_ENCODING) when the text is not valid UTF-8.
  ProgramUnit parseSource(std::string_view text, std::string_view sourceName);

  /// Concatenate every item's text and terminator.
  std::string emitSource(const ProgramUnit& unit);

  /// Parse a single statement (no comment, no label) into an instruction.
  /// Returns nullopt and fills `note` when the operand syntax is not
  /// recognised.
  std::optional<Instruction> parseInstruction(std::string_view statement,
                                              const SourceLocation& loc,
                                              std::string* note = nullptr);

  /// Register name helpers. Indices are architectural (x0..x31, f0..f31).
  std::optional<int> scalarRegIndex(std::string_view name);
  std::optional<int> floatRegIndex(std::string_view name);
  std::optional<int> vectorRegIndex(std::string_view name);
  const char* scalarRegName(int index);
  const char* floatRegName(int index);

  bool isValidUtf8(std::string_view text);

  /// Note attached to Raw items inside .macro/.rept/.irp blocks.
  inline constexpr std::string_view macroBlockNote = "assembler macro block passed through unexpanded";

  namespace reg
  {
    inline constexpr int zero = 0, ra = 1, sp = 2, gp = 3, tp = 4;
    inline constexpr int t0 = 5, t1 = 6, t2 = 7, s0 = 8, s1 = 9;
    inline constexpr int a0 = 10, a1 = 11, a2 = 12, a3 = 13, a4 = 14, a5 = 15,
      a6 = 16, a7 = 17;
    inline constexpr int t3 = 28, t4 = 29, t5 = 30, t6 = 31;
  }

}
