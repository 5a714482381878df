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

#include "rvvb/asmtext.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "rvvb/error.hpp"

namespace rvvb
{

namespace
{

  constexpr std::array<const char*, 32> xNames = {
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2",
    "s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5",
    "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7",
    "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6" };

  constexpr std::array<const char*, 32> fNames = {
    "ft0", "ft1", "ft2", "ft3", "ft4", "ft5", "ft6", "ft7",
    "fs0", "fs1", "fa0", "fa1", "fa2", "fa3", "fa4", "fa5",
    "fa6", "fa7", "fs2", "fs3", "fs4", "fs5", "fs6", "fs7",
    "fs8", "fs9", "fs10", "fs11", "ft8", "ft9", "ft10", "ft11" };

  constexpr std::array<const char*, 18> csrNames = {
    "vl", "vtype", "vlenb", "vcsr", "vstart", "vxsat", "vxrm",
    "fcsr", "frm", "fflags", "cycle", "time", "instret",
    "cycleh", "timeh", "instreth", "mstatus", "misa" };

  std::string lower(std::string_view s)
  {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  }

  std::string_view trim(std::string_view s)
  {
    auto isSpace = [](char c) { return c == ' ' or c == '\t' or c == '\r' or c == '\v' or c == '\f'; };
    while (not s.empty() and isSpace(s.front()))
      s.remove_prefix(1);
    while (not s.empty() and isSpace(s.back()))
      s.remove_suffix(1);
    return s;
  }

  std::optional<int> numberedReg(std::string_view name, char prefix, int limit)
  {
    if (name.size() < 2 or name[0] != prefix)
      return std::nullopt;
    int value = 0;
    auto body = name.substr(1);
    if (body.size() > 1 and body[0] == '0')
      return std::nullopt;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc() or ptr != body.data() + body.size() or value < 0 or value >= limit)
      return std::nullopt;
    return value;
  }

  bool isIdentChar(char c)
  {
    return std::isalnum(static_cast<unsigned char>(c)) or c == '_' or c == '.' or c == '$';
  }

  std::optional<std::int64_t> parseInteger(std::string_view s)
  {
    if (s.empty())
      return std::nullopt;
    bool negative = false;
    if (s[0] == '-' or s[0] == '+')
      {
        negative = s[0] == '-';
        s.remove_prefix(1);
      }
    int base = 10;
    if (s.size() > 2 and s[0] == '0' and (s[1] == 'x' or s[1] == 'X'))
      {
        base = 16;
        s.remove_prefix(2);
      }
    else if (s.size() > 2 and s[0] == '0' and (s[1] == 'b' or s[1] == 'B'))
      {
        base = 2;
        s.remove_prefix(2);
      }
    if (s.empty())
      return std::nullopt;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
    if (ec != std::errc() or ptr != s.data() + s.size())
      return std::nullopt;
    auto result = static_cast<std::int64_t>(value);
    return negative ? -result : result;
  }

  bool looksLikeVTypeToken(std::string_view t)
  {
    if (t == "ta" or t == "tu" or t == "ma" or t == "mu")
      return true;
    std::string_view digits;
    if (t.starts_with("mf"))
      digits = t.substr(2);
    else if (t.starts_with("e") or t.starts_with("m"))
      digits = t.substr(1);
    else
      return false;
    return not digits.empty() and std::all_of(digits.begin(), digits.end(),
                                              [](unsigned char c) { return std::isdigit(c); });
  }

  bool balanced(std::string_view s)
  {
    int depth = 0;
    bool inQuote = false;
    for (std::size_t i = 0; i < s.size(); ++i)
      {
        char c = s[i];
        if (inQuote)
          {
            if (c == '\\')
              ++i;
            else if (c == '"')
              inQuote = false;
            continue;
          }
        if (c == '"')
          inQuote = true;
        else if (c == '(')
          ++depth;
        else if (c == ')' and --depth < 0)
          return false;
      }
    return depth == 0 and not inQuote;
  }

  std::optional<Operand> classifyOperand(std::string_view token, std::string_view mnemonic)
  {
    Operand op;
    op.text = std::string(token);
    std::string low = lower(token);

    if (low == "v0.t")
      {
        op.kind = OperandKind::MaskRef;
        op.reg = 0;
        return op;
      }
    if ((mnemonic == "vsetvli" or mnemonic == "vsetivli") and looksLikeVTypeToken(low))
      {
        op.kind = OperandKind::VTypeToken;
        return op;
      }
    if (mnemonic.starts_with("csr") and
        std::find(csrNames.begin(), csrNames.end(), low) != csrNames.end())
      {
        op.kind = OperandKind::CsrName;
        return op;
      }
    if (auto x = scalarRegIndex(low))
      {
        op.kind = OperandKind::ScalarReg;
        op.reg = *x;
        return op;
      }
    if (auto v = vectorRegIndex(low))
      {
        op.kind = OperandKind::VectorReg;
        op.reg = *v;
        return op;
      }
    if (auto f = floatRegIndex(low))
      {
        op.kind = OperandKind::FloatReg;
        op.reg = *f;
        return op;
      }
    if (auto n = parseInteger(low))
      {
        op.kind = OperandKind::Immediate;
        op.imm = *n;
        return op;
      }
    if (not balanced(token))
      return std::nullopt;
    if (token.back() == ')')
      {
        // disp(base): the base is the last parenthesised group.
        auto open = token.rfind('(');
        auto inner = lower(trim(token.substr(open + 1, token.size() - open - 2)));
        auto disp = trim(token.substr(0, open));
        if (auto base = scalarRegIndex(inner); base and balanced(disp))
          {
            op.kind = OperandKind::MemoryRef;
            op.reg = *base;
            op.disp = std::string(disp);
            if (auto n = parseInteger(disp))
              op.imm = *n;
            return op;
          }
      }
    op.kind = OperandKind::Symbol;
    return op;
  }

  /// Split operands at top-level commas.
  std::vector<std::string_view> splitOperands(std::string_view s)
  {
    std::vector<std::string_view> parts;
    int depth = 0;
    bool inQuote = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      {
        char c = s[i];
        if (inQuote)
          {
            if (c == '\\')
              ++i;
            else if (c == '"')
              inQuote = false;
            continue;
          }
        if (c == '"')
          inQuote = true;
        else if (c == '(')
          ++depth;
        else if (c == ')')
          --depth;
        else if (c == ',' and depth == 0)
          {
            parts.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
          }
      }
    parts.push_back(trim(s.substr(start)));
    return parts;
  }

  /// Position where a comment starts in a line, or npos. Quotes are honoured.
  std::size_t commentStart(std::string_view line)
  {
    bool inQuote = false;
    for (std::size_t i = 0; i < line.size(); ++i)
      {
        char c = line[i];
        if (inQuote)
          {
            if (c == '\\')
              ++i;
            else if (c == '"')
              inQuote = false;
            continue;
          }
        if (c == '"')
          inQuote = true;
        else if (c == '#')
          return i;
        else if (c == '/' and i + 1 < line.size() and line[i + 1] == '/')
          return i;
      }
    return std::string_view::npos;
  }

  /// Length of a leading "name:" label in `stmt` (after whitespace), or 0.
  std::size_t labelLength(std::string_view stmt)
  {
    std::size_t i = 0;
    while (i < stmt.size() and (stmt[i] == ' ' or stmt[i] == '\t'))
      ++i;
    std::size_t start = i;
    while (i < stmt.size() and isIdentChar(stmt[i]))
      ++i;
    if (i == start or i >= stmt.size() or stmt[i] != ':')
      return 0;
    return i + 1;
  }

  struct ParseContext
  {
    std::string file;
    int macroDepth = 0;
  };

  AsmItem classifyStatement(std::string_view text, std::string_view body, bool hasComment,
                            const SourceLocation& loc, ParseContext& ctx)
  {
    AsmItem item;
    item.text = std::string(text);
    item.loc = loc;

    auto stmt = trim(body);
    if (stmt.empty())
      {
        item.kind = hasComment ? ItemKind::Comment : ItemKind::Blank;
        return item;
      }

    auto firstEnd = stmt.find_first_of(" \t");
    auto first = lower(stmt.substr(0, firstEnd));

    if (first == ".macro" or first == ".rept" or first == ".irp" or first == ".irpc")
      {
        ++ctx.macroDepth;
        item.kind = ItemKind::Raw;
        item.note = macroBlockNote;
        return item;
      }
    if (ctx.macroDepth > 0)
      {
        if (first == ".endm" or first == ".endr")
          --ctx.macroDepth;
        item.kind = ItemKind::Raw;
        item.note = macroBlockNote;
        return item;
      }
    if (stmt.front() == '.')
      {
        item.kind = ItemKind::Directive;
        return item;
      }

    std::string note;
    if (auto instr = parseInstruction(stmt, loc, &note))
      {
        item.kind = ItemKind::Instruction;
        item.parsed = std::move(instr);
        return item;
      }
    item.kind = ItemKind::Raw;
    item.note = note;
    return item;
  }

  /// Split one physical line (without its line ending) into items.
  void splitLine(std::string_view line, std::string_view eol, const SourceLocation& loc,
                 ParseContext& ctx, std::vector<AsmItem>& out)
  {
    auto cpos = commentStart(line);
    std::string_view code = line.substr(0, cpos);

    // Statement boundaries at ';' outside quotes, before any comment.
    std::vector<std::size_t> cuts;
    bool inQuote = false;
    for (std::size_t i = 0; i < code.size(); ++i)
      {
        char c = code[i];
        if (inQuote)
          {
            if (c == '\\')
              ++i;
            else if (c == '"')
              inQuote = false;
            continue;
          }
        if (c == '"')
          inQuote = true;
        else if (c == ';')
          cuts.push_back(i);
      }

    std::size_t start = 0;
    for (std::size_t k = 0; k <= cuts.size(); ++k)
      {
        bool last = k == cuts.size();
        std::size_t end = last ? line.size() : cuts[k];
        std::string_view text = line.substr(start, end - start);
        std::size_t bodyEnd = last ? code.size() - start : end - start;
        std::string_view body = text.substr(0, std::min(bodyEnd, text.size()));
        bool hasComment = last and cpos != std::string_view::npos;

        // Peel off leading labels as their own items.
        bool peeled = false;
        while (ctx.macroDepth == 0)
          {
            auto len = labelLength(body);
            if (len == 0)
              break;
            AsmItem lab;
            lab.kind = ItemKind::Label;
            lab.text = std::string(text.substr(0, len));
            lab.label = std::string(trim(text.substr(0, len - 1)));
            lab.loc = loc;
            out.push_back(std::move(lab));
            text.remove_prefix(len);
            body.remove_prefix(len);
            peeled = true;
          }
        std::string terminator = last ? std::string(eol) : std::string(";");
        if (peeled and text.empty())
          out.back().terminator = terminator;
        else
          {
            AsmItem item = classifyStatement(text, body, hasComment, loc, ctx);
            item.terminator = terminator;
            out.push_back(std::move(item));
          }
        start = end + 1;
      }
  }

}

const char* operandKindName(OperandKind k)
{
  switch (k)
    {
    case OperandKind::ScalarReg:  return "ScalarReg";
    case OperandKind::VectorReg:  return "VectorReg";
    case OperandKind::FloatReg:   return "FloatReg";
    case OperandKind::Immediate:  return "Immediate";
    case OperandKind::MemoryRef:  return "MemoryRef";
    case OperandKind::Symbol:     return "Symbol";
    case OperandKind::VTypeToken: return "VTypeToken";
    case OperandKind::CsrName:    return "CsrName";
    case OperandKind::MaskRef:    return "MaskRef";
    }
  return "?";
}

const char* itemKindName(ItemKind k)
{
  switch (k)
    {
    case ItemKind::Label:       return "Label";
    case ItemKind::Directive:   return "Directive";
    case ItemKind::Instruction: return "Instruction";
    case ItemKind::Comment:     return "Comment";
    case ItemKind::Blank:       return "Blank";
    case ItemKind::Raw:         return "Raw";
    }
  return "?";
}

Operand Operand::xreg(int index)
{
  Operand op;
  op.kind = OperandKind::ScalarReg;
  op.reg = index;
  op.text = scalarRegName(index);
  return op;
}

Operand Operand::vreg(int index)
{
  Operand op;
  op.kind = OperandKind::VectorReg;
  op.reg = index;
  op.text = "v" + std::to_string(index);
  return op;
}

Operand Operand::freg(int index)
{
  Operand op;
  op.kind = OperandKind::FloatReg;
  op.reg = index;
  op.text = floatRegName(index);
  return op;
}

Operand Operand::immediate(std::int64_t value)
{
  Operand op;
  op.kind = OperandKind::Immediate;
  op.imm = value;
  op.text = std::to_string(value);
  return op;
}

Operand Operand::memory(int base, std::string disp)
{
  Operand op;
  op.kind = OperandKind::MemoryRef;
  op.reg = base;
  op.disp = std::move(disp);
  if (auto n = parseInteger(op.disp))
    op.imm = *n;
  op.text = op.disp + "(" + scalarRegName(base) + ")";
  return op;
}

Operand Operand::symbol(std::string text)
{
  Operand op;
  op.kind = OperandKind::Symbol;
  op.text = std::move(text);
  return op;
}

Operand Operand::vtypeToken(std::string token)
{
  Operand op;
  op.kind = OperandKind::VTypeToken;
  op.text = std::move(token);
  return op;
}

Operand Operand::csr(std::string name)
{
  Operand op;
  op.kind = OperandKind::CsrName;
  op.text = std::move(name);
  return op;
}

Operand Operand::mask()
{
  Operand op;
  op.kind = OperandKind::MaskRef;
  op.reg = 0;
  op.text = "v0.t";
  return op;
}

std::string Instruction::canonical() const
{
  std::string out = mnemonic;
  for (std::size_t i = 0; i < operands.size(); ++i)
    {
      out += i == 0 ? " " : ", ";
      out += operands[i].text;
    }
  return out;
}

AsmItem AsmItem::synthesize(const Instruction& instr, std::string_view comment,
                            std::string_view eol)
{
  AsmItem item;
  item.kind = ItemKind::Instruction;
  item.text = "\t" + instr.canonical();
  if (not comment.empty())
    item.text += " " + std::string(comment);
  item.terminator = std::string(eol);
  item.loc = instr.loc;
  item.parsed = instr;
  item.synthesized = true;
  return item;
}

std::string AsmItem::leadingToken() const
{
  auto t = trim(text);
  return lower(t.substr(0, t.find_first_of(" \t")));
}

std::string AsmItem::trailingComment() const
{
  auto pos = commentStart(text);
  if (pos == std::string::npos)
    return {};
  return std::string(trim(std::string_view(text).substr(pos)));
}

std::string AsmItem::codeText() const
{
  return text.substr(0, std::min(text.size(), commentStart(text)));
}

std::optional<int> scalarRegIndex(std::string_view name)
{
  if (name == "fp")
    return 8;
  for (std::size_t i = 0; i < xNames.size(); ++i)
    if (name == xNames[i])
      return static_cast<int>(i);
  return numberedReg(name, 'x', 32);
}

std::optional<int> floatRegIndex(std::string_view name)
{
  for (std::size_t i = 0; i < fNames.size(); ++i)
    if (name == fNames[i])
      return static_cast<int>(i);
  return numberedReg(name, 'f', 32);
}

std::optional<int> vectorRegIndex(std::string_view name)
{
  return numberedReg(name, 'v', 32);
}

const char* scalarRegName(int index)
{
  return (index >= 0 and index < 32) ? xNames[index] : "?";
}

const char* floatRegName(int index)
{
  return (index >= 0 and index < 32) ? fNames[index] : "?";
}

bool isValidUtf8(std::string_view text)
{
  std::size_t i = 0;
  while (i < text.size())
    {
      auto c = static_cast<unsigned char>(text[i]);
      std::size_t extra = 0;
      std::uint32_t cp = 0;
      if (c < 0x80)
        {
          ++i;
          continue;
        }
      else if ((c & 0xe0) == 0xc0)
        extra = 1, cp = c & 0x1f;
      else if ((c & 0xf0) == 0xe0)
        extra = 2, cp = c & 0x0f;
      else if ((c & 0xf8) == 0xf0)
        extra = 3, cp = c & 0x07;
      else
        return false;
      if (i + extra >= text.size())
        return false;
      for (std::size_t k = 1; k <= extra; ++k)
        {
          auto cc = static_cast<unsigned char>(text[i + k]);
          if ((cc & 0xc0) != 0x80)
            return false;
          cp = (cp << 6) | (cc & 0x3f);
        }
      // Overlong forms, surrogates and out-of-range code points.
      static constexpr std::uint32_t minimum[] = { 0, 0x80, 0x800, 0x10000 };
      if (cp < minimum[extra] or cp > 0x10ffff or (cp >= 0xd800 and cp <= 0xdfff))
        return false;
      i += extra + 1;
    }
  return true;
}

std::optional<Instruction> parseInstruction(std::string_view statement,
                                            const SourceLocation& loc, std::string* note)
{
  auto stmt = trim(statement);
  auto setNote = [note](std::string msg) { if (note) *note = std::move(msg); };

  std::size_t i = 0;
  if (stmt.empty() or not std::isalpha(static_cast<unsigned char>(stmt[0])))
    {
      setNote("statement does not start with a mnemonic");
      return std::nullopt;
    }
  while (i < stmt.size() and (std::isalnum(static_cast<unsigned char>(stmt[i])) or
                              stmt[i] == '.' or stmt[i] == '_'))
    ++i;
  if (i < stmt.size() and stmt[i] != ' ' and stmt[i] != '\t')
    {
      setNote("unexpected character in mnemonic");
      return std::nullopt;
    }

  Instruction instr;
  instr.mnemonic = lower(stmt.substr(0, i));
  instr.loc = loc;

  auto rest = trim(stmt.substr(i));
  if (rest.empty())
    return instr;

  for (auto part : splitOperands(rest))
    {
      if (part.empty())
        {
          setNote("empty operand");
          return std::nullopt;
        }
      auto op = classifyOperand(part, instr.mnemonic);
      if (not op)
        {
          setNote("unrecognised operand '" + std::string(part) + "'");
          return std::nullopt;
        }
      instr.operands.push_back(std::move(*op));
    }
  return instr;
}

ProgramUnit parseSource(std::string_view text, std::string_view sourceName)
{
  if (not isValidUtf8(text))
    {
      // Report the first offending line.
      int line = 1;
      std::size_t lineStart = 0;
      for (std::size_t i = 0; i <= text.size(); ++i)
        {
          if (i == text.size() or text[i] == '\n')
            {
              if (not isValidUtf8(text.substr(lineStart, i - lineStart)))
                break;
              ++line;
              lineStart = i + 1;
            }
        }
      throw RvvError("E_ENCODING", std::string(sourceName) + ":" + std::to_string(line) +
                     ": input is not valid UTF-8");
    }

  ProgramUnit unit;
  unit.source_name = std::string(sourceName);
  ParseContext ctx;
  ctx.file = unit.source_name;

  std::size_t pos = 0;
  int line = 1;
  while (pos < text.size())
    {
      auto nl = text.find('\n', pos);
      std::string_view body;
      std::string_view eol;
      if (nl == std::string_view::npos)
        {
          body = text.substr(pos);
          pos = text.size();
        }
      else
        {
          body = text.substr(pos, nl - pos);
          eol = "\n";
          if (not body.empty() and body.back() == '\r')
            {
              body.remove_suffix(1);
              eol = "\r\n";
            }
          pos = nl + 1;
        }
      splitLine(body, eol, SourceLocation{unit.source_name, line}, ctx, unit.items);
      ++line;
    }
  return unit;
}

std::string emitSource(const ProgramUnit& unit)
{
  std::string out;
  for (const auto& item : unit.items)
    {
      out += item.text;
      out += item.terminator;
    }
  return out;
}

}
