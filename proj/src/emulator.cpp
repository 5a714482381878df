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

#include "rvvb/emulator.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "rvvb/cfg.hpp"
#include "rvvb/error.hpp"

namespace rvvb
{

const char* isaVersionName(IsaVersion v)
{
  return v == IsaVersion::V071 ? "0.7.1" : "1.0";
}

// ---------------------------------------------------------------- memory

const std::vector<std::uint8_t>* SparseMemory::find(std::uint64_t addr, std::size_t len,
                                                    std::uint64_t& offset) const
{
  auto it = regions_.upper_bound(addr);
  if (it == regions_.begin())
    return nullptr;
  --it;
  offset = addr - it->first;
  if (offset > it->second.size() or it->second.size() - offset < len)
    return nullptr;
  return &it->second;
}

void SparseMemory::map(std::uint64_t base, std::size_t size)
{
  map(base, std::vector<std::uint8_t>(size, 0));
}

void SparseMemory::map(std::uint64_t base, const std::vector<std::uint8_t>& bytes)
{
  auto next = regions_.lower_bound(base);
  if (next != regions_.end() and next->first < base + bytes.size())
    throw RvvError("E_MEM_FAULT", fmt::format("region at {:#x} overlaps an existing region", base));
  if (next != regions_.begin())
    {
      auto prev = std::prev(next);
      if (prev->first + prev->second.size() > base)
        throw RvvError("E_MEM_FAULT",
                       fmt::format("region at {:#x} overlaps an existing region", base));
    }
  regions_[base] = bytes;
}

bool SparseMemory::contains(std::uint64_t addr, std::size_t len) const
{
  std::uint64_t off;
  return find(addr, len, off) != nullptr;
}

std::vector<std::uint8_t> SparseMemory::read(std::uint64_t addr, std::size_t len) const
{
  std::uint64_t off;
  const auto* r = find(addr, len, off);
  if (not r)
    throw RvvError("E_MEM_FAULT", fmt::format("read of {} byte(s) at {:#x} is outside memory", len, addr));
  return { r->begin() + off, r->begin() + off + len };
}

void SparseMemory::write(std::uint64_t addr, const std::uint8_t* data, std::size_t len)
{
  std::uint64_t off;
  auto* r = const_cast<std::vector<std::uint8_t>*>(find(addr, len, off));
  if (not r)
    throw RvvError("E_MEM_FAULT", fmt::format("write of {} byte(s) at {:#x} is outside memory", len, addr));
  std::memcpy(r->data() + off, data, len);
}

std::uint64_t SparseMemory::load(std::uint64_t addr, unsigned bytes) const
{
  auto b = read(addr, bytes);
  std::uint64_t v = 0;
  for (unsigned i = 0; i < bytes; ++i)
    v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void SparseMemory::store(std::uint64_t addr, unsigned bytes, std::uint64_t value)
{
  std::uint8_t b[8];
  for (unsigned i = 0; i < bytes; ++i)
    b[i] = std::uint8_t(value >> (8 * i));
  write(addr, b, bytes);
}

// ---------------------------------------------------------------- vtype

namespace
{

  unsigned sewCode(unsigned sew)
  {
    return static_cast<unsigned>(std::countr_zero(sew)) - 3;
  }

  std::uint64_t lowMask(unsigned bits)
  {
    return bits >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << bits) - 1;
  }

  std::int64_t sext(std::uint64_t v, unsigned bits)
  {
    if (bits >= 64)
      return static_cast<std::int64_t>(v);
    auto shift = 64 - bits;
    return static_cast<std::int64_t>(v << shift) >> shift;
  }

}

std::uint64_t encodeVType(const VTypeSpec& spec, IsaVersion version)
{
  std::uint64_t lmulField = 0;
  switch (spec.lmul)
    {
    case Lmul::M1: lmulField = 0; break;
    case Lmul::M2: lmulField = 1; break;
    case Lmul::M4: lmulField = 2; break;
    case Lmul::M8: lmulField = 3; break;
    case Lmul::MF8: lmulField = 5; break;
    case Lmul::MF4: lmulField = 6; break;
    case Lmul::MF2: lmulField = 7; break;
    }
  if (version == IsaVersion::V071)
    return (lmulField & 3) | (std::uint64_t(sewCode(spec.sew)) << 2);
  std::uint64_t v = lmulField | (std::uint64_t(sewCode(spec.sew)) << 3);
  if (spec.tail == Policy::Agnostic)
    v |= 1u << 6;
  if (spec.mask == Policy::Agnostic)
    v |= 1u << 7;
  return v;
}

std::optional<VTypeSpec> decodeVType(std::uint64_t value, IsaVersion version)
{
  VTypeSpec s;
  if (value >> 63)
    return std::nullopt;
  if (version == IsaVersion::V071)
    {
      if (value >> 7)
        return std::nullopt;
      if ((value >> 5) & 3)   // vediv
        return std::nullopt;
      unsigned sew = (value >> 2) & 7;
      if (sew > 3)
        return std::nullopt;
      s.sew = 8u << sew;
      s.lmul = *lmulFromInteger(1u << (value & 3));
      return s;
    }
  if (value >> 8)
    return std::nullopt;
  unsigned sew = (value >> 3) & 7;
  if (sew > 3)
    return std::nullopt;
  s.sew = 8u << sew;
  switch (value & 7)
    {
    case 0: s.lmul = Lmul::M1; break;
    case 1: s.lmul = Lmul::M2; break;
    case 2: s.lmul = Lmul::M4; break;
    case 3: s.lmul = Lmul::M8; break;
    case 5: s.lmul = Lmul::MF8; break;
    case 6: s.lmul = Lmul::MF4; break;
    case 7: s.lmul = Lmul::MF2; break;
    default: return std::nullopt;
    }
  s.tail = (value >> 6) & 1 ? Policy::Agnostic : Policy::Undisturbed;
  s.mask = (value >> 7) & 1 ? Policy::Agnostic : Policy::Undisturbed;
  return s;
}

// ---------------------------------------------------------------- state

MachineState::MachineState(IsaVersion ver, unsigned vlenBits)
  : version(ver), vlen_bits(vlenBits), v(32 * std::size_t(vlenBits / 8), 0)
{ }

std::uint64_t MachineState::vtypeCsr() const
{
  if (vill)
    return std::uint64_t(1) << 63;
  return encodeVType(vtype, version);
}

std::uint64_t MachineState::elem(int vreg, std::uint64_t i, unsigned eew) const
{
  std::uint64_t eb = eew / 8;
  std::uint64_t off = std::uint64_t(vreg) * vlenb() + i * eb;
  if (vreg < 0 or off + eb > v.size())
    throw RvvError("E_ILLEGAL_OPERAND", fmt::format("element {} of v{} is outside the register file", i, vreg));
  std::uint64_t r = 0;
  for (std::uint64_t k = 0; k < eb; ++k)
    r |= std::uint64_t(v[off + k]) << (8 * k);
  return r;
}

void MachineState::setElem(int vreg, std::uint64_t i, unsigned eew, std::uint64_t value)
{
  std::uint64_t eb = eew / 8;
  std::uint64_t off = std::uint64_t(vreg) * vlenb() + i * eb;
  if (vreg < 0 or off + eb > v.size())
    throw RvvError("E_ILLEGAL_OPERAND", fmt::format("element {} of v{} is outside the register file", i, vreg));
  for (std::uint64_t k = 0; k < eb; ++k)
    v[off + k] = std::uint8_t(value >> (8 * k));
}

namespace
{
  // 0.7.1 mask element width.
  unsigned mlen(const MachineState& s)
  {
    return s.vtype.sew / lmulNumerator(s.vtype.lmul);
  }
}

bool MachineState::maskBit(int vreg, std::uint64_t i) const
{
  std::uint64_t bit = version == IsaVersion::V10 ? i : i * mlen(*this);
  if (bit >= vlen_bits)
    throw RvvError("E_ILLEGAL_OPERAND", fmt::format("mask element {} is outside v{}", i, vreg));
  return (v[std::size_t(vreg) * vlenb() + bit / 8] >> (bit % 8)) & 1;
}

void MachineState::setMaskBit(int vreg, std::uint64_t i, bool value)
{
  auto setBit = [&](std::uint64_t bit, bool b) {
    auto& byte = v[std::size_t(vreg) * vlenb() + bit / 8];
    byte = std::uint8_t((byte & ~(1u << (bit % 8))) | (unsigned(b) << (bit % 8)));
  };
  if (version == IsaVersion::V10)
    {
      setBit(i, value);
      return;
    }
  unsigned m = mlen(*this);
  for (unsigned k = 0; k < m; ++k)
    setBit(i * m + k, k == 0 and value);
}

// ---------------------------------------------------------------- execution

namespace
{

  const std::uint64_t allOnes = ~std::uint64_t(0);

  float asFloat(std::uint32_t b) { return std::bit_cast<float>(b); }
  std::uint32_t asBits(float f) { return std::bit_cast<std::uint32_t>(f); }
  double asDouble(std::uint64_t b) { return std::bit_cast<double>(b); }
  std::uint64_t asBits64(double d) { return std::bit_cast<std::uint64_t>(d); }

  [[noreturn]] void unsupported(const Instruction& in, const std::string& why = {})
  {
    throw RvvError("E_UNSUPPORTED_INSN",
                   why.empty() ? fmt::format("'{}' is outside the interpreter subset", in.canonical())
                               : fmt::format("'{}': {}", in.canonical(), why));
  }

  [[noreturn]] void badOperand(const Instruction& in, const std::string& why)
  {
    throw RvvError("E_ILLEGAL_OPERAND", fmt::format("'{}': {}", in.canonical(), why));
  }

  std::int64_t parseDisp(const Instruction& in, const std::string& disp)
  {
    if (disp.empty())
      return 0;
    std::string_view s = disp;
    bool neg = false;
    if (s.front() == '-' or s.front() == '+')
      {
        neg = s.front() == '-';
        s.remove_prefix(1);
      }
    int base = 10;
    if (s.starts_with("0x") or s.starts_with("0X"))
      {
        base = 16;
        s.remove_prefix(2);
      }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc() or p != s.data() + s.size())
      unsupported(in, "symbolic displacement");
    return neg ? -static_cast<std::int64_t>(v) : static_cast<std::int64_t>(v);
  }

  /// Operand accessors with shape checks.
  struct Ops
  {
    const Instruction& in;
    std::size_t count;   // operands excluding a trailing v0.t
    bool masked;

    explicit Ops(const Instruction& i)
      : in(i), count(i.operands.size()), masked(i.hasMask())
    {
      if (masked)
        --count;
    }

    const Operand& at(std::size_t k) const
    {
      if (k >= count)
        badOperand(in, "missing operand");
      return in.operands[k];
    }

    void expect(std::size_t n) const
    {
      if (count != n)
        badOperand(in, fmt::format("expected {} operand(s)", n));
    }

    int x(std::size_t k) const
    {
      const auto& o = at(k);
      if (o.kind != OperandKind::ScalarReg)
        badOperand(in, "expected a scalar register");
      return o.reg;
    }
    int v(std::size_t k) const
    {
      const auto& o = at(k);
      if (o.kind != OperandKind::VectorReg)
        badOperand(in, "expected a vector register");
      return o.reg;
    }
    int f(std::size_t k) const
    {
      const auto& o = at(k);
      if (o.kind != OperandKind::FloatReg)
        badOperand(in, "expected a float register");
      return o.reg;
    }
    std::int64_t imm(std::size_t k) const
    {
      const auto& o = at(k);
      if (o.kind != OperandKind::Immediate)
        badOperand(in, "expected an immediate");
      return o.imm;
    }
    std::pair<int, std::int64_t> mem(std::size_t k) const
    {
      const auto& o = at(k);
      if (o.kind != OperandKind::MemoryRef)
        badOperand(in, "expected a memory operand");
      return { o.reg, parseDisp(in, o.disp) };
    }
    std::string sym(std::size_t k) const
    {
      const auto& o = at(k);
      if (o.kind != OperandKind::Symbol)
        badOperand(in, "expected a label");
      return o.text;
    }
    std::string csr(std::size_t k) const
    {
      const auto& o = at(k);
      if (o.kind != OperandKind::CsrName)
        badOperand(in, "expected a CSR name");
      return o.text;
    }
  };

  // ------------------------------------------------------------ config

  std::uint64_t applyConfig(MachineState& s, const Instruction& in, int rd, int rs1,
                            std::optional<std::uint64_t> immAvl, std::optional<VTypeSpec> spec)
  {
    bool keepVl = false;
    std::uint64_t avl = 0;
    if (immAvl)
      avl = *immAvl;
    else if (rs1 != 0)
      avl = s.x[rs1];
    else if (rd != 0 or s.version == IsaVersion::V071)
      avl = allOnes;
    else
      keepVl = true;

    if (spec and spec->sew > 64)
      spec.reset();
    if (spec and s.version == IsaVersion::V071 and isFractional(spec->lmul))
      spec.reset();
    if (spec and spec->vlmax(s.vlen_bits) == 0)
      spec.reset();

    if (keepVl)
      {
        // Only legal when VLMAX is unchanged.
        if (s.vill or not spec or spec->vlmax(s.vlen_bits) != s.vtype.vlmax(s.vlen_bits))
          spec.reset();
      }

    if (not spec)
      {
        s.vill = true;
        s.vl = 0;
      }
    else
      {
        auto vlmax = spec->vlmax(s.vlen_bits);
        s.vill = false;
        s.vtype = *spec;
        if (not keepVl)
          s.vl = std::min<std::uint64_t>(avl, vlmax);
      }
    (void) in;
    if (rd != 0)
      s.x[rd] = s.vl;
    return s.vl;
  }

  void execVsetvli(MachineState& s, const Instruction& in, bool immediate)
  {
    Ops o(in);
    if (immediate and s.version == IsaVersion::V071)
      unsupported(in, "vsetivli does not exist in RVV 0.7.1");
    VTypeSpec spec = decodeVTypeOperands(in);
    if (s.version == IsaVersion::V071)
      {
        if (spec.tail != Policy::Unspecified or spec.mask != Policy::Unspecified)
          unsupported(in, "policy tokens do not exist in RVV 0.7.1");
        if (isFractional(spec.lmul))
          unsupported(in, "fractional LMUL does not exist in RVV 0.7.1");
      }
    else
      {
        // The assembler default for an omitted policy is undisturbed.
        if (spec.tail == Policy::Unspecified)
          spec.tail = Policy::Undisturbed;
        if (spec.mask == Policy::Unspecified)
          spec.mask = Policy::Undisturbed;
      }
    int rd = o.x(0);
    if (immediate)
      applyConfig(s, in, rd, 0, static_cast<std::uint64_t>(o.imm(1)) & 31, spec);
    else
      applyConfig(s, in, rd, o.x(1), std::nullopt, spec);
  }

  void execVsetvl(MachineState& s, const Instruction& in)
  {
    Ops o(in);
    o.expect(3);
    applyConfig(s, in, o.x(0), o.x(1), std::nullopt, decodeVType(s.x[o.x(2)], s.version));
  }

  // ------------------------------------------------------------ vector helpers

  struct Emul
  {
    unsigned num = 1, den = 1;
    unsigned regs() const { return num >= den ? num / den : 1; }
  };

  Emul lmulOf(const VTypeSpec& t)
  {
    return { lmulNumerator(t.lmul), lmulDenominator(t.lmul) };
  }

  /// EMUL = LMUL * eew / SEW
  Emul scaledEmul(const MachineState& s, const Instruction& in, unsigned eew)
  {
    unsigned num = lmulNumerator(s.vtype.lmul) * eew;
    unsigned den = lmulDenominator(s.vtype.lmul) * s.vtype.sew;
    auto g = std::gcd(num, den);
    Emul e{ num / g, den / g };
    if ((e.den == 1 and e.num > 8) or (e.num == 1 and e.den > 8))
      badOperand(in, fmt::format("EMUL {}/{} is out of range", e.num, e.den));
    if (s.version == IsaVersion::V071 and e.den != 1)
      badOperand(in, "fractional EMUL does not exist in RVV 0.7.1");
    return e;
  }

  void requireVtype(const MachineState& s, const Instruction& in)
  {
    if (s.vill)
      throw RvvError("E_ILLEGAL_VTYPE", fmt::format("'{}' executed with an illegal vtype", in.canonical()));
    if (s.vstart != 0)
      unsupported(in, "non-zero vstart");
  }

  void checkGroup(const Instruction& in, int vreg, Emul e)
  {
    unsigned regs = e.regs();
    if (vreg % int(regs) != 0 or vreg + int(regs) > 32)
      badOperand(in, fmt::format("v{} is not a valid register group of {}", vreg, regs));
  }

  bool agnosticFill(const MachineState& s, Policy p)
  {
    return s.version == IsaVersion::V10 and s.hostile_agnostic and p == Policy::Agnostic;
  }

  std::vector<bool> activeSet(const MachineState& s, bool masked)
  {
    std::vector<bool> a(s.vl, true);
    if (masked)
      for (std::uint64_t i = 0; i < s.vl; ++i)
        a[i] = s.maskBit(0, i);
    return a;
  }

  /// Write computed elements with the version's tail and inactive rules.
  void commit(MachineState& s, int vd, unsigned eew, Emul e, const std::vector<std::uint64_t>& vals,
              const std::vector<bool>& active)
  {
    const std::uint64_t groupElems = std::uint64_t(e.regs()) * s.vlen_bits / eew;
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (active[i])
          s.setElem(vd, i, eew, vals[i]);
        else if (agnosticFill(s, s.vtype.mask))
          s.setElem(vd, i, eew, allOnes);
      }
    for (std::uint64_t i = s.vl; i < groupElems; ++i)
      {
        if (s.version == IsaVersion::V071)
          s.setElem(vd, i, eew, 0);
        else if (agnosticFill(s, s.vtype.tail))
          s.setElem(vd, i, eew, allOnes);
      }
  }

  /// Write a mask result. Mask destinations are always tail agnostic in 1.0.
  void commitMask(MachineState& s, int vd, const std::vector<bool>& vals, const std::vector<bool>& active)
  {
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (active[i])
          s.setMaskBit(vd, i, vals[i]);
        else if (agnosticFill(s, s.vtype.mask))
          s.setMaskBit(vd, i, true);
      }
    if (s.version == IsaVersion::V071)
      {
        auto vlmax = s.vtype.vlmax(s.vlen_bits);
        for (std::uint64_t i = s.vl; i < vlmax; ++i)
          s.setMaskBit(vd, i, false);
      }
    else if (s.hostile_agnostic)
      {
        for (std::uint64_t i = s.vl; i < s.vlen_bits; ++i)
          s.setMaskBit(vd, i, true);
      }
  }

  /// Scalar-result-in-element-0 writes (reductions, vmv.s.x).
  void commitScalar(MachineState& s, int vd, unsigned eew, std::uint64_t value)
  {
    if (s.vl == 0)
      return;
    s.setElem(vd, 0, eew, value);
    const std::uint64_t regElems = s.vlen_bits / eew;
    for (std::uint64_t i = 1; i < regElems; ++i)
      {
        if (s.version == IsaVersion::V071)
          s.setElem(vd, i, eew, 0);
        else if (agnosticFill(s, s.vtype.tail))
          s.setElem(vd, i, eew, allOnes);
      }
  }

  std::pair<std::string, std::string> splitMnemonic(const std::string& mn)
  {
    auto dot = mn.find('.');
    if (dot == std::string::npos)
      return { mn, "" };
    return { mn.substr(0, dot), mn.substr(dot + 1) };
  }

  // ------------------------------------------------------------ integer ops

  using IntFn = std::uint64_t (*)(std::uint64_t a, std::uint64_t b, unsigned sew);

  const std::map<std::string, IntFn, std::less<>>& intOps()
  {
    static const std::map<std::string, IntFn, std::less<>> ops = {
      { "vadd", [](std::uint64_t a, std::uint64_t b, unsigned) { return a + b; } },
      { "vsub", [](std::uint64_t a, std::uint64_t b, unsigned) { return a - b; } },
      { "vrsub", [](std::uint64_t a, std::uint64_t b, unsigned) { return b - a; } },
      { "vand", [](std::uint64_t a, std::uint64_t b, unsigned) { return a & b; } },
      { "vor", [](std::uint64_t a, std::uint64_t b, unsigned) { return a | b; } },
      { "vxor", [](std::uint64_t a, std::uint64_t b, unsigned) { return a ^ b; } },
      { "vmul", [](std::uint64_t a, std::uint64_t b, unsigned) { return a * b; } },
      { "vminu", [](std::uint64_t a, std::uint64_t b, unsigned) { return std::min(a, b); } },
      { "vmaxu", [](std::uint64_t a, std::uint64_t b, unsigned) { return std::max(a, b); } },
      { "vmin", [](std::uint64_t a, std::uint64_t b, unsigned w) {
          return sext(a, w) < sext(b, w) ? a : b; } },
      { "vmax", [](std::uint64_t a, std::uint64_t b, unsigned w) {
          return sext(a, w) > sext(b, w) ? a : b; } },
      { "vsll", [](std::uint64_t a, std::uint64_t b, unsigned w) { return a << (b & (w - 1)); } },
      { "vsrl", [](std::uint64_t a, std::uint64_t b, unsigned w) { return a >> (b & (w - 1)); } },
      { "vsra", [](std::uint64_t a, std::uint64_t b, unsigned w) {
          return std::uint64_t(sext(a, w) >> (b & (w - 1))); } },
      { "vdivu", [](std::uint64_t a, std::uint64_t b, unsigned) { return b == 0 ? allOnes : a / b; } },
      { "vremu", [](std::uint64_t a, std::uint64_t b, unsigned) { return b == 0 ? a : a % b; } },
      { "vdiv", [](std::uint64_t a, std::uint64_t b, unsigned w) {
          auto x = sext(a, w), y = sext(b, w);
          if (y == 0)
            return allOnes;
          if (y == -1 and x == sext(std::uint64_t(1) << (w - 1), w))
            return a;
          return std::uint64_t(x / y); } },
      { "vrem", [](std::uint64_t a, std::uint64_t b, unsigned w) {
          auto x = sext(a, w), y = sext(b, w);
          if (y == 0)
            return a;
          if (y == -1)
            return std::uint64_t(0);
          return std::uint64_t(x % y); } },
    };
    return ops;
  }

  using CmpFn = bool (*)(std::uint64_t a, std::uint64_t b, unsigned sew);

  const std::map<std::string, CmpFn, std::less<>>& cmpOps()
  {
    static const std::map<std::string, CmpFn, std::less<>> ops = {
      { "vmseq", [](std::uint64_t a, std::uint64_t b, unsigned) { return a == b; } },
      { "vmsne", [](std::uint64_t a, std::uint64_t b, unsigned) { return a != b; } },
      { "vmsltu", [](std::uint64_t a, std::uint64_t b, unsigned) { return a < b; } },
      { "vmsleu", [](std::uint64_t a, std::uint64_t b, unsigned) { return a <= b; } },
      { "vmsgtu", [](std::uint64_t a, std::uint64_t b, unsigned) { return a > b; } },
      { "vmslt", [](std::uint64_t a, std::uint64_t b, unsigned w) { return sext(a, w) < sext(b, w); } },
      { "vmsle", [](std::uint64_t a, std::uint64_t b, unsigned w) { return sext(a, w) <= sext(b, w); } },
      { "vmsgt", [](std::uint64_t a, std::uint64_t b, unsigned w) { return sext(a, w) > sext(b, w); } },
    };
    return ops;
  }

  /// Second source operand of .vv/.vx/.vi forms.
  std::uint64_t secondOperand(const MachineState& s, const Ops& o, const std::string& form,
                              std::uint64_t i, unsigned sew, bool shiftImm)
  {
    if (form == "vv" or form == "vvm")
      return s.elem(o.v(2), i, sew);
    if (form == "vx" or form == "vxm")
      return s.x[o.x(2)] & lowMask(sew);
    if (form == "vi" or form == "vim")
      return (shiftImm ? std::uint64_t(o.imm(2)) & 31 : std::uint64_t(o.imm(2))) & lowMask(sew);
    badOperand(o.in, "unknown operand form");
  }

  bool isShift(std::string_view op)
  {
    return op == "vsll" or op == "vsrl" or op == "vsra";
  }

  void execIntBinary(MachineState& s, const Instruction& in, IntFn fn, const std::string& form,
                     bool shiftImm)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(3);
    const unsigned sew = s.vtype.sew;
    const Emul e = lmulOf(s.vtype);
    int vd = o.v(0), vs2 = o.v(1);
    checkGroup(in, vd, e);
    checkGroup(in, vs2, e);
    if (form == "vv")
      checkGroup(in, o.v(2), e);
    auto active = activeSet(s, o.masked);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      if (active[i])
        vals[i] = fn(s.elem(vs2, i, sew), secondOperand(s, o, form, i, sew, shiftImm), sew) & lowMask(sew);
    commit(s, vd, sew, e, vals, active);
  }

  void execCompare(MachineState& s, const Instruction& in, CmpFn fn, const std::string& form)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(3);
    const unsigned sew = s.vtype.sew;
    const Emul e = lmulOf(s.vtype);
    int vd = o.v(0), vs2 = o.v(1);
    checkGroup(in, vs2, e);
    auto active = activeSet(s, o.masked);
    std::vector<bool> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      if (active[i])
        vals[i] = fn(s.elem(vs2, i, sew), secondOperand(s, o, form, i, sew, false), sew);
    commitMask(s, vd, vals, active);
  }

  void execMove(MachineState& s, const Instruction& in, const std::string& form)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(2);
    const unsigned sew = s.vtype.sew;
    const Emul e = lmulOf(s.vtype);
    int vd = o.v(0);
    checkGroup(in, vd, e);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (form == "v")
          vals[i] = s.elem(o.v(1), i, sew);
        else if (form == "x")
          vals[i] = s.x[o.x(1)] & lowMask(sew);
        else
          vals[i] = std::uint64_t(o.imm(1)) & lowMask(sew);
      }
    commit(s, vd, sew, e, vals, std::vector<bool>(s.vl, true));
  }

  void execMerge(MachineState& s, const Instruction& in, const std::string& form)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(4);
    if (o.v(3) != 0)
      badOperand(in, "merge selector must be v0");
    const unsigned sew = s.vtype.sew;
    const Emul e = lmulOf(s.vtype);
    int vd = o.v(0), vs2 = o.v(1);
    checkGroup(in, vd, e);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not s.maskBit(0, i))
          vals[i] = s.elem(vs2, i, sew);
        else if (form == "vfm")
          vals[i] = s.f[o.f(2)];
        else
          vals[i] = secondOperand(s, o, form, i, sew, false);
      }
    commit(s, vd, sew, e, vals, std::vector<bool>(s.vl, true));
  }

  void execVid(MachineState& s, const Instruction& in)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(1);
    const unsigned sew = s.vtype.sew;
    const Emul e = lmulOf(s.vtype);
    checkGroup(in, o.v(0), e);
    auto active = activeSet(s, o.masked);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      vals[i] = i & lowMask(sew);
    commit(s, o.v(0), sew, e, vals, active);
  }

  void execIntReduction(MachineState& s, const Instruction& in, const std::string& op)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(3);
    const unsigned sew = s.vtype.sew;
    checkGroup(in, o.v(1), lmulOf(s.vtype));
    auto active = activeSet(s, o.masked);
    std::uint64_t acc = s.elem(o.v(2), 0, sew);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i])
          continue;
        std::uint64_t b = s.elem(o.v(1), i, sew);
        if (op == "vredsum") acc = acc + b;
        else if (op == "vredand") acc &= b;
        else if (op == "vredor") acc |= b;
        else if (op == "vredxor") acc ^= b;
        else if (op == "vredmaxu") acc = std::max(acc, b);
        else if (op == "vredminu") acc = std::min(acc, b);
        else if (op == "vredmax") acc = sext(acc, sew) > sext(b, sew) ? acc : b;
        else if (op == "vredmin") acc = sext(acc, sew) < sext(b, sew) ? acc : b;
        else unsupported(in);
        acc &= lowMask(sew);
      }
    commitScalar(s, o.v(0), sew, acc);
  }

  // ------------------------------------------------------------ narrowing

  std::uint64_t roundoff(std::uint64_t v, unsigned d, std::uint64_t vxrm, bool isSigned, unsigned width)
  {
    if (d == 0)
      return v;
    auto bit = [&](unsigned k) { return (v >> k) & 1; };
    std::uint64_t r = 0;
    switch (vxrm & 3)
      {
      case 0: r = bit(d - 1); break;                                         // rnu
      case 1: r = bit(d - 1) & ((d > 1 and (v & lowMask(d - 1))) | bit(d)); break;   // rne
      case 2: r = 0; break;                                                  // rdn
      case 3: r = (not bit(d)) & ((v & lowMask(d)) != 0); break;            // rod
      }
    std::uint64_t shifted = isSigned ? std::uint64_t(sext(v, width) >> d) : v >> d;
    return shifted + r;
  }

  void execNarrowShift(MachineState& s, const Instruction& in, const std::string& op,
                       const std::string& form)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(3);
    const unsigned sew = s.vtype.sew;
    const unsigned wide = 2 * sew;
    if (wide > 64)
      badOperand(in, "narrowing needs 2*SEW <= 64");
    const Emul e = lmulOf(s.vtype);
    const Emul we{ e.num * 2, e.den };
    if (we.den == 1 and we.num > 8)
      badOperand(in, "narrowing source group exceeds 8 registers");
    int vd = o.v(0), vs2 = o.v(1);
    checkGroup(in, vd, e);
    checkGroup(in, vs2, we);
    auto active = activeSet(s, o.masked);
    std::vector<std::uint64_t> vals(s.vl);
    char f = form.back();   // v/w forms share the last letter of the scalar kind
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i])
          continue;
        std::uint64_t a = s.elem(vs2, i, wide);
        std::uint64_t sh;
        if (f == 'v')
          sh = s.elem(o.v(2), i, sew);
        else if (f == 'x')
          sh = s.x[o.x(2)];
        else
          sh = std::uint64_t(o.imm(2)) & 31;
        sh &= wide - 1;
        std::uint64_t r = 0;
        if (op == "vnsrl")
          r = a >> sh;
        else if (op == "vnsra")
          r = std::uint64_t(sext(a, wide) >> sh);
        else if (op == "vnclipu")
          {
            std::uint64_t t = roundoff(a, unsigned(sh), s.vxrm, false, wide);
            if (t > lowMask(sew))
              {
                t = lowMask(sew);
                s.vxsat = 1;
              }
            r = t;
          }
        else   // vnclip
          {
            std::int64_t t = sext(roundoff(a, unsigned(sh), s.vxrm, true, wide), wide);
            std::int64_t hi = std::int64_t(lowMask(sew - 1));
            std::int64_t lo = -hi - 1;
            if (t > hi) { t = hi; s.vxsat = 1; }
            if (t < lo) { t = lo; s.vxsat = 1; }
            r = std::uint64_t(t);
          }
        vals[i] = r & lowMask(sew);
      }
    commit(s, vd, sew, e, vals, active);
  }

  // ------------------------------------------------------------ float

  void requireF32(const MachineState& s, const Instruction& in)
  {
    if (s.vtype.sew != 32)
      unsupported(in, "floating point is modelled for SEW=32 only");
  }

  using FBin = float (*)(float a, float b);

  const std::map<std::string, FBin, std::less<>>& floatOps()
  {
    static const std::map<std::string, FBin, std::less<>> ops = {
      { "vfadd", [](float a, float b) { return a + b; } },
      { "vfsub", [](float a, float b) { return a - b; } },
      { "vfrsub", [](float a, float b) { return b - a; } },
      { "vfmul", [](float a, float b) { return a * b; } },
      { "vfdiv", [](float a, float b) { return a / b; } },
      { "vfrdiv", [](float a, float b) { return b / a; } },
      { "vfmin", [](float a, float b) { return std::fmin(a, b); } },
      { "vfmax", [](float a, float b) { return std::fmax(a, b); } },
    };
    return ops;
  }

  float secondFloat(const MachineState& s, const Ops& o, const std::string& form, std::uint64_t i)
  {
    if (form == "vv")
      return asFloat(std::uint32_t(s.elem(o.v(2), i, 32)));
    if (form == "vf")
      return asFloat(s.f[o.f(2)]);
    badOperand(o.in, "unknown float operand form");
  }

  void execFloatBinary(MachineState& s, const Instruction& in, FBin fn, const std::string& form)
  {
    requireVtype(s, in);
    requireF32(s, in);
    Ops o(in);
    o.expect(3);
    const Emul e = lmulOf(s.vtype);
    int vd = o.v(0), vs2 = o.v(1);
    checkGroup(in, vd, e);
    checkGroup(in, vs2, e);
    auto active = activeSet(s, o.masked);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      if (active[i])
        vals[i] = asBits(fn(asFloat(std::uint32_t(s.elem(vs2, i, 32))), secondFloat(s, o, form, i)));
    commit(s, vd, 32, e, vals, active);
  }

  void execFloatFma(MachineState& s, const Instruction& in, const std::string& op, const std::string& form)
  {
    requireVtype(s, in);
    requireF32(s, in);
    Ops o(in);
    o.expect(3);
    const Emul e = lmulOf(s.vtype);
    int vd = o.v(0), vs2 = o.v(2);
    checkGroup(in, vd, e);
    checkGroup(in, vs2, e);
    auto active = activeSet(s, o.masked);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i])
          continue;
        float a = form == "vv" ? asFloat(std::uint32_t(s.elem(o.v(1), i, 32))) : asFloat(s.f[o.f(1)]);
        float b = asFloat(std::uint32_t(s.elem(vs2, i, 32)));
        float d = asFloat(std::uint32_t(s.elem(vd, i, 32)));
        float r;
        if (op == "vfmacc") r = std::fmaf(a, b, d);
        else if (op == "vfnmacc") r = std::fmaf(-a, b, -d);
        else if (op == "vfmsac") r = std::fmaf(a, b, -d);
        else if (op == "vfnmsac") r = std::fmaf(-a, b, d);
        else if (op == "vfmadd") r = std::fmaf(a, d, b);
        else if (op == "vfnmadd") r = std::fmaf(-a, d, -b);
        else if (op == "vfmsub") r = std::fmaf(a, d, -b);
        else r = std::fmaf(-a, d, b);   // vfnmsub
        vals[i] = asBits(r);
      }
    commit(s, vd, 32, e, vals, active);
  }

  void execFloatCompare(MachineState& s, const Instruction& in, const std::string& op, const std::string& form)
  {
    requireVtype(s, in);
    requireF32(s, in);
    Ops o(in);
    o.expect(3);
    checkGroup(in, o.v(1), lmulOf(s.vtype));
    auto active = activeSet(s, o.masked);
    std::vector<bool> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i])
          continue;
        float a = asFloat(std::uint32_t(s.elem(o.v(1), i, 32)));
        float b = secondFloat(s, o, form, i);
        if (op == "vmfeq") vals[i] = a == b;
        else if (op == "vmfne") vals[i] = a != b;
        else if (op == "vmflt") vals[i] = a < b;
        else if (op == "vmfle") vals[i] = a <= b;
        else if (op == "vmfgt") vals[i] = a > b;
        else vals[i] = a >= b;   // vmfge
      }
    commitMask(s, o.v(0), vals, active);
  }

  void execFloatReduction(MachineState& s, const Instruction& in, const std::string& op)
  {
    requireVtype(s, in);
    requireF32(s, in);
    Ops o(in);
    o.expect(3);
    checkGroup(in, o.v(1), lmulOf(s.vtype));
    auto active = activeSet(s, o.masked);
    bool widening = op.starts_with("vfwred");
    if (widening)
      {
        double acc = asDouble(s.elem(o.v(2), 0, 64));
        for (std::uint64_t i = 0; i < s.vl; ++i)
          if (active[i])
            acc = acc + double(asFloat(std::uint32_t(s.elem(o.v(1), i, 32))));
        commitScalar(s, o.v(0), 64, asBits64(acc));
        return;
      }
    float acc = asFloat(std::uint32_t(s.elem(o.v(2), 0, 32)));
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i])
          continue;
        float b = asFloat(std::uint32_t(s.elem(o.v(1), i, 32)));
        if (op == "vfredmax") acc = std::fmax(acc, b);
        else if (op == "vfredmin") acc = std::fmin(acc, b);
        else acc = acc + b;   // ordered evaluation for every sum flavour
      }
    commitScalar(s, o.v(0), 32, asBits(acc));
  }

  template <typename Int>
  Int saturatingConvert(double v)
  {
    if (std::isnan(v))
      return std::numeric_limits<Int>::max();
    double r = std::nearbyint(v);
    if (r <= double(std::numeric_limits<Int>::min()))
      return std::numeric_limits<Int>::min();
    if (r >= double(std::numeric_limits<Int>::max()))
      return std::numeric_limits<Int>::max();
    return static_cast<Int>(r);
  }

  std::uint64_t floatToInt(double v, unsigned width, bool isSigned)
  {
    switch (width)
      {
      case 16:
        return isSigned ? std::uint16_t(saturatingConvert<std::int16_t>(v))
                        : saturatingConvert<std::uint16_t>(v);
      case 32:
        return isSigned ? std::uint32_t(saturatingConvert<std::int32_t>(v))
                        : saturatingConvert<std::uint32_t>(v);
      default:
        return isSigned ? std::uint64_t(saturatingConvert<std::int64_t>(v))
                        : saturatingConvert<std::uint64_t>(v);
      }
  }

  /// vfncvt.<kind>.{w,v}: narrowing conversions from 2*SEW to SEW.
  void execNarrowConvert(MachineState& s, const Instruction& in, const std::string& kind)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(2);
    const unsigned sew = s.vtype.sew;
    const unsigned wide = 2 * sew;
    if (wide > 64)
      badOperand(in, "narrowing needs 2*SEW <= 64");
    bool toInt = kind == "xu.f" or kind == "x.f";
    if (toInt and sew != 16 and sew != 32)
      unsupported(in, "conversion needs SEW 16 or 32");
    if (not toInt and sew != 32)
      unsupported(in, "floating point is modelled for SEW=32 only");
    const Emul e = lmulOf(s.vtype);
    const Emul we{ e.num * 2, e.den };
    checkGroup(in, o.v(0), e);
    checkGroup(in, o.v(1), we);
    auto active = activeSet(s, o.masked);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i])
          continue;
        std::uint64_t a = s.elem(o.v(1), i, wide);
        double src = wide == 64 ? asDouble(a) : double(asFloat(std::uint32_t(a)));
        if (kind == "xu.f")
          vals[i] = floatToInt(src, sew, false);
        else if (kind == "x.f")
          vals[i] = floatToInt(src, sew, true);
        else if (kind == "f.xu")
          vals[i] = asBits(static_cast<float>(a));
        else if (kind == "f.x")
          vals[i] = asBits(static_cast<float>(static_cast<std::int64_t>(a)));
        else   // f.f
          vals[i] = asBits(static_cast<float>(asDouble(a)));
      }
    commit(s, o.v(0), sew, e, vals, active);
  }

  void execConvert(MachineState& s, const Instruction& in, const std::string& kind)
  {
    requireVtype(s, in);
    requireF32(s, in);
    Ops o(in);
    o.expect(2);
    const Emul e = lmulOf(s.vtype);
    checkGroup(in, o.v(0), e);
    checkGroup(in, o.v(1), e);
    auto active = activeSet(s, o.masked);
    std::vector<std::uint64_t> vals(s.vl);
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i])
          continue;
        std::uint32_t a = std::uint32_t(s.elem(o.v(1), i, 32));
        if (kind == "xu.f")
          vals[i] = floatToInt(asFloat(a), 32, false);
        else if (kind == "x.f")
          vals[i] = floatToInt(asFloat(a), 32, true);
        else if (kind == "f.xu")
          vals[i] = asBits(static_cast<float>(a));
        else
          vals[i] = asBits(static_cast<float>(static_cast<std::int32_t>(a)));
      }
    commit(s, o.v(0), 32, e, vals, active);
  }

  // ------------------------------------------------------------ masks

  void execMaskLogical(MachineState& s, const Instruction& in, const std::string& op)
  {
    requireVtype(s, in);
    Ops o(in);
    std::vector<bool> vals(s.vl);
    int vd = o.v(0);
    if (op == "vmclr" or op == "vmset")
      {
        o.expect(1);
        std::fill(vals.begin(), vals.end(), op == "vmset");
      }
    else if (op == "vmmv" or op == "vmcpy" or op == "vmnot")
      {
        o.expect(2);
        for (std::uint64_t i = 0; i < s.vl; ++i)
          vals[i] = s.maskBit(o.v(1), i) != (op == "vmnot");
      }
    else
      {
        o.expect(3);
        for (std::uint64_t i = 0; i < s.vl; ++i)
          {
            bool a = s.maskBit(o.v(1), i), b = s.maskBit(o.v(2), i);
            bool r;
            if (op == "vmand") r = a and b;
            else if (op == "vmnand") r = not (a and b);
            else if (op == "vmandn" or op == "vmandnot") r = a and not b;
            else if (op == "vmor") r = a or b;
            else if (op == "vmnor") r = not (a or b);
            else if (op == "vmorn" or op == "vmornot") r = a or not b;
            else if (op == "vmxor") r = a != b;
            else if (op == "vmxnor") r = a == b;
            else unsupported(in);
            vals[i] = r;
          }
      }
    commitMask(s, vd, vals, std::vector<bool>(s.vl, true));
  }

  void execMaskScalar(MachineState& s, const Instruction& in, const std::string& op)
  {
    requireVtype(s, in);
    Ops o(in);
    o.expect(2);
    auto active = activeSet(s, o.masked);
    std::int64_t result = op == "vfirst" ? -1 : 0;
    for (std::uint64_t i = 0; i < s.vl; ++i)
      {
        if (not active[i] or not s.maskBit(o.v(1), i))
          continue;
        if (op == "vfirst")
          {
            result = std::int64_t(i);
            break;
          }
        ++result;
      }
    s.x[o.x(0)] = std::uint64_t(result);
  }

  // ------------------------------------------------------------ memory

  struct MemForm
  {
    enum class Kind { Unit, Strided, Indexed } kind = Kind::Unit;
    bool load = true;
    unsigned eew = 0;          // 0: SEW (0.7.1 SEW-relative forms)
    bool fault_only_first = false;
  };

  std::optional<MemForm> memoryForm(const std::string& mn)
  {
    static const std::regex v10(R"(v(l|s)(e|se|uxei|oxei)(8|16|32|64)(ff)?\.v)");
    static const std::regex v071(R"(v(l|s)(e|se|xe|uxe)(ff)?\.v)");
    std::smatch m;
    MemForm f;
    if (std::regex_match(mn, m, v10))
      {
        f.load = m[1] == "l";
        f.eew = unsigned(std::stoul(m[3]));
        f.fault_only_first = m[4].matched;
        f.kind = m[2] == "e" ? MemForm::Kind::Unit
          : m[2] == "se" ? MemForm::Kind::Strided : MemForm::Kind::Indexed;
        return f;
      }
    if (std::regex_match(mn, m, v071))
      {
        f.load = m[1] == "l";
        f.fault_only_first = m[3].matched;
        f.kind = m[2] == "e" ? MemForm::Kind::Unit
          : m[2] == "se" ? MemForm::Kind::Strided : MemForm::Kind::Indexed;
        return f;
      }
    return std::nullopt;
  }

  void execVectorMemory(MachineState& s, const Instruction& in, const MemForm& form)
  {
    requireVtype(s, in);
    if (form.fault_only_first)
      unsupported(in, "fault-only-first loads are outside the interpreter subset");
    Ops o(in);
    const unsigned sew = s.vtype.sew;
    const bool v10 = s.version == IsaVersion::V10;
    // Data width: the mnemonic's EEW for 1.0 unit/strided forms, SEW otherwise.
    unsigned dataEew = (v10 and form.kind != MemForm::Kind::Indexed) ? form.eew : sew;
    unsigned indexEew = (v10 and form.kind == MemForm::Kind::Indexed) ? form.eew : sew;
    Emul de = dataEew == sew ? lmulOf(s.vtype) : scaledEmul(s, in, dataEew);
    int vd = o.v(0);
    checkGroup(in, vd, de);
    auto [base, disp] = o.mem(1);
    std::uint64_t addr0 = s.x[base] + std::uint64_t(disp);
    std::int64_t stride = 0;
    int vidx = -1;
    if (form.kind == MemForm::Kind::Strided)
      {
        o.expect(3);
        stride = static_cast<std::int64_t>(s.x[o.x(2)]);
      }
    else if (form.kind == MemForm::Kind::Indexed)
      {
        o.expect(3);
        vidx = o.v(2);
        checkGroup(in, vidx, indexEew == sew ? lmulOf(s.vtype) : scaledEmul(s, in, indexEew));
      }
    else
      o.expect(2);

    auto active = activeSet(s, o.masked);
    auto address = [&](std::uint64_t i) {
      switch (form.kind)
        {
        case MemForm::Kind::Unit: return addr0 + i * (dataEew / 8);
        case MemForm::Kind::Strided: return addr0 + std::uint64_t(std::int64_t(i) * stride);
        case MemForm::Kind::Indexed:
          {
            std::uint64_t off = s.elem(vidx, i, indexEew);
            if (not v10)
              off = std::uint64_t(sext(off, indexEew));
            return addr0 + off;
          }
        }
      return addr0;
    };

    if (form.load)
      {
        std::vector<std::uint64_t> vals(s.vl);
        for (std::uint64_t i = 0; i < s.vl; ++i)
          if (active[i])
            vals[i] = s.mem.load(address(i), dataEew / 8);
        commit(s, vd, dataEew, de, vals, active);
      }
    else
      for (std::uint64_t i = 0; i < s.vl; ++i)
        if (active[i])
          s.mem.store(address(i), dataEew / 8, s.elem(vd, i, dataEew));
  }

  bool execWholeRegister(MachineState& s, const Instruction& in)
  {
    static const std::regex load(R"(vl([1248])r(e(8|16|32|64))?\.v)");
    static const std::regex storeRe(R"(vs([1248])r\.v)");
    static const std::regex move(R"(vmv([1248])r\.v)");
    std::smatch m;
    Ops o(in);
    const auto& mn = in.mnemonic;
    if (std::regex_match(mn, m, load) or std::regex_match(mn, m, storeRe))
      {
        o.expect(2);
        unsigned n = unsigned(std::stoul(m[1]));
        int vr = o.v(0);
        checkGroup(in, vr, { n, 1 });
        auto [base, disp] = o.mem(1);
        std::uint64_t addr = s.x[base] + std::uint64_t(disp);
        std::size_t bytes = std::size_t(n) * s.vlenb();
        std::uint8_t* reg = s.v.data() + std::size_t(vr) * s.vlenb();
        if (mn[1] == 'l')
          {
            auto data = s.mem.read(addr, bytes);
            std::memcpy(reg, data.data(), bytes);
          }
        else
          s.mem.write(addr, reg, bytes);
        return true;
      }
    if (std::regex_match(mn, m, move))
      {
        o.expect(2);
        unsigned n = unsigned(std::stoul(m[1]));
        checkGroup(in, o.v(0), { n, 1 });
        checkGroup(in, o.v(1), { n, 1 });
        std::memmove(s.v.data() + std::size_t(o.v(0)) * s.vlenb(),
                     s.v.data() + std::size_t(o.v(1)) * s.vlenb(), std::size_t(n) * s.vlenb());
        return true;
      }
    return false;
  }

  // ------------------------------------------------------------ dispatch

  void gateVersion(const MachineState& s, const Instruction& in)
  {
    const auto* e = Catalog::builtin().find(in.mnemonic);
    if (not e)
      unsupported(in);
    bool present = s.version == IsaVersion::V071 ? e->present_in_v071 : e->present_in_v10;
    if (not present)
      unsupported(in, fmt::format("not an RVV {} instruction", isaVersionName(s.version)));
  }

  void execVector(MachineState& s, const Instruction& in)
  {
    const auto& mn = in.mnemonic;
    gateVersion(s, in);

    if (mn == "vsetvli" or mn == "vsetivli")
      return execVsetvli(s, in, mn == "vsetivli");
    if (mn == "vsetvl")
      return execVsetvl(s, in);
    if (execWholeRegister(s, in))
      return;
    if (auto form = memoryForm(mn))
      return execVectorMemory(s, in, *form);

    auto [op, form] = splitMnemonic(mn);
    Ops o(in);

    if (auto it = intOps().find(op); it != intOps().end() and
        (form == "vv" or form == "vx" or form == "vi"))
      return execIntBinary(s, in, it->second, form, isShift(op) and form == "vi");
    if (auto it = cmpOps().find(op); it != cmpOps().end() and
        (form == "vv" or form == "vx" or form == "vi"))
      return execCompare(s, in, it->second, form);
    if (op == "vmv" and (form == "v.v" or form == "v.x" or form == "v.i"))
      return execMove(s, in, form.substr(2));
    if (op == "vmerge" and (form == "vvm" or form == "vxm" or form == "vim"))
      return execMerge(s, in, form);
    if (op == "vfmerge" and form == "vfm")
      return execMerge(s, in, form);
    if (op == "vid" and form == "v")
      return execVid(s, in);
    if (op.starts_with("vred") and form == "vs")
      return execIntReduction(s, in, op);
    if ((op.starts_with("vfred") or op.starts_with("vfwred")) and form == "vs")
      return execFloatReduction(s, in, op);
    if ((op == "vnsrl" or op == "vnsra" or op == "vnclipu" or op == "vnclip") and
        (form == "wv" or form == "wx" or form == "wi" or form == "vv" or form == "vx" or form == "vi"))
      return execNarrowShift(s, in, op, form);
    if (op == "vfncvt" and (form.ends_with(".w") or form.ends_with(".v")))
      return execNarrowConvert(s, in, form.substr(0, form.size() - 2));
    if (op == "vfcvt" and (form == "xu.f.v" or form == "x.f.v" or form == "f.xu.v" or form == "f.x.v"))
      return execConvert(s, in, form.substr(0, form.size() - 2));
    if (auto it = floatOps().find(op); it != floatOps().end() and (form == "vv" or form == "vf"))
      return execFloatBinary(s, in, it->second, form);
    if ((op == "vfmacc" or op == "vfnmacc" or op == "vfmsac" or op == "vfnmsac" or op == "vfmadd" or
         op == "vfnmadd" or op == "vfmsub" or op == "vfnmsub") and (form == "vv" or form == "vf"))
      return execFloatFma(s, in, op, form);
    if ((op == "vmfeq" or op == "vmfne" or op == "vmflt" or op == "vmfle") and (form == "vv" or form == "vf"))
      return execFloatCompare(s, in, op, form);
    if ((op == "vmfgt" or op == "vmfge") and form == "vf")
      return execFloatCompare(s, in, op, form);
    if (form == "mm" or (form == "m" and (op == "vmmv" or op == "vmcpy" or op == "vmnot" or
                                          op == "vmclr" or op == "vmset")))
      return execMaskLogical(s, in, op);
    if (form == "m" and (op == "vcpop" or op == "vpopc" or op == "vfirst"))
      return execMaskScalar(s, in, op);

    if (mn == "vmv.x.s")
      {
        requireVtype(s, in);
        o.expect(2);
        s.x[o.x(0)] = std::uint64_t(sext(s.elem(o.v(1), 0, s.vtype.sew), s.vtype.sew));
        return;
      }
    if (mn == "vmv.s.x")
      {
        requireVtype(s, in);
        o.expect(2);
        commitScalar(s, o.v(0), s.vtype.sew, s.x[o.x(1)] & lowMask(s.vtype.sew));
        return;
      }
    if (mn == "vfmv.f.s")
      {
        requireVtype(s, in);
        requireF32(s, in);
        o.expect(2);
        s.f[o.f(0)] = std::uint32_t(s.elem(o.v(1), 0, 32));
        return;
      }
    if (mn == "vfmv.s.f")
      {
        requireVtype(s, in);
        requireF32(s, in);
        o.expect(2);
        commitScalar(s, o.v(0), 32, s.f[o.f(1)]);
        return;
      }
    if (mn == "vfmv.v.f")
      {
        requireVtype(s, in);
        requireF32(s, in);
        o.expect(2);
        const Emul e = lmulOf(s.vtype);
        checkGroup(in, o.v(0), e);
        std::vector<std::uint64_t> vals(s.vl, s.f[o.f(1)]);
        commit(s, o.v(0), 32, e, vals, std::vector<bool>(s.vl, true));
        return;
      }
    unsupported(in);
  }

  // ------------------------------------------------------------ scalar

  std::uint64_t readCsr(const MachineState& s, const Instruction& in, const std::string& name)
  {
    if (name == "vl") return s.vl;
    if (name == "vtype") return s.vtypeCsr();
    if (name == "vstart") return s.vstart;
    if (name == "vxsat") return s.vxsat;
    if (name == "vxrm") return s.vxrm;
    if (s.version == IsaVersion::V10)
      {
        if (name == "vlenb") return s.vlenb();
        if (name == "vcsr") return (s.vxrm << 1) | s.vxsat;
      }
    unsupported(in, fmt::format("CSR {} is not available in RVV {}", name, isaVersionName(s.version)));
  }

  void writeCsr(MachineState& s, const Instruction& in, const std::string& name, std::uint64_t v)
  {
    if (name == "vxsat")
      s.vxsat = v & 1;
    else if (name == "vxrm")
      s.vxrm = v & 3;
    else if (name == "vcsr" and s.version == IsaVersion::V10)
      {
        s.vxsat = v & 1;
        s.vxrm = (v >> 1) & 3;
      }
    else if (name == "vstart" and v == 0)
      s.vstart = 0;
    else
      unsupported(in, fmt::format("write to CSR {}", name));
  }

  bool branchTaken(const std::string& mn, std::uint64_t a, std::uint64_t b)
  {
    auto sa = static_cast<std::int64_t>(a), sb = static_cast<std::int64_t>(b);
    if (mn == "beq" or mn == "beqz") return a == b;
    if (mn == "bne" or mn == "bnez") return a != b;
    if (mn == "blt" or mn == "bltz") return sa < sb;
    if (mn == "bge" or mn == "bgez") return sa >= sb;
    if (mn == "bgt" or mn == "bgtz") return sa > sb;
    if (mn == "ble" or mn == "blez") return sa <= sb;
    if (mn == "bltu") return a < b;
    if (mn == "bgeu") return a >= b;
    if (mn == "bgtu") return a > b;
    return a <= b;   // bleu
  }

  StepOutcome execScalar(MachineState& s, const Instruction& in)
  {
    const auto& mn = in.mnemonic;
    Ops o(in);
    auto& x = s.x;

    static const std::set<std::string, std::less<>> twoRegBranches = {
      "beq", "bne", "blt", "bge", "bltu", "bgeu", "bgt", "ble", "bgtu", "bleu" };
    static const std::set<std::string, std::less<>> zeroBranches = {
      "beqz", "bnez", "bltz", "bgez", "bgtz", "blez" };
    if (twoRegBranches.contains(mn))
      {
        o.expect(3);
        if (branchTaken(mn, x[o.x(0)], x[o.x(1)]))
          return { StepOutcome::Kind::Jump, o.sym(2) };
        return {};
      }
    if (zeroBranches.contains(mn))
      {
        o.expect(2);
        if (branchTaken(mn, x[o.x(0)], 0))
          return { StepOutcome::Kind::Jump, o.sym(1) };
        return {};
      }
    if (mn == "j")
      {
        o.expect(1);
        return { StepOutcome::Kind::Jump, o.sym(0) };
      }
    if (mn == "ret")
      return { StepOutcome::Kind::Halt, {} };
    if (mn == "nop")
      return {};

    static const std::map<std::string, unsigned, std::less<>> loads = {
      { "lb", 1 }, { "lbu", 1 }, { "lh", 2 }, { "lhu", 2 }, { "lw", 4 }, { "lwu", 4 }, { "ld", 8 } };
    static const std::map<std::string, unsigned, std::less<>> stores = {
      { "sb", 1 }, { "sh", 2 }, { "sw", 4 }, { "sd", 8 } };
    if (auto it = loads.find(mn); it != loads.end())
      {
        o.expect(2);
        auto [base, disp] = o.mem(1);
        std::uint64_t v = s.mem.load(x[base] + std::uint64_t(disp), it->second);
        bool isUnsigned = mn.back() == 'u' or mn == "ld";
        x[o.x(0)] = isUnsigned ? v : std::uint64_t(sext(v, 8 * it->second));
        return {};
      }
    if (auto it = stores.find(mn); it != stores.end())
      {
        o.expect(2);
        auto [base, disp] = o.mem(1);
        s.mem.store(x[base] + std::uint64_t(disp), it->second, x[o.x(0)]);
        return {};
      }
    if (mn == "flw" or mn == "fsw")
      {
        o.expect(2);
        auto [base, disp] = o.mem(1);
        std::uint64_t addr = x[base] + std::uint64_t(disp);
        if (mn == "flw")
          s.f[o.f(0)] = std::uint32_t(s.mem.load(addr, 4));
        else
          s.mem.store(addr, 4, s.f[o.f(0)]);
        return {};
      }
    if (mn == "fmv.w.x")
      {
        o.expect(2);
        s.f[o.f(0)] = std::uint32_t(x[o.x(1)]);
        return {};
      }
    if (mn == "fmv.x.w")
      {
        o.expect(2);
        x[o.x(0)] = std::uint64_t(sext(s.f[o.f(1)], 32));
        return {};
      }
    if (mn == "fmv.s")
      {
        o.expect(2);
        s.f[o.f(0)] = s.f[o.f(1)];
        return {};
      }
    if (mn == "csrr")
      {
        o.expect(2);
        x[o.x(0)] = readCsr(s, in, o.csr(1));
        return {};
      }
    if (mn == "csrw" or mn == "csrwi")
      {
        o.expect(2);
        auto name = o.csr(0);
        writeCsr(s, in, name, mn == "csrw" ? x[o.x(1)] : std::uint64_t(o.imm(1)));
        return {};
      }
    if (mn == "li")
      {
        o.expect(2);
        x[o.x(0)] = std::uint64_t(o.imm(1));
        return {};
      }
    if (mn == "mv" or mn == "neg" or mn == "not" or mn == "seqz" or mn == "snez" or mn == "sext.w")
      {
        o.expect(2);
        std::uint64_t a = x[o.x(1)];
        std::uint64_t r = mn == "mv" ? a : mn == "neg" ? 0 - a : mn == "not" ? ~a
          : mn == "seqz" ? std::uint64_t(a == 0) : mn == "snez" ? std::uint64_t(a != 0)
          : std::uint64_t(sext(a, 32));
        x[o.x(0)] = r;
        return {};
      }

    using Bin = std::uint64_t (*)(std::uint64_t, std::uint64_t);
    static const std::map<std::string, Bin, std::less<>> alu = {
      { "add", [](std::uint64_t a, std::uint64_t b) { return a + b; } },
      { "sub", [](std::uint64_t a, std::uint64_t b) { return a - b; } },
      { "mul", [](std::uint64_t a, std::uint64_t b) { return a * b; } },
      { "and", [](std::uint64_t a, std::uint64_t b) { return a & b; } },
      { "or", [](std::uint64_t a, std::uint64_t b) { return a | b; } },
      { "xor", [](std::uint64_t a, std::uint64_t b) { return a ^ b; } },
      { "sll", [](std::uint64_t a, std::uint64_t b) { return a << (b & 63); } },
      { "srl", [](std::uint64_t a, std::uint64_t b) { return a >> (b & 63); } },
      { "sra", [](std::uint64_t a, std::uint64_t b) {
          return std::uint64_t(static_cast<std::int64_t>(a) >> (b & 63)); } },
      { "slt", [](std::uint64_t a, std::uint64_t b) {
          return std::uint64_t(static_cast<std::int64_t>(a) < static_cast<std::int64_t>(b)); } },
      { "sltu", [](std::uint64_t a, std::uint64_t b) { return std::uint64_t(a < b); } },
      { "addw", [](std::uint64_t a, std::uint64_t b) { return std::uint64_t(sext(a + b, 32)); } },
      { "subw", [](std::uint64_t a, std::uint64_t b) { return std::uint64_t(sext(a - b, 32)); } },
    };
    static const std::map<std::string, std::string, std::less<>> immForms = {
      { "addi", "add" }, { "andi", "and" }, { "ori", "or" }, { "xori", "xor" }, { "slli", "sll" },
      { "srli", "srl" }, { "srai", "sra" }, { "slti", "slt" }, { "sltiu", "sltu" }, { "addiw", "addw" } };
    if (auto it = alu.find(mn); it != alu.end())
      {
        o.expect(3);
        x[o.x(0)] = it->second(x[o.x(1)], x[o.x(2)]);
        return {};
      }
    if (auto it = immForms.find(mn); it != immForms.end())
      {
        o.expect(3);
        x[o.x(0)] = alu.at(it->second)(x[o.x(1)], std::uint64_t(o.imm(2)));
        return {};
      }
    unsupported(in);
  }

}

StepOutcome step(MachineState& state, const Instruction& instr)
{
  StepOutcome out;
  if (isVectorMnemonic(instr.mnemonic))
    execVector(state, instr);
  else
    out = execScalar(state, instr);
  state.x[0] = 0;
  ++state.retired;
  return out;
}

MachineState execProgram(const KernelSpec& spec, IsaVersion version, unsigned vlenBits,
                         const ExecOptions& opts)
{
  return execProgram(spec, spec.program, version, vlenBits, opts);
}

MachineState execProgram(const KernelSpec& spec, const ProgramUnit& program, IsaVersion version,
                         unsigned vlenBits, const ExecOptions& opts)
{
  MachineState s(version, vlenBits);
  s.hostile_agnostic = opts.hostile_agnostic and version == IsaVersion::V10;
  for (const auto& [r, v] : spec.xregs)
    if (r > 0 and r < 32)
      s.x[r] = v;
  for (const auto& [r, v] : spec.fregs)
    s.f.at(r) = v;
  for (const auto& b : spec.memory)
    s.mem.map(b.addr, b.bytes);

  const auto& items = program.items;
  std::size_t pc = 0;
  std::uint64_t executed = 0;
  while (pc < items.size())
    {
      const auto& item = items[pc];
      if (item.kind == ItemKind::Raw)
        throw RvvError("E_UNSUPPORTED_INSN",
                       fmt::format("{}:{}: cannot execute '{}'", item.loc.file, item.loc.line, item.text));
      if (item.kind != ItemKind::Instruction)
        {
          ++pc;
          continue;
        }
      if (++executed > opts.fuel)
        throw RvvError("E_FUEL_EXHAUSTED",
                       fmt::format("{}:{}: instruction budget of {} exhausted", item.loc.file,
                                   item.loc.line, opts.fuel));
      StepOutcome out;
      try
        {
          out = step(s, *item.parsed);
        }
      catch (const RvvError& e)
        {
          throw RvvError(e.code(), fmt::format("{}:{}: {}", item.loc.file, item.loc.line, e.detail()));
        }
      if (out.kind == StepOutcome::Kind::Halt)
        break;
      if (out.kind == StepOutcome::Kind::Jump)
        {
          auto target = resolveLabel(program, out.target, pc);
          if (target == std::string::npos)
            throw RvvError("E_UNSUPPORTED_INSN", fmt::format("{}:{}: branch target '{}' not found",
                                                             item.loc.file, item.loc.line, out.target));
          pc = target;
          continue;
        }
      ++pc;
    }
  return s;
}

std::vector<std::vector<std::uint8_t>> observe(const MachineState& state,
                                               const std::vector<Window>& windows)
{
  std::vector<std::vector<std::uint8_t>> out;
  for (const auto& w : windows)
    out.push_back(state.mem.read(w.addr, w.len));
  return out;
}

}
