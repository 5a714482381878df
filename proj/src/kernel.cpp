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

#include "rvvb/kernel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "rvvb/error.hpp"
#include "rvvb/fileio.hpp"

namespace rvvb
{

namespace
{

  constexpr std::uint64_t in0Base = 0x10000;
  constexpr std::uint64_t in1Base = 0x20000;
  constexpr std::uint64_t outBase = 0x30000;
  constexpr std::uint64_t out2Base = 0x40000;
  constexpr std::uint64_t dumpBase = 0x50000;
  constexpr std::uint64_t stackBase = 0x60000;
  constexpr std::uint64_t stackSize = 0x1000;
  constexpr std::uint64_t spillOffset = 0x40000;   // from the output pointer
  constexpr unsigned spillSlots = 4;

  /// What is known about one vector register under RVV 1.0 semantics.
  struct RegInfo
  {
    enum class Kind { Undef, Full, Prefix, Elem0, Mask } kind = Kind::Undef;
    unsigned bytes = 0;   // Prefix: bytes per active element; Elem0: width
    int base = 0;         // Prefix: first register of the group
    unsigned regs = 1;    // Prefix: group size
  };

  class Generator
  {
  public:
    Generator(std::uint64_t seed, const GenParams& p) : rng_(seed), p_(p) { }

    KernelSpec run(std::uint64_t seed);

  private:
    std::mt19937_64 rng_;
    GenParams p_;
    std::vector<std::string> lines_;
    std::array<RegInfo, 32> regs_{};

    unsigned sew_ = 32, lmul_ = 1;   // main configuration
    bool tailU_ = false;             // main tail policy is tu
    unsigned dumpSlots_ = 0;
    unsigned maxDump_ = 0;

    std::uint64_t pick(std::uint64_t n) { return rng_() % n; }
    bool chance(unsigned percent) { return pick(100) < percent; }

    void emit(std::string s) { lines_.push_back("\t" + std::move(s)); }

    unsigned eb() const { return sew_ / 8; }
    std::string mainTokens() const
    {
      return fmt::format("e{}, m{}, {}, {}", sew_, lmul_, tailU_ ? "tu" : "ta", p_.with_masks ? "mu" : "ma");
    }

    // -------------------------------------------------------- register model

    void invalidate(int base, unsigned n)
    {
      for (int r = base; r < base + int(n); ++r)
        {
          auto& info = regs_[r];
          if (info.kind == RegInfo::Kind::Prefix)
            for (int k = info.base; k < info.base + int(info.regs); ++k)
              regs_[k] = {};
          regs_[r] = {};
        }
    }

    bool allFull(int base, unsigned n) const
    {
      for (int r = base; r < base + int(n); ++r)
        if (regs_[r].kind != RegInfo::Kind::Full)
          return false;
      return true;
    }

    bool defined(int base, unsigned n, unsigned bytes) const
    {
      if (allFull(base, n))
        return true;
      const auto& i = regs_[base];
      return i.kind == RegInfo::Kind::Prefix and i.base == base and i.regs == n and i.bytes >= bytes;
    }

    bool elem0(int r, unsigned bytes) const
    {
      const auto& i = regs_[r];
      switch (i.kind)
        {
        case RegInfo::Kind::Full: return true;
        case RegInfo::Kind::Prefix: return i.base == r and i.bytes >= bytes;
        case RegInfo::Kind::Elem0: return i.bytes >= bytes;
        default: return false;
        }
    }

    /// Record a write of the active body of group [base, base+n) at `bytes`
    /// per element. Tail-undisturbed keeps whatever was defined before.
    void wroteBody(int base, unsigned n, unsigned bytes, bool tailUndisturbed)
    {
      if (tailUndisturbed and allFull(base, n))
        return;
      unsigned keep = 0;
      if (tailUndisturbed and defined(base, n, 1) and regs_[base].kind == RegInfo::Kind::Prefix)
        keep = regs_[base].bytes;
      invalidate(base, n);
      for (int r = base; r < base + int(n); ++r)
        regs_[r] = { RegInfo::Kind::Prefix, std::max(bytes, keep), base, n };
    }

    void wroteFull(int base, unsigned n)
    {
      invalidate(base, n);
      for (int r = base; r < base + int(n); ++r)
        regs_[r] = { RegInfo::Kind::Full, 0, r, 1 };
    }

    void wroteElem0(int r, unsigned bytes, bool tailUndisturbed)
    {
      if (tailUndisturbed and elem0(r, bytes) and regs_[r].kind != RegInfo::Kind::Elem0)
        return;
      invalidate(r, 1);
      regs_[r] = { RegInfo::Kind::Elem0, bytes, r, 1 };
    }

    void wroteMask(int r)
    {
      invalidate(r, 1);
      regs_[r] = { RegInfo::Kind::Mask, 0, r, 1 };
    }

    bool isMask(int r) const { return regs_[r].kind == RegInfo::Kind::Mask; }

    /// A random group base aligned to n, never v0.
    int anyGroup(unsigned n)
    {
      unsigned slots = 32 / n;
      return int(n * (1 + pick(slots - 1)));
    }

    /// A group base not overlapping [avoidBase, avoidBase+avoidN).
    int groupAvoiding(unsigned n, int avoidBase, unsigned avoidN)
    {
      for (int tries = 0; tries < 64; ++tries)
        {
          int b = anyGroup(n);
          if (b + int(n) <= avoidBase or b >= avoidBase + int(avoidN))
            return b;
        }
      return anyGroup(n);
    }

    std::vector<int> definedGroups(unsigned n, unsigned bytes) const
    {
      std::vector<int> out;
      for (int b = int(n); b + int(n) <= 32; b += int(n))
        if (defined(b, n, bytes))
          out.push_back(b);
      return out;
    }

    /// A defined main-configuration group, loading one when none exists.
    int source()
    {
      auto g = definedGroups(lmul_, eb());
      if (not g.empty() and chance(85))
        return g[pick(g.size())];
      return emitLoad();
    }

    std::string vr(int r) const { return fmt::format("v{}", r); }

    std::string dumpSlot()
    {
      unsigned slot = dumpSlots_++ % maxDump_;
      return fmt::format("{}(a5)", slot * 8);
    }

    // -------------------------------------------------------- operations

    int emitLoad()
    {
      int g = anyGroup(lmul_);
      const char* ptr = chance(50) ? "a1" : "a2";
      if (chance(25))
        {
          emit(fmt::format("li a6, {}", eb() * (1 + pick(2))));
          emit(fmt::format("vlse{}.v {}, ({}), a6", sew_, vr(g), ptr));
        }
      else
        emit(fmt::format("vle{}.v {}, ({})", sew_, vr(g), ptr));
      wroteBody(g, lmul_, eb(), tailU_);
      return g;
    }

    void emitStore()
    {
      int g = source();
      emit(fmt::format("vse{}.v {}, (a3)", sew_, vr(g)));
    }

    void emitInit()
    {
      int g = anyGroup(lmul_);
      switch (pick(sew_ == 32 ? 4 : 3))
        {
        case 0: emit(fmt::format("vmv.v.x {}, a7", vr(g))); break;
        case 1: emit(fmt::format("vmv.v.i {}, {}", vr(g), int(pick(32)) - 16)); break;
        case 2: emit(fmt::format("vid.v {}", vr(g))); break;
        default: emit(fmt::format("vfmv.v.f {}, fa0", vr(g))); break;
        }
      wroteBody(g, lmul_, eb(), tailU_);
    }

    void emitIntArith()
    {
      static const char* vvOps[] = { "vadd", "vsub", "vand", "vor", "vxor", "vmul", "vminu", "vmax",
                                     "vsll", "vsrl", "vsra", "vdivu", "vremu" };
      static const char* viOps[] = { "vadd", "vrsub", "vand", "vor", "vxor", "vsll", "vsrl", "vsra" };
      int a = source();
      int d = anyGroup(lmul_);
      switch (pick(3))
        {
        case 0:
          {
            int b = source();
            if (not defined(a, lmul_, eb()))
              a = b;
            emit(fmt::format("{}.vv {}, {}, {}", vvOps[pick(std::size(vvOps))], vr(d), vr(a), vr(b)));
            break;
          }
        case 1:
          emit(fmt::format("{}.vx {}, {}, a7", vvOps[pick(std::size(vvOps))], vr(d), vr(a)));
          break;
        default:
          emit(fmt::format("{}.vi {}, {}, {}", viOps[pick(std::size(viOps))], vr(d), vr(a), int(pick(16))));
          break;
        }
      wroteBody(d, lmul_, eb(), tailU_);
    }

    void emitFloat()
    {
      static const char* ops[] = { "vfadd", "vfsub", "vfmul", "vfmin", "vfmax" };
      int a = source();
      int d = anyGroup(lmul_);
      switch (pick(3))
        {
        case 0:
          {
            int b = source();
            if (not defined(a, lmul_, eb()))
              a = b;
            emit(fmt::format("{}.vv {}, {}, {}", ops[pick(std::size(ops))], vr(d), vr(a), vr(b)));
            break;
          }
        case 1:
          emit(fmt::format("{}.vf {}, {}, fa0", ops[pick(std::size(ops))], vr(d), vr(a)));
          break;
        default:
          {
            // The accumulator is read, so it must already be defined.
            int acc = source();
            int b = source();
            if (not defined(a, lmul_, eb()))
              a = b;
            if (not defined(acc, lmul_, eb()))
              acc = b;
            if (not defined(a, lmul_, eb()) or not defined(acc, lmul_, eb()))
              return;
            emit(fmt::format("vfmacc.vv {}, {}, {}", vr(acc), vr(a), vr(b)));
            d = acc;
          }
        }
      wroteBody(d, lmul_, eb(), tailU_);
    }

    /// Compare into `dst` (v0 unless given).
    void emitCompare(int dst = 0, bool eq = false)
    {
      int a = source();
      if (eq or chance(50))
        {
          int b = source();
          if (not defined(a, lmul_, eb()))
            a = b;
          emit(fmt::format("vmseq.vv {}, {}, {}", vr(dst), vr(a), vr(b)));
        }
      else
        emit(fmt::format("vmslt.vx {}, {}, a7", vr(dst), vr(a)));
      wroteMask(dst);
    }

    bool emitMaskedAdd()
    {
      if (not isMask(0))
        return false;
      // Inactive elements keep the destination, so it must be defined.
      auto g = definedGroups(lmul_, eb());
      if (g.empty())
        return false;
      int d = g[pick(g.size())];
      int a = source();
      int b = source();
      if (not isMask(0) or not defined(d, lmul_, eb()))
        return false;
      if (not defined(a, lmul_, eb()))
        a = b;
      emit(fmt::format("vadd.vv {}, {}, {}, v0.t", vr(d), vr(a), vr(b)));
      wroteBody(d, lmul_, eb(), tailU_);
      return true;
    }

    void emitMaskFeature()
    {
      if (not isMask(0))
        {
          emitCompare();
          return;
        }
      switch (pick(5))
        {
        case 0:
          emitMaskedAdd();
          break;
        case 1:
          {
            int g = source();
            if (isMask(0))
              emit(fmt::format("vse{}.v {}, (a3), v0.t", sew_, vr(g)));
            break;
          }
        case 2:
          emit(fmt::format("{} a6, v0", chance(50) ? "vcpop.m" : "vfirst.m"));
          emit(fmt::format("sd a6, {}", dumpSlot()));
          break;
        case 3:
          {
            // Two temporary masks combined into v0.
            int m1 = 1 + int(pick(7)), m2 = 1 + int(pick(7));
            emitCompare(m1);
            emitCompare(m2);
            if (not isMask(m1))
              m1 = m2;
            static const char* ops[] = { "vmandn.mm", "vmorn.mm", "vmand.mm", "vmxor.mm" };
            emit(fmt::format("{} v0, {}, {}", ops[pick(std::size(ops))], vr(m1), vr(m2)));
            wroteMask(0);
            break;
          }
        default:
          {
            int m = 1 + int(pick(7));
            emitCompare(m);
            emit(fmt::format("vmmv.m v0, {}", vr(m)));
            wroteMask(0);
            break;
          }
        }
    }

    /// Same-ratio configuration change around a short body.
    void emitKeepVl()
    {
      unsigned s2, l2;
      if (chance(50) and sew_ >= 16 and lmul_ >= 2)
        {
          s2 = sew_ / 2;
          l2 = lmul_ / 2;
        }
      else if (sew_ <= 32 and lmul_ <= 4)
        {
          s2 = sew_ * 2;
          l2 = lmul_ * 2;
        }
      else
        return;
      emit(fmt::format("vsetvli zero, zero, e{}, m{}, ta, ma", s2, l2));
      int g = anyGroup(l2);
      emit(fmt::format("vle{}.v {}, (a1)", s2, vr(g)));
      wroteBody(g, l2, s2 / 8, false);
      int d = groupAvoiding(l2, g, l2);
      emit(fmt::format("vadd.vv {}, {}, {}", vr(d), vr(g), vr(g)));
      wroteBody(d, l2, s2 / 8, false);
      emit(fmt::format("vse{}.v {}, (a4)", s2, vr(d)));
      emit(fmt::format("vsetvli zero, zero, {}", mainTokens()));
      // Groups written under the other width are not reused.
      invalidate(g, l2);
      invalidate(d, l2);
    }

    void emitEewCopy()
    {
      std::vector<unsigned> widths;
      for (unsigned e : { 8u, 16u, 32u, 64u })
        {
          if (e == sew_)
            continue;
          // EMUL = LMUL * EEW / SEW within [1/8, 8]
          unsigned num = lmul_ * e, den = sew_;
          if (num <= 8 * den and 8 * num >= den)
            widths.push_back(e);
        }
      if (widths.empty())
        return;
      unsigned e = widths[pick(widths.size())];
      unsigned emulRegs = std::max(1u, lmul_ * e / sew_);
      int g = anyGroup(emulRegs);
      emit(fmt::format("vle{}.v {}, (a1)", e, vr(g)));
      emit(fmt::format("vse{}.v {}, (a4)", e, vr(g)));
      invalidate(g, emulRegs);
    }

    void emitWholeRegister()
    {
      static const unsigned counts[] = { 1, 2, 4, 8 };
      unsigned n = counts[pick(4)];
      int g = anyGroup(n);
      emit(fmt::format("vl{}r.v {}, (a{})", n, vr(g), chance(50) ? 1 : 2));
      wroteFull(g, n);
      int out = g;
      if (chance(50))
        {
          out = groupAvoiding(n, g, n);
          emit(fmt::format("vmv{}r.v {}, {}", n, vr(out), vr(g)));
          wroteFull(out, n);
        }
      if (chance(70))
        emit(fmt::format("vs{}r.v {}, (a4)", n, vr(out)));
    }

    /// A whole-register round trip whose tail is observed after a body write.
    void emitTailProbe()
    {
      unsigned n = lmul_;
      int g = anyGroup(n);
      emit(fmt::format("vl{}r.v {}, (a2)", n, vr(g)));
      wroteFull(g, n);
      int a = source();
      emit(fmt::format("vadd.vv {}, {}, {}", vr(g), vr(g), vr(a)));
      wroteBody(g, n, eb(), tailU_);
      if (allFull(g, n))
        emit(fmt::format("vs{}r.v {}, (a4)", n, vr(g)));
    }

    void emitCsrDump()
    {
      emit(fmt::format("csrr a6, {}", chance(75) ? "vlenb" : "vcsr"));
      emit(fmt::format("sd a6, {}", dumpSlot()));
    }

    /// Single-register operand whose element 0 is defined at `bytes`.
    int elem0Source(unsigned bytes)
    {
      std::vector<int> c;
      for (int r = 1; r < 32; ++r)
        if (elem0(r, bytes))
          c.push_back(r);
      if (not c.empty() and chance(80))
        return c[pick(c.size())];
      int r = 1 + int(pick(31));
      emit(fmt::format("vl1r.v {}, (a2)", vr(r)));
      wroteFull(r, 1);
      return r;
    }

    void emitReduction()
    {
      int a = source();
      unsigned wide = sew_ == 32 ? pick(3) : 0;   // 0 int, 1 float, 2 widening float
      unsigned accBytes = wide == 2 ? 8 : eb();
      int acc = elem0Source(accBytes);
      if (not defined(a, lmul_, eb()))
        return;
      int d = 1 + int(pick(31));
      switch (wide)
        {
        case 0:
          {
            static const char* ops[] = { "vredsum", "vredmaxu", "vredmin", "vredand", "vredor", "vredxor" };
            emit(fmt::format("{}.vs {}, {}, {}", ops[pick(std::size(ops))], vr(d), vr(a), vr(acc)));
            wroteElem0(d, eb(), tailU_);
            emit(fmt::format("vmv.x.s a6, {}", vr(d)));
            emit(fmt::format("sd a6, {}", dumpSlot()));
            return;
          }
        case 1:
          emit(fmt::format("{}.vs {}, {}, {}", chance(70) ? "vfredusum" : "vfredosum", vr(d), vr(a), vr(acc)));
          wroteElem0(d, 4, tailU_);
          break;
        default:
          emit(fmt::format("vfwredusum.vs {}, {}, {}", vr(d), vr(a), vr(acc)));
          wroteElem0(d, 8, tailU_);
          break;
        }
      emit(fmt::format("vfmv.f.s fa1, {}", vr(d)));
      emit(fmt::format("fsw fa1, {}", dumpSlot()));
    }

    void emitNarrowing()
    {
      if (sew_ > 32 or lmul_ > 4)
        return;
      unsigned ws = 2 * sew_, wl = 2 * lmul_;
      emit(fmt::format("vsetvli zero, zero, e{}, m{}, ta, ma", ws, wl));
      int w = anyGroup(wl);
      emit(fmt::format("vle{}.v {}, (a2)", ws, vr(w)));
      emit(fmt::format("vsetvli zero, zero, {}", mainTokens()));
      invalidate(w, wl);
      int d = groupAvoiding(lmul_, w, wl);

      std::vector<std::string> forms;
      for (const char* op : { "vnsrl", "vnsra", "vnclipu", "vnclip" })
        {
          forms.push_back(fmt::format("{}.wi {}, {}, {}", op, vr(d), vr(w), pick(sew_)));
          forms.push_back(fmt::format("{}.wx {}, {}, a7", op, vr(d), vr(w)));
        }
      if (sew_ == 32)
        for (const char* k : { "xu.f", "x.f", "f.xu", "f.x", "f.f" })
          forms.push_back(fmt::format("vfncvt.{}.w {}, {}", k, vr(d), vr(w)));
      if (sew_ == 16)
        for (const char* k : { "xu.f", "x.f" })
          forms.push_back(fmt::format("vfncvt.{}.w {}, {}", k, vr(d), vr(w)));

      // The .wv shift amount comes from a main-width group.
      auto shifts = definedGroups(lmul_, eb());
      std::erase_if(shifts, [&](int b) {
        return not (b + int(lmul_) <= w or b >= w + int(wl)) or
          not (b + int(lmul_) <= d or b >= d + int(lmul_)); });
      if (not shifts.empty())
        forms.push_back(fmt::format("vnsrl.wv {}, {}, {}", vr(d), vr(w), vr(shifts[pick(shifts.size())])));

      // Refresh the wide source: the picks above must not have clobbered it.
      for (int r = w; r < w + int(wl); ++r)
        regs_[r] = { RegInfo::Kind::Prefix, 2 * eb(), w, wl };
      emit(forms[pick(forms.size())]);
      invalidate(w, wl);
      wroteBody(d, lmul_, eb(), tailU_);
    }

    void emitRedundantConfig(bool loop)
    {
      if (loop or chance(50))
        emit(fmt::format("vsetvli zero, a0, {}", mainTokens()));
    }
  };

  std::vector<std::uint8_t> randomBytes(std::mt19937_64& rng, std::size_t n)
  {
    std::vector<std::uint8_t> b(n);
    for (auto& x : b)
      x = std::uint8_t(rng());
    return b;
  }

  KernelSpec Generator::run(std::uint64_t seed)
  {
    sew_ = p_.sews.empty() ? 32 : p_.sews[pick(p_.sews.size())];
    static const unsigned lmuls[] = { 1, 2, 4, 8 };
    lmul_ = lmuls[pick(4)];
    tailU_ = p_.with_tu;
    const std::uint64_t vlmax = std::uint64_t(p_.vlen_bits) * lmul_ / sew_;
    const bool loop = p_.with_loop;
    const bool immediate = not loop and chance(40);
    std::uint64_t n = loop ? 1 + pick(4 * vlmax) : 1 + pick(std::min<std::uint64_t>(immediate ? 31 : 2 * vlmax, 2 * vlmax));
    maxDump_ = 2 * p_.max_ops + 8;

    lines_.push_back("kernel:");
    if (loop)
      lines_.push_back("1:");
    if (immediate)
      emit(fmt::format("vsetivli t0, {}, {}", n, mainTokens()));
    else
      emit(fmt::format("vsetvli t0, a0, {}", mainTokens()));

    if (p_.with_masks)
      {
        emitCompare(0, true);
        if (not emitMaskedAdd())
          {
            emitLoad();
            emitMaskedAdd();
          }
      }
    if (p_.with_tu)
      emitTailProbe();

    unsigned ops = p_.max_ops == 0 ? 0 : 1 + unsigned(pick(p_.max_ops));
    for (unsigned k = 0; k < ops; ++k)
      {
        unsigned choice = unsigned(pick(p_.with_masks ? 15 : 13));
        switch (choice)
          {
          case 0: emitLoad(); break;
          case 1: emitStore(); break;
          case 2: emitInit(); break;
          case 3: case 4: emitIntArith(); break;
          case 5:
            if (sew_ == 32)
              emitFloat();
            else
              emitIntArith();
            break;
          case 6: emitKeepVl(); break;
          case 7: emitEewCopy(); break;
          case 8: emitWholeRegister(); break;
          case 9: emitCsrDump(); break;
          case 10: emitReduction(); break;
          case 11: emitNarrowing(); break;
          case 12: emitRedundantConfig(loop); break;
          default: emitMaskFeature(); break;
          }
      }
    emitStore();

    // Spill live groups so every computed value is observed.
    const std::uint64_t slot = 8 * n + 64;
    auto live = definedGroups(lmul_, eb());
    std::shuffle(live.begin(), live.end(), rng_);
    for (unsigned k = 0; k < live.size() and k < spillSlots; ++k)
      {
        emit(fmt::format("li a6, {}", spillOffset + k * slot));
        emit("add a6, a6, a3");
        emit(fmt::format("vse{}.v {}, (a6)", sew_, vr(live[k])));
      }

    if (loop)
      {
        emit("sub a0, a0, t0");
        emit(fmt::format("slli t1, t0, {}", std::countr_zero(eb())));
        for (const char* r : { "a1", "a2", "a3", "a4" })
          emit(fmt::format("add {0}, {0}, t1", r));
        emit("bnez a0, 1b");
      }
    emit("ret");

    std::string text;
    for (const auto& l : lines_)
      text += l + "\n";

    KernelSpec k;
    k.name = fmt::format("k{}", seed);
    k.seed = seed;
    k.vlen_bits = p_.vlen_bits;
    k.program = parseSource(text, k.name + ".s");

    const std::size_t bufSize = 24 * n + p_.vlen_bits + 64;
    k.xregs = { { reg::a0, n }, { reg::a1, in0Base }, { reg::a2, in1Base }, { reg::a3, outBase },
                { reg::a4, out2Base }, { reg::a5, dumpBase }, { reg::a7, rng_() },
                { reg::sp, stackBase + stackSize } };
    float fa0 = float(int(pick(33)) - 16) * 0.25f;
    k.fregs = { { 10, std::bit_cast<std::uint32_t>(fa0) } };
    k.memory = { { in0Base, randomBytes(rng_, bufSize) },
                 { in1Base, randomBytes(rng_, bufSize) },
                 { outBase, std::vector<std::uint8_t>(bufSize, 0) },
                 { out2Base, std::vector<std::uint8_t>(bufSize, 0) },
                 { dumpBase, std::vector<std::uint8_t>(8 * maxDump_, 0) },
                 { outBase + spillOffset, std::vector<std::uint8_t>(spillSlots * slot, 0) },
                 { stackBase, std::vector<std::uint8_t>(stackSize, 0) } };
    k.windows = { { outBase, bufSize }, { out2Base, bufSize }, { dumpBase, 8 * maxDump_ },
                  { outBase + spillOffset, spillSlots * slot } };
    return k;
  }

  std::string hex(const std::vector<std::uint8_t>& bytes)
  {
    std::string s;
    s.reserve(2 * bytes.size());
    for (auto b : bytes)
      s += fmt::format("{:02x}", b);
    return s;
  }

  [[noreturn]] void manifestError(std::size_t line, const std::string& why)
  {
    throw RvvError("E_MANIFEST", fmt::format("line {}: {}", line, why));
  }

  std::uint64_t parseNumber(std::string_view s, std::size_t line)
  {
    int base = 10;
    if (s.starts_with("0x"))
      {
        base = 16;
        s.remove_prefix(2);
      }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (s.empty() or ec != std::errc() or p != s.data() + s.size())
      manifestError(line, fmt::format("bad number '{}'", s));
    return v;
  }

  std::pair<std::uint64_t, std::string_view> splitAt(std::string_view v, std::size_t line)
  {
    auto colon = v.find(':');
    if (colon == std::string_view::npos)
      manifestError(line, "expected <address>:<value>");
    return { parseNumber(v.substr(0, colon), line), v.substr(colon + 1) };
  }

}

KernelSpec generateKernel(std::uint64_t seed, const GenParams& params)
{
  Generator g(seed, params);
  return g.run(seed);
}

std::string writeManifest(const KernelSpec& spec, std::string_view programFile)
{
  std::string out;
  out += fmt::format("name={}\n", spec.name);
  out += fmt::format("program={}\n", programFile);
  out += fmt::format("seed={}\n", spec.seed);
  out += fmt::format("vlen={}\n", spec.vlen_bits);
  for (const auto& [r, v] : spec.xregs)
    out += fmt::format("x{}={:#x}\n", r, v);
  for (const auto& [r, v] : spec.fregs)
    out += fmt::format("f{}={:#x}\n", r, v);
  for (const auto& m : spec.memory)
    out += fmt::format("mem={:#x}:{}\n", m.addr, hex(m.bytes));
  for (const auto& w : spec.windows)
    out += fmt::format("window={:#x}:{}\n", w.addr, w.len);
  return out;
}

KernelSpec readManifest(std::string_view text, const ProgramUnit& program)
{
  KernelSpec k;
  k.program = program;
  k.memory.clear();
  std::istringstream in{ std::string(text) };
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw))
    {
      ++line;
      if (not raw.empty() and raw.back() == '\r')
        raw.pop_back();
      if (raw.empty() or raw[0] == '#')
        continue;
      auto eq = raw.find('=');
      if (eq == std::string::npos)
        manifestError(line, "expected key=value");
      std::string key = raw.substr(0, eq);
      std::string_view value = std::string_view(raw).substr(eq + 1);
      if (key == "name")
        k.name = value;
      else if (key == "program")
        continue;
      else if (key == "seed")
        k.seed = parseNumber(value, line);
      else if (key == "vlen")
        k.vlen_bits = unsigned(parseNumber(value, line));
      else if (key.size() > 1 and (key[0] == 'x' or key[0] == 'f') and
               key.find_first_not_of("0123456789", 1) == std::string::npos)
        {
          auto r = parseNumber(std::string_view(key).substr(1), line);
          if (r >= 32)
            manifestError(line, fmt::format("register index {} out of range", r));
          auto v = parseNumber(value, line);
          if (key[0] == 'x')
            k.xregs[int(r)] = v;
          else
            k.fregs[int(r)] = std::uint32_t(v);
        }
      else if (key == "mem")
        {
          auto [addr, hexText] = splitAt(value, line);
          if (hexText.size() % 2)
            manifestError(line, "odd number of hex digits");
          MemoryBlock b{ addr, {} };
          b.bytes.reserve(hexText.size() / 2);
          for (std::size_t i = 0; i < hexText.size(); i += 2)
            {
              unsigned byte = 0;
              auto [p, ec] = std::from_chars(hexText.data() + i, hexText.data() + i + 2, byte, 16);
              if (ec != std::errc() or p != hexText.data() + i + 2)
                manifestError(line, "bad hex digit");
              b.bytes.push_back(std::uint8_t(byte));
            }
          k.memory.push_back(std::move(b));
        }
      else if (key == "window")
        {
          auto [addr, len] = splitAt(value, line);
          k.windows.push_back({ addr, parseNumber(len, line) });
        }
      else
        manifestError(line, fmt::format("unknown key '{}'", key));
    }
  return k;
}

std::filesystem::path saveKernel(const KernelSpec& spec, const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw RvvError("E_IO", fmt::format("cannot create '{}'", dir.string()));
  std::string asmName = spec.name + ".s";
  writeFileAtomic(dir / asmName, emitSource(spec.program));
  auto manifest = dir / (spec.name + ".manifest");
  writeFileAtomic(manifest, writeManifest(spec, asmName));
  return manifest;
}

KernelSpec loadKernel(const std::filesystem::path& manifest)
{
  auto text = readTextFile(manifest);
  std::string programFile;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw))
    if (raw.starts_with("program="))
      {
        programFile = raw.substr(8);
        if (not programFile.empty() and programFile.back() == '\r')
          programFile.pop_back();
      }
  if (programFile.empty())
    throw RvvError("E_MANIFEST", fmt::format("{}: missing program= entry", manifest.string()));
  auto asmPath = manifest.parent_path() / programFile;
  auto program = parseSource(readTextFile(asmPath), asmPath.filename().string());
  return readManifest(text, program);
}

}
