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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvvb/asmtext.hpp"
#include "rvvb/isa_model.hpp"

namespace rvvb
{

  enum class IsaVersion { V071, V10 };

  const char* isaVersionName(IsaVersion v);

  /// Sparse byte-addressed memory made of disjoint regions. Accesses must
  /// fall entirely inside one region.
  class SparseMemory
  {
  public:
    /// Map [base, base+size) filled with zeros. Overlapping maps throw.
    void map(std::uint64_t base, std::size_t size);
    /// Map a region initialised with `bytes`.
    void map(std::uint64_t base, const std::vector<std::uint8_t>& bytes);

    bool contains(std::uint64_t addr, std::size_t len) const;

    /// Throw RvvError(E_MEM_FAULT) when the range is not mapped.
    std::vector<std::uint8_t> read(std::uint64_t addr, std::size_t len) const;
    void write(std::uint64_t addr, const std::uint8_t* data, std::size_t len);

    std::uint64_t load(std::uint64_t addr, unsigned bytes) const;
    void store(std::uint64_t addr, unsigned bytes, std::uint64_t value);

    bool operator==(const SparseMemory&) const = default;

  private:
    const std::vector<std::uint8_t>* find(std::uint64_t addr, std::size_t len,
                                          std::uint64_t& offset) const;

    std::map<std::uint64_t, std::vector<std::uint8_t>> regions_;
  };

  /// Architectural state of the interpreter.
  struct MachineState
  {
    IsaVersion version = IsaVersion::V10;
    unsigned vlen_bits = 128;

    std::array<std::uint64_t, 32> x{};
    std::array<std::uint32_t, 32> f{};      // single-precision bit patterns
    std::vector<std::uint8_t> v;            // 32 * VLEN/8 bytes
    SparseMemory mem;

    std::uint64_t vl = 0;
    VTypeSpec vtype;                        // meaningful when !vill
    bool vill = true;
    std::uint64_t vstart = 0;
    std::uint64_t vxsat = 0;
    std::uint64_t vxrm = 0;

    /// Fill agnostic tail and inactive elements with ones (RVV 1.0 only).
    bool hostile_agnostic = false;
    std::uint64_t retired = 0;

    MachineState() = default;
    MachineState(IsaVersion ver, unsigned vlenBits);

    unsigned vlenb() const { return vlen_bits / 8; }

    /// Raw vtype CSR value in this version's encoding.
    std::uint64_t vtypeCsr() const;

    /// Element `i` of the register group starting at `vreg` (little endian).
    std::uint64_t elem(int vreg, std::uint64_t i, unsigned eew) const;
    void setElem(int vreg, std::uint64_t i, unsigned eew, std::uint64_t value);

    /// Mask element `i` held in `vreg` under the version's mask layout.
    bool maskBit(int vreg, std::uint64_t i) const;
    void setMaskBit(int vreg, std::uint64_t i, bool value);

    bool operator==(const MachineState&) const = default;
  };

  /// Encode/decode vtype CSR values. decode returns nullopt for reserved
  /// encodings (the caller sets vill).
  std::uint64_t encodeVType(const VTypeSpec& spec, IsaVersion version);
  std::optional<VTypeSpec> decodeVType(std::uint64_t value, IsaVersion version);

  /// What to do after an instruction.
  struct StepOutcome
  {
    enum class Kind { Next, Jump, Halt };
    Kind kind = Kind::Next;
    std::string target;
  };

  /// Execute one instruction. Branches report their target label instead of
  /// moving a program counter. Throws RvvError with E_UNSUPPORTED_INSN,
  /// E_ILLEGAL_VTYPE, E_ILLEGAL_OPERAND or E_MEM_FAULT.
  StepOutcome step(MachineState& state, const Instruction& instr);

  struct MemoryBlock
  {
    std::uint64_t addr = 0;
    std::vector<std::uint8_t> bytes;
    bool operator==(const MemoryBlock&) const = default;
  };

  struct Window
  {
    std::uint64_t addr = 0;
    std::uint64_t len = 0;
    bool operator==(const Window&) const = default;
  };

  /// A runnable test program with its inputs and observation windows.
  struct KernelSpec
  {
    std::string name = "kernel";
    ProgramUnit program;
    std::map<int, std::uint64_t> xregs;
    std::map<int, std::uint32_t> fregs;
    std::vector<MemoryBlock> memory;
    std::vector<Window> windows;
    std::uint64_t seed = 0;
    unsigned vlen_bits = 128;
  };

  struct ExecOptions
  {
    bool hostile_agnostic = false;
    std::uint64_t fuel = 1'000'000;
  };

  /// Run a kernel from its first item until `ret` or the end of the unit.
  /// Errors carry the faulting source location in their message.
  MachineState execProgram(const KernelSpec& spec, IsaVersion version, unsigned vlenBits,
                           const ExecOptions& opts = {});
  /// Same, on an explicit program (used to run translated code).
  MachineState execProgram(const KernelSpec& spec, const ProgramUnit& program,
                           IsaVersion version, unsigned vlenBits, const ExecOptions& opts = {});

  /// Bytes of every observation window, concatenated in order.
  std::vector<std::vector<std::uint8_t>> observe(const MachineState& state,
                                                 const std::vector<Window>& windows);

}
