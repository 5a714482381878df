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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rvvb/asmtext.hpp"

namespace rvvb
{

  /// Vector register group multiplier. Fractional values exist only in
  /// RVV 1.0.
  enum class Lmul { MF8, MF4, MF2, M1, M2, M4, M8 };

  /// LMUL as the fraction numerator/denominator (mf4 -> 1/4, m2 -> 2/1).
  unsigned lmulNumerator(Lmul l);
  unsigned lmulDenominator(Lmul l);
  bool isFractional(Lmul l);
  std::string lmulToken(Lmul l);
  std::optional<Lmul> lmulFromToken(std::string_view token);
  /// Integer LMUL value 1, 2, 4 or 8.
  std::optional<Lmul> lmulFromInteger(unsigned value);

  enum class Policy { Unspecified, Agnostic, Undisturbed };

  /// Decoded vector configuration.
  struct VTypeSpec
  {
    unsigned sew = 8;
    Lmul lmul = Lmul::M1;
    Policy tail = Policy::Unspecified;
    Policy mask = Policy::Unspecified;

    /// LMUL * VLEN / SEW, zero when the group holds no whole element.
    std::uint64_t vlmax(unsigned vlenBits) const
    { return (std::uint64_t(vlenBits) * lmulNumerator(lmul)) / (std::uint64_t(sew) * lmulDenominator(lmul)); }

    /// RVV 1.0 token list in assembler order; policies only when specified.
    std::vector<std::string> tokens() const;

    /// "e32,m1,ta,ma" style summary.
    std::string str() const;

    bool operator==(const VTypeSpec&) const = default;
  };

  /// Implementation parameters of the translation target.
  struct TargetConfig
  {
    std::optional<unsigned> vlen_bits;
    unsigned elen_bits = 64;
    bool strict = false;

    /// Throws RvvError(E_CONFIG) when the parameters are inconsistent.
    void validate() const;
  };

  /// Decode the vtype operand tokens of vsetvli/vsetivli. Tokens must appear
  /// in assembler order (SEW, LMUL, tail policy, mask policy). Throws
  /// RvvError(E_VTYPE_SYNTAX) on unknown, duplicate or conflicting tokens.
  VTypeSpec decodeVTypeTokens(std::span<const std::string> tokens);

  /// Collect and decode the VTypeToken operands of a configuration instruction.
  VTypeSpec decodeVTypeOperands(const Instruction& instr);

  struct Legality
  {
    bool legal = false;
    std::vector<std::string> tokens;   // when legal: {eN, mN}
    std::string code;                  // when illegal
    std::string reason;
  };

  /// Whether `spec` can be expressed in an RVV 0.7.1 vsetvli.
  Legality checkV071Legal(const VTypeSpec& spec, const TargetConfig& cfg);

  enum class LowerRule
    {
      ConfigPolicy,       // vsetvli carrying policy tokens
      KeepVlConfig,       // vsetvli zero, zero, ... (keeps vl in 1.0 only)
      ImmediateConfig,    // vsetivli
      MemoryEEW,          // vle32.v and friends
      WholeRegister,      // vl1r.v / vs1r.v ...
      WholeRegisterMove,  // vmv1r.v ...
      CsrShim             // csrr of vlenb / vcsr
    };

  const char* lowerRuleName(LowerRule r);
  std::optional<LowerRule> lowerRuleFromName(std::string_view name);

  enum class CategoryKind { NonVector, PassThrough, Rename, Lower, Unsupported };

  const char* categoryKindName(CategoryKind k);

  /// Translation decision for one instruction.
  struct Category
  {
    CategoryKind kind = CategoryKind::NonVector;
    std::string rename_target;    // Rename
    LowerRule rule = LowerRule::ConfigPolicy;  // Lower
    std::string code;             // Unsupported: stable diagnostic code
    std::string reason;           // Unsupported: human readable
    std::string token;            // Unsupported: offending token

    static Category nonVector() { return {}; }
    static Category passThrough() { Category c; c.kind = CategoryKind::PassThrough; return c; }
    static Category renameTo(std::string target)
    { Category c; c.kind = CategoryKind::Rename; c.rename_target = std::move(target); return c; }
    static Category lower(LowerRule r)
    { Category c; c.kind = CategoryKind::Lower; c.rule = r; return c; }
    static Category unsupported(std::string code, std::string reason, std::string token)
    {
      Category c;
      c.kind = CategoryKind::Unsupported;
      c.code = std::move(code);
      c.reason = std::move(reason);
      c.token = std::move(token);
      return c;
    }

    /// "Lower(MemoryEEW)", "Rename(vfredsum.vs)", ...
    std::string str() const;
  };

  /// One row of the instruction catalog.
  struct CatalogEntry
  {
    std::string mnemonic;
    bool present_in_v071 = false;
    bool present_in_v10 = false;
    std::string operand_shape;             // e.g. "V,V,V,M?"
    std::optional<std::string> rename_071;
    std::optional<LowerRule> lowering_rule;
    std::string lower_target;              // 0.7.1 mnemonic used by the lowering
    unsigned lower_param = 0;              // EEW bits or register count
    std::string unsupported_reason;
    bool config = false;                   // vsetvli/vsetivli/vsetvl

    bool unsupported() const
    { return not unsupported_reason.empty(); }
  };

  /// Table of RVV mnemonics and how each is carried to 0.7.1. Loaded from a
  /// plain-text table; immutable afterwards.
  class Catalog
  {
  public:
    /// Parse the table format documented in data/rvv_catalog.txt. Throws
    /// RvvError(E_CATALOG) on malformed rows.
    static Catalog parse(std::string_view text, std::string_view name = "catalog");
    static Catalog load(const std::string& path);

    /// The table compiled into the library.
    static const Catalog& builtin();

    const CatalogEntry* find(std::string_view mnemonic) const;
    const std::vector<CatalogEntry>& entries() const
    { return entries_; }

    /// Mnemonics every lowering rule may emit besides scalar code.
    static std::vector<std::string> loweringHelperMnemonics();

  private:
    std::vector<CatalogEntry> entries_;
    std::map<std::string, std::size_t, std::less<>> index_;
  };

  /// True when the mnemonic belongs to the vector namespace.
  bool isVectorMnemonic(std::string_view mnemonic);

  /// Check an instruction's operands against a catalog shape descriptor.
  bool matchesShape(const Instruction& instr, std::string_view shape);

  /// Decide how an instruction is carried to RVV 0.7.1.
  Category classifyInstruction(const Instruction& instr, const TargetConfig& cfg,
                               const Catalog& catalog = Catalog::builtin());

}
