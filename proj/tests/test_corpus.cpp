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

#include <doctest.h>

#include "corpus_kernels.hpp"
#include "rvvb/config_flow.hpp"
#include "rvvb/difftest.hpp"
#include "rvvb/translator.hpp"

using namespace rvvb;
using namespace rvvb::testing;

namespace
{
  bool isPure(const ProgramUnit& unit, const TargetConfig& cfg, std::string* offender = nullptr)
  {
    for (const auto& it : unit.items)
      {
        bool bad = false;
        if (it.kind == ItemKind::Instruction)
          {
            auto k = classifyInstruction(*it.parsed, cfg).kind;
            bad = k != CategoryKind::NonVector and k != CategoryKind::PassThrough;
          }
        else if (it.kind == ItemKind::Raw)
          bad = isVectorMnemonic(it.leadingToken());
        if (bad)
          {
            if (offender)
              *offender = it.text;
            return false;
          }
      }
    return true;
  }

  TranslateOptions options(Strategy s, std::optional<unsigned> vlen = 128)
  {
    TranslateOptions o;
    o.strategy = s;
    o.cfg.vlen_bits = vlen;
    return o;
  }
}

TEST_CASE("corpus has the required fragments")
{
  std::vector<std::string> names;
  for (const auto& f : corpusFiles())
    names.push_back(f.stem().string());
  CHECK(names.size() >= 10);
  for (const char* required : { "saxpy", "triad", "dot", "memcpy", "masked", "vl1r", "vsetivli", "vlenb" })
    CHECK_MESSAGE(std::find(names.begin(), names.end(), required) != names.end(), required);
}

TEST_CASE("corpus round trip")
{
  auto files = corpusFiles();
  files.push_back(corpusDir() / "errors" / "frac.s");
  for (const auto& f : files)
    {
      auto text = readTextFile(f);
      CHECK_MESSAGE(emitSource(parseSource(text, f.filename().string())) == text, f.string());
    }
}

TEST_CASE("corpus translation is pure and idempotent")
{
  for (const auto& f : corpusFiles())
    for (auto s : { Strategy::Auto, Strategy::Memory, Strategy::Register })
      for (std::optional<unsigned> vlen : { std::optional<unsigned>(), std::optional<unsigned>(128) })
        {
          auto o = options(s, vlen);
          auto r = translateProgram(parseSource(readTextFile(f), f.filename().string()), o);
          if (s == Strategy::Register and not r.ok())
            {
              CHECK(hasCode(r.diagnostics, "E_NO_SCRATCH"));
              continue;
            }
          INFO(f.filename().string(), " ", strategyName(s));
          REQUIRE(r.ok());
          std::string offender;
          CHECK_MESSAGE(isPure(r.unit, o.cfg, &offender), offender);
          auto once = emitSource(r.unit);
          auto again = translateProgram(parseSource(once, f.filename().string()), o);
          CHECK(emitSource(again.unit) == once);
        }
}

TEST_CASE("corpus goldens")
{
  for (const auto& f : corpusFiles())
    {
      auto golden = corpusDir() / "golden" / (f.stem().string() + ".rvv071.s");
      REQUIRE_MESSAGE(std::filesystem::exists(golden), golden.string());
      auto r = translateProgram(parseSource(readTextFile(f), f.filename().string()), options(Strategy::Auto));
      CHECK_MESSAGE(emitSource(r.unit) == readTextFile(golden), f.filename().string());
    }

  auto renames = readTextFile(corpusDir() / "golden" / "renames.rvv071.s");
  CHECK(renames.find("\tvfredsum.vs v5, v4, v5\n") != std::string::npos);
  CHECK(renames.find("vfredusum") == std::string::npos);
  CHECK(readTextFile(corpusDir() / "golden" / "scalar.rvv071.s") == readTextFile(corpusDir() / "scalar.s"));
}

TEST_CASE("corpus fragments behave identically after translation")
{
  for (const auto& f : corpusFiles())
    for (unsigned vlen : { 128u, 256u })
      for (auto s : { Strategy::Auto, Strategy::Memory })
        for (std::uint64_t seed : { 1u, 2u })
          {
            auto k = corpusKernel(f, seed, vlen);
            auto r = differentialCheck(k, options(s, vlen));
            CHECK_MESSAGE(r.pass(), r.summary());
          }
}

TEST_CASE("redundant configuration sites")
{
  auto unit = parseSource(readTextFile(corpusDir() / "redundant.s"), "redundant.s");
  auto flow = analyze(unit);
  auto sites = findRedundantConfigs(unit, flow);
  REQUIRE(sites.size() == 5);

  auto opts = options(Strategy::Auto);
  opts.eliminate_redundant = true;
  auto tr = translateProgram(unit, opts);
  CHECK(tr.redundant.size() == 5);
  std::size_t configs = 0;
  for (const auto& it : tr.unit.items)
    configs += it.parsed and it.parsed->mnemonic == "vsetvli";
  CHECK(configs == 1);
  auto report = differentialCheck(corpusKernel(corpusDir() / "redundant.s"), opts);
  CHECK_MESSAGE(report.pass(), report.summary());

  auto near = parseSource(readTextFile(corpusDir() / "nearmiss.s"), "nearmiss.s");
  CHECK(findRedundantConfigs(near, analyze(near)).empty());
}

TEST_CASE("fractional LMUL in strict mode")
{
  auto f = corpusDir() / "errors" / "frac.s";
  auto opts = options(Strategy::Auto);
  opts.cfg.strict = true;
  auto r = translateProgram(parseSource(readTextFile(f), "frac.s"), opts);
  REQUIRE(hasCode(r.diagnostics, "E_FRACTIONAL_LMUL"));
  for (const auto& d : r.diagnostics)
    if (d.code == "E_FRACTIONAL_LMUL")
      {
        CHECK(d.loc.file == "frac.s");
        CHECK(d.loc.line == 6);
        CHECK(d.severity == Severity::Error);
      }
}
