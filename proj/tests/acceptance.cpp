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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "corpus_kernels.hpp"
#include "rename_kernels.hpp"
#include "rvvb/cli.hpp"
#include "rvvb/config_flow.hpp"
#include "rvvb/difftest.hpp"
#include "rvvb/error.hpp"
#include "rvvb/translator.hpp"

using namespace rvvb;
using namespace rvvb::testing;
namespace fs = std::filesystem;

namespace
{
  struct Outcome
  {
    bool pass = false;
    std::string detail;
  };

  using Clock = std::chrono::steady_clock;

  double seconds(Clock::time_point since)
  {
    return std::chrono::duration<double>(Clock::now() - since).count();
  }

  TranslateOptions options(Strategy s, std::optional<unsigned> vlen = 128)
  {
    TranslateOptions o;
    o.strategy = s;
    o.cfg.vlen_bits = vlen;
    return o;
  }

  ProgramUnit loadCorpus(const fs::path& f)
  {
    return parseSource(readTextFile(f), f.filename().string());
  }

  bool impure(const AsmItem& it, const TargetConfig& cfg)
  {
    if (it.kind == ItemKind::Instruction)
      {
        auto k = classifyInstruction(*it.parsed, cfg).kind;
        return k != CategoryKind::NonVector and k != CategoryKind::PassThrough;
      }
    return it.kind == ItemKind::Raw and isVectorMnemonic(it.leadingToken());
  }

  bool containsMnemonic(const ProgramUnit& u, const std::string& mn)
  {
    for (const auto& it : u.items)
      if (it.parsed and it.parsed->mnemonic == mn)
        return true;
    return false;
  }

  // ---------------------------------------------------------------- criteria

  Outcome outputPurity()
  {
    auto start = Clock::now();
    auto files = corpusFiles();
    std::size_t instructions = 0, bad = 0;
    for (const auto& f : files)
      {
        auto o = options(Strategy::Auto);
        auto r = translateProgram(loadCorpus(f), o);
        if (not r.ok())
          ++bad;
        for (const auto& it : r.unit.items)
          {
            instructions += it.kind == ItemKind::Instruction;
            bad += impure(it, o.cfg);
          }
      }
    bool required = true;
    for (const char* n : { "saxpy", "triad", "dot", "memcpy", "masked", "vl1r", "vsetivli", "vlenb" })
      required &= fs::exists(corpusDir() / (std::string(n) + ".s"));
    double t = seconds(start);
    return { files.size() >= 10 and required and bad == 0 and t < 1.0,
             fmt::format("{} files, {} output instructions, {} v1.0-only, {:.3f} s (limit 1 s)", files.size(),
                         instructions, bad, t) };
  }

  TrialOptions acceptanceTrials(Strategy s)
  {
    TrialOptions t;
    t.seed = 42;
    t.trials = 200;
    t.vlen_bits = 128;
    t.strategy = s;
    return t;
  }

  Outcome differentialEquivalence()
  {
    auto start = Clock::now();
    auto reports = runTrialsParallel(acceptanceTrials(Strategy::Auto));
    std::size_t passed = 0;
    std::string first;
    for (const auto& r : reports)
      {
        passed += r.pass();
        if (not r.pass() and first.empty())
          first = "; first failure " + r.summary();
      }
    double t = seconds(start);
    bool seedsOk = reports.size() == 200 and reports.front().seed == 42 and reports.back().seed == 241;
    return { seedsOk and passed == 200 and t < 30.0,
             fmt::format("{}/{} pass, seeds 42-241, {:.2f} s (limit 30 s){}", passed, reports.size(), t, first) };
  }

  Outcome strategyEquivalence()
  {
    auto memory = runTrialsParallel(acceptanceTrials(Strategy::Memory));
    auto regs = runTrialsParallel(acceptanceTrials(Strategy::Register));
    std::size_t memPass = 0, regPass = 0, regNone = 0, regWrong = 0;
    for (const auto& r : memory)
      memPass += r.pass();
    for (const auto& r : regs)
      {
        if (r.pass())
          ++regPass;
        else if (r.verdict == Verdict::TranslationError and r.no_scratch)
          ++regNone;
        else
          ++regWrong;
      }
    return { memPass == 200 and regWrong == 0 and regPass + regNone == 200,
             fmt::format("memory {}/200 pass; register {} pass, {} no scratch available, {} wrong", memPass,
                         regPass, regNone, regWrong) };
  }

  Outcome renameFidelity()
  {
    auto golden = readTextFile(corpusDir() / "golden" / "renames.rvv071.s");
    bool goldenOk = golden.find("\tvfredsum.vs ") != std::string::npos and golden.find("vfredusum") == std::string::npos;
    auto bodies = renameKernelBodies();
    std::size_t entries = 0, passing = 0;
    for (const auto& e : Catalog::builtin().entries())
      {
        if (not e.rename_071)
          continue;
        ++entries;
        auto it = bodies.find(e.mnemonic);
        if (it == bodies.end())
          continue;
        bool ok = true;
        for (std::uint64_t seed : { 1u, 2u, 3u })
          {
            auto k = handKernel("r_" + e.mnemonic, it->second, seed);
            auto tr = translateProgram(k.program, options(Strategy::Auto));
            ok &= containsMnemonic(tr.unit, *e.rename_071) and not containsMnemonic(tr.unit, e.mnemonic);
            for (auto s : { Strategy::Auto, Strategy::Memory })
              ok &= differentialCheck(k, options(s)).pass();
          }
        passing += ok;
      }
    return { goldenOk and entries > 0 and passing == entries,
             fmt::format("golden has vfredsum.vs: {}; {}/{} catalog renames pass differential kernels",
                         goldenOk ? "yes" : "no", passing, entries) };
  }

  Outcome fractionalLmul()
  {
    std::size_t cases = 0, ok = 0;
    for (const char* tok : { "mf2", "mf4", "mf8" })
      for (int line : { 1, 3, 7 })
        {
          std::string src;
          for (int i = 1; i < line; ++i)
            src += "\taddi a1, a1, 1\n";
          src += fmt::format("\tvsetvli t0, a0, e8, {}, ta, ma\n\tret\n", tok);
          TranslateOptions o = options(Strategy::Auto);
          o.cfg.strict = true;
          auto r = translateProgram(parseSource(src, "frac.s"), o);
          ++cases;
          bool found = false;
          for (const auto& d : r.diagnostics)
            found |= d.code == "E_FRACTIONAL_LMUL" and d.severity == Severity::Error and d.loc.line == line and
              d.loc.file == "frac.s";
          ok += found;
        }
    return { ok == cases, fmt::format("{}/{} strict translations report E_FRACTIONAL_LMUL at the token's line",
                                      ok, cases) };
  }

  Outcome redundancySoundness()
  {
    auto unit = loadCorpus(corpusDir() / "redundant.s");
    auto sites = findRedundantConfigs(unit, analyze(unit));
    auto o = options(Strategy::Auto);
    o.eliminate_redundant = true;
    bool pass = true;
    for (std::uint64_t seed : { 1u, 2u, 3u })
      for (unsigned vlen : { 128u, 256u })
        {
          auto oo = o;
          oo.cfg.vlen_bits = vlen;
          pass &= differentialCheck(corpusKernel(corpusDir() / "redundant.s", seed, vlen), oo).pass();
        }
    auto near = loadCorpus(corpusDir() / "nearmiss.s");
    auto nearSites = findRedundantConfigs(near, analyze(near));
    return { sites.size() == 5 and pass and nearSites.empty(),
             fmt::format("crafted file reports {} sites (expected 5); eliminated version {}; near miss reports {}",
                         sites.size(), pass ? "passes differential check" : "FAILS differential check",
                         nearSites.size()) };
  }

  Outcome tailPrediction()
  {
    auto t = acceptanceTrials(Strategy::Auto);
    t.tail_undisturbed = true;
    auto reports = runTrialsParallel(t);
    std::size_t mismatches = 0, unpredicted = 0, other = 0;
    for (const auto& r : reports)
      {
        if (r.verdict == Verdict::Mismatch)
          {
            ++mismatches;
            unpredicted += not r.tail_warning;
          }
        else if (not r.pass())
          ++other;
      }
    return { mismatches > 0 and unpredicted == 0 and other == 0,
             fmt::format("{} tu kernels, {} mismatches, {} unpredicted, {} other failures", reports.size(),
                         mismatches, unpredicted, other) };
  }

  Outcome emulatorSemantics()
  {
    std::size_t vlChecks = 0, vlBad = 0, tailChecks = 0, tailBad = 0;
    const std::pair<const char*, std::pair<unsigned, unsigned>> lmuls[] = {
      { "mf8", { 1, 8 } }, { "mf4", { 1, 4 } }, { "mf2", { 1, 2 } }, { "m1", { 1, 1 } },
      { "m2", { 2, 1 } }, { "m4", { 4, 1 } }, { "m8", { 8, 1 } } };
    const char* ops[] = { "vadd.vv v8, v16, v24", "vsub.vx v8, v16, a1", "vmul.vv v8, v8, v16",
                          "vand.vi v8, v24, 7", "vsll.vi v8, v16, 3", "vmax.vv v8, v24, v16" };
    for (auto ver : { IsaVersion::V071, IsaVersion::V10 })
      for (unsigned vlen : { 64u, 128u, 256u, 512u, 1024u })
        for (unsigned sew : { 8u, 16u, 32u, 64u })
          for (auto [tok, frac] : lmuls)
            {
              if (ver == IsaVersion::V071 and frac.second != 1)
                continue;
              // Count the SEW-bit elements that fit in LMUL registers.
              std::uint64_t bits = std::uint64_t(vlen) * frac.first / frac.second, vlmax = 0;
              while ((vlmax + 1) * sew <= bits)
                ++vlmax;
              if (vlmax == 0)
                continue;
              for (std::uint64_t avl : { 0ull, 1ull, 3ull, 7ull, 8ull, 16ull, 17ull, 33ull, 100ull, 1000ull, ~0ull })
                {
                  MachineState s(ver, vlen);
                  for (std::size_t i = 0; i < s.v.size(); ++i)
                    s.v[i] = std::uint8_t(i * 37 + 11);
                  s.x[reg::a0] = avl;
                  s.x[reg::a1] = 0x1234567;
                  step(s, *parseInstruction(fmt::format("vsetvli a3, a0, e{}, {}", sew, tok), { "s.s", 1 }));
                  std::uint64_t expect = avl < vlmax ? avl : vlmax;
                  ++vlChecks;
                  vlBad += s.vl != expect or s.x[reg::a3] != expect;
                  if (ver != IsaVersion::V071)
                    continue;
                  for (const char* op : ops)
                    {
                      step(s, *parseInstruction(op, { "s.s", 2 }));
                      std::size_t group = frac.first * s.vlenb();
                      ++tailChecks;
                      for (std::size_t b = 8 * s.vlenb() + expect * sew / 8; b < 8 * s.vlenb() + group; ++b)
                        if (s.v[b] != 0)
                          {
                            ++tailBad;
                            break;
                          }
                    }
                }
            }
    return { vlBad == 0 and tailBad == 0,
             fmt::format("{} vsetvli cases, {} wrong vl; {} V071 ops, {} with nonzero tail bytes", vlChecks, vlBad,
                         tailChecks, tailBad) };
  }

  Outcome roundTrip()
  {
    std::size_t files = 0, rt = 0, idem = 0;
    auto all = corpusFiles();
    all.push_back(corpusDir() / "errors" / "frac.s");
    for (const auto& f : all)
      {
        ++files;
        auto text = readTextFile(f);
        rt += emitSource(parseSource(text, f.filename().string())) == text;
        auto o = options(Strategy::Auto);
        auto once = emitSource(translateProgram(parseSource(text, f.filename().string()), o).unit);
        auto twice = emitSource(translateProgram(parseSource(once, f.filename().string()), o).unit);
        idem += once == twice;
      }
    return { rt == files and idem == files,
             fmt::format("emit(parse(x)) == x for {}/{}; translate twice == once for {}/{}", rt, files, idem,
                         files) };
  }

  Outcome pipelineOrchestration()
  {
    std::string tmpl = (fs::temp_directory_path() / "rvvb-accept-XXXXXX").string();
    fs::path dir = mkdtemp(tmpl.data());
    auto script = [&](const std::string& name, const std::string& action) {
      std::ofstream(dir / name) << "#!/bin/sh\nout=''; prev=''\n"
                                   "for a in \"$@\"; do [ \"$prev\" = \"-o\" ] && out=\"$a\"; prev=\"$a\"; done\n"
                                << "echo " << name << " >> '" << (dir / "calls").string() << "'\n"
                                << action << "\n";
      fs::permissions(dir / name, fs::perms::owner_all);
    };
    script("cc", "cp '" + (corpusDir() / "saxpy.s").string() + "' \"$out\"");
    script("as", "echo object > \"$out\"");
    writeFileAtomic(dir / "k.c", "int k;\n");
    setenv("RVVB_CC", (dir / "cc").c_str(), 1);
    setenv("RVVB_AS", (dir / "as").c_str(), 1);

    auto runPreset = [&](const char* preset, std::string& log) {
      std::ostringstream out, err;
      auto obj = (dir / "k.o").string();
      std::vector<std::string> args{ "rvv-backport", "pipeline", (dir / "k.c").string(), "-o", obj, "--preset",
                                     preset };
      std::vector<const char*> argv;
      for (const auto& a : args)
        argv.push_back(a.c_str());
      int code = cli::run(int(argv.size()), argv.data(), out, err);
      log = readTextFile(dir / "k.pipeline.log");
      return code;
    };
    std::string vls, vla;
    int c1 = runPreset("vls", vls);
    int c2 = runPreset("vla", vla);
    auto calls = readTextFile(dir / "calls");
    unsetenv("RVVB_CC");
    unsetenv("RVVB_AS");

    auto ordered = [](const std::string& log) {
      auto a = log.find("[1/3 compile]"), b = log.find("[2/3 translate]"), c = log.find("[3/3 assemble]");
      return a != std::string::npos and b != std::string::npos and c != std::string::npos and a < b and b < c;
    };
    bool ok = c1 == 0 and c2 == 0 and ordered(vls) and ordered(vla) and calls == "cc\nas\ncc\nas\n" and
      vls.find("riscv-v-vector-bits-min=128") != std::string::npos and
      vla.find("scalable-vectorization=on") != std::string::npos and fs::exists(dir / "k.rvv10.s") and
      fs::exists(dir / "k.rvv071.s");
    fs::remove_all(dir);
    return { ok, fmt::format("exit codes {}/{}; stages ordered in both logs: {}; preset flags logged: {}", c1, c2,
                             ordered(vls) and ordered(vla) ? "yes" : "no",
                             vls.find("riscv-v-vector-bits-min=128") != std::string::npos and
                                 vla.find("scalable-vectorization=on") != std::string::npos
                               ? "yes"
                               : "no") };
  }
}

int main()
{
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
    { "output purity", outputPurity },
    { "differential equivalence", differentialEquivalence },
    { "strategy equivalence", strategyEquivalence },
    { "rename fidelity", renameFidelity },
    { "fractional LMUL rejection", fractionalLmul },
    { "redundancy elimination soundness", redundancySoundness },
    { "tail-policy prediction", tailPrediction },
    { "emulator unit semantics", emulatorSemantics },
    { "round trip and idempotence", roundTrip },
    { "pipeline orchestration", pipelineOrchestration },
  };
  int failures = 0;
  for (const auto& [name, check] : criteria)
    {
      Outcome o;
      try
        {
          o = check();
        }
      catch (const std::exception& e)
        {
          o = { false, std::string("exception: ") + e.what() };
        }
      failures += not o.pass;
      fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    }
  fmt::print("{}/{} criteria pass\n", std::size(criteria) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
