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

#include "rvvb/cli.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <spawn.h>
#include <sys/wait.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rvvb/difftest.hpp"
#include "rvvb/error.hpp"
#include "rvvb/fileio.hpp"
#include "rvvb/kernel.hpp"

extern char** environ;

namespace rvvb::cli
{

namespace
{

  void printError(std::ostream& err, const RvvError& e)
  {
    fmt::print(err, "error[{}]: {}\n", e.code(), e.detail());
  }

  void printDiagnostics(std::ostream& err, const Diagnostics& diags)
  {
    for (const auto& d : diags)
      fmt::print(err, "{}\n", d.format());
  }

  TranslateOptions translateOptions(const CliOptions& o)
  {
    TranslateOptions t;
    t.cfg.vlen_bits = o.vlen_bits;
    t.cfg.strict = o.strict;
    t.strategy = o.strategy;
    t.eliminate_redundant = o.eliminate_redundant;
    t.verbose = o.verbose;
    t.cfg.validate();
    return t;
  }

  ProgramUnit loadUnit(const std::filesystem::path& path)
  {
    return parseSource(readTextFile(path), path.string());
  }

  bool isInputProblem(const std::string& code)
  {
    return code == "E_PARSE" or code == "E_ENCODING" or code == "E_IO" or code == "E_CONFIG" or
      code == "E_USAGE";
  }

}

int exitCodeFor(const Diagnostics& diags, bool strict, bool strictWarnings)
{
  for (const auto& d : diags)
    if (d.severity == Severity::Error and isInputProblem(d.code))
      return exitInputError;
  if (strict and hasSeverity(diags, Severity::Error))
    return exitUnsupported;
  if (strictWarnings and (hasSeverity(diags, Severity::Warning) or hasSeverity(diags, Severity::Error)))
    return exitWarnings;
  return exitOk;
}

std::filesystem::path defaultOutput(const std::filesystem::path& input)
{
  auto p = input;
  p += ".rvv071.s";
  return p;
}

std::vector<std::string> compilerFlags(Preset p)
{
  std::vector<std::string> f{ "-march=rv64gcv", "-O3", "-mllvm" };
  if (p == Preset::Vls)
    f.push_back("--riscv-v-vector-bits-min=128");
  else
    f.push_back("-scalable-vectorization=on");
  for (const char* s : { "-ffast-math", "-no-integrated-as", "-S" })
    f.emplace_back(s);
  return f;
}

std::vector<std::string> assemblerFlags()
{
  return { "-march=rv64gcv0p7" };
}

// ------------------------------------------------------------------ translate

int cmdTranslate(const CliOptions& o, std::ostream& out, std::ostream& err)
{
  TranslationResult tr;
  try
    {
      auto opts = translateOptions(o);
      tr = translateProgram(loadUnit(o.input), opts);
    }
  catch (const RvvError& e)
    {
      printError(err, e);
      return exitInputError;
    }
  printDiagnostics(err, tr.diagnostics);

  int code = exitCodeFor(tr.diagnostics, o.strict, o.strict_warnings);
  if (code == exitInputError or code == exitUnsupported)
    return code;

  auto target = o.output.value_or(defaultOutput(o.input));
  try
    {
      writeFileAtomic(target, emitSource(tr.unit));
    }
  catch (const RvvError& e)
    {
      printError(err, e);
      return exitInputError;
    }
  if (o.verbose)
    fmt::print(out, "wrote {}\n", target.string());
  return code;
}

// ------------------------------------------------------------------ check

int cmdCheck(const CliOptions& o, std::ostream& out, std::ostream& err)
{
  ProgramUnit unit;
  TranslateOptions opts;
  try
    {
      opts = translateOptions(o);
      unit = loadUnit(o.input);
    }
  catch (const RvvError& e)
    {
      printError(err, e);
      return exitInputError;
    }

  std::map<CategoryKind, std::size_t> kinds;
  std::map<std::string, std::size_t> lowerRules;
  for (auto k : { CategoryKind::NonVector, CategoryKind::PassThrough, CategoryKind::Rename, CategoryKind::Lower,
                  CategoryKind::Unsupported })
    kinds[k] = 0;
  for (const auto& item : unit.items)
    {
      if (not item.parsed)
        continue;
      auto c = classifyInstruction(*item.parsed, opts.cfg);
      ++kinds[c.kind];
      if (c.kind == CategoryKind::Lower)
        ++lowerRules[c.str()];
    }

  auto tr = translateProgram(unit, opts);
  printDiagnostics(err, tr.diagnostics);

  fmt::print(out, "census for {}\n", o.input.string());
  for (const auto& [k, n] : kinds)
    {
      fmt::print(out, "  {:<16}{:>6}\n", categoryKindName(k), n);
      if (k == CategoryKind::Lower)
        for (const auto& [rule, m] : lowerRules)
          fmt::print(out, "    {:<24}{:>6}\n", rule, m);
    }
  fmt::print(out, "  {:<16}{:>6}\n", "RedundantConfig", tr.redundant.size());

  for (const auto& d : tr.diagnostics)
    if (d.severity == Severity::Error and isInputProblem(d.code))
      return exitInputError;
  if (kinds[CategoryKind::Unsupported] > 0 or hasSeverity(tr.diagnostics, Severity::Error))
    return exitUnsupported;
  return exitOk;
}

// ------------------------------------------------------------------ difftest

namespace
{

  std::string hexBytes(const std::vector<std::uint8_t>& b)
  {
    std::string s;
    for (auto x : b)
      s += fmt::format("{:02x}", x);
    return s;
  }

  void writeArtifact(const DiffReport& r, const TrialOptions& t, const std::filesystem::path& dir)
  {
    auto spec = generateKernel(r.seed, trialParams(r.seed, t));
    saveKernel(spec, dir);
    std::string text = r.summary() + "\n";
    text += fmt::format("seed={}\nverdict={}\n", r.seed, verdictName(r.verdict));
    for (const auto& d : r.diagnostics)
      text += "diagnostic: " + d.format() + "\n";
    if (r.window)
      {
        text += fmt::format("window={}\n", *r.window);
        text += "expected=" + hexBytes(r.expected) + "\n";
        text += "actual=" + hexBytes(r.actual) + "\n";
      }
    writeFileAtomic(dir / (r.kernel + ".report"), text);
  }

}

int cmdDifftest(const CliOptions& o, std::ostream& out, std::ostream& err)
{
  if (o.trials < 1)
    {
      fmt::print(err, "error[E_USAGE]: --trials must be at least 1\n");
      return exitInputError;
    }
  TrialOptions t;
  t.seed = o.seed;
  t.trials = o.trials;
  t.vlen_bits = o.vlen_bits.value_or(128);
  t.strategy = o.strategy;
  t.tail_undisturbed = o.tail_undisturbed;
  try
    {
      TargetConfig cfg;
      cfg.vlen_bits = t.vlen_bits;
      cfg.validate();
    }
  catch (const RvvError& e)
    {
      printError(err, e);
      return exitInputError;
    }

  auto reports = o.serial ? runTrialsSerial(t) : runTrialsParallel(t);
  std::size_t passed = 0, mismatches = 0, predicted = 0;
  for (const auto& r : reports)
    {
      if (r.pass())
        {
          ++passed;
          if (o.verbose)
            fmt::print(out, "{}\n", r.summary());
          continue;
        }
      fmt::print(out, "{}\n", r.summary());
      if (r.verdict == Verdict::Mismatch)
        {
          ++mismatches;
          predicted += r.tail_warning;
        }
      try
        {
          writeArtifact(r, t, o.artifacts);
        }
      catch (const RvvError& e)
        {
          printError(err, e);
          return exitInputError;
        }
    }
  fmt::print(out, "{}/{} pass\n", passed, reports.size());
  if (mismatches)
    fmt::print(out, "{} mismatch(es), {} predicted by W_TAIL_UNDISTURBED\n", mismatches, predicted);
  if (passed != reports.size())
    fmt::print(out, "failing kernels written to {}\n", o.artifacts.string());
  return passed == reports.size() ? exitOk : exitUnsupported;
}

// ------------------------------------------------------------------ pipeline

namespace
{

  std::vector<std::string> splitCommand(const std::string& cmd)
  {
    std::istringstream in(cmd);
    std::vector<std::string> words;
    for (std::string w; in >> w;)
      words.push_back(w);
    return words;
  }

  std::string joinCommand(const std::vector<std::string>& argv)
  {
    std::string s;
    for (const auto& a : argv)
      {
        if (not s.empty())
          s += ' ';
        s += a;
      }
    return s;
  }

  struct SpawnResult
  {
    bool missing = false;
    int status = 0;
  };

  SpawnResult spawnAndWait(const std::vector<std::string>& args)
  {
    std::vector<char*> argv;
    for (const auto& a : args)
      argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = 0;
    int rc = posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ);
    if (rc != 0)
      return { rc == ENOENT or rc == EACCES, rc };
    int status = 0;
    while (waitpid(pid, &status, 0) < 0)
      if (errno != EINTR)
        return { false, -1 };
    if (WIFEXITED(status))
      {
        // A shell reports an unexecutable command as 127.
        return { WEXITSTATUS(status) == 127, WEXITSTATUS(status) };
      }
    return { false, -1 };
  }

}

int cmdPipeline(const CliOptions& o, std::ostream& out, std::ostream& err)
{
  namespace fs = std::filesystem;
  if (not fs::exists(o.input))
    {
      fmt::print(err, "error[E_IO]: cannot open '{}'\n", o.input.string());
      return exitInputError;
    }
  auto object = o.output.value_or(fs::path(o.input).replace_extension(".o"));
  auto stem = fs::path(object).replace_extension("");
  fs::path v10 = stem;
  v10 += ".rvv10.s";
  fs::path v071 = stem;
  v071 += ".rvv071.s";
  fs::path logPath = stem;
  logPath += ".pipeline.log";

  std::string log;
  auto record = [&](const std::string& line) {
    log += line + "\n";
    fmt::print(out, "{}\n", line);
  };
  auto flushLog = [&] {
    try
      {
        writeFileAtomic(logPath, log);
      }
    catch (const RvvError& e)
      {
        printError(err, e);
      }
  };
  auto missing = [&](const char* stage, const char* var) {
    fmt::print(err, "error[E_TOOL_MISSING]: {} stage: command from {} not found\n", stage, var);
    record(fmt::format("{} stage failed: E_TOOL_MISSING", stage));
    flushLog();
    return exitInputError;
  };

  // Stage 1: RVV 1.0 assembly from the external compiler.
  auto cc = splitCommand(o.cc);
  if (cc.empty())
    return missing("compile", "RVVB_CC");
  for (const auto& f : compilerFlags(o.preset))
    cc.push_back(f);
  for (const auto& a : { o.input.string(), std::string("-o"), v10.string() })
    cc.push_back(a);
  record("[1/3 compile] " + joinCommand(cc));
  auto r1 = spawnAndWait(cc);
  if (r1.missing)
    return missing("compile", "RVVB_CC");
  if (r1.status != 0)
    {
      fmt::print(err, "error[E_STAGE_FAILED]: compile stage exited with status {}\n", r1.status);
      record("compile stage failed");
      flushLog();
      return exitCompileFailed;
    }

  // Stage 2: translation.
  CliOptions t = o;
  t.input = v10;
  t.output = v071;
  record(fmt::format("[2/3 translate] rvv-backport translate {} -o {} --strategy {}{}{}", v10.string(),
                     v071.string(), strategyName(o.strategy),
                     o.vlen_bits ? fmt::format(" --vlen {}", *o.vlen_bits) : "", o.strict ? " --strict" : ""));
  int tc = cmdTranslate(t, out, err);
  if (tc != exitOk and tc != exitWarnings)
    {
      record("translate stage failed");
      flushLog();
      return tc;
    }

  // Stage 3: RVV 0.7.1 assembler.
  auto as = splitCommand(o.as);
  if (as.empty())
    return missing("assemble", "RVVB_AS");
  for (const auto& f : assemblerFlags())
    as.push_back(f);
  for (const auto& a : { v071.string(), std::string("-o"), object.string() })
    as.push_back(a);
  record("[3/3 assemble] " + joinCommand(as));
  auto r3 = spawnAndWait(as);
  if (r3.missing)
    return missing("assemble", "RVVB_AS");
  if (r3.status != 0)
    {
      fmt::print(err, "error[E_STAGE_FAILED]: assemble stage exited with status {}\n", r3.status);
      record("assemble stage failed");
      flushLog();
      return exitAssembleFailed;
    }
  record(fmt::format("done: {} (intermediates {} and {} kept)", object.string(), v10.string(), v071.string()));
  flushLog();
  return tc;
}

// ------------------------------------------------------------------ dispatch

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CliOptions o;
  CLI::App app{ "Translate RISC-V Vector 1.0 assembly to RVV 0.7.1", "rvv-backport" };
  app.require_subcommand(1);

  std::string strategy = "auto";
  std::string preset = "vls";
  std::string output;
  auto common = [&](CLI::App* c) {
    c->add_option("--strategy", strategy, "memory, register or auto")
      ->check(CLI::IsMember({ "memory", "register", "auto" }));
    c->add_option("--vlen", o.vlen_bits, "target VLEN in bits");
    c->add_flag("--strict", o.strict, "fail on constructs that cannot be translated");
    c->add_flag("--strict-warnings", o.strict_warnings, "exit 3 when warnings are present");
    c->add_flag("-v,--verbose", o.verbose, "report every rewrite");
    c->add_flag("--eliminate-redundant", o.eliminate_redundant, "drop provably redundant vsetvli");
  };

  auto* tr = app.add_subcommand("translate", "write the RVV 0.7.1 translation of a file");
  tr->add_option("input", o.input, "RVV 1.0 assembly file")->required();
  tr->add_option("-o,--output", output, "output path (default: <input>.rvv071.s)");
  common(tr);

  auto* ck = app.add_subcommand("check", "print a translation census without writing output");
  ck->add_option("input", o.input, "RVV 1.0 assembly file")->required();
  common(ck);

  auto* dt = app.add_subcommand("difftest", "differential testing on generated kernels");
  dt->add_option("--seed", o.seed, "first seed");
  dt->add_option("--trials", o.trials, "number of kernels");
  dt->add_flag("--tail-undisturbed", o.tail_undisturbed, "generate kernels that observe tu tails");
  dt->add_flag("--serial", o.serial, "run trials on one thread");
  dt->add_option("--artifacts", o.artifacts, "directory for failing kernels");
  common(dt);

  auto* pl = app.add_subcommand("pipeline", "compile, translate and assemble (RVVB_CC, RVVB_AS)");
  pl->add_option("input", o.input, "source file")->required();
  pl->add_option("-o,--output", output, "object file (default: <input>.o)");
  pl->add_option("--preset", preset, "vls or vla")->check(CLI::IsMember({ "vls", "vla" }));
  common(pl);

  try
    {
      app.parse(argc, argv);
    }
  catch (const CLI::ParseError& e)
    {
      int code = app.exit(e, out, err);
      return code == 0 ? exitOk : exitInputError;
    }

  o.strategy = *strategyFromName(strategy);
  o.preset = preset == "vla" ? Preset::Vla : Preset::Vls;
  if (not output.empty())
    o.output = output;
  if (const char* cc = std::getenv("RVVB_CC"))
    o.cc = cc;
  if (const char* as = std::getenv("RVVB_AS"))
    o.as = as;

  if (tr->parsed())
    return cmdTranslate(o, out, err);
  if (ck->parsed())
    return cmdCheck(o, out, err);
  if (dt->parsed())
    return cmdDifftest(o, out, err);
  return cmdPipeline(o, out, err);
}

}
