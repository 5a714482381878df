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

#include "rvvb/difftest.hpp"

#include <random>

#include <fmt/format.h>

#include "rvvb/error.hpp"

namespace rvvb
{

const char* verdictName(Verdict v)
{
  switch (v)
    {
    case Verdict::Pass: return "pass";
    case Verdict::Mismatch: return "mismatch";
    case Verdict::TranslationError: return "translation-error";
    case Verdict::ExecutionError: return "execution-error";
    case Verdict::InvalidKernel: return "invalid-kernel";
    }
  return "?";
}

std::string DiffReport::summary() const
{
  std::string s = fmt::format("{}: {}", kernel, verdictName(verdict));
  if (not detail.empty())
    s += " (" + detail + ")";
  if (verdict == Verdict::Mismatch)
    s += tail_warning ? " [predicted by W_TAIL_UNDISTURBED]" : " [unpredicted]";
  return s;
}

namespace
{

  struct Observed
  {
    MachineState state;
    std::vector<std::vector<std::uint8_t>> windows;
  };

  Observed runVersion(const KernelSpec& spec, const ProgramUnit& program, IsaVersion v, bool hostile)
  {
    ExecOptions eo;
    eo.hostile_agnostic = hostile;
    Observed o{ execProgram(spec, program, v, spec.vlen_bits, eo), {} };
    o.windows = observe(o.state, spec.windows);
    return o;
  }

  /// First difference between two runs, or empty when they agree.
  std::string compare(const Observed& a, const Observed& b, RegSet ignore, DiffReport* report)
  {
    for (std::size_t w = 0; w < a.windows.size(); ++w)
      {
        if (a.windows[w] == b.windows[w])
          continue;
        std::size_t off = 0;
        while (a.windows[w][off] == b.windows[w][off])
          ++off;
        if (report)
          {
            report->window = w;
            report->expected = a.windows[w];
            report->actual = b.windows[w];
          }
        return fmt::format("window {} differs at +{:#x}: {:#04x} vs {:#04x}", w, off, a.windows[w][off],
                           b.windows[w][off]);
      }
    for (int r = 1; r < 32; ++r)
      if (not ignore.test(r) and a.state.x[r] != b.state.x[r])
        return fmt::format("{} differs: {:#x} vs {:#x}", scalarRegName(r), a.state.x[r], b.state.x[r]);
    for (int r = 0; r < 32; ++r)
      if (a.state.f[r] != b.state.f[r])
        return fmt::format("{} differs: {:#x} vs {:#x}", floatRegName(r), a.state.f[r], b.state.f[r]);
    return {};
  }

}

DiffReport differentialCheck(const KernelSpec& spec, const TranslateOptions& opts)
{
  DiffReport rep;
  rep.kernel = spec.name;
  rep.seed = spec.seed;

  auto tr = translateProgram(spec.program, opts);
  rep.diagnostics = tr.diagnostics;
  rep.tail_warning = hasCode(tr.diagnostics, "W_TAIL_UNDISTURBED");

  if (not tr.ok())
    {
      rep.verdict = Verdict::TranslationError;
      bool onlyScratch = true;
      for (const auto& diag : tr.diagnostics)
        if (diag.severity == Severity::Error and diag.code != "E_NO_SCRATCH" and diag.code != "E_UNSUPPORTED")
          onlyScratch = false;
      rep.no_scratch = onlyScratch and hasCode(tr.diagnostics, "E_NO_SCRATCH");
      for (const auto& diag : tr.diagnostics)
        if (diag.severity == Severity::Error)
          {
            rep.detail = diag.format();
            break;
          }
      return rep;
    }

  Observed ref, hostile;
  try
    {
      ref = runVersion(spec, spec.program, IsaVersion::V10, false);
      hostile = runVersion(spec, spec.program, IsaVersion::V10, true);
    }
  catch (const RvvError& e)
    {
      rep.verdict = Verdict::InvalidKernel;
      rep.detail = fmt::format("1.0 run failed: {}", e.what());
      return rep;
    }
  if (auto d = compare(ref, hostile, RegSet(), nullptr); not d.empty())
    {
      // The kernel reads elements whose 1.0 value is agnostic.
      rep.verdict = Verdict::InvalidKernel;
      rep.detail = "depends on agnostic elements: " + d;
      return rep;
    }

  Observed got;
  try
    {
      ++rep.v071_runs;
      got = runVersion(spec, tr.unit, IsaVersion::V071, false);
    }
  catch (const RvvError& e)
    {
      rep.verdict = Verdict::ExecutionError;
      rep.detail = fmt::format("0.7.1 run failed: {}", e.what());
      return rep;
    }

  if (auto d = compare(ref, got, tr.scratch, &rep); not d.empty())
    {
      rep.verdict = Verdict::Mismatch;
      rep.detail = d;
    }
  return rep;
}

GenParams trialParams(std::uint64_t seed, const TrialOptions& opts)
{
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
  GenParams p;
  p.vlen_bits = opts.vlen_bits;
  p.max_ops = opts.max_ops;
  p.with_masks = rng() % 2;
  p.with_loop = rng() % 2;
  p.with_tu = opts.tail_undisturbed;
  return p;
}

namespace
{

  DiffReport runOne(std::uint64_t seed, const TrialOptions& opts)
  {
    auto spec = generateKernel(seed, trialParams(seed, opts));
    TranslateOptions to;
    to.cfg.vlen_bits = opts.vlen_bits;
    to.strategy = opts.strategy;
    return differentialCheck(spec, to);
  }

}

std::vector<DiffReport> runTrialsSerial(const TrialOptions& opts)
{
  std::vector<DiffReport> out;
  out.reserve(opts.trials);
  for (unsigned i = 0; i < opts.trials; ++i)
    out.push_back(runOne(opts.seed + i, opts));
  return out;
}

std::vector<DiffReport> runTrialsParallel(const TrialOptions& opts)
{
  std::vector<DiffReport> out(opts.trials);
  const long n = long(opts.trials);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i)
    out[std::size_t(i)] = runOne(opts.seed + std::uint64_t(i), opts);
  return out;
}

}
