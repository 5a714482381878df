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

// Serial versus OpenMP differential-trial throughput.
//   bench_difftest [trials] [repeats]

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <string>

#include <fmt/format.h>
#include <omp.h>

#include "rvvb/difftest.hpp"

using namespace rvvb;

namespace
{
  template <typename F>
  double bestOf(unsigned repeats, F&& f)
  {
    double best = 1e300;
    for (unsigned i = 0; i < repeats; ++i)
      {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
    return best;
  }
}

int main(int argc, char** argv)
{
  TrialOptions opts;
  opts.trials = argc > 1 ? unsigned(std::stoul(argv[1])) : 1000;
  unsigned repeats = argc > 2 ? unsigned(std::stoul(argv[2])) : 3;

  std::vector<DiffReport> serial, parallel;
  double ts = bestOf(repeats, [&] { serial = runTrialsSerial(opts); });
  double tp = bestOf(repeats, [&] { parallel = runTrialsParallel(opts); });

  std::size_t passed = std::count_if(serial.begin(), serial.end(), [](const DiffReport& r) { return r.pass(); });
  fmt::print("trials          {}\n", opts.trials);
  fmt::print("threads         {}\n", omp_get_max_threads());
  fmt::print("serial          {:.3f} s  ({:.0f} kernels/s)\n", ts, opts.trials / ts);
  fmt::print("openmp          {:.3f} s  ({:.0f} kernels/s)\n", tp, opts.trials / tp);
  fmt::print("speedup         {:.2f}x\n", ts / tp);
  fmt::print("passed          {}/{}\n", passed, serial.size());
  fmt::print("reports agree   {}\n", serial == parallel ? "yes" : "NO");
  return serial == parallel ? 0 : 1;
}
