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

#include <map>
#include <random>
#include <string>

#include <fmt/format.h>

#include "rvvb/emulator.hpp"

namespace rvvb::testing
{

  /// A hand-written kernel exercising one rename. Inputs at a1/a2, results
  /// at a3, scalar results at a4, vl = 8.
  inline KernelSpec handKernel(const std::string& name, const std::string& body, std::uint64_t seed = 1)
  {
    std::mt19937_64 rng(seed);
    auto bytes = [&](std::size_t n) {
      std::vector<std::uint8_t> b(n);
      for (auto& x : b)
        x = std::uint8_t(rng());
      return b;
    };
    KernelSpec k;
    k.name = name;
    k.seed = seed;
    k.program = parseSource(name + ":\n" + body + "\tret\n", name + ".s");
    k.xregs = { { reg::a0, 8 }, { reg::a1, 0x1000 }, { reg::a2, 0x2000 }, { reg::a3, 0x3000 },
                { reg::a4, 0x4000 }, { reg::a7, rng() }, { reg::sp, 0x9000 } };
    k.memory = { { 0x1000, bytes(256) }, { 0x2000, bytes(256) }, { 0x3000, std::vector<std::uint8_t>(256) },
                 { 0x4000, std::vector<std::uint8_t>(64) }, { 0x8000, std::vector<std::uint8_t>(0x1000) } };
    k.windows = { { 0x3000, 256 }, { 0x4000, 64 } };
    return k;
  }

  inline std::string narrowingBody(const std::string& mnemonic)
  {
    std::string src2 = mnemonic.ends_with(".wv") ? "v4" : mnemonic.ends_with(".wx") ? "a7" : "3";
    return fmt::format("\tvsetvli t0, a0, e32, m2, ta, ma\n"
                       "\tvle32.v v8, (a1)\n"
                       "\tvsetvli t0, a0, e16, m1, ta, ma\n"
                       "\tvle16.v v4, (a2)\n"
                       "\t{} v2, v8, {}\n"
                       "\tvse16.v v2, (a3)\n",
                       mnemonic, src2);
  }

  inline std::string convertBody(const std::string& mnemonic)
  {
    return fmt::format("\tvsetvli t0, a0, e64, m2, ta, ma\n"
                       "\tvle64.v v8, (a1)\n"
                       "\tvsetvli t0, a0, e32, m1, ta, ma\n"
                       "\t{} v2, v8\n"
                       "\tvse32.v v2, (a3)\n",
                       mnemonic);
  }

  inline std::string maskBody(const std::string& combine)
  {
    return fmt::format("\tvsetvli t0, a0, e32, m1, ta, mu\n"
                       "\tvle32.v v1, (a1)\n"
                       "\tvle32.v v2, (a2)\n"
                       "\tvmslt.vx v3, v1, a7\n"
                       "\tvmslt.vv v4, v2, v1\n"
                       "\t{}\n"
                       "\tvmv.v.i v5, 0\n"
                       "\tvadd.vi v5, v5, 1, v0.t\n"
                       "\tvse32.v v5, (a3)\n"
                       "\tvcpop.m a6, v0\n"
                       "\tsd a6, 0(a4)\n",
                       combine);
  }

  /// Kernel bodies keyed by the 1.0 mnemonic they rename.
  inline std::map<std::string, std::string> renameKernelBodies()
  {
    std::map<std::string, std::string> m;
    for (const char* op : { "vnsrl", "vnsra", "vnclipu", "vnclip" })
      for (const char* f : { "wv", "wx", "wi" })
        {
          auto mn = fmt::format("{}.{}", op, f);
          m[mn] = narrowingBody(mn);
        }
    for (const char* k : { "xu.f", "x.f", "f.xu", "f.x", "f.f" })
      {
        auto mn = fmt::format("vfncvt.{}.w", k);
        m[mn] = convertBody(mn);
      }
    m["vfredusum.vs"] = "\tvsetvli t0, a0, e32, m1, ta, ma\n"
                        "\tvle32.v v1, (a1)\n"
                        "\tvle32.v v2, (a2)\n"
                        "\tvfredusum.vs v3, v1, v2\n"
                        "\tvfmv.f.s fa1, v3\n"
                        "\tfsw fa1, 0(a4)\n";
    m["vfwredusum.vs"] = "\tvsetvli t0, a0, e32, m1, ta, ma\n"
                         "\tvle32.v v1, (a1)\n"
                         "\tvl1r.v v2, (a2)\n"
                         "\tvfwredusum.vs v3, v1, v2\n"
                         "\tvsetivli zero, 1, e64, m1, ta, ma\n"
                         "\tvse64.v v3, (a3)\n";
    m["vmandn.mm"] = maskBody("vmandn.mm v0, v3, v4");
    m["vmorn.mm"] = maskBody("vmorn.mm v0, v3, v4");
    m["vmmv.m"] = maskBody("vmmv.m v0, v4");
    m["vcpop.m"] = "\tvsetvli t0, a0, e16, m1, ta, ma\n"
                   "\tvle16.v v1, (a1)\n"
                   "\tvmslt.vx v0, v1, a7\n"
                   "\tvmseq.vi v2, v1, 0\n"
                   "\tvcpop.m a5, v0\n"
                   "\tsd a5, 0(a4)\n"
                   "\tvmsne.vi v3, v1, 0\n"
                   "\tvcpop.m a5, v3, v0.t\n"
                   "\tsd a5, 8(a4)\n";
    return m;
  }

}
