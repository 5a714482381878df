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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rvvb/emulator.hpp"

namespace rvvb
{

  /// Knobs of the random kernel generator.
  struct GenParams
  {
    unsigned max_ops = 12;
    std::vector<unsigned> sews{ 8, 16, 32, 64 };
    bool with_masks = false;
    bool with_loop = false;
    /// Allow tail-undisturbed configurations whose tails are later observed.
    bool with_tu = false;
    unsigned vlen_bits = 128;
  };

  /// Build a random RVV 1.0 kernel. Deterministic in (seed, params). Every
  /// vector value the program reads is defined under RVV 1.0 semantics for
  /// any legal agnostic outcome, unless `with_tu` is set.
  KernelSpec generateKernel(std::uint64_t seed, const GenParams& params = {});

  /// Sidecar manifest: key=value lines describing registers, memory blocks
  /// and observation windows. The program itself lives in a separate file.
  std::string writeManifest(const KernelSpec& spec, std::string_view programFile);

  /// Parse a manifest; `program` supplies the assembly. Throws
  /// RvvError(E_MANIFEST) on malformed input.
  KernelSpec readManifest(std::string_view text, const ProgramUnit& program);

  /// Write <dir>/<name>.s and <dir>/<name>.manifest. Returns the manifest path.
  std::filesystem::path saveKernel(const KernelSpec& spec, const std::filesystem::path& dir);

  /// Load a kernel from its manifest path; the program path is read from the
  /// manifest and resolved relative to it.
  KernelSpec loadKernel(const std::filesystem::path& manifest);

}
