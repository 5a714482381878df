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

#include "rvvb/fileio.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rvvb/error.hpp"

namespace rvvb
{

std::string readTextFile(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (not in)
    throw RvvError("E_IO", fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw RvvError("E_IO", fmt::format("error reading '{}'", path.string()));
  return ss.str();
}

void writeFileAtomic(const std::filesystem::path& path, std::string_view content)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (not out)
      throw RvvError("E_IO", fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (not out)
      {
        out.close();
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw RvvError("E_IO", fmt::format("error writing '{}'", tmp.string()));
      }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    {
      std::filesystem::remove(tmp, ec);
      throw RvvError("E_IO", fmt::format("cannot rename '{}' to '{}'", tmp.string(), path.string()));
    }
}

}
