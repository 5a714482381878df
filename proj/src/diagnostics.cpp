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

#include "rvvb/diagnostics.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace rvvb
{

const char* severityName(Severity s)
{
  switch (s)
    {
    case Severity::Note: return "note";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
    }
  return "?";
}

std::string Diagnostic::format() const
{
  return fmt::format("{}:{}: {}[{}]: {}", loc.file, loc.line, severityName(severity), code,
                     message);
}

bool hasSeverity(const Diagnostics& diags, Severity s)
{
  return std::any_of(diags.begin(), diags.end(),
                     [s](const Diagnostic& d) { return d.severity == s; });
}

bool hasCode(const Diagnostics& diags, const std::string& code)
{
  return countCode(diags, code) != 0;
}

std::size_t countCode(const Diagnostics& diags, const std::string& code)
{
  return std::count_if(diags.begin(), diags.end(),
                       [&](const Diagnostic& d) { return d.code == code; });
}

}
