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

#include <string>
#include <vector>

#include "rvvb/asmtext.hpp"

namespace rvvb
{

  enum class Severity { Note, Warning, Error };

  const char* severityName(Severity s);

  /// A translator or tool message with a stable code. Codes are listed in
  /// docs/diagnostics.md.
  struct Diagnostic
  {
    Severity severity = Severity::Note;
    std::string code;
    std::string message;
    SourceLocation loc;

    /// "file:line: severity[CODE]: message"
    std::string format() const;

    bool operator==(const Diagnostic&) const = default;
  };

  using Diagnostics = std::vector<Diagnostic>;

  bool hasSeverity(const Diagnostics& diags, Severity s);
  bool hasCode(const Diagnostics& diags, const std::string& code);
  std::size_t countCode(const Diagnostics& diags, const std::string& code);

}
