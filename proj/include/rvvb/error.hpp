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

#include <stdexcept>
#include <string>

namespace rvvb
{

  /// Exception carrying a stable error code (E_ENCODING, E_VTYPE_SYNTAX,
  /// E_MEM_FAULT, ...). Value-level outcomes such as an unsupported
  /// instruction are not reported through this type.
  class RvvError : public std::runtime_error
  {
  public:
    RvvError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)),
        detail_(message)
    { }

    const std::string& code() const noexcept
    { return code_; }

    /// Message without the code prefix.
    const std::string& detail() const noexcept
    { return detail_; }

  private:
    std::string code_;
    std::string detail_;
  };

}
