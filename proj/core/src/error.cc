// error.cc
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

#include "embr/error.h"

namespace embr {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kInvalidPath: return "invalid-path";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kOverflow: return "overflow";
    case ErrorKind::kCyclic: return "cyclic";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace embr
