// embr/error.h
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
//
// Error categories shared by all modules. The CLI maps each category onto a
// fixed process exit code.

#ifndef EMBR_ERROR_H_
#define EMBR_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace embr {

enum class ErrorKind {
  kUsage,        // bad flags or arguments
  kParse,        // malformed input file
  kInvalidPath,  // edge sequence is not a path of the FST
  kDimension,    // T/Q or length mismatch
  kDegenerate,   // zero total weight, dead ends
  kOverflow,     // enumeration bound exceeded
  kCyclic,       // acyclic input required
  kUnsupported,  // epsilon configuration or topology outside supported cases
  kNumeric,      // non-finite value where a finite one is required
  kInternal,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace embr

#endif  // EMBR_ERROR_H_
