// embr/fst-io.h
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
// Text formats for FSTs and symbol tables.
//
// FST text: one record per line.
//   arc line:   src dst ilabel olabel logweight
//   final line: state
// The initial state is 0. State ids must be dense: every id up to the
// largest one mentioned is either the source of an arc or the final state.
// logweight is a natural-log weight; "-inf" denotes a zero weight.
//
// Symbol table text: lines of "token id".

#ifndef EMBR_FST_IO_H_
#define EMBR_FST_IO_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embr/fst.h"

namespace embr {

// Throws Error(kParse) with "source:line: message".
Wfst ParseFstText(std::istream &in, std::string_view source = "<input>");
Wfst ReadFstFile(const std::string &filename);

void WriteFstText(const Wfst &fst, std::ostream &out);
std::string FstToText(const Wfst &fst);

// Shortest decimal form that parses back to the same double; "-inf" for
// negative infinity.
std::string FormatDouble(double value);

// Parses a whole token as a double; accepts "-inf". nullopt on failure.
std::optional<double> ParseDouble(std::string_view token);
std::optional<long long> ParseInt(std::string_view token);

std::vector<std::string_view> SplitWhitespace(std::string_view line);

class SymbolTable {
 public:
  // Throws Error(kParse) on duplicate tokens or ids, or id 0 (epsilon).
  void AddSymbol(const std::string &token, Label id);

  std::optional<Label> Find(std::string_view token) const;
  std::optional<std::string> Find(Label id) const;
  std::size_t Size() const { return by_token_.size(); }

 private:
  std::unordered_map<std::string, Label> by_token_;
  std::unordered_map<Label, std::string> by_id_;
};

SymbolTable ParseSymbolTable(std::istream &in,
                             std::string_view source = "<input>");
SymbolTable ReadSymbolTableFile(const std::string &filename);

}  // namespace embr

#endif  // EMBR_FST_IO_H_
