// fst-io.cc
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

#include "embr/fst-io.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "embr/error.h"
#include "embr/log-math.h"

namespace embr {
namespace {

[[noreturn]] void ParseFail(std::string_view source, std::size_t line,
                            const std::string &message) {
  throw Error(ErrorKind::kParse, std::string(source) + ":" +
                                     std::to_string(line) + ": " + message);
}

}  // namespace

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t start = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::optional<double> ParseDouble(std::string_view token) {
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  std::string_view body = token;
  if (body.front() == '+') body.remove_prefix(1);
  auto [ptr, ec] =
      std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || ptr != body.data() + body.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> ParseInt(std::string_view token) {
  long long value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() ||
      ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

std::string FormatDouble(double value) {
  if (value == kLogZero) return "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorKind::kInternal, "to_chars failed");
  return std::string(buf, ptr);
}

Wfst ParseFstText(std::istream &in, std::string_view source) {
  struct ArcRecord {
    Edge edge;
    std::size_t line;
  };
  std::vector<ArcRecord> arcs;
  std::optional<StateId> final_state;
  std::size_t final_line = 0;
  std::string line;
  std::size_t line_no = 0;
  auto state_id = [&](std::string_view token) -> StateId {
    auto v = ParseInt(token);
    if (!v || *v < 0 || *v > INT32_MAX - 1) {
      ParseFail(source, line_no, "bad state id '" + std::string(token) + "'");
    }
    return static_cast<StateId>(*v);
  };
  auto label_id = [&](std::string_view token) -> Label {
    auto v = ParseInt(token);
    if (!v || *v < 0 || *v > INT32_MAX) {
      ParseFail(source, line_no, "bad label '" + std::string(token) + "'");
    }
    return static_cast<Label>(*v);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string_view> fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields.size() == 1) {
      if (final_state) {
        ParseFail(source, line_no,
                  "multiple final states (first at line " +
                      std::to_string(final_line) + ")");
      }
      final_state = state_id(fields[0]);
      final_line = line_no;
    } else if (fields.size() == 5) {
      Edge e;
      e.src = state_id(fields[0]);
      e.dst = state_id(fields[1]);
      e.ilabel = label_id(fields[2]);
      e.olabel = label_id(fields[3]);
      auto w = ParseDouble(fields[4]);
      if (!w || std::isnan(*w) || *w == -kLogZero) {
        ParseFail(source, line_no,
                  "bad log-weight '" + std::string(fields[4]) + "'");
      }
      e.log_weight = *w;
      arcs.push_back({e, line_no});
    } else {
      ParseFail(source, line_no,
                "expected 5 fields (arc) or 1 field (final), got " +
                    std::to_string(fields.size()));
    }
  }
  if (!final_state) ParseFail(source, line_no + 1, "missing final state line");

  StateId max_id = *final_state;
  for (const ArcRecord &a : arcs) {
    max_id = std::max({max_id, a.edge.src, a.edge.dst});
  }
  std::vector<bool> known(static_cast<std::size_t>(max_id) + 1, false);
  known[*final_state] = true;
  for (const ArcRecord &a : arcs) known[a.edge.src] = true;
  for (const ArcRecord &a : arcs) {
    line_no = a.line;
    if (a.edge.src == *final_state) {
      ParseFail(source, line_no, "edge leaves the final state");
    }
    if (!known[a.edge.dst]) {
      ParseFail(source, line_no,
                "unknown state reference " + std::to_string(a.edge.dst) +
                    " (not final and has no outgoing arcs)");
    }
  }
  for (StateId s = 0; s <= max_id; ++s) {
    if (!known[s]) {
      ParseFail(source, final_line,
                "state ids are not dense: state " + std::to_string(s) +
                    " is never defined");
    }
  }
  std::vector<Edge> edges;
  edges.reserve(arcs.size());
  for (const ArcRecord &a : arcs) edges.push_back(a.edge);
  return Wfst(max_id + 1, std::move(edges), *final_state);
}

Wfst ReadFstFile(const std::string &filename) {
  std::ifstream in(filename);
  if (!in) throw Error(ErrorKind::kParse, filename + ": cannot open");
  return ParseFstText(in, filename);
}

void WriteFstText(const Wfst &fst, std::ostream &out) {
  for (const Edge &e : fst.Edges()) {
    out << e.src << ' ' << e.dst << ' ' << e.ilabel << ' ' << e.olabel << ' '
        << FormatDouble(e.log_weight) << '\n';
  }
  out << fst.Final() << '\n';
}

std::string FstToText(const Wfst &fst) {
  std::ostringstream out;
  WriteFstText(fst, out);
  return out.str();
}

void SymbolTable::AddSymbol(const std::string &token, Label id) {
  if (id <= kEpsilon) {
    throw Error(ErrorKind::kParse, "symbol '" + token +
                                       "' has reserved or negative id " +
                                       std::to_string(id));
  }
  if (by_token_.count(token) || by_id_.count(id)) {
    throw Error(ErrorKind::kParse, "duplicate symbol '" + token + "' / id " +
                                       std::to_string(id));
  }
  by_token_.emplace(token, id);
  by_id_.emplace(id, token);
}

std::optional<Label> SymbolTable::Find(std::string_view token) const {
  auto it = by_token_.find(std::string(token));
  if (it == by_token_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> SymbolTable::Find(Label id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

SymbolTable ParseSymbolTable(std::istream &in, std::string_view source) {
  SymbolTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string_view> fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) ParseFail(source, line_no, "expected 'token id'");
    auto id = ParseInt(fields[1]);
    if (!id || *id > INT32_MAX) {
      ParseFail(source, line_no, "bad id '" + std::string(fields[1]) + "'");
    }
    try {
      table.AddSymbol(std::string(fields[0]), static_cast<Label>(*id));
    } catch (const Error &e) {
      ParseFail(source, line_no, e.what());
    }
  }
  return table;
}

SymbolTable ReadSymbolTableFile(const std::string &filename) {
  std::ifstream in(filename);
  if (!in) throw Error(ErrorKind::kParse, filename + ": cannot open");
  return ParseSymbolTable(in, filename);
}

}  // namespace embr
