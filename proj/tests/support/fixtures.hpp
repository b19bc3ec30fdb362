// Copyright 2026 The wiresec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "wiresec/lincode.hpp"
#include "wiresec/netmodel.hpp"

namespace wiresec::testing {

inline std::string fixture_path(const std::string& file) {
  return std::string(WIRESEC_FIXTURES) + "/" + file;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline NetworkSpec fixture_network(const std::string& name) {
  return parse_network(read_text(fixture_path(name + ".json")));
}

inline CodeSpec fixture_code(const std::string& name) {
  return parse_code(read_text(fixture_path(name + "-code.json")));
}

inline CompiledCode fixture(const std::string& name) {
  return compile(fixture_network(name), fixture_code(name));
}

}  // namespace wiresec::testing
