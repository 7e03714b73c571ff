// Copyright (c) 2026 The ppct Authors. All Rights Reserved.
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
#include <string>
#include <vector>

#include "ppct/error.hpp"

namespace ppct::plan {

struct GrammarSymbol {
  bool is_rule = false;
  int value = 0;  // terminal value, or rule id

  bool operator==(const GrammarSymbol& o) const {
    return is_rule == o.is_rule && value == o.value;
  }
};

// Context-free grammar under the two Sequitur constraints: no digram
// appears more than once across rule bodies (overlapping runs of one
// symbol excepted) and every non-start rule is referenced at least twice.
struct Grammar {
  std::vector<std::vector<GrammarSymbol>> rules;  // rules[0] = start rule
  std::uint64_t operations = 0;  // digram-table work, for linearity checks

  int rule_count() const { return static_cast<int>(rules.size()); }
  std::string to_string() const;
};

// Builds the grammar incrementally in one left-to-right pass.
Grammar sequitur_build(const std::vector<int>& symbols);

// Recursive substitution down to terminals; expand(g, 0) reproduces the
// original input. Throws UnknownRuleError for out-of-range ids.
std::vector<int> expand(const Grammar& g, int rule_id);

struct GrammarCheck {
  bool digram_unique = false;
  bool rule_utility = false;
  bool roundtrip = false;
  std::string detail;

  bool ok() const { return digram_unique && rule_utility && roundtrip; }
};

GrammarCheck check_grammar(const Grammar& g, const std::vector<int>& input);

}  // namespace ppct::plan
