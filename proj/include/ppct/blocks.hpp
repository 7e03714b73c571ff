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

#include <map>
#include <string>
#include <vector>

#include "ppct/explore.hpp"
#include "ppct/sequitur.hpp"

namespace ppct::plan {

// Maps (module, rate) pairs to grammar terminals, with one unique sentinel
// appended after each network so no rule can span two networks.
class SymbolCoder {
 public:
  explicit SymbolCoder(const std::vector<NetworkConfig>& configs);

  int encode(const ConfigSymbol& s) const;
  ConfigSymbol decode(int terminal) const;
  bool is_sentinel(int terminal) const { return terminal >= sentinel_base_; }
  int sentinel(int network) const { return sentinel_base_ + network; }

  const std::vector<int>& sequence() const { return sequence_; }
  // Half-open symbol ranges per network (sentinels excluded).
  const std::vector<std::pair<int, int>>& spans() const { return spans_; }

 private:
  std::vector<double> rates_;
  int sentinel_base_ = 0;
  std::vector<int> sequence_;
  std::vector<std::pair<int, int>> spans_;
};

struct ConfigGrammar {
  SymbolCoder coder;
  Grammar grammar;
};

ConfigGrammar build_config_grammar(const std::vector<NetworkConfig>& configs);

// A candidate reuse unit: a rule's terminal expansion plus its frequencies.
struct TuningBlock {
  int rule_id = -1;
  std::vector<ConfigSymbol> symbols;
  int total_occurrences = 0;   // across the whole concatenation
  int network_frequency = 0;   // distinct networks containing it
  std::string key() const;     // stable id for weight files
};

struct BlockIdResult {
  std::vector<TuningBlock> selected;
  std::vector<TuningBlock> candidates;            // every non-start rule
  std::vector<std::pair<int, int>> dag_edges;     // parent -> child rules
  std::string report;                             // DAG + selection dump
};

// Rule-level selection over an arbitrary symbol grammar; spans give each
// network's half-open terminal range and `is_sentinel` marks separator
// terminals.
struct RuleSelection {
  std::vector<int> selected;           // rule ids, ascending
  std::vector<int> occurrences;        // per rule, whole concatenation
  std::vector<int> network_frequency;  // per rule, distinct networks
  std::vector<int> length;             // per rule, terminal length
  std::vector<bool> has_sentinel;
  std::vector<std::pair<int, int>> dag_edges;
};

RuleSelection select_rules(const Grammar& grammar,
                           const std::vector<std::pair<int, int>>& spans,
                           const std::function<bool(int)>& is_sentinel);

// Applies the two selection heuristics over the rule DAG:
//  (1) a rule appearing in a single network is never selected;
//  (2) a rule is preferred over its children only when its occurrence count
//      equals the maximum among its descendants; otherwise the children are
//      considered recursively.
BlockIdResult identify_tuning_blocks(const ConfigGrammar& cg,
                                     const std::vector<NetworkConfig>& configs);

struct TileRef {
  int position = 0;
  int block_index = 0;  // index into the block list used for tiling
  int length = 0;
};

using CompositeVector = std::vector<TileRef>;

// Greedy left-to-right longest-block tiling of each network.
std::vector<CompositeVector> composite_vectors(
    const std::vector<NetworkConfig>& configs,
    const std::vector<TuningBlock>& blocks);

std::string composite_report(const std::vector<NetworkConfig>& configs,
                             const std::vector<CompositeVector>& tiles,
                             const std::vector<TuningBlock>& blocks);

struct CostModel {
  double unit_layer_cost = 1.0;
  double beta = 0.5;             // fine-tune discount on covered symbols
  double pretrain_factor = 1.0;  // pre-training cost per block symbol
};

struct SavingsReport {
  double base_time = 0.0;
  double projected_time = 0.0;
  double saved = 0.0;
  bool profitable = false;
  bool exhaustive_available = false;
  double optimal_projected = 0.0;
  double gap = 0.0;  // heuristic projected - optimal projected
  std::vector<int> optimal_block_rules;
  std::string text;
};

// Projects training time under the cost model for the heuristic block set;
// when at most `exhaustive_limit` candidate rules exist, also reports the
// exhaustive-optimal subset and the heuristic/optimal gap.
SavingsReport savings_report(const std::vector<NetworkConfig>& configs,
                             const std::vector<TuningBlock>& selected,
                             const std::vector<TuningBlock>& candidates,
                             const CostModel& cost,
                             int exhaustive_limit = 12);

}  // namespace ppct::plan
