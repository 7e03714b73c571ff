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

#include "ppct/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace ppct::plan {

namespace {
constexpr int kSentinelSpacing = 1;
}

SymbolCoder::SymbolCoder(const std::vector<NetworkConfig>& configs) {
  std::set<double> rates;
  for (const NetworkConfig& c : configs)
    for (const ConfigSymbol& s : c.symbols) rates.insert(s.rate);
  rates_.assign(rates.begin(), rates.end());

  int max_module = 0;
  for (const NetworkConfig& c : configs)
    for (const ConfigSymbol& s : c.symbols)
      max_module = std::max(max_module, s.module);
  sentinel_base_ =
      (max_module + 1) * static_cast<int>(rates_.size()) + kSentinelSpacing;

  for (std::size_t n = 0; n < configs.size(); ++n) {
    int begin = static_cast<int>(sequence_.size());
    for (const ConfigSymbol& s : configs[n].symbols)
      sequence_.push_back(encode(s));
    spans_.emplace_back(begin, static_cast<int>(sequence_.size()));
    sequence_.push_back(sentinel(static_cast<int>(n)));
  }
}

int SymbolCoder::encode(const ConfigSymbol& s) const {
  auto it = std::lower_bound(rates_.begin(), rates_.end(), s.rate);
  if (it == rates_.end() || *it != s.rate)
    throw DomainError("rate not in the declared set");
  int rate_idx = static_cast<int>(it - rates_.begin());
  return s.module * static_cast<int>(rates_.size()) + rate_idx;
}

ConfigSymbol SymbolCoder::decode(int terminal) const {
  if (is_sentinel(terminal)) throw DomainError("cannot decode a sentinel");
  int n = static_cast<int>(rates_.size());
  return {terminal / n, rates_[static_cast<std::size_t>(terminal % n)]};
}

ConfigGrammar build_config_grammar(const std::vector<NetworkConfig>& configs) {
  if (configs.empty()) throw DomainError("empty promising subspace");
  SymbolCoder coder(configs);
  Grammar g = sequitur_build(coder.sequence());
  return {std::move(coder), std::move(g)};
}

std::string TuningBlock::key() const {
  std::ostringstream os;
  os << "block";
  for (const ConfigSymbol& s : symbols) {
    os << "_m" << s.module << "r"
       << static_cast<int>(std::lround(s.rate * 100.0));
  }
  return os.str();
}

RuleSelection select_rules(const Grammar& g,
                           const std::vector<std::pair<int, int>>& spans,
                           const std::function<bool(int)>& is_sentinel) {
  int nrules = g.rule_count();
  RuleSelection sel;
  sel.occurrences.assign(static_cast<std::size_t>(nrules), 0);
  sel.network_frequency.assign(static_cast<std::size_t>(nrules), 0);
  sel.length.assign(static_cast<std::size_t>(nrules), 0);
  sel.has_sentinel.assign(static_cast<std::size_t>(nrules), false);

  std::vector<std::vector<int>> children(static_cast<std::size_t>(nrules));
  std::function<int(int)> length_of = [&](int rid) -> int {
    if (sel.length[static_cast<std::size_t>(rid)] > 0)
      return sel.length[static_cast<std::size_t>(rid)];
    int len = 0;
    for (const GrammarSymbol& s : g.rules[static_cast<std::size_t>(rid)])
      len += s.is_rule ? length_of(s.value) : 1;
    sel.length[static_cast<std::size_t>(rid)] = len;
    return len;
  };
  for (int rid = 0; rid < nrules; ++rid) length_of(rid);

  for (int rid = 0; rid < nrules; ++rid) {
    std::set<int> kids;
    for (const GrammarSymbol& s : g.rules[static_cast<std::size_t>(rid)]) {
      if (s.is_rule)
        kids.insert(s.value);
      else if (is_sentinel(s.value))
        sel.has_sentinel[static_cast<std::size_t>(rid)] = true;
    }
    children[static_cast<std::size_t>(rid)] =
        std::vector<int>(kids.begin(), kids.end());
    for (int k : kids) sel.dag_edges.emplace_back(rid, k);
  }
  // a rule inherits sentinel taint from its descendants
  bool changed = true;
  while (changed) {
    changed = false;
    for (int rid = 0; rid < nrules; ++rid) {
      if (sel.has_sentinel[static_cast<std::size_t>(rid)]) continue;
      for (int k : children[static_cast<std::size_t>(rid)])
        if (sel.has_sentinel[static_cast<std::size_t>(k)]) {
          sel.has_sentinel[static_cast<std::size_t>(rid)] = true;
          changed = true;
        }
    }
  }

  // Every occurrence position of every rule, by walking the expansion once
  // per occurrence. Planner inputs are tiny, so this stays cheap.
  std::vector<std::vector<int>> positions(static_cast<std::size_t>(nrules));
  std::function<void(int, int)> walk = [&](int rid, int start) {
    int pos = start;
    for (const GrammarSymbol& s : g.rules[static_cast<std::size_t>(rid)]) {
      if (s.is_rule) {
        positions[static_cast<std::size_t>(s.value)].push_back(pos);
        walk(s.value, pos);
        pos += sel.length[static_cast<std::size_t>(s.value)];
      } else {
        pos += 1;
      }
    }
  };
  walk(0, 0);

  auto network_of = [&](int begin, int len) -> int {
    for (std::size_t n = 0; n < spans.size(); ++n)
      if (begin >= spans[n].first && begin + len <= spans[n].second)
        return static_cast<int>(n);
    return -1;
  };
  for (int rid = 1; rid < nrules; ++rid) {
    sel.occurrences[static_cast<std::size_t>(rid)] =
        static_cast<int>(positions[static_cast<std::size_t>(rid)].size());
    std::set<int> nets;
    for (int p : positions[static_cast<std::size_t>(rid)]) {
      int n = network_of(p, sel.length[static_cast<std::size_t>(rid)]);
      if (n >= 0) nets.insert(n);
    }
    sel.network_frequency[static_cast<std::size_t>(rid)] =
        static_cast<int>(nets.size());
  }
  sel.occurrences[0] = 1;

  std::vector<int> memo(static_cast<std::size_t>(nrules), -1);
  std::function<int(int)> max_desc = [&](int rid) -> int {
    if (memo[static_cast<std::size_t>(rid)] >= 0)
      return memo[static_cast<std::size_t>(rid)];
    int best = 0;
    for (int child : children[static_cast<std::size_t>(rid)]) {
      best = std::max(best, sel.occurrences[static_cast<std::size_t>(child)]);
      best = std::max(best, max_desc(child));
    }
    memo[static_cast<std::size_t>(rid)] = best;
    return best;
  };

  std::set<int> chosen;
  std::vector<bool> visited(static_cast<std::size_t>(nrules), false);
  std::function<void(int)> consider = [&](int rid) {
    if (visited[static_cast<std::size_t>(rid)]) return;
    visited[static_cast<std::size_t>(rid)] = true;
    if (sel.has_sentinel[static_cast<std::size_t>(rid)]) {
      for (int child : children[static_cast<std::size_t>(rid)])
        consider(child);
      return;
    }
    bool spread = sel.network_frequency[static_cast<std::size_t>(rid)] >= 2;
    bool dominates =
        children[static_cast<std::size_t>(rid)].empty() ||
        sel.occurrences[static_cast<std::size_t>(rid)] == max_desc(rid);
    if (spread && dominates) {
      chosen.insert(rid);
      return;
    }
    for (int child : children[static_cast<std::size_t>(rid)])
      consider(child);
  };
  for (int child : children[0]) consider(child);
  sel.selected.assign(chosen.begin(), chosen.end());
  return sel;
}

BlockIdResult identify_tuning_blocks(
    const ConfigGrammar& cg, const std::vector<NetworkConfig>& configs) {
  (void)configs;
  const Grammar& g = cg.grammar;
  RuleSelection sel = select_rules(
      g, cg.coder.spans(), [&](int t) { return cg.coder.is_sentinel(t); });

  BlockIdResult result;
  result.dag_edges = sel.dag_edges;

  auto block_of = [&](int rid) {
    TuningBlock b;
    b.rule_id = rid;
    for (int t : expand(g, rid))
      if (!cg.coder.is_sentinel(t)) b.symbols.push_back(cg.coder.decode(t));
    b.total_occurrences = sel.occurrences[static_cast<std::size_t>(rid)];
    b.network_frequency = sel.network_frequency[static_cast<std::size_t>(rid)];
    return b;
  };

  for (int rid = 1; rid < g.rule_count(); ++rid)
    if (!sel.has_sentinel[static_cast<std::size_t>(rid)])
      result.candidates.push_back(block_of(rid));
  for (int rid : sel.selected) result.selected.push_back(block_of(rid));

  std::ostringstream os;
  os << "rules: " << g.rule_count() << "\n";
  for (int rid = 0; rid < g.rule_count(); ++rid) {
    os << "r" << rid << ": len=" << sel.length[static_cast<std::size_t>(rid)]
       << " occ=" << sel.occurrences[static_cast<std::size_t>(rid)]
       << " nets=" << sel.network_frequency[static_cast<std::size_t>(rid)]
       << " children=";
    bool any = false;
    for (const auto& [parent, child] : sel.dag_edges)
      if (parent == rid) {
        if (any) os << ",";
        os << "r" << child;
        any = true;
      }
    if (!any) os << "-";
    os << "\n";
  }
  os << "selected:";
  for (int rid : sel.selected) os << " r" << rid;
  os << "\n";
  result.report = os.str();
  return result;
}

std::vector<CompositeVector> composite_vectors(
    const std::vector<NetworkConfig>& configs,
    const std::vector<TuningBlock>& blocks) {
  std::vector<CompositeVector> out(configs.size());
  for (std::size_t n = 0; n < configs.size(); ++n) {
    const std::vector<ConfigSymbol>& sym = configs[n].symbols;
    std::size_t pos = 0;
    while (pos < sym.size()) {
      int best = -1;
      std::size_t best_len = 0;
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& bs = blocks[b].symbols;
        if (bs.empty() || bs.size() <= best_len) continue;
        if (pos + bs.size() > sym.size()) continue;
        if (std::equal(bs.begin(), bs.end(),
                       sym.begin() + static_cast<long>(pos))) {
          best = static_cast<int>(b);
          best_len = bs.size();
        }
      }
      if (best >= 0) {
        out[n].push_back(
            {static_cast<int>(pos), best, static_cast<int>(best_len)});
        pos += best_len;
      } else {
        ++pos;
      }
    }
  }
  return out;
}

std::string composite_report(const std::vector<NetworkConfig>& configs,
                             const std::vector<CompositeVector>& tiles,
                             const std::vector<TuningBlock>& blocks) {
  std::ostringstream os;
  for (std::size_t n = 0; n < configs.size(); ++n) {
    os << "config " << configs[n].id << ":";
    if (tiles[n].empty()) os << " (untiled)";
    for (const TileRef& t : tiles[n])
      os << " [" << t.position << "+" << t.length << " "
         << blocks[static_cast<std::size_t>(t.block_index)].key() << "]";
    os << "\n";
  }
  return os.str();
}

namespace {

double projected_time(const std::vector<NetworkConfig>& configs,
                      const std::vector<TuningBlock>& blocks,
                      const CostModel& cost) {
  double pretrain = 0.0;
  for (const TuningBlock& b : blocks)
    pretrain += static_cast<double>(b.symbols.size()) * cost.unit_layer_cost *
                cost.pretrain_factor;
  std::vector<CompositeVector> tiles = composite_vectors(configs, blocks);
  double total = pretrain;
  for (std::size_t n = 0; n < configs.size(); ++n) {
    double layers = static_cast<double>(configs[n].symbols.size());
    double covered = 0.0;
    for (const TileRef& t : tiles[n]) covered += t.length;
    double base = layers * cost.unit_layer_cost;
    total += base * (1.0 - cost.beta * (layers > 0 ? covered / layers : 0.0));
  }
  return total;
}

}  // namespace

SavingsReport savings_report(const std::vector<NetworkConfig>& configs,
                             const std::vector<TuningBlock>& selected,
                             const std::vector<TuningBlock>& candidates,
                             const CostModel& cost, int exhaustive_limit) {
  SavingsReport report;
  for (const NetworkConfig& c : configs)
    report.base_time +=
        static_cast<double>(c.symbols.size()) * cost.unit_layer_cost;
  report.projected_time = projected_time(configs, selected, cost);
  report.saved = report.base_time - report.projected_time;
  report.profitable = report.saved > 0.0;

  if (static_cast<int>(candidates.size()) <= exhaustive_limit) {
    report.exhaustive_available = true;
    report.optimal_projected = report.base_time;  // empty subset baseline
    std::size_t n = candidates.size();
    for (std::size_t mask = 0; mask < (1ull << n); ++mask) {
      std::vector<TuningBlock> subset;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1ull << i)) subset.push_back(candidates[i]);
      double t = projected_time(configs, subset, cost);
      if (t < report.optimal_projected) {
        report.optimal_projected = t;
        report.optimal_block_rules.clear();
        for (const TuningBlock& b : subset)
          report.optimal_block_rules.push_back(b.rule_id);
      }
    }
    report.gap = report.projected_time - report.optimal_projected;
  }

  std::ostringstream os;
  os << "base_time=" << report.base_time
     << " projected=" << report.projected_time << " saved=" << report.saved
     << (report.profitable ? "" : " (unprofitable)") << "\n";
  if (report.exhaustive_available) {
    os << "exhaustive_optimal=" << report.optimal_projected
       << " gap=" << report.gap << " optimal_rules=";
    for (std::size_t i = 0; i < report.optimal_block_rules.size(); ++i) {
      if (i) os << ",";
      os << "r" << report.optimal_block_rules[i];
    }
    if (report.optimal_block_rules.empty()) os << "(none)";
    os << "\n";
  }
  report.text = os.str();
  return report;
}

}  // namespace ppct::plan
