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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>

#include "ppct/blocks.hpp"
#include "ppct/explore.hpp"
#include "ppct/sequitur.hpp"

using namespace ppct;
using namespace ppct::plan;

namespace {

std::vector<int> seq(const std::string& letters) {
  std::vector<int> out;
  for (char c : letters)
    if (c != ' ') out.push_back(c);
  return out;
}

std::vector<int> random_sequence(std::mt19937_64& rng, int max_len,
                                 int alphabet) {
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  std::vector<int> s(static_cast<std::size_t>(len(rng)));
  for (int& v : s) v = sym(rng);
  return s;
}

NetworkConfig cfg(int id, std::vector<double> rates) {
  NetworkConfig c;
  c.id = id;
  for (std::size_t m = 0; m < rates.size(); ++m)
    c.symbols.push_back({static_cast<int>(m), rates[m]});
  return c;
}

}  // namespace

TEST_CASE("single symbol: start rule only") {
  Grammar g = sequitur_build({7});
  REQUIRE(g.rule_count() == 1);
  REQUIRE(g.rules[0].size() == 1);
  CHECK(!g.rules[0][0].is_rule);
  CHECK(g.rules[0][0].value == 7);
}

TEST_CASE("a b c a b d compresses the repeated pair") {
  Grammar g = sequitur_build(seq("abcabd"));
  REQUIRE(g.rule_count() == 2);
  // r0 = r1 c r1 d ; r1 = a b
  REQUIRE(g.rules[0].size() == 4);
  CHECK(g.rules[0][0] == GrammarSymbol{true, 1});
  CHECK(g.rules[0][1] == GrammarSymbol{false, 'c'});
  CHECK(g.rules[0][2] == GrammarSymbol{true, 1});
  CHECK(g.rules[0][3] == GrammarSymbol{false, 'd'});
  REQUIRE(g.rules[1].size() == 2);
  CHECK(g.rules[1][0] == GrammarSymbol{false, 'a'});
  CHECK(g.rules[1][1] == GrammarSymbol{false, 'b'});
  CHECK(check_grammar(g, seq("abcabd")).ok());
}

TEST_CASE("a a a a nests the doubled pair") {
  Grammar g = sequitur_build(seq("aaaa"));
  REQUIRE(g.rule_count() == 2);
  REQUIRE(g.rules[0].size() == 2);
  CHECK(g.rules[0][0] == GrammarSymbol{true, 1});
  CHECK(g.rules[0][1] == GrammarSymbol{true, 1});
  REQUIRE(g.rules[1].size() == 2);
  CHECK(g.rules[1][0] == GrammarSymbol{false, 'a'});
  CHECK(g.rules[1][1] == GrammarSymbol{false, 'a'});
  CHECK(check_grammar(g, seq("aaaa")).ok());
}

TEST_CASE("expand returns rule bodies down to terminals") {
  Grammar g = sequitur_build(seq("abcabd"));
  CHECK(expand(g, 1) == seq("ab"));
  CHECK(expand(g, 0) == seq("abcabd"));
  CHECK_THROWS_AS(expand(g, 5), UnknownRuleError);
  CHECK_THROWS_AS(expand(g, -1), UnknownRuleError);
}

TEST_CASE("grammar invariants hold over 1000 random sequences") {
  std::mt19937_64 rng(777);
  for (int round = 0; round < 1000; ++round) {
    int alphabet = 2 + static_cast<int>(rng() % 12);
    std::vector<int> s = random_sequence(rng, 400, alphabet);
    Grammar g = sequitur_build(s);
    GrammarCheck check = check_grammar(g, s);
    if (!check.ok()) {
      CAPTURE(round);
      CAPTURE(check.detail);
      REQUIRE(check.ok());
    }
  }
}

TEST_CASE("operation count stays linear under doubling") {
  std::mt19937_64 rng(555);
  std::vector<int> base = random_sequence(rng, 1, 6);
  base.clear();
  std::uniform_int_distribution<int> sym(0, 5);
  for (int i = 0; i < 4000; ++i) base.push_back(sym(rng));
  std::uint64_t prev = 0;
  for (int n : {500, 1000, 2000, 4000}) {
    std::vector<int> s(base.begin(), base.begin() + n);
    Grammar g = sequitur_build(s);
    if (prev > 0) CHECK(static_cast<double>(g.operations) <= 2.5 * prev);
    prev = g.operations;
  }
}

TEST_CASE("heuristic 1: a rule confined to one network is never selected") {
  // net0 repeats (x y) three times; net1 shares nothing
  std::vector<int> s = {'x', 'y', 'x', 'y', 'x', 'y', 900, 'z', 'w', 901};
  Grammar g = sequitur_build(s);
  std::vector<std::pair<int, int>> spans = {{0, 6}, {7, 9}};
  RuleSelection sel =
      select_rules(g, spans, [](int t) { return t >= 900; });
  REQUIRE(g.rule_count() >= 2);  // the xy rule exists
  CHECK(sel.selected.empty());
  bool found_xy = false;
  for (int rid = 1; rid < g.rule_count(); ++rid)
    if (expand(g, rid) == std::vector<int>{'x', 'y'}) {
      found_xy = true;
      CHECK(sel.network_frequency[static_cast<std::size_t>(rid)] == 1);
      CHECK(sel.occurrences[static_cast<std::size_t>(rid)] == 3);
    }
  CHECK(found_xy);
}

TEST_CASE("heuristic 2: parent matching its best descendant wins") {
  // [a b c d] twice; the inner [a b]-style rules never appear elsewhere
  std::vector<int> s = {'a', 'b', 'c', 'd', 900,
                        'a', 'b', 'c', 'd', 901};
  Grammar g = sequitur_build(s);
  std::vector<std::pair<int, int>> spans = {{0, 4}, {5, 9}};
  RuleSelection sel = select_rules(g, spans, [](int t) { return t >= 900; });
  REQUIRE(sel.selected.size() == 1);
  CHECK(expand(g, sel.selected[0]) == std::vector<int>{'a', 'b', 'c', 'd'});
  CHECK(sel.occurrences[static_cast<std::size_t>(sel.selected[0])] == 2);
}

TEST_CASE("heuristic 2: a more frequent descendant takes over") {
  // [a b c] twice, bare [a b] three more times -> occ(ab)=5 > occ(abc)=2
  std::vector<int> s = {'a', 'b', 'c', 900, 'a', 'b', 'c', 901,
                        'a', 'b', 902, 'a', 'b', 903, 'a', 'b', 904};
  Grammar g = sequitur_build(s);
  std::vector<std::pair<int, int>> spans = {
      {0, 3}, {4, 7}, {8, 10}, {11, 13}, {14, 16}};
  RuleSelection sel = select_rules(g, spans, [](int t) { return t >= 900; });
  REQUIRE(sel.selected.size() == 1);
  CHECK(expand(g, sel.selected[0]) == std::vector<int>{'a', 'b'});
  CHECK(sel.occurrences[static_cast<std::size_t>(sel.selected[0])] == 5);
  CHECK(sel.network_frequency[static_cast<std::size_t>(sel.selected[0])] == 5);
}

TEST_CASE("hand-enumerated 3-network 6-module instance") {
  std::vector<NetworkConfig> configs = {
      cfg(0, {0.3, 0.3, 0.5, 0.5, 0.0, 0.7}),
      cfg(1, {0.3, 0.3, 0.5, 0.5, 0.7, 0.7}),
      cfg(2, {0.7, 0.3, 0.5, 0.5, 0.0, 0.3}),
  };
  ConfigGrammar cg = build_config_grammar(configs);
  CHECK(check_grammar(cg.grammar, cg.coder.sequence()).ok());
  BlockIdResult result = identify_tuning_blocks(cg, configs);

  // Hand derivation: modules 1..3 repeat in all three networks (occ 3);
  // the longer 0..3 run occurs only twice, and its best descendant (the
  // 1..3 rule) appears more often, so selection recurses to the triple.
  REQUIRE(result.selected.size() == 1);
  const TuningBlock& b = result.selected[0];
  std::vector<ConfigSymbol> want = {{1, 0.3}, {2, 0.5}, {3, 0.5}};
  CHECK(b.symbols == want);
  CHECK(b.total_occurrences == 3);
  CHECK(b.network_frequency == 3);

  // independent verification of both heuristics for every selected block
  for (const TuningBlock& blk : result.selected) {
    int nets = 0;
    for (const NetworkConfig& c : configs) {
      for (std::size_t at = 0; at + blk.symbols.size() <= c.symbols.size();
           ++at)
        if (std::equal(blk.symbols.begin(), blk.symbols.end(),
                       c.symbols.begin() + static_cast<long>(at))) {
          ++nets;
          break;
        }
    }
    CHECK(nets >= 2);
  }
}

TEST_CASE("selected blocks never cross sentinels and stay network-frequent") {
  std::mt19937_64 rng(808);
  std::vector<double> gamma = {0.3, 0.5, 0.7};
  for (int round = 0; round < 40; ++round) {
    int modules = 2 + static_cast<int>(rng() % 7);
    int networks = 2 + static_cast<int>(rng() % 5);
    std::vector<NetworkConfig> configs;
    for (int n = 0; n < networks; ++n) {
      NetworkConfig c;
      c.id = n;
      for (int m = 0; m < modules; ++m) {
        double r = (rng() % 4 == 0) ? 0.0 : gamma[rng() % 3];
        c.symbols.push_back({m, r});
      }
      configs.push_back(std::move(c));
    }
    ConfigGrammar cg = build_config_grammar(configs);
    REQUIRE(check_grammar(cg.grammar, cg.coder.sequence()).ok());
    BlockIdResult result = identify_tuning_blocks(cg, configs);
    for (const TuningBlock& b : result.selected) {
      CHECK(b.network_frequency >= 2);
      CHECK(!b.symbols.empty());
      // contiguous module run, i.e. no sentinel absorbed
      for (std::size_t i = 1; i < b.symbols.size(); ++i)
        CHECK(b.symbols[i].module == b.symbols[i - 1].module + 1);
    }
  }
}

TEST_CASE("composite vector covers an exactly-matching network with one tile") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.3, 0.5, 0.7})};
  TuningBlock block;
  block.rule_id = 1;
  block.symbols = {{0, 0.3}, {1, 0.5}, {2, 0.7}};
  auto tiles = composite_vectors(configs, {block});
  REQUIRE(tiles[0].size() == 1);
  CHECK(tiles[0][0].position == 0);
  CHECK(tiles[0][0].length == 3);
}

TEST_CASE("composite vector tiles a shared prefix and leaves the tail") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.3, 0.5, 0.7, 0.0})};
  TuningBlock prefix;
  prefix.rule_id = 1;
  prefix.symbols = {{0, 0.3}, {1, 0.5}};
  auto tiles = composite_vectors(configs, {prefix});
  REQUIRE(tiles[0].size() == 1);
  CHECK(tiles[0][0].position == 0);
  CHECK(tiles[0][0].length == 2);
}

TEST_CASE("no blocks yields empty composite vectors") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.3, 0.5})};
  auto tiles = composite_vectors(configs, {});
  CHECK(tiles[0].empty());
}

TEST_CASE("greedy tiling prefers the longest match") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.3, 0.5, 0.7})};
  TuningBlock small;
  small.rule_id = 1;
  small.symbols = {{0, 0.3}, {1, 0.5}};
  TuningBlock large;
  large.rule_id = 2;
  large.symbols = {{0, 0.3}, {1, 0.5}, {2, 0.7}};
  auto tiles = composite_vectors(configs, {small, large});
  REQUIRE(tiles[0].size() == 1);
  CHECK(tiles[0][0].block_index == 1);
  CHECK(tiles[0][0].length == 3);
}

TEST_CASE("exploration stops at the first size meeting the threshold") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.7}), cfg(1, {0.5}),
                                        cfg(2, {0.3})};
  configs[0].size_estimate = 5;
  configs[1].size_estimate = 6;
  configs[2].size_estimate = 7;
  std::vector<double> accs = {0.90, 0.95, 0.97};
  Evaluator eval = [&](const NetworkConfig& c) {
    return accs[static_cast<std::size_t>(c.id)];
  };
  ExplorationObjective obj{0.94, 0.0};
  ExploreResult r = plan_exploration(configs, obj, eval);
  REQUIRE(r.found);
  CHECK(r.best.size_estimate == 6);
  CHECK(r.evaluated == 2);
  // never evaluated anything larger than the winner
  for (const ExploreLogRow& row : r.log) CHECK(row.size <= 6);
}

TEST_CASE("threshold below all accuracies returns the smallest config") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.7}), cfg(1, {0.5})};
  configs[0].size_estimate = 5;
  configs[1].size_estimate = 6;
  ExploreResult r = plan_exploration(
      configs, {0.5, 0.0}, [](const NetworkConfig&) { return 0.9; });
  REQUIRE(r.found);
  CHECK(r.best.size_estimate == 5);
  CHECK(r.evaluated == 1);
}

TEST_CASE("threshold above all accuracies reports not-found") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.7}), cfg(1, {0.5}),
                                        cfg(2, {0.3})};
  for (int i = 0; i < 3; ++i)
    configs[static_cast<std::size_t>(i)].size_estimate = i;
  ExploreResult r = plan_exploration(
      configs, {0.99, 0.0}, [](const NetworkConfig&) { return 0.5; });
  CHECK(!r.found);
  CHECK(r.evaluated == 3);
}

TEST_CASE("worker waves round the evaluated count up to node multiples") {
  std::vector<NetworkConfig> configs;
  for (int i = 0; i < 10; ++i) {
    configs.push_back(cfg(i, {0.3}));
    configs.back().size_estimate = i;
  }
  std::atomic<int> calls{0};
  Evaluator eval = [&](const NetworkConfig& c) {
    ++calls;
    return c.size_estimate >= 5 ? 0.99 : 0.5;  // first pass at index 5
  };
  ExploreResult r = plan_exploration(configs, {0.9, 0.0}, eval, 4);
  REQUIRE(r.found);
  CHECK(r.best.size_estimate == 5);
  CHECK(r.evaluated == 8);  // two full waves of 4
  CHECK(calls.load() == 8);
}

TEST_CASE("evaluator failures surface with the config id") {
  std::vector<NetworkConfig> configs = {cfg(3, {0.3})};
  configs[0].size_estimate = 1;
  Evaluator eval = [](const NetworkConfig&) -> double {
    throw std::runtime_error("boom");
  };
  try {
    plan_exploration(configs, {0.9, 0.0}, eval);
    FAIL("expected EvaluatorError");
  } catch (const EvaluatorError& e) {
    CHECK(e.config_id() == 3);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}

TEST_CASE("speedup arithmetic reproduces the reference rows") {
  SpeedupResult a = compute_speedup(1639.4, 16.9);
  CHECK(a.speedup == doctest::Approx(97.0).epsilon(0.0006));
  SpeedupResult b = compute_speedup(3018.8, 2023.5);
  CHECK(b.speedup == doctest::Approx(1.5).epsilon(0.034));
  SpeedupResult c = compute_speedup(10.0, 10.0, 0.0);
  CHECK(c.speedup == 1.0);
  CHECK(c.overhead_fraction == 0.0);
  SpeedupResult d = compute_speedup(100.0, 40.0, 10.0);
  CHECK(d.overhead_fraction == doctest::Approx(0.25));
  CHECK_THROWS_AS(compute_speedup(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(compute_speedup(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(compute_speedup(1.0, 1.0, 2.0), DomainError);
}

TEST_CASE("savings: no blocks projects the base time") {
  std::vector<NetworkConfig> configs = {cfg(0, {0.3, 0.5}),
                                        cfg(1, {0.5, 0.7})};
  SavingsReport r = savings_report(configs, {}, {}, CostModel{});
  CHECK(r.base_time == 4.0);
  CHECK(r.projected_time == 4.0);
  CHECK(r.saved == 0.0);
  CHECK(!r.profitable);
  CHECK(r.exhaustive_available);
  CHECK(r.gap == 0.0);
}

TEST_CASE("savings: half-coverage block at breakeven is unprofitable") {
  // 4 networks x 4 modules; one length-2 block covers half of each;
  // beta=0.5 and a pretrain cost equal to one network's cost.
  std::vector<NetworkConfig> configs;
  for (int n = 0; n < 4; ++n) {
    NetworkConfig c = cfg(n, {0.5, 0.5, 0.0, 0.0});
    c.symbols[2].rate = (n % 2) ? 0.3 : 0.7;  // distinct tails
    c.symbols[3].rate = (n < 2) ? 0.3 : 0.7;
    configs.push_back(c);
  }
  TuningBlock block;
  block.rule_id = 1;
  block.symbols = {{0, 0.5}, {1, 0.5}};
  CostModel cost;
  cost.beta = 0.5;
  cost.pretrain_factor = 2.0;  // 2 layers x 2.0 = 4 = one network cost
  SavingsReport r = savings_report(configs, {block}, {block}, cost);
  CHECK(r.base_time == 16.0);
  CHECK(r.projected_time == doctest::Approx(16.0));  // 4 + 4 * 3.0
  CHECK(r.saved == doctest::Approx(0.0));
  CHECK(!r.profitable);
  CHECK(r.exhaustive_available);
  CHECK(r.optimal_projected == doctest::Approx(16.0));
}

TEST_CASE("savings: exhaustive subset search finds the profitable choice") {
  // the longer block is strictly better; exhaustive must agree or beat
  std::vector<NetworkConfig> configs;
  for (int n = 0; n < 5; ++n) configs.push_back(cfg(n, {0.5, 0.5, 0.5, 0.5}));
  TuningBlock whole;
  whole.rule_id = 1;
  whole.symbols = {{0, 0.5}, {1, 0.5}, {2, 0.5}, {3, 0.5}};
  TuningBlock half;
  half.rule_id = 2;
  half.symbols = {{0, 0.5}, {1, 0.5}};
  CostModel cost;  // beta 0.5, factor 1.0
  SavingsReport r =
      savings_report(configs, {half}, {whole, half}, cost);
  CHECK(r.base_time == 20.0);
  // heuristic set: pretrain 2 + 5 * 4*(1-0.5*0.5) = 2 + 15 = 17
  CHECK(r.projected_time == doctest::Approx(17.0));
  // optimal: whole block: 4 + 5*4*(1-0.5) = 14
  CHECK(r.optimal_projected == doctest::Approx(14.0));
  CHECK(r.gap == doctest::Approx(3.0));
  CHECK(r.optimal_block_rules == std::vector<int>{1});
}

TEST_CASE("subspace text round trips") {
  Subspace sub;
  sub.gamma = {0.3, 0.5, 0.7};
  sub.modules = 3;
  sub.configs = {cfg(0, {0.3, 0.0, 0.7}), cfg(1, {0.5, 0.5, 0.5})};
  std::string text = write_subspace(sub);
  Subspace back = parse_subspace(text);
  CHECK(back.gamma == sub.gamma);
  CHECK(back.modules == 3);
  REQUIRE(back.configs.size() == 2);
  CHECK(back.configs[0].symbols == sub.configs[0].symbols);
  CHECK(back.configs[1].symbols == sub.configs[1].symbols);
  CHECK(write_subspace(back) == text);
}

TEST_CASE("subspace parsing rejects off-gamma rates") {
  CHECK_THROWS_AS(parse_subspace("gamma: 0.3,0.5\nmodules: 1\n0:0.9\n"),
                  SemanticError);
}

TEST_CASE("sampled subspaces are deterministic, distinct, and in gamma") {
  Subspace a = sample_subspace(5, {0.3, 0.5, 0.7}, 20, 99);
  Subspace b = sample_subspace(5, {0.3, 0.5, 0.7}, 20, 99);
  REQUIRE(a.configs.size() == 20);
  for (std::size_t i = 0; i < a.configs.size(); ++i)
    CHECK(a.configs[i].symbols == b.configs[i].symbols);
  std::set<std::string> seen;
  for (const NetworkConfig& c : a.configs) {
    std::string key;
    for (const ConfigSymbol& s : c.symbols) {
      CHECK((s.rate == 0.0 || s.rate == 0.3 || s.rate == 0.5 || s.rate == 0.7));
      key += std::to_string(s.rate) + ",";
    }
    CHECK(seen.insert(key).second);
  }
}
