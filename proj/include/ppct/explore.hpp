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

#include <functional>
#include <string>
#include <vector>

#include "ppct/error.hpp"

namespace ppct::plan {

// One per-module pruning decision; rate 0 leaves the module dense.
struct ConfigSymbol {
  int module = 0;
  double rate = 0.0;

  bool operator==(const ConfigSymbol& o) const {
    return module == o.module && rate == o.rate;
  }
};

struct NetworkConfig {
  int id = 0;
  std::vector<ConfigSymbol> symbols;  // one per convolution module
  double size_estimate = 0.0;         // parameter count after pruning
};

struct Subspace {
  std::vector<double> gamma;  // admissible nonzero rates
  int modules = 0;
  std::vector<NetworkConfig> configs;
};

// Text format: "gamma:" and "modules:" headers, then one network per line
// as comma-separated module:rate pairs.
Subspace parse_subspace(const std::string& text);
Subspace parse_subspace_file(const std::string& path);
std::string write_subspace(const Subspace& subspace);

// Uniform per-module rate sampling over gamma + {0}, deduplicated, then an
// evenly spaced pick over the size-sorted pool so sizes come out roughly
// flat.
Subspace sample_subspace(int modules, const std::vector<double>& gamma,
                         int count, std::uint64_t seed);

struct ExplorationObjective {
  double full_accuracy = 0.0;
  double alpha = 0.0;  // allowed drop; negative demands improvement
  double threshold() const { return full_accuracy - alpha; }
};

using Evaluator = std::function<double(const NetworkConfig&)>;

struct ExploreLogRow {
  int config_id = 0;
  double size = 0.0;
  double accuracy = 0.0;
  double cumulative_time_s = 0.0;
};

struct ExploreResult {
  bool found = false;
  NetworkConfig best;
  int evaluated = 0;
  std::vector<ExploreLogRow> log;
};

// Evaluates configs in ascending size order and stops at the first one
// meeting the accuracy threshold. With workers > 1, evaluation proceeds in
// waves of `workers` configs, so the evaluated count rounds up to a wave
// multiple; the winner is still the smallest passing config. Evaluator
// exceptions surface as EvaluatorError naming the config.
ExploreResult plan_exploration(const std::vector<NetworkConfig>& configs,
                               const ExplorationObjective& objective,
                               const Evaluator& evaluator, int workers = 1);

std::string explore_log_csv(const ExploreResult& result);

struct SpeedupResult {
  double speedup = 0.0;
  double overhead_fraction = 0.0;
};

// speedup = base/comp; overhead = block/comp. DomainError on nonpositive
// times or block time exceeding total comp time.
SpeedupResult compute_speedup(double base_time, double comp_time,
                              double block_time = 0.0);

}  // namespace ppct::plan
