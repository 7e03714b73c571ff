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

#include "ppct/explore.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace ppct::plan {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

Subspace parse_subspace(const std::string& text) {
  Subspace sub;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int next_id = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("gamma:", 0) == 0) {
      for (const std::string& r : split(t.substr(6), ','))
        sub.gamma.push_back(std::stod(trim(r)));
      std::sort(sub.gamma.begin(), sub.gamma.end());
      continue;
    }
    if (t.rfind("modules:", 0) == 0) {
      sub.modules = std::stoi(trim(t.substr(8)));
      continue;
    }
    NetworkConfig cfg;
    cfg.id = next_id++;
    for (const std::string& pair : split(t, ',')) {
      std::vector<std::string> kv = split(trim(pair), ':');
      if (kv.size() != 2)
        throw SemanticError("subspace line " + std::to_string(lineno) +
                            ": expected module:rate pairs");
      ConfigSymbol s;
      s.module = std::stoi(trim(kv[0]));
      s.rate = std::stod(trim(kv[1]));
      if (s.rate != 0.0 &&
          std::none_of(sub.gamma.begin(), sub.gamma.end(),
                       [&](double g) { return std::abs(g - s.rate) < 1e-9; }))
        throw SemanticError("subspace line " + std::to_string(lineno) +
                            ": rate " + kv[1] + " not in gamma");
      cfg.symbols.push_back(s);
    }
    if (sub.modules == 0) sub.modules = static_cast<int>(cfg.symbols.size());
    if (static_cast<int>(cfg.symbols.size()) != sub.modules)
      throw SemanticError("subspace line " + std::to_string(lineno) +
                          ": expected " + std::to_string(sub.modules) +
                          " modules");
    sub.configs.push_back(std::move(cfg));
  }
  if (sub.configs.empty()) throw SemanticError("subspace file has no configs");
  return sub;
}

Subspace parse_subspace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_subspace(ss.str());
}

std::string write_subspace(const Subspace& sub) {
  std::ostringstream os;
  os << "gamma:";
  for (std::size_t i = 0; i < sub.gamma.size(); ++i)
    os << (i ? "," : " ") << sub.gamma[i];
  os << "\n";
  os << "modules: " << sub.modules << "\n";
  for (const NetworkConfig& c : sub.configs) {
    for (std::size_t i = 0; i < c.symbols.size(); ++i) {
      if (i) os << ",";
      os << c.symbols[i].module << ":" << c.symbols[i].rate;
    }
    os << "\n";
  }
  return os.str();
}

Subspace sample_subspace(int modules, const std::vector<double>& gamma,
                         int count, std::uint64_t seed) {
  if (modules < 1 || count < 1)
    throw DomainError("sample_subspace needs modules >= 1 and count >= 1");
  std::vector<double> rates = gamma;
  std::sort(rates.begin(), rates.end());
  rates.insert(rates.begin(), 0.0);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, rates.size() - 1);
  std::vector<std::vector<std::size_t>> pool;
  std::vector<std::vector<std::size_t>> seen;
  int attempts = 0;
  int want = count * 8;
  while (static_cast<int>(pool.size()) < want && attempts < want * 64) {
    ++attempts;
    std::vector<std::size_t> cfg(static_cast<std::size_t>(modules));
    for (auto& r : cfg) r = pick(rng);
    if (std::find(pool.begin(), pool.end(), cfg) != pool.end()) continue;
    pool.push_back(std::move(cfg));
  }
  if (static_cast<int>(pool.size()) < count)
    throw DomainError("rate space too small for the requested sample count");

  // Proxy size: kept fraction summed over modules. Sorting then striding
  // flattens the size distribution of the kept sample.
  auto proxy = [&](const std::vector<std::size_t>& cfg) {
    double s = 0.0;
    for (std::size_t r : cfg) s += 1.0 - rates[r];
    return s;
  };
  std::stable_sort(pool.begin(), pool.end(),
                   [&](const auto& a, const auto& b) {
                     return proxy(a) < proxy(b);
                   });
  (void)seen;

  Subspace sub;
  sub.gamma = gamma;
  std::sort(sub.gamma.begin(), sub.gamma.end());
  sub.modules = modules;
  for (int i = 0; i < count; ++i) {
    // floor(i * P / C) is strictly increasing when P >= C, so picks stay
    // distinct.
    std::size_t at = static_cast<std::size_t>(i) * pool.size() /
                     static_cast<std::size_t>(count);
    NetworkConfig cfg;
    cfg.id = i;
    for (int m = 0; m < modules; ++m)
      cfg.symbols.push_back(
          {m, rates[pool[at][static_cast<std::size_t>(m)]]});
    sub.configs.push_back(std::move(cfg));
  }
  return sub;
}

ExploreResult plan_exploration(const std::vector<NetworkConfig>& configs,
                               const ExplorationObjective& objective,
                               const Evaluator& evaluator, int workers) {
  if (workers < 1) throw DomainError("worker count must be >= 1");
  std::vector<NetworkConfig> order = configs;
  std::stable_sort(order.begin(), order.end(),
                   [](const NetworkConfig& a, const NetworkConfig& b) {
                     if (a.size_estimate != b.size_estimate)
                       return a.size_estimate < b.size_estimate;
                     return a.id < b.id;
                   });

  ExploreResult result;
  auto t0 = std::chrono::steady_clock::now();
  double thr = objective.threshold();

  std::size_t next = 0;
  while (next < order.size()) {
    std::size_t wave = std::min<std::size_t>(
        static_cast<std::size_t>(workers), order.size() - next);
    std::vector<double> accuracy(wave, 0.0);
    std::vector<std::string> failure(wave);

    if (wave == 1) {
      try {
        accuracy[0] = evaluator(order[next]);
      } catch (const std::exception& e) {
        throw EvaluatorError(order[next].id, e.what());
      }
    } else {
      std::vector<std::thread> pool;
      for (std::size_t i = 0; i < wave; ++i)
        pool.emplace_back([&, i] {
          try {
            accuracy[i] = evaluator(order[next + i]);
          } catch (const std::exception& e) {
            failure[i] = e.what();
          }
        });
      for (std::thread& th : pool) th.join();
      for (std::size_t i = 0; i < wave; ++i)
        if (!failure[i].empty())
          throw EvaluatorError(order[next + i].id, failure[i]);
    }

    // Log the whole wave in size order; stopping still honors that order.
    int winner = -1;
    for (std::size_t i = 0; i < wave; ++i) {
      auto now = std::chrono::steady_clock::now();
      result.log.push_back(
          {order[next + i].id, order[next + i].size_estimate, accuracy[i],
           std::chrono::duration<double>(now - t0).count()});
      ++result.evaluated;
      if (winner < 0 && accuracy[i] >= thr) winner = static_cast<int>(i);
    }
    if (winner >= 0) {
      result.found = true;
      result.best = order[next + static_cast<std::size_t>(winner)];
      return result;
    }
    next += wave;
  }
  return result;
}

std::string explore_log_csv(const ExploreResult& result) {
  std::ostringstream os;
  os << "config_id,size,accuracy,cumulative_time_s\n";
  for (const ExploreLogRow& row : result.log) {
    char acc[32], tm[32];
    std::snprintf(acc, sizeof(acc), "%.6f", row.accuracy);
    std::snprintf(tm, sizeof(tm), "%.3f", row.cumulative_time_s);
    os << row.config_id << "," << row.size << "," << acc << "," << tm << "\n";
  }
  return os.str();
}

SpeedupResult compute_speedup(double base_time, double comp_time,
                              double block_time) {
  if (base_time <= 0.0 || comp_time <= 0.0)
    throw DomainError("times must be positive");
  if (block_time < 0.0 || block_time > comp_time)
    throw DomainError("block time must lie within [0, comp_time]");
  return {base_time / comp_time, block_time / comp_time};
}

}  // namespace ppct::plan
