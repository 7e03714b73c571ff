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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ppct/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ppct_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const {
    return (sub.empty() ? path : path / sub).string();
  }
};

int cli(std::initializer_list<std::string> args) {
  return ppct::cli::run_cli(std::vector<std::string>(args));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// gen-demo assets shared across cases; teacher training skipped for speed.
struct DemoAssets {
  TempDir dir{"demo"};
  DemoAssets() {
    REQUIRE(cli({"gen-demo", "--out", dir.str(), "--seed", "7",
                 "--no-train-teacher"}) == 0);
  }
  std::string model() const { return dir.str("model.prototxt"); }
  std::string weights() const { return dir.str("weights.cpie"); }
  std::string input() const { return dir.str("input.cpie"); }
  std::string subspace() const { return dir.str("subspace.txt"); }
};

DemoAssets& demo() {
  static DemoAssets assets;
  return assets;
}

}  // namespace

TEST_CASE("prune smoke: emits pruned weights and a report") {
  TempDir out("prune");
  int rc = cli({"prune", "--model", demo().model(), "--weights",
                demo().weights(), "--k", "4", "--p", "8", "--rate", "0.5",
                "--out", out.str()});
  CHECK(rc == 0);
  CHECK(fs::exists(out.str("pruned.cpie")));
  CHECK(fs::exists(out.str("prune_report.txt")));
  std::string report = slurp(out.str("prune_report.txt"));
  CHECK(report.find("layer conv1") != std::string::npos);
}

TEST_CASE("prune is byte-reproducible for identical flags") {
  TempDir a("prune_a"), b("prune_b");
  REQUIRE(cli({"prune", "--model", demo().model(), "--weights",
               demo().weights(), "--rate", "0.3", "--out", a.str()}) == 0);
  REQUIRE(cli({"prune", "--model", demo().model(), "--weights",
               demo().weights(), "--rate", "0.3", "--out", b.str()}) == 0);
  CHECK(slurp(a.str("pruned.cpie")) == slurp(b.str("pruned.cpie")));
  CHECK(slurp(a.str("prune_report.txt")) == slurp(b.str("prune_report.txt")));
}

TEST_CASE("compress/run pipeline executes a layer") {
  TempDir out("pipe");
  REQUIRE(cli({"compress", "--model", demo().model(), "--weights",
               demo().weights(), "--rate", "0.25", "--out", out.str()}) == 0);
  CHECK(fs::exists(out.str("conv1.fkw")));
  CHECK(slurp(out.str("sizes.csv")).find("layer,fkw_bytes,csr_bytes,ratio") ==
        0);

  TempDir run("run");
  int rc = cli({"run", "--model", demo().model(), "--layer", "conv1",
                "--fkw", out.str("conv1.fkw"), "--input", demo().input(),
                "--out", run.str()});
  CHECK(rc == 0);
  CHECK(fs::exists(run.str("output.cpie")));
  CHECK(fs::exists(run.str("plan.txt")));
  std::string stats = slurp(run.str("stats.csv"));
  CHECK(stats.find("plan,loads,macs,group_switches,time_ms") == 0);
}

TEST_CASE("run outputs are reproducible modulo the timing column") {
  TempDir cm("cm2");
  REQUIRE(cli({"compress", "--model", demo().model(), "--weights",
               demo().weights(), "--rate", "0.25", "--out", cm.str()}) == 0);
  TempDir r1("run1"), r2("run2");
  REQUIRE(cli({"run", "--model", demo().model(), "--layer", "conv1", "--fkw",
               cm.str("conv1.fkw"), "--input", demo().input(), "--out",
               r1.str()}) == 0);
  REQUIRE(cli({"run", "--model", demo().model(), "--layer", "conv1", "--fkw",
               cm.str("conv1.fkw"), "--input", demo().input(), "--out",
               r2.str()}) == 0);
  CHECK(slurp(r1.str("output.cpie")) == slurp(r2.str("output.cpie")));
  CHECK(slurp(r1.str("plan.txt")) == slurp(r2.str("plan.txt")));
}

TEST_CASE("tune writes the best config and a full trace") {
  TempDir out("tune");
  int rc = cli({"tune", "--model", demo().model(), "--weights",
                demo().weights(), "--layer", "conv5", "--rate", "0.5",
                "--budget", "6", "--repeats", "2", "--out", out.str()});
  CHECK(rc == 0);
  std::string trace = slurp(out.str("trace.csv"));
  CHECK(trace.find("tile_h,tile_w,order,unroll,median_ms,loads,macs") == 0);
  int lines = -1;  // don't count the header
  for (char c : trace)
    if (c == '\n') ++lines;
  CHECK(lines == 6);
  CHECK(fs::exists(out.str("best_config.txt")));
}

TEST_CASE("bench emits the five-column comparison CSV") {
  TempDir out("bench");
  int rc = cli({"bench", "--model", demo().model(), "--weights",
                demo().weights(), "--layer", "conv3", "--rate", "0.25",
                "--repeats", "2", "--out", out.str()});
  CHECK(rc == 0);
  std::string csv = slurp(out.str("bench.csv"));
  CHECK(csv.find("plan,time_ms_median,loads,macs,group_switches") == 0);
  CHECK(csv.find("pattern,") != std::string::npos);
  CHECK(csv.find("csr,") != std::string::npos);
  CHECK(csv.find("dense,") != std::string::npos);
}

TEST_CASE("plan writes grammar, dag, blocks, composites, and savings") {
  TempDir out("plan");
  int rc = cli({"plan", "--subspace", demo().subspace(), "--out", out.str()});
  CHECK(rc == 0);
  for (const char* f : {"grammar.txt", "dag.txt", "blocks.txt",
                        "composite.txt", "savings.txt"})
    CHECK(fs::exists(out.str(f)));
  CHECK(slurp(out.str("grammar.txt")).find("r0 ->") == 0);
}

TEST_CASE("explore with a mock evaluator finds the smallest passing config") {
  TempDir out("explore");
  // sizes by kept-fraction proxy: id0 (rate .7) < id1 (.5) < id2 (.3)
  write_file(out.str("s.txt"),
             "gamma: 0.3,0.5,0.7\nmodules: 1\n0:0.7\n0:0.5\n0:0.3\n");
  write_file(out.str("acc.csv"),
             "id,accuracy\nfull,0.94\n0,0.90\n1,0.95\n2,0.97\n");
  int rc = cli({"explore", "--subspace", out.str("s.txt"), "--alpha", "0.0",
                "--evaluator", "mock:" + out.str("acc.csv"), "--out",
                out.str("got")});
  CHECK(rc == 0);
  std::string winner = slurp(out.str("got") + "/winner.txt");
  CHECK(winner.find("config 1 ") == winner.find("config "));
  CHECK(winner.find("after 2 evaluations") != std::string::npos);
  std::string log = slurp(out.str("got") + "/log.csv");
  CHECK(log.find("config_id,size,accuracy,cumulative_time_s") == 0);
}

TEST_CASE("missing files exit 2 with a greppable ERROR line") {
  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  int rc = cli({"prune", "--model", "/nonexistent/m.prototxt", "--weights",
                "/nonexistent/w.cpie", "--out", "/tmp/ppct_nope"});
  std::cerr.rdbuf(old);
  CHECK(rc == 2);
  CHECK(captured.str().rfind("ERROR:", 0) == 0);
  CHECK(captured.str().find("/nonexistent/m.prototxt") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  int rc = cli({"prune", "--bogus-flag", "x"});
  std::cerr.rdbuf(old);
  CHECK(rc == 1);
  CHECK(captured.str().rfind("ERROR:", 0) == 0);
}

TEST_CASE("--config expands a structured-text flag file") {
  TempDir out("cfg");
  write_file(out.str("flags.cfg"), "--k 4\n--p 8\n--rate 0.5\n");
  int rc = cli({"prune", "--model", demo().model(), "--weights",
                demo().weights(), "--config", out.str("flags.cfg"), "--out",
                out.str("got")});
  CHECK(rc == 0);
  TempDir ref("cfg_ref");
  REQUIRE(cli({"prune", "--model", demo().model(), "--weights",
               demo().weights(), "--k", "4", "--p", "8", "--rate", "0.5",
               "--out", ref.str()}) == 0);
  CHECK(slurp(out.str("got") + "/pruned.cpie") == slurp(ref.str("pruned.cpie")));
}

TEST_CASE("corrupt weight files exit 2") {
  TempDir out("corrupt");
  write_file(out.str("bad.cpie"), "not a container");
  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  int rc = cli({"prune", "--model", demo().model(), "--weights",
                out.str("bad.cpie"), "--out", out.str("x")});
  std::cerr.rdbuf(old);
  CHECK(rc == 2);
  CHECK(captured.str().rfind("ERROR:", 0) == 0);
}
