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

#include "ppct/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ppct/autotune.hpp"
#include "ppct/blocks.hpp"
#include "ppct/distill.hpp"
#include "ppct/execute.hpp"
#include "ppct/explore.hpp"
#include "ppct/fkw.hpp"
#include "ppct/lr.hpp"
#include "ppct/prototxt.hpp"
#include "ppct/sequitur.hpp"
#include "ppct/train.hpp"
#include "ppct/weights.hpp"

namespace fs = std::filesystem;

namespace ppct::cli {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed to write '" + path.string() + "'");
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path);
}

engine::LayerGeometry geometry_for_layer(const ir::ModelSpec& model,
                                         const std::string& layer_name) {
  const ir::LayerSpec* layer = model.find_layer(layer_name);
  if (!layer) throw DomainError("model has no layer '" + layer_name + "'");
  if (layer->kind != ir::LayerKind::kConvolution)
    throw DomainError("layer '" + layer_name + "' is not a convolution");
  const ir::LayerSpec* producer = model.find_layer(layer->bottom);
  if (!producer) {
    // bottom may name a top rather than a layer
    for (const ir::LayerSpec& l : model.layers)
      if (l.top == layer->bottom) producer = &l;
  }
  if (!producer)
    throw DomainError("cannot locate the input of layer '" + layer_name + "'");
  engine::LayerGeometry g;
  g.channels = layer->conv.channels;
  g.in_h = producer->out_h;
  g.in_w = producer->out_w;
  g.kernel_h = layer->conv.kernel_h;
  g.kernel_w = layer->conv.kernel_w;
  g.stride = layer->conv.stride;
  g.pad = layer->conv.pad;
  g.filters = layer->conv.num_output;
  return g;
}

struct PrunedLayer {
  std::string name;
  TensorF pruned;
  prune::PatternLibrary library;
  prune::PatternAssignment assignment;
  prune::PruneSummary summary;
};

std::vector<PrunedLayer> prune_all_layers(const ir::ModelSpec& model,
                                          const ir::WeightStore& store,
                                          int k, int p, double rate) {
  std::vector<PrunedLayer> out;
  for (int li : model.conv_layer_indices()) {
    const ir::LayerSpec& spec = model.layers[static_cast<std::size_t>(li)];
    PrunedLayer pl;
    pl.name = spec.name;
    const TensorF& w = store.at(spec.name);
    pl.library = prune::design_pattern_library(w, k, p);
    pl.assignment = prune::assign_kernel_patterns(w, pl.library);
    prune::apply_connectivity(pl.assignment,
                              prune::connectivity_prune(w, rate));
    auto [pruned, summary] = prune::apply_pruning(w, pl.assignment, pl.library);
    pl.pruned = std::move(pruned);
    pl.summary = std::move(summary);
    out.push_back(std::move(pl));
  }
  if (out.empty()) throw DomainError("model has no convolution layers");
  return out;
}

TensorF random_input(const engine::LayerGeometry& g, std::uint64_t seed) {
  TensorF x({g.channels, g.in_h, g.in_w});
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = dist(rng);
  return x;
}

TensorF load_input_tensor(const std::string& path) {
  ir::WeightStore store = ir::load_weights_file(path);
  const TensorF* t = store.find("input");
  if (!t) throw FormatError(0, "input file has no tensor named 'input'");
  if (t->rank() != 3)
    throw DimMismatchError("input tensor must be rank-3 [C,H,W]");
  return *t;
}

// ---- gen-demo -------------------------------------------------------------

const char* kDemoModel = R"(name: "demo"
layer {
  name: "data"
  type: "Input"
  top: "data"
  input_param { dim: 1 dim: 8 dim: 8 }
}
layer {
  name: "stem"
  type: "Convolution"
  bottom: "data"
  top: "stem"
  convolution_param { num_output: 8 kernel_size: 3 stride: 1 pad: 1 }
}
layer { name: "stem_relu" type: "ReLU" bottom: "stem" top: "stem_relu" }
layer {
  name: "conv1"
  type: "Convolution"
  bottom: "stem_relu"
  top: "conv1"
  convolution_param { num_output: 12 kernel_size: 3 stride: 1 pad: 1 }
}
layer { name: "relu1" type: "ReLU" bottom: "conv1" top: "relu1" }
layer {
  name: "conv2"
  type: "Convolution"
  bottom: "relu1"
  top: "conv2"
  convolution_param { num_output: 12 kernel_size: 3 stride: 1 pad: 1 }
}
layer { name: "relu2" type: "ReLU" bottom: "conv2" top: "relu2" }
layer {
  name: "conv3"
  type: "Convolution"
  bottom: "relu2"
  top: "conv3"
  convolution_param { num_output: 12 kernel_size: 3 stride: 1 pad: 1 }
}
layer { name: "relu3" type: "ReLU" bottom: "conv3" top: "relu3" }
layer {
  name: "conv4"
  type: "Convolution"
  bottom: "relu3"
  top: "conv4"
  convolution_param { num_output: 12 kernel_size: 3 stride: 1 pad: 1 }
}
layer { name: "relu4" type: "ReLU" bottom: "conv4" top: "relu4" }
layer {
  name: "pool1"
  type: "Pooling"
  bottom: "relu4"
  top: "pool1"
  pooling_param { kernel_size: 2 stride: 2 }
}
layer {
  name: "conv5"
  type: "Convolution"
  bottom: "pool1"
  top: "conv5"
  convolution_param { num_output: 16 kernel_size: 3 stride: 1 pad: 1 }
}
layer { name: "relu5" type: "ReLU" bottom: "conv5" top: "relu5" }
layer {
  name: "conv6"
  type: "Convolution"
  bottom: "relu5"
  top: "conv6"
  convolution_param { num_output: 16 kernel_size: 3 stride: 1 pad: 1 }
}
layer { name: "relu6" type: "ReLU" bottom: "conv6" top: "relu6" }
layer {
  name: "pool2"
  type: "Pooling"
  bottom: "relu6"
  top: "pool2"
  pooling_param { kernel_size: 2 stride: 2 }
}
layer {
  name: "fc"
  type: "InnerProduct"
  bottom: "pool2"
  top: "fc"
  inner_product_param { num_output: 4 }
}
module { name: "m0" from: "conv1" to: "relu2" }
module { name: "m1" from: "conv3" to: "pool1" }
module { name: "m2" from: "conv5" to: "pool2" }
)";

ir::WeightStore random_weights(const ir::ModelSpec& model,
                               std::uint64_t seed) {
  ir::WeightStore store;
  std::mt19937_64 rng(seed);
  for (const ir::LayerSpec& l : model.layers) {
    if (l.kind == ir::LayerKind::kConvolution) {
      long fan_in =
          static_cast<long>(l.conv.channels) * l.conv.kernel_h * l.conv.kernel_w;
      std::normal_distribution<float> dist(
          0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
      TensorF w({l.conv.num_output, l.conv.channels, l.conv.kernel_h,
                 l.conv.kernel_w});
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = dist(rng);
      store.set(l.name, std::move(w));
    } else if (l.kind == ir::LayerKind::kFullyConnected) {
      std::normal_distribution<float> dist(
          0.0f, std::sqrt(2.0f / static_cast<float>(l.fc.inputs)));
      TensorF w({l.fc.num_output, l.fc.inputs});
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = dist(rng);
      store.set(l.name, std::move(w));
    }
  }
  return store;
}

int cmd_gen_demo(const std::string& out_dir, std::uint64_t seed,
                 bool train_teacher, int teacher_epochs) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  write_text(dir / "model.prototxt", kDemoModel);
  ir::ModelSpec model = ir::parse_prototxt(kDemoModel);

  ir::WeightStore store = random_weights(model, seed);
  if (train_teacher) {
    train::Dataset tr = train::make_blob_dataset(512, 8, 8, seed + 1);
    train::Dataset te = train::make_blob_dataset(256, 8, 8, seed + 2);
    train::ToyNet net = train::ToyNet::from_model(model, store);
    train::TrainOptions opts;
    opts.epochs = teacher_epochs;
    opts.lr = 0.1;
    opts.seed = seed;
    opts.accuracy_threshold = 0.95;
    train::TrainReport rep = train::train(net, tr, te, opts);
    store = net.to_weights();
    std::ostringstream os;
    os << "teacher accuracy: "
       << (rep.epoch_accuracy.empty() ? 0.0 : rep.epoch_accuracy.back())
       << "\n";
    write_text(dir / "teacher.txt", os.str());
    write_text(dir / "teacher_train.csv", train::report_csv(rep));
  }
  ir::save_weights_file(store, (dir / "weights.cpie").string());

  engine::LayerGeometry g = geometry_for_layer(model, "conv1");
  ir::WeightStore input;
  input.set("input", random_input(g, seed + 3));
  ir::save_weights_file(input, (dir / "input.cpie").string());

  plan::Subspace sub = plan::sample_subspace(
      static_cast<int>(model.modules.size()), {0.3, 0.5, 0.7}, 16, seed);
  prune::PruneConfig pc;
  for (plan::NetworkConfig& c : sub.configs)
    c.size_estimate =
        static_cast<double>(train::estimate_config_size(model, c, pc));
  write_text(dir / "subspace.txt", plan::write_subspace(sub));

  // Mock accuracy table: larger models score higher, with seeded jitter.
  std::ostringstream acc;
  acc << "id,accuracy\nfull,0.970\n";
  std::mt19937_64 rng(seed + 4);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  double max_size = 1.0;
  for (const plan::NetworkConfig& c : sub.configs)
    max_size = std::max(max_size, c.size_estimate);
  for (const plan::NetworkConfig& c : sub.configs) {
    double a = 0.80 + 0.15 * (c.size_estimate / max_size) + jitter(rng);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", a);
    acc << c.id << "," << buf << "\n";
  }
  write_text(dir / "acc.csv", acc.str());
  std::cout << "demo assets written to " << out_dir << "\n";
  return 0;
}

// ---- prune / compress ------------------------------------------------------

int cmd_prune(const std::string& model_path, const std::string& weights_path,
              int k, int p, double rate, const std::string& out_dir) {
  require_file(model_path);
  require_file(weights_path);
  ir::ModelSpec model = ir::parse_prototxt_file(model_path);
  ir::WeightStore store = ir::load_weights_file(weights_path);
  std::vector<ir::Violation> violations = validate_model(model, store);
  if (!violations.empty())
    throw ConsistencyError("model/weights mismatch: " + violations[0].layer +
                           ": " + violations[0].message);

  std::vector<PrunedLayer> layers = prune_all_layers(model, store, k, p, rate);
  fs::create_directories(out_dir);
  ir::WeightStore pruned_store;
  for (const auto& [name, tensor] : store.tensors()) pruned_store.set(name, tensor);
  std::ostringstream report;
  for (const PrunedLayer& pl : layers) {
    pruned_store.set(pl.name, pl.pruned);
    report << prune::prune_report(pl.name, pl.library, pl.assignment,
                                  pl.summary);
  }
  ir::save_weights_file(pruned_store,
                        (fs::path(out_dir) / "pruned.cpie").string());
  write_text(fs::path(out_dir) / "prune_report.txt", report.str());
  std::cout << "pruned " << layers.size() << " conv layers\n";
  return 0;
}

int cmd_compress(const std::string& model_path,
                 const std::string& weights_path, int k, int p, double rate,
                 const std::string& out_dir) {
  require_file(model_path);
  require_file(weights_path);
  ir::ModelSpec model = ir::parse_prototxt_file(model_path);
  ir::WeightStore store = ir::load_weights_file(weights_path);
  std::vector<PrunedLayer> layers = prune_all_layers(model, store, k, p, rate);
  fs::create_directories(out_dir);
  std::vector<std::pair<std::string, fkw::SizeComparison>> sizes;
  for (const PrunedLayer& pl : layers) {
    engine::ReorderPlan reorder = engine::filter_kernel_reorder(pl.assignment);
    fkw::CompressedLayer enc =
        fkw::compress_fkw(pl.pruned, pl.assignment, pl.library, reorder.perm);
    fkw::save_fkw_file(enc,
                       (fs::path(out_dir) / (pl.name + ".fkw")).string());
    sizes.emplace_back(pl.name,
                       fkw::compare_sizes(pl.pruned, pl.assignment, pl.library));
  }
  write_text(fs::path(out_dir) / "sizes.csv", fkw::size_report_csv(sizes));
  std::cout << "compressed " << layers.size() << " layers\n";
  return 0;
}

// ---- run / tune / bench -----------------------------------------------------

engine::TuneConfig tune_from_flags(int tile_h, int tile_w,
                                   const std::string& order, int unroll) {
  engine::TuneConfig t;
  t.tile_h = tile_h;
  t.tile_w = tile_w;
  t.unroll = unroll;
  if (order == "crw")
    t.order = engine::LoopOrder::kChannelRowCol;
  else if (order == "rcw")
    t.order = engine::LoopOrder::kRowChannelCol;
  else if (order == "rwc")
    t.order = engine::LoopOrder::kRowColChannel;
  else if (order == "wrc")
    t.order = engine::LoopOrder::kColRowChannel;
  else
    throw DomainError("unknown loop order '" + order + "'");
  return t;
}

int cmd_run(const std::string& model_path, const std::string& layer,
            const std::string& fkw_path, const std::string& input_path,
            const std::string& out_dir, const engine::TuneConfig& tune,
            bool lre, int threads) {
  require_file(model_path);
  require_file(fkw_path);
  require_file(input_path);
  ir::ModelSpec model = ir::parse_prototxt_file(model_path);
  engine::LayerGeometry g = geometry_for_layer(model, layer);
  fkw::DecodedLayer dec = fkw::load_fkw_file(fkw_path);
  if (dec.tensor.dim(0) != g.filters || dec.tensor.dim(1) != g.channels)
    throw DimMismatchError("compressed layer does not match '" + layer + "'");
  TensorF input = load_input_tensor(input_path);

  engine::ReorderPlan reorder = engine::filter_kernel_reorder(dec.assignment);
  engine::ExecutionPlan plan = engine::build_execution_plan(
      g, dec.assignment, dec.library, reorder, tune, lre);
  engine::ExecuteResult result =
      engine::execute_plan(plan, dec.tensor, input, threads);

  fs::create_directories(out_dir);
  ir::WeightStore out_store;
  out_store.set("output", result.output);
  ir::save_weights_file(out_store, (fs::path(out_dir) / "output.cpie").string());
  std::ostringstream stats;
  stats << "plan,loads,macs,group_switches,time_ms\n";
  char tbuf[32];
  std::snprintf(tbuf, sizeof(tbuf), "%.6f", result.stats.time_ms);
  stats << "pattern," << result.stats.loads << "," << result.stats.macs << ","
        << result.stats.group_switches << "," << tbuf << "\n";
  write_text(fs::path(out_dir) / "stats.csv", stats.str());
  write_text(fs::path(out_dir) / "plan.txt", engine::dump_plan(plan));
  std::cout << "executed layer " << layer << "\n";
  return 0;
}

int cmd_tune(const std::string& model_path, const std::string& weights_path,
             const std::string& layer, int k, int p, double rate, int budget,
             int repeats, const std::string& input_path, std::uint64_t seed,
             const std::string& out_dir) {
  require_file(model_path);
  require_file(weights_path);
  ir::ModelSpec model = ir::parse_prototxt_file(model_path);
  ir::WeightStore store = ir::load_weights_file(weights_path);
  engine::LayerGeometry g = geometry_for_layer(model, layer);
  const TensorF& w = store.at(layer);
  prune::PatternLibrary lib = prune::design_pattern_library(w, k, p);
  prune::PatternAssignment assignment = prune::assign_kernel_patterns(w, lib);
  prune::apply_connectivity(assignment, prune::connectivity_prune(w, rate));
  auto [pruned, summary] = prune::apply_pruning(w, assignment, lib);
  (void)summary;
  TensorF input = input_path.empty() ? random_input(g, seed)
                                     : load_input_tensor(input_path);

  engine::TuneResult result =
      engine::auto_tune(g, assignment, lib, pruned, input, budget, repeats);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "best_config.txt",
             result.best.to_string() + "\n");
  write_text(fs::path(out_dir) / "trace.csv", engine::tune_trace_csv(result));
  std::cout << "best: " << result.best.to_string() << "\n";
  return 0;
}

int cmd_bench(const std::string& model_path, const std::string& weights_path,
              const std::string& layer, int k, int p, double rate,
              int repeats, const std::string& input_path, std::uint64_t seed,
              const std::string& out_dir) {
  require_file(model_path);
  require_file(weights_path);
  ir::ModelSpec model = ir::parse_prototxt_file(model_path);
  ir::WeightStore store = ir::load_weights_file(weights_path);
  engine::LayerGeometry g = geometry_for_layer(model, layer);
  const TensorF& w = store.at(layer);
  prune::PatternLibrary lib = prune::design_pattern_library(w, k, p);
  prune::PatternAssignment assignment = prune::assign_kernel_patterns(w, lib);
  prune::apply_connectivity(assignment, prune::connectivity_prune(w, rate));
  auto [pruned, summary] = prune::apply_pruning(w, assignment, lib);
  (void)summary;
  TensorF input = input_path.empty() ? random_input(g, seed)
                                     : load_input_tensor(input_path);
  std::vector<engine::BenchRow> rows =
      engine::bench_compare(g, pruned, assignment, lib, input, repeats);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "bench.csv", engine::bench_csv(rows));
  std::cout << engine::bench_csv(rows);
  return 0;
}

// ---- plan / pretrain / explore ----------------------------------------------

int cmd_plan(const std::string& subspace_path, double beta,
             double pretrain_factor, const std::string& out_dir) {
  require_file(subspace_path);
  plan::Subspace sub = plan::parse_subspace_file(subspace_path);
  plan::ConfigGrammar cg = plan::build_config_grammar(sub.configs);
  plan::BlockIdResult blocks = plan::identify_tuning_blocks(cg, sub.configs);
  std::vector<plan::CompositeVector> tiles =
      plan::composite_vectors(sub.configs, blocks.selected);
  plan::CostModel cost;
  cost.beta = beta;
  cost.pretrain_factor = pretrain_factor;
  plan::SavingsReport savings =
      plan::savings_report(sub.configs, blocks.selected, blocks.candidates,
                           cost);

  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  write_text(dir / "grammar.txt", cg.grammar.to_string());
  write_text(dir / "dag.txt", blocks.report);
  std::ostringstream bs;
  for (const plan::TuningBlock& b : blocks.selected) {
    bs << b.key() << " rule=r" << b.rule_id << " occ=" << b.total_occurrences
       << " nets=" << b.network_frequency << "\n";
  }
  write_text(dir / "blocks.txt", bs.str());
  write_text(dir / "composite.txt",
             plan::composite_report(sub.configs, tiles, blocks.selected));
  write_text(dir / "savings.txt", savings.text);
  std::cout << "selected " << blocks.selected.size() << " tuning blocks\n";
  return 0;
}

int cmd_pretrain(const std::string& model_path,
                 const std::string& weights_path,
                 const std::string& subspace_path, int epochs, double lr,
                 std::uint64_t seed, const std::string& out_dir) {
  require_file(model_path);
  require_file(weights_path);
  require_file(subspace_path);
  ir::ModelSpec model = ir::parse_prototxt_file(model_path);
  ir::WeightStore store = ir::load_weights_file(weights_path);
  plan::Subspace sub = plan::parse_subspace_file(subspace_path);
  plan::ConfigGrammar cg = plan::build_config_grammar(sub.configs);
  plan::BlockIdResult blocks = plan::identify_tuning_blocks(cg, sub.configs);
  if (blocks.selected.empty()) {
    std::cout << "no tuning blocks selected; nothing to pre-train\n";
    fs::create_directories(out_dir);
    return 0;
  }

  train::ToyNet teacher = train::ToyNet::from_model(model, store);
  prune::PruneConfig pc;
  train::TeacherStudentGraph graph =
      train::make_teacher_student(model, teacher, blocks.selected, pc);
  train::Dataset ds = train::make_blob_dataset(512, model.input_h,
                                               model.input_w, seed + 1);
  train::PretrainOptions opts;
  opts.epochs = epochs;
  opts.lr = lr;
  opts.seed = seed;
  train::PretrainReport report = train::pretrain_blocks(graph, ds, opts);

  fs::create_directories(out_dir);
  fs::path blocks_dir = fs::path(out_dir) / "blocks";
  fs::create_directories(blocks_dir);
  std::ostringstream losses;
  losses << "block,epoch,mse\n";
  for (std::size_t s = 0; s < graph.students.size(); ++s) {
    const train::StudentBlock& student = graph.students[s];
    ir::save_weights_file(
        train::student_weights(student),
        (blocks_dir / (student.block.key() + ".cpie")).string());
    for (std::size_t e = 0; e < report.epoch_mse[s].size(); ++e) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.8f", report.epoch_mse[s][e]);
      losses << student.block.key() << "," << e + 1 << "," << buf << "\n";
    }
  }
  write_text(fs::path(out_dir) / "pretrain_losses.csv", losses.str());
  std::cout << "pre-trained " << graph.students.size() << " blocks\n";
  return 0;
}

std::map<std::string, double> load_mock_table(const std::string& path,
                                              double* full_acc) {
  require_file(path);
  std::ifstream in(path);
  std::map<std::string, double> table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "id,accuracy" || line[0] == '#') continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError(0, "bad mock accuracy row: " + line);
    std::string id = line.substr(0, comma);
    double acc = std::stod(line.substr(comma + 1));
    if (id == "full")
      *full_acc = acc;
    else
      table[id] = acc;
  }
  return table;
}

int cmd_explore(const std::string& subspace_path, double alpha,
                const std::string& evaluator_spec, int workers,
                const std::string& model_path,
                const std::string& weights_path,
                const std::string& blocks_dir, double full_acc_flag,
                std::uint64_t seed, int ft_epochs,
                const std::string& out_dir) {
  require_file(subspace_path);
  plan::Subspace sub = plan::parse_subspace_file(subspace_path);

  prune::PruneConfig pc;
  bool have_model = !model_path.empty();
  ir::ModelSpec model;
  ir::WeightStore store;
  if (have_model) {
    require_file(model_path);
    model = ir::parse_prototxt_file(model_path);
    for (plan::NetworkConfig& c : sub.configs)
      c.size_estimate =
          static_cast<double>(train::estimate_config_size(model, c, pc));
  } else {
    // Model-free proxy: kept fraction per module.
    for (plan::NetworkConfig& c : sub.configs) {
      double s = 0.0;
      for (const plan::ConfigSymbol& sym : c.symbols) s += 1.0 - sym.rate;
      c.size_estimate = s;
    }
  }

  plan::ExplorationObjective objective;
  objective.alpha = alpha;
  plan::Evaluator evaluator;

  if (evaluator_spec.rfind("mock:", 0) == 0) {
    double full = full_acc_flag;
    auto table = std::make_shared<std::map<std::string, double>>(
        load_mock_table(evaluator_spec.substr(5), &full));
    if (full < 0.0)
      throw DomainError("mock table lacks a 'full' row and --full-acc unset");
    objective.full_accuracy = full;
    evaluator = [table](const plan::NetworkConfig& c) {
      auto it = table->find(std::to_string(c.id));
      if (it == table->end())
        throw DomainError("mock table has no row for config " +
                          std::to_string(c.id));
      return it->second;
    };
  } else if (evaluator_spec == "trainer") {
    if (!have_model || weights_path.empty())
      throw DomainError("trainer evaluator needs --model and --weights");
    require_file(weights_path);
    store = ir::load_weights_file(weights_path);
    auto train_set = std::make_shared<train::Dataset>(
        train::make_blob_dataset(512, model.input_h, model.input_w, seed + 1));
    auto test_set = std::make_shared<train::Dataset>(
        train::make_blob_dataset(256, model.input_h, model.input_w, seed + 2));

    // Full-model accuracy defines the threshold.
    train::ToyNet full_net = train::ToyNet::from_model(model, store);
    objective.full_accuracy = full_acc_flag >= 0.0
                                  ? full_acc_flag
                                  : train::evaluate(full_net, *test_set);

    auto blocks = std::make_shared<std::vector<train::BlockWeights>>();
    if (!blocks_dir.empty()) {
      plan::ConfigGrammar cg = plan::build_config_grammar(sub.configs);
      plan::BlockIdResult ids = plan::identify_tuning_blocks(cg, sub.configs);
      for (const plan::TuningBlock& b : ids.selected) {
        fs::path f = fs::path(blocks_dir) / (b.key() + ".cpie");
        if (!fs::exists(f)) continue;
        blocks->push_back({b, ir::load_weights_file(f.string())});
      }
    }
    auto model_ptr = std::make_shared<ir::ModelSpec>(model);
    auto store_ptr = std::make_shared<ir::WeightStore>(store);
    int epochs = ft_epochs;
    std::uint64_t eval_seed = seed;
    evaluator = [=](const plan::NetworkConfig& c) {
      train::TrainOptions opts;
      opts.epochs = epochs;
      opts.lr = 0.05;
      opts.seed = eval_seed;
      train::ToyNet net;
      train::assemble_and_finetune(*model_ptr, *store_ptr, c, *blocks,
                                   *train_set, *test_set, opts, pc, &net);
      return train::evaluate(net, *test_set);
    };
  } else {
    throw DomainError("unknown evaluator '" + evaluator_spec +
                      "' (use mock:<file> or trainer)");
  }

  plan::ExploreResult result =
      plan::plan_exploration(sub.configs, objective, evaluator, workers);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "log.csv", plan::explore_log_csv(result));
  std::ostringstream winner;
  if (result.found) {
    winner << "config " << result.best.id << " size "
           << result.best.size_estimate << " after " << result.evaluated
           << " evaluations\n";
  } else {
    winner << "not found after " << result.evaluated << " evaluations\n";
  }
  write_text(fs::path(out_dir) / "winner.txt", winner.str());
  std::cout << winner.str();
  return 0;
}

}  // namespace

namespace {

// Expands "--config FILE" into the file's whitespace-separated tokens, in
// place, so flags given later on the command line still win.
std::vector<std::string> expand_config_files(std::vector<std::string> args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      const std::string& path = args[i + 1];
      require_file(path);
      std::ifstream in(path);
      std::string token;
      while (in >> token) out.push_back(token);
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"pattern-pruning compilation toolkit"};
  app.require_subcommand(1);

  // gen-demo
  std::string gd_out = "demo";
  std::uint64_t gd_seed = 42;
  bool gd_no_train = false;
  int gd_epochs = 40;
  CLI::App* gen = app.add_subcommand("gen-demo", "emit demo model/weights/subspace assets");
  gen->add_option("--out", gd_out, "output directory");
  gen->add_option("--seed", gd_seed, "rng seed");
  gen->add_flag("--no-train-teacher", gd_no_train, "keep random weights");
  gen->add_option("--teacher-epochs", gd_epochs, "teacher training epochs");

  // prune
  std::string pr_model, pr_weights, pr_out = "out";
  int pr_k = 4, pr_p = 8;
  double pr_rate = 0.0;
  CLI::App* pr = app.add_subcommand("prune", "pattern + connectivity pruning");
  pr->add_option("--model", pr_model, "prototxt model")->required();
  pr->add_option("--weights", pr_weights, ".cpie weights")->required();
  pr->add_option("--k", pr_k, "pattern arity");
  pr->add_option("--p", pr_p, "library size");
  pr->add_option("--rate", pr_rate, "connectivity rate [0,1)");
  pr->add_option("--out", pr_out, "output directory");

  // compress
  std::string cm_model, cm_weights, cm_out = "out";
  int cm_k = 4, cm_p = 8;
  double cm_rate = 0.0;
  CLI::App* cm = app.add_subcommand("compress", "emit .fkw containers + size CSV");
  cm->add_option("--model", cm_model)->required();
  cm->add_option("--weights", cm_weights)->required();
  cm->add_option("--k", cm_k);
  cm->add_option("--p", cm_p);
  cm->add_option("--rate", cm_rate);
  cm->add_option("--out", cm_out);

  // run
  std::string rn_model, rn_layer, rn_fkw, rn_input, rn_out = "out";
  int rn_tile_h = 1, rn_tile_w = 1, rn_unroll = 1, rn_threads = 1;
  std::string rn_order = "crw";
  bool rn_no_lre = false;
  CLI::App* rn = app.add_subcommand("run", "execute a compiled layer");
  rn->add_option("--model", rn_model)->required();
  rn->add_option("--layer", rn_layer)->required();
  rn->add_option("--fkw", rn_fkw)->required();
  rn->add_option("--input", rn_input)->required();
  rn->add_option("--out", rn_out);
  rn->add_option("--tile-h", rn_tile_h);
  rn->add_option("--tile-w", rn_tile_w);
  rn->add_option("--order", rn_order, "crw|rcw|rwc|wrc");
  rn->add_option("--unroll", rn_unroll);
  rn->add_option("--threads", rn_threads);
  rn->add_flag("--no-lre", rn_no_lre);

  // tune
  std::string tn_model, tn_weights, tn_layer, tn_input, tn_out = "out";
  int tn_k = 4, tn_p = 8, tn_budget = 16, tn_repeats = 5;
  double tn_rate = 0.0;
  std::uint64_t tn_seed = 42;
  CLI::App* tn = app.add_subcommand("tune", "auto-tune plan parameters");
  tn->add_option("--model", tn_model)->required();
  tn->add_option("--weights", tn_weights)->required();
  tn->add_option("--layer", tn_layer)->required();
  tn->add_option("--k", tn_k);
  tn->add_option("--p", tn_p);
  tn->add_option("--rate", tn_rate);
  tn->add_option("--budget", tn_budget);
  tn->add_option("--repeats", tn_repeats);
  tn->add_option("--input", tn_input);
  tn->add_option("--seed", tn_seed);
  tn->add_option("--out", tn_out);

  // bench
  std::string bn_model, bn_weights, bn_layer, bn_input, bn_out = "out";
  int bn_k = 4, bn_p = 8, bn_repeats = 5;
  double bn_rate = 0.0;
  std::uint64_t bn_seed = 42;
  CLI::App* bn = app.add_subcommand("bench", "pattern vs CSR vs dense comparison");
  bn->add_option("--model", bn_model)->required();
  bn->add_option("--weights", bn_weights)->required();
  bn->add_option("--layer", bn_layer)->required();
  bn->add_option("--k", bn_k);
  bn->add_option("--p", bn_p);
  bn->add_option("--rate", bn_rate);
  bn->add_option("--repeats", bn_repeats);
  bn->add_option("--input", bn_input);
  bn->add_option("--seed", bn_seed);
  bn->add_option("--out", bn_out);

  // plan
  std::string pl_subspace, pl_out = "out";
  double pl_beta = 0.5, pl_factor = 1.0;
  CLI::App* pl = app.add_subcommand("plan", "grammar, blocks, composites, savings");
  pl->add_option("--subspace", pl_subspace)->required();
  pl->add_option("--beta", pl_beta);
  pl->add_option("--pretrain-factor", pl_factor);
  pl->add_option("--out", pl_out);

  // pretrain
  std::string pt_model, pt_weights, pt_subspace, pt_out = "out";
  int pt_epochs = 30;
  double pt_lr = 0.05;
  std::uint64_t pt_seed = 42;
  CLI::App* pt = app.add_subcommand("pretrain", "teacher-student block pre-training");
  pt->add_option("--model", pt_model)->required();
  pt->add_option("--weights", pt_weights)->required();
  pt->add_option("--subspace", pt_subspace)->required();
  pt->add_option("--epochs", pt_epochs);
  pt->add_option("--lr", pt_lr);
  pt->add_option("--seed", pt_seed);
  pt->add_option("--out", pt_out);

  // explore
  std::string ex_subspace, ex_eval, ex_model, ex_weights, ex_blocks,
      ex_out = "out";
  double ex_alpha = 0.0, ex_full = -1.0;
  int ex_workers = 1, ex_ft_epochs = 15;
  std::uint64_t ex_seed = 42;
  CLI::App* ex = app.add_subcommand("explore", "size-ordered configuration search");
  ex->add_option("--subspace", ex_subspace)->required();
  ex->add_option("--alpha", ex_alpha, "allowed accuracy drop");
  ex->add_option("--evaluator", ex_eval, "mock:<csv> or trainer")->required();
  ex->add_option("--workers", ex_workers);
  ex->add_option("--model", ex_model);
  ex->add_option("--weights", ex_weights);
  ex->add_option("--blocks", ex_blocks, "pre-trained block directory");
  ex->add_option("--full-acc", ex_full, "full-model accuracy override");
  ex->add_option("--seed", ex_seed);
  ex->add_option("--ft-epochs", ex_ft_epochs);
  ex->add_option("--out", ex_out);

  std::vector<std::string> expanded;
  try {
    expanded = expand_config_files(args);
  } catch (const Error& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return 2;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen_demo(gd_out, gd_seed, !gd_no_train, gd_epochs);
    if (pr->parsed())
      return cmd_prune(pr_model, pr_weights, pr_k, pr_p, pr_rate, pr_out);
    if (cm->parsed())
      return cmd_compress(cm_model, cm_weights, cm_k, cm_p, cm_rate, cm_out);
    if (rn->parsed())
      return cmd_run(rn_model, rn_layer, rn_fkw, rn_input, rn_out,
                     tune_from_flags(rn_tile_h, rn_tile_w, rn_order,
                                     rn_unroll),
                     !rn_no_lre, rn_threads);
    if (tn->parsed())
      return cmd_tune(tn_model, tn_weights, tn_layer, tn_k, tn_p, tn_rate,
                      tn_budget, tn_repeats, tn_input, tn_seed, tn_out);
    if (bn->parsed())
      return cmd_bench(bn_model, bn_weights, bn_layer, bn_k, bn_p, bn_rate,
                       bn_repeats, bn_input, bn_seed, bn_out);
    if (pl->parsed()) return cmd_plan(pl_subspace, pl_beta, pl_factor, pl_out);
    if (pt->parsed())
      return cmd_pretrain(pt_model, pt_weights, pt_subspace, pt_epochs, pt_lr,
                          pt_seed, pt_out);
    if (ex->parsed())
      return cmd_explore(ex_subspace, ex_alpha, ex_eval, ex_workers, ex_model,
                         ex_weights, ex_blocks, ex_full, ex_seed, ex_ft_epochs,
                         ex_out);
  } catch (const Error& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "ERROR: no subcommand\n";
  return 1;
}

}  // namespace ppct::cli
