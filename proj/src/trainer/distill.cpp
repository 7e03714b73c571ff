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

#include "ppct/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace ppct::train {

namespace {

// Masks one conv layer in place: per-kernel pattern choice plus
// connectivity removal, both derived from the layer's current weights.
void mask_conv_layer(ToyNet::ConvLayer& layer, double rate,
                     const prune::PruneConfig& cfg) {
  TensorF w({layer.filters, layer.channels, layer.kh, layer.kw});
  for (std::size_t i = 0; i < layer.w.size(); ++i)
    w[i] = static_cast<float>(layer.w[i]);

  prune::PatternLibrary lib =
      prune::design_pattern_library(w, cfg.arity, cfg.library_size);
  prune::PatternAssignment assignment = prune::assign_kernel_patterns(w, lib);
  prune::apply_connectivity(assignment, prune::connectivity_prune(w, rate));

  layer.mask.assign(layer.w.size(), 0);
  for (int f = 0; f < layer.filters; ++f)
    for (int c = 0; c < layer.channels; ++c) {
      int idx = assignment.at(f, c);
      if (idx == prune::PatternAssignment::kRemoved) continue;
      for (const auto& [r, col] :
           lib.patterns[static_cast<std::size_t>(idx)].entries)
        layer.mask[((static_cast<std::size_t>(f) * layer.channels + c) *
                        layer.kh +
                    r) *
                       layer.kw +
                   col] = 1;
    }
  for (std::size_t i = 0; i < layer.w.size(); ++i)
    if (!layer.mask[i]) layer.w[i] = 0.0;
}

// Conv layers a module prunes: all but the module's last conv layer.
std::vector<int> prunable_model_layers(const ir::ModelSpec& model,
                                       int module) {
  std::vector<int> convs = model.module_conv_layers(module);
  if (!convs.empty()) convs.pop_back();  // top layer of the module stays dense
  return convs;
}

void prune_modules(const ir::ModelSpec& model, ToyNet& net,
                   const std::vector<plan::ConfigSymbol>& symbols,
                   const prune::PruneConfig& cfg) {
  for (const plan::ConfigSymbol& s : symbols) {
    if (s.rate == 0.0) continue;
    if (s.module < 0 || s.module >= static_cast<int>(model.modules.size()))
      throw DomainError("config references module " +
                        std::to_string(s.module) + " beyond the model");
    for (int li : prunable_model_layers(model, s.module)) {
      int ni = net.layer_index(model.layers[static_cast<std::size_t>(li)].name);
      if (ni < 0) throw DomainError("model/net layer mismatch");
      mask_conv_layer(net.layers[static_cast<std::size_t>(ni)].conv, s.rate,
                      cfg);
    }
  }
}

}  // namespace

ToyNet make_pruned_net(const ir::ModelSpec& model,
                       const ir::WeightStore& teacher_weights,
                       const plan::NetworkConfig& config,
                       const prune::PruneConfig& prune_cfg) {
  ToyNet net = ToyNet::from_model(model, teacher_weights);
  prune_modules(model, net, config.symbols, prune_cfg);
  return net;
}

long estimate_config_size(const ir::ModelSpec& model,
                          const plan::NetworkConfig& config,
                          const prune::PruneConfig& prune_cfg) {
  std::set<int> pruned_layers;
  std::vector<double> layer_rate(model.layers.size(), 0.0);
  for (const plan::ConfigSymbol& s : config.symbols) {
    if (s.rate == 0.0) continue;
    for (int li : prunable_model_layers(model, s.module)) {
      pruned_layers.insert(li);
      layer_rate[static_cast<std::size_t>(li)] = s.rate;
    }
  }
  long total = 0;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const ir::LayerSpec& l = model.layers[i];
    if (l.kind == ir::LayerKind::kConvolution) {
      long f = l.conv.num_output, c = l.conv.channels;
      long area = static_cast<long>(l.conv.kernel_h) * l.conv.kernel_w;
      if (pruned_layers.count(static_cast<int>(i))) {
        long removed = static_cast<long>(
            std::floor(layer_rate[i] * static_cast<double>(f) *
                       static_cast<double>(c)));
        total += (f * c - removed) * prune_cfg.arity;
      } else {
        total += f * c * area;
      }
      total += f;  // bias
    } else if (l.kind == ir::LayerKind::kFullyConnected) {
      total += static_cast<long>(l.fc.num_output) * l.fc.inputs +
               l.fc.num_output;
    }
  }
  return total;
}

BlockLayers block_layer_range(const ir::ModelSpec& model, const ToyNet& net,
                              const plan::TuningBlock& block) {
  if (block.symbols.empty()) throw DomainError("empty tuning block");
  int first_module = block.symbols.front().module;
  int last_module = block.symbols.back().module;
  if (first_module < 0 || last_module >= static_cast<int>(model.modules.size()))
    throw DomainError("block modules out of range");
  const ir::ModuleSpec& first = model.modules[static_cast<std::size_t>(first_module)];
  const ir::ModuleSpec& last = model.modules[static_cast<std::size_t>(last_module)];
  BlockLayers out;
  out.first = net.layer_index(model.layers[static_cast<std::size_t>(first.from)].name);
  out.last = net.layer_index(model.layers[static_cast<std::size_t>(last.to)].name);
  if (out.first < 0 || out.last < 0 || out.first > out.last)
    throw DomainError("block layer range does not map onto the net");
  return out;
}

TeacherStudentGraph make_teacher_student(
    const ir::ModelSpec& model, const ToyNet& teacher,
    const std::vector<plan::TuningBlock>& blocks,
    const prune::PruneConfig& prune_cfg) {
  TeacherStudentGraph graph;
  graph.teacher = &teacher;
  for (const plan::TuningBlock& block : blocks) {
    StudentBlock student;
    student.block = block;
    student.range = block_layer_range(model, teacher, block);
    // The student is the teacher's block slice with the block's pruning.
    student.net.layers.assign(
        teacher.layers.begin() + student.range.first,
        teacher.layers.begin() + student.range.last + 1);
    for (const plan::ConfigSymbol& s : block.symbols) {
      if (s.rate == 0.0) continue;
      for (int li : prunable_model_layers(model, s.module)) {
        int ni = student.net.layer_index(
            model.layers[static_cast<std::size_t>(li)].name);
        if (ni < 0) continue;  // layer outside this block slice
        mask_conv_layer(student.net.layers[static_cast<std::size_t>(ni)].conv,
                        s.rate, prune_cfg);
      }
    }
    graph.students.push_back(std::move(student));
  }
  return graph;
}

PretrainReport pretrain_blocks(TeacherStudentGraph& graph,
                               const Dataset& dataset,
                               const PretrainOptions& options) {
  if (!graph.teacher) throw DomainError("graph has no teacher");
  PretrainReport report;
  report.epoch_mse.resize(graph.students.size());

  std::vector<int> order(static_cast<std::size_t>(dataset.size()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);

  int nlayers = static_cast<int>(graph.teacher->layers.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> sum_mse(graph.students.size(), 0.0);
    int batches = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(options.batch_size)) {
      std::size_t end = std::min(
          order.size(), at + static_cast<std::size_t>(options.batch_size));
      std::vector<int> idx(order.begin() + static_cast<long>(at),
                           order.begin() + static_cast<long>(end));
      TensorD x = dataset.batch_images(idx);

      // One teacher forward serves every student in this batch.
      Activations teacher_acts = forward_range(*graph.teacher, x, 0, nlayers);
      ++graph.teacher_forwards;

      for (std::size_t s = 0; s < graph.students.size(); ++s) {
        StudentBlock& student = graph.students[s];
        const TensorD& input =
            teacher_acts.values[static_cast<std::size_t>(student.range.first)];
        const TensorD& target =
            teacher_acts.values[static_cast<std::size_t>(student.range.last) + 1];
        int sub_layers = static_cast<int>(student.net.layers.size());
        Activations acts = forward_range(student.net, input, 0, sub_layers);
        sum_mse[s] += mse_loss(acts.values.back(), target);
        NetGradients grads =
            gradients_range(student.net, input, target, 0, sub_layers);
        for (std::size_t i = 0; i < student.net.layers.size(); ++i) {
          ToyNet::Layer& layer = student.net.layers[i];
          const LayerGrads& g = grads.layers[i];
          if (layer.kind == ir::LayerKind::kConvolution) {
            for (std::size_t j = 0; j < layer.conv.w.size(); ++j) {
              if (!layer.conv.mask.empty() && !layer.conv.mask[j]) continue;
              layer.conv.w[j] -= options.lr * g.w[j];
            }
            for (std::size_t j = 0; j < layer.conv.b.size(); ++j)
              layer.conv.b[j] -= options.lr * g.b[j];
          } else if (layer.kind == ir::LayerKind::kFullyConnected) {
            for (std::size_t j = 0; j < layer.fc.w.size(); ++j) {
              if (!layer.fc.mask.empty() && !layer.fc.mask[j]) continue;
              layer.fc.w[j] -= options.lr * g.w[j];
            }
            for (std::size_t j = 0; j < layer.fc.b.size(); ++j)
              layer.fc.b[j] -= options.lr * g.b[j];
          }
        }
      }
      ++batches;
    }
    for (std::size_t s = 0; s < graph.students.size(); ++s)
      report.epoch_mse[s].push_back(sum_mse[s] / batches);
  }
  return report;
}

ir::WeightStore student_weights(const StudentBlock& student) {
  return student.net.to_weights();
}

TrainReport assemble_and_finetune(const ir::ModelSpec& model,
                                  const ir::WeightStore& teacher_weights,
                                  const plan::NetworkConfig& config,
                                  const std::vector<BlockWeights>& blocks,
                                  const Dataset& train_set,
                                  const Dataset& eval_set,
                                  const TrainOptions& options,
                                  const prune::PruneConfig& prune_cfg,
                                  ToyNet* out_net) {
  ToyNet net = make_pruned_net(model, teacher_weights, config, prune_cfg);

  std::vector<plan::TuningBlock> block_list;
  block_list.reserve(blocks.size());
  for (const BlockWeights& b : blocks) block_list.push_back(b.block);
  std::vector<plan::CompositeVector> tiles =
      plan::composite_vectors({config}, block_list);

  for (const plan::TileRef& tile : tiles[0]) {
    const BlockWeights& bw = blocks[static_cast<std::size_t>(tile.block_index)];
    BlockLayers range = block_layer_range(model, net, bw.block);
    for (int i = range.first; i <= range.last; ++i) {
      ToyNet::Layer& layer = net.layers[static_cast<std::size_t>(i)];
      if (layer.kind != ir::LayerKind::kConvolution &&
          layer.kind != ir::LayerKind::kFullyConnected)
        continue;
      const TensorF* w = bw.weights.find(layer.name);
      if (!w)
        throw MissingBlockError("block " + bw.block.key() +
                                " lacks weights for layer '" + layer.name +
                                "'");
      const TensorF* b = bw.weights.find(layer.name + ".bias");
      if (layer.kind == ir::LayerKind::kConvolution) {
        layer.conv.w.assign(w->values().begin(), w->values().end());
        if (b) layer.conv.b.assign(b->values().begin(), b->values().end());
      } else {
        layer.fc.w.assign(w->values().begin(), w->values().end());
        if (b) layer.fc.b.assign(b->values().begin(), b->values().end());
      }
    }
  }
  net.zero_masked();  // block weights honor the same masks; keep it exact

  TrainReport report = train(net, train_set, eval_set, options);
  if (out_net) *out_net = std::move(net);
  return report;
}

}  // namespace ppct::train
