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

#include <string>
#include <vector>

#include "ppct/blocks.hpp"
#include "ppct/explore.hpp"
#include "ppct/pattern.hpp"
#include "ppct/train.hpp"

namespace ppct::train {

// Pattern + connectivity masks applied to every conv layer of module m at
// the config's rate, except the module's last conv layer, which stays dense
// so module boundaries keep their dimensions trainable. Rate-0 modules stay
// dense throughout.
ToyNet make_pruned_net(const ir::ModelSpec& model,
                       const ir::WeightStore& teacher_weights,
                       const plan::NetworkConfig& config,
                       const prune::PruneConfig& prune_cfg);

// Structural parameter count of make_pruned_net's result, computable
// without weights; used as NetworkConfig.size_estimate.
long estimate_config_size(const ir::ModelSpec& model,
                          const plan::NetworkConfig& config,
                          const prune::PruneConfig& prune_cfg);

// Net layer range [first, last] (inclusive) covered by a tuning block's
// modules.
struct BlockLayers {
  int first = 0;
  int last = 0;
};

BlockLayers block_layer_range(const ir::ModelSpec& model, const ToyNet& net,
                              const plan::TuningBlock& block);

struct StudentBlock {
  plan::TuningBlock block;
  BlockLayers range;  // teacher layer indices
  ToyNet net;         // pruned copy of the teacher's block
};

// Teacher runs frozen; every student regresses its counterpart's output
// activation map. One teacher forward per batch feeds all students.
struct TeacherStudentGraph {
  const ToyNet* teacher = nullptr;
  std::vector<StudentBlock> students;
  long teacher_forwards = 0;
};

TeacherStudentGraph make_teacher_student(const ir::ModelSpec& model,
                                         const ToyNet& teacher,
                                         const std::vector<plan::TuningBlock>& blocks,
                                         const prune::PruneConfig& prune_cfg);

struct PretrainOptions {
  int epochs = 30;
  double lr = 0.05;
  std::uint64_t seed = 42;
  int batch_size = 32;
};

struct PretrainReport {
  // per student, per epoch mean reconstruction MSE
  std::vector<std::vector<double>> epoch_mse;
};

PretrainReport pretrain_blocks(TeacherStudentGraph& graph,
                               const Dataset& dataset,
                               const PretrainOptions& options);

// Pre-trained weights of one block, stored in the .cpie container under the
// block's layer names.
struct BlockWeights {
  plan::TuningBlock block;
  ir::WeightStore weights;
};

ir::WeightStore student_weights(const StudentBlock& student);

// Builds the pruned network for `config`, initializes tiled positions from
// pre-trained blocks (MissingBlockError when a tile's weights are absent)
// and everything else from the pruned teacher, then fine-tunes all
// parameters. Returns the train report; `out_net` receives the final net.
TrainReport assemble_and_finetune(const ir::ModelSpec& model,
                                  const ir::WeightStore& teacher_weights,
                                  const plan::NetworkConfig& config,
                                  const std::vector<BlockWeights>& blocks,
                                  const Dataset& train_set,
                                  const Dataset& eval_set,
                                  const TrainOptions& options,
                                  const prune::PruneConfig& prune_cfg,
                                  ToyNet* out_net = nullptr);

}  // namespace ppct::train
