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

#include "ppct/net.hpp"

namespace ppct::train {

struct Dataset {
  TensorD images;           // [N, C, H, W]
  std::vector<int> labels;
  int classes = 0;

  int size() const { return images.rank() ? images.dim(0) : 0; }
  TensorD batch_images(const std::vector<int>& indices) const;
  std::vector<int> batch_labels(const std::vector<int>& indices) const;
};

// Four Gaussian-blob classes (one blob per image quadrant) on single-channel
// h x w images; jittered centers, additive noise, fixed generator seed.
Dataset make_blob_dataset(int n, int h, int w, std::uint64_t seed);

struct TrainOptions {
  int epochs = 10;
  double lr = 0.1;
  std::uint64_t seed = 42;
  int batch_size = 32;
  double accuracy_threshold = -1.0;  // <0 disables epochs-to-threshold
};

struct TrainReport {
  double initial_loss = 0.0;  // full training-set loss before any update
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;  // on the eval set
  int epochs_to_threshold = 0;  // first epoch meeting it, or epochs+1
  bool reached_threshold = false;
  double wall_ms = 0.0;
};

// Plain SGD with seeded shuffling. Masked positions receive no updates, so
// pruned weights stay zero. Fixed seed implies a bit-reproducible f64
// trajectory. Throws DivergenceError if the loss becomes non-finite.
TrainReport train(ToyNet& net, const Dataset& train_set,
                  const Dataset& eval_set, const TrainOptions& options);

double evaluate(const ToyNet& net, const Dataset& test_set);

double dataset_loss(const ToyNet& net, const Dataset& set);

std::string report_csv(const TrainReport& report);

}  // namespace ppct::train
