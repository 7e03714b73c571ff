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

#include "ppct/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace ppct::train {

TensorD Dataset::batch_images(const std::vector<int>& indices) const {
  int c = images.dim(1), h = images.dim(2), w = images.dim(3);
  std::size_t stride = static_cast<std::size_t>(c) * h * w;
  TensorD out({static_cast<int>(indices.size()), c, h, w});
  for (std::size_t i = 0; i < indices.size(); ++i)
    std::copy_n(images.data() + static_cast<std::size_t>(indices[i]) * stride,
                stride, out.data() + i * stride);
  return out;
}

std::vector<int> Dataset::batch_labels(const std::vector<int>& indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

Dataset make_blob_dataset(int n, int h, int w, std::uint64_t seed) {
  Dataset ds;
  ds.classes = 4;
  ds.images = TensorD({n, 1, h, w});
  ds.labels.resize(static_cast<std::size_t>(n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const double centers[4][2] = {
      {h * 0.25, w * 0.25}, {h * 0.25, w * 0.75},
      {h * 0.75, w * 0.25}, {h * 0.75, w * 0.75}};
  double sigma = static_cast<double>(std::min(h, w)) / 6.0;
  for (int i = 0; i < n; ++i) {
    int label = i % 4;
    ds.labels[static_cast<std::size_t>(i)] = label;
    double cy = centers[label][0] + jitter(rng);
    double cx = centers[label][1] + jitter(rng);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
        ds.images[((static_cast<std::size_t>(i) * 1) * h + r) * w + c] =
            std::exp(-d2 / (2.0 * sigma * sigma)) + noise(rng);
      }
  }
  return ds;
}

double evaluate(const ToyNet& net, const Dataset& test_set) {
  if (test_set.size() == 0) throw DomainError("empty test set");
  Activations acts = forward_range(net, test_set.images, 0,
                                   static_cast<int>(net.layers.size()));
  const TensorD& logits = acts.values.back();
  int n = logits.dim(0), classes = logits.dim(1);
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const double* row = logits.data() + static_cast<std::size_t>(i) * classes;
    int best = 0;
    for (int k = 1; k < classes; ++k)
      if (row[k] > row[best]) best = k;
    if (best == test_set.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / n;
}

double dataset_loss(const ToyNet& net, const Dataset& set) {
  return forward(net, set.images, set.labels).loss;
}

namespace {

void sgd_step(ToyNet& net, const NetGradients& grads, double lr) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    ToyNet::Layer& layer = net.layers[i];
    const LayerGrads& g = grads.layers[i];
    if (layer.kind == ir::LayerKind::kConvolution) {
      for (std::size_t j = 0; j < layer.conv.w.size(); ++j) {
        if (!layer.conv.mask.empty() && !layer.conv.mask[j]) continue;
        layer.conv.w[j] -= lr * g.w[j];
      }
      for (std::size_t j = 0; j < layer.conv.b.size(); ++j)
        layer.conv.b[j] -= lr * g.b[j];
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      for (std::size_t j = 0; j < layer.fc.w.size(); ++j) {
        if (!layer.fc.mask.empty() && !layer.fc.mask[j]) continue;
        layer.fc.w[j] -= lr * g.w[j];
      }
      for (std::size_t j = 0; j < layer.fc.b.size(); ++j)
        layer.fc.b[j] -= lr * g.b[j];
    }
  }
}

}  // namespace

TrainReport train(ToyNet& net, const Dataset& train_set,
                  const Dataset& eval_set, const TrainOptions& options) {
  if (train_set.size() == 0) throw DomainError("empty training set");
  TrainReport report;
  auto t0 = std::chrono::steady_clock::now();
  report.initial_loss = dataset_loss(net, train_set);
  report.epochs_to_threshold = options.epochs + 1;

  std::vector<int> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(options.batch_size)) {
      std::size_t end = std::min(
          order.size(), at + static_cast<std::size_t>(options.batch_size));
      std::vector<int> idx(order.begin() + static_cast<long>(at),
                           order.begin() + static_cast<long>(end));
      TensorD x = train_set.batch_images(idx);
      std::vector<int> y = train_set.batch_labels(idx);
      double loss = forward(net, x, y).loss;
      if (!std::isfinite(loss))
        throw DivergenceError("loss diverged at epoch " +
                              std::to_string(epoch));
      NetGradients grads = gradients(net, x, y);
      sgd_step(net, grads, options.lr);
      epoch_loss += loss;
      ++batches;
    }
    report.epoch_loss.push_back(epoch_loss / batches);
    double acc = eval_set.size() ? evaluate(net, eval_set) : 0.0;
    report.epoch_accuracy.push_back(acc);
    if (options.accuracy_threshold >= 0.0 && !report.reached_threshold &&
        acc >= options.accuracy_threshold) {
      report.reached_threshold = true;
      report.epochs_to_threshold = epoch;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  report.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return report;
}

std::string report_csv(const TrainReport& report) {
  std::ostringstream os;
  os << "epoch,loss,accuracy\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "0,%.6f,\n", report.initial_loss);
  os << buf;
  for (std::size_t i = 0; i < report.epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", i + 1,
                  report.epoch_loss[i], report.epoch_accuracy[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace ppct::train
