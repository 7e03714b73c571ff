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

#include <cmath>
#include <limits>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ppct/distill.hpp"
#include "ppct/prototxt.hpp"
#include "ppct/train.hpp"

using namespace ppct::train;
using ppct::TensorD;
using ppct::TensorF;
using ppct::DivergenceError;
using ppct::MissingBlockError;
namespace ir = ppct::ir;
namespace prune = ppct::prune;
namespace plan = ppct::plan;

namespace {

const char* kNet = R"(
name: "t"
layer { name: "data" type: "Input" top: "data" input_param { dim: 1 dim: 6 dim: 6 } }
layer { name: "c1" type: "Convolution" bottom: "data" top: "c1"
        convolution_param { num_output: 4 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "r1" type: "ReLU" bottom: "c1" top: "r1" }
layer { name: "p1" type: "Pooling" bottom: "r1" top: "p1" pooling_param { kernel_size: 2 stride: 2 } }
layer { name: "c2" type: "Convolution" bottom: "p1" top: "c2"
        convolution_param { num_output: 6 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "r2" type: "ReLU" bottom: "c2" top: "r2" }
layer { name: "fc" type: "InnerProduct" bottom: "r2" top: "fc"
        inner_product_param { num_output: 4 } }
)";

ir::WeightStore random_store(const ir::ModelSpec& model, std::uint64_t seed) {
  ir::WeightStore store;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 0.3f);
  for (const ir::LayerSpec& l : model.layers) {
    if (l.kind == ir::LayerKind::kConvolution) {
      TensorF w({l.conv.num_output, l.conv.channels, l.conv.kernel_h,
                 l.conv.kernel_w});
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = dist(rng);
      store.set(l.name, std::move(w));
      TensorF b({l.conv.num_output});
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = dist(rng);
      store.set(l.name + ".bias", std::move(b));
    } else if (l.kind == ir::LayerKind::kFullyConnected) {
      TensorF w({l.fc.num_output, l.fc.inputs});
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = dist(rng);
      store.set(l.name, std::move(w));
      TensorF b({l.fc.num_output});
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = dist(rng);
      store.set(l.name + ".bias", std::move(b));
    }
  }
  return store;
}

ToyNet make_net(std::uint64_t seed) {
  ir::ModelSpec model = ir::parse_prototxt(kNet);
  return ToyNet::from_model(model, random_store(model, seed));
}

TensorD random_batch(int n, int c, int h, int w, std::uint64_t seed) {
  TensorD x({n, c, h, w});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = dist(rng);
  return x;
}

// Second, independent forward pass used as the reference: plain nested
// loops over std::vector<double> with no shared code with ToyNet.
std::vector<double> reference_logits(const ToyNet& net,
                                     const TensorD& batch, int item) {
  int c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  std::vector<double> act(batch.data() + static_cast<std::size_t>(item) * c * h * w,
                          batch.data() + static_cast<std::size_t>(item + 1) * c * h * w);
  for (const ToyNet::Layer& layer : net.layers) {
    if (layer.kind == ir::LayerKind::kConvolution) {
      const auto& cv = layer.conv;
      int oh = (h + 2 * cv.pad - cv.kh) / cv.stride + 1;
      int ow = (w + 2 * cv.pad - cv.kw) / cv.stride + 1;
      std::vector<double> out(static_cast<std::size_t>(cv.filters) * oh * ow);
      for (int f = 0; f < cv.filters; ++f)
        for (int r = 0; r < oh; ++r)
          for (int col = 0; col < ow; ++col) {
            double acc = cv.b[static_cast<std::size_t>(f)];
            for (int ch = 0; ch < cv.channels; ++ch)
              for (int i = 0; i < cv.kh; ++i)
                for (int j = 0; j < cv.kw; ++j) {
                  int ih = r * cv.stride - cv.pad + i;
                  int iw = col * cv.stride - cv.pad + j;
                  if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
                  acc += cv.w[((static_cast<std::size_t>(f) * cv.channels +
                                ch) *
                                   cv.kh +
                               i) *
                                  cv.kw +
                              j] *
                         act[(static_cast<std::size_t>(ch) * h + ih) * w + iw];
                }
            out[(static_cast<std::size_t>(f) * oh + r) * ow + col] = acc;
          }
      act = std::move(out);
      c = cv.filters;
      h = oh;
      w = ow;
    } else if (layer.kind == ir::LayerKind::kRelu) {
      for (double& v : act) v = v > 0.0 ? v : 0.0;
    } else if (layer.kind == ir::LayerKind::kPool) {
      const auto& p = layer.pool;
      int oh = (h - p.kernel) / p.stride + 1;
      int ow = (w - p.kernel) / p.stride + 1;
      std::vector<double> out(static_cast<std::size_t>(c) * oh * ow);
      for (int ch = 0; ch < c; ++ch)
        for (int r = 0; r < oh; ++r)
          for (int col = 0; col < ow; ++col) {
            double best = -1e300;
            for (int i = 0; i < p.kernel; ++i)
              for (int j = 0; j < p.kernel; ++j)
                best = std::max(
                    best, act[(static_cast<std::size_t>(ch) * h +
                               r * p.stride + i) *
                                  w +
                              col * p.stride + j]);
            out[(static_cast<std::size_t>(ch) * oh + r) * ow + col] = best;
          }
      act = std::move(out);
      h = oh;
      w = ow;
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      const auto& fc = layer.fc;
      std::vector<double> out(static_cast<std::size_t>(fc.out));
      for (int o = 0; o < fc.out; ++o) {
        double acc = fc.b[static_cast<std::size_t>(o)];
        for (int j = 0; j < fc.in; ++j)
          acc += fc.w[static_cast<std::size_t>(o) * fc.in + j] *
                 act[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(o)] = acc;
      }
      act = std::move(out);
      c = fc.out;
      h = w = 1;
    }
  }
  return act;
}

Dataset two_class_blobs(int n, std::uint64_t seed) {
  Dataset ds = make_blob_dataset(n, 6, 6, seed);  // matches kNet's 6x6 input
  for (int& label : ds.labels) label %= 2;        // quadrant pairs, separable
  ds.classes = 2;
  return ds;
}

}  // namespace

TEST_CASE("zero net on a uniform-class batch scores ln(num_classes)") {
  ToyNet net = make_net(1);
  for (auto& layer : net.layers) {
    if (layer.kind == ir::LayerKind::kConvolution) {
      std::fill(layer.conv.w.begin(), layer.conv.w.end(), 0.0);
      std::fill(layer.conv.b.begin(), layer.conv.b.end(), 0.0);
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      std::fill(layer.fc.w.begin(), layer.fc.w.end(), 0.0);
      std::fill(layer.fc.b.begin(), layer.fc.b.end(), 0.0);
    }
  }
  TensorD x = random_batch(8, 1, 6, 6, 2);
  std::vector<int> y(8, 1);
  CHECK(forward(net, x, y).loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("identity 1x1 conv passes activations through") {
  ir::ModelSpec model = ir::parse_prototxt(R"(
layer { name: "d" type: "Input" top: "d" input_param { dim: 2 dim: 4 dim: 4 } }
layer { name: "c" type: "Convolution" bottom: "d" top: "c"
        convolution_param { num_output: 2 kernel_size: 1 } }
)");
  ir::WeightStore store;
  TensorF w({2, 2, 1, 1});
  w.at4(0, 0, 0, 0) = 1.0f;
  w.at4(1, 1, 0, 0) = 1.0f;
  store.set("c", w);
  ToyNet net = ToyNet::from_model(model, store);
  TensorD x = random_batch(3, 2, 4, 4, 3);
  Activations acts = forward_range(net, x, 0, 1);
  CHECK(acts.values.back() == x);
}

TEST_CASE("forward matches an independently coded reference to 1e-12") {
  ToyNet net = make_net(7);
  TensorD x = random_batch(5, 1, 6, 6, 8);
  Activations acts =
      forward_range(net, x, 0, static_cast<int>(net.layers.size()));
  const TensorD& logits = acts.values.back();
  for (int item = 0; item < 5; ++item) {
    std::vector<double> want = reference_logits(net, x, item);
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(logits[static_cast<std::size_t>(item) * 4 + k] -
                     want[static_cast<std::size_t>(k)]) < 1e-12);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  ToyNet net = make_net(11);
  TensorD x = random_batch(3, 1, 6, 6, 12);
  std::vector<int> y = {0, 2, 3};
  NetGradients grads = gradients(net, x, y);

  const double h = 1e-5;
  auto loss_at = [&]() { return forward(net, x, y).loss; };
  int checked = 0;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    auto& layer = net.layers[li];
    std::vector<double>* params[2] = {nullptr, nullptr};
    std::vector<double>* gp[2] = {nullptr, nullptr};
    if (layer.kind == ir::LayerKind::kConvolution) {
      params[0] = &layer.conv.w;
      params[1] = &layer.conv.b;
      gp[0] = &grads.layers[li].w;
      gp[1] = &grads.layers[li].b;
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      params[0] = &layer.fc.w;
      params[1] = &layer.fc.b;
      gp[0] = &grads.layers[li].w;
      gp[1] = &grads.layers[li].b;
    } else {
      continue;
    }
    for (int part = 0; part < 2; ++part) {
      std::vector<double>& p = *params[part];
      // probe a spread of parameters rather than every one of them
      for (std::size_t j = 0; j < p.size(); j += (p.size() / 17 + 1)) {
        double keep = p[j];
        p[j] = keep + h;
        double up = loss_at();
        p[j] = keep - h;
        double down = loss_at();
        p[j] = keep;
        double numeric = (up - down) / (2 * h);
        double analytic = (*gp[part])[j];
        double err = std::abs(analytic - numeric) /
                     std::max({1.0, std::abs(analytic), std::abs(numeric)});
        CHECK(err < 1e-6);
        ++checked;
      }
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("zero-input batch leaves conv weight gradients at zero") {
  ToyNet net = make_net(13);
  net.layers[0].conv.b.assign(net.layers[0].conv.b.size(), 0.0);
  TensorD x({2, 1, 6, 6});
  std::vector<int> y = {0, 1};
  NetGradients grads = gradients(net, x, y);
  for (double g : grads.layers[0].w) CHECK(g == 0.0);
}

TEST_CASE("upstream gradient scaling is linear") {
  ToyNet net = make_net(17);
  TensorD x = random_batch(2, 1, 6, 6, 18);
  Activations acts =
      forward_range(net, x, 0, static_cast<int>(net.layers.size()));
  TensorD out = acts.values.back();
  TensorD target(out.dims());
  for (std::size_t i = 0; i < out.size(); ++i) target[i] = out[i] - 1.0;
  // doubled residual: out - target2 = 2 * (out - target)
  TensorD target2(out.dims());
  for (std::size_t i = 0; i < out.size(); ++i) target2[i] = out[i] - 2.0;

  NetGradients g1 = gradients_range(net, x, target, 0,
                                    static_cast<int>(net.layers.size()));
  NetGradients g2 = gradients_range(net, x, target2, 0,
                                    static_cast<int>(net.layers.size()));
  for (std::size_t li = 0; li < g1.layers.size(); ++li)
    for (std::size_t j = 0; j < g1.layers[li].w.size(); ++j)
      CHECK(g2.layers[li].w[j] == doctest::Approx(2.0 * g1.layers[li].w[j])
                                      .epsilon(1e-9));
}

TEST_CASE("lr=0 leaves parameters untouched and the loss flat") {
  ToyNet net = make_net(19);
  std::vector<double> before = net.flatten_params();
  Dataset tr = two_class_blobs(64, 20);
  TrainOptions opts;
  opts.epochs = 3;
  opts.lr = 0.0;
  TrainReport rep = train(net, tr, tr, opts);
  CHECK(net.flatten_params() == before);
  for (double l : rep.epoch_loss)
    CHECK(l == doctest::Approx(rep.epoch_loss[0]).epsilon(1e-12));
}

TEST_CASE("separable two-class blobs reach 0.95 within 20 epochs") {
  ir::ModelSpec model = ir::parse_prototxt(kNet);
  ToyNet net = ToyNet::from_model(model, random_store(model, 21));
  Dataset tr = two_class_blobs(128, 22);
  Dataset te = two_class_blobs(64, 23);
  TrainOptions opts;
  opts.epochs = 20;
  opts.lr = 0.1;
  opts.seed = 5;
  opts.accuracy_threshold = 0.95;
  TrainReport rep = train(net, tr, te, opts);
  CHECK(rep.reached_threshold);
  CHECK(rep.epoch_accuracy.back() >= 0.95);
}

TEST_CASE("fixed seeds reproduce the exact trajectory") {
  Dataset tr = two_class_blobs(64, 30);
  Dataset te = two_class_blobs(32, 31);
  TrainOptions opts;
  opts.epochs = 5;
  opts.lr = 0.1;
  opts.seed = 77;
  ToyNet n1 = make_net(29);
  ToyNet n2 = make_net(29);
  TrainReport r1 = train(n1, tr, te, opts);
  TrainReport r2 = train(n2, tr, te, opts);
  CHECK(r1.epoch_loss == r2.epoch_loss);
  CHECK(r1.epoch_accuracy == r2.epoch_accuracy);
  CHECK(n1.flatten_params() == n2.flatten_params());
  CHECK(report_csv(r1) == report_csv(r2));
  CHECK(report_csv(r1).rfind("epoch,loss,accuracy", 0) == 0);
}

#ifdef _OPENMP
TEST_CASE("thread count does not change the trajectory") {
  Dataset tr = two_class_blobs(64, 40);
  Dataset te = two_class_blobs(32, 41);
  TrainOptions opts;
  opts.epochs = 3;
  opts.lr = 0.1;
  ToyNet n1 = make_net(39);
  ToyNet n2 = make_net(39);
  omp_set_num_threads(1);
  TrainReport r1 = train(n1, tr, te, opts);
  omp_set_num_threads(2);
  TrainReport r2 = train(n2, tr, te, opts);
  omp_set_num_threads(0 > 1 ? 1 : 2);
  CHECK(r1.epoch_loss == r2.epoch_loss);
  CHECK(n1.flatten_params() == n2.flatten_params());
}
#endif

TEST_CASE("non-finite loss raises DivergenceError") {
  ToyNet net = make_net(43);
  net.layers[0].conv.w[0] = std::numeric_limits<double>::infinity();
  Dataset tr = two_class_blobs(64, 44);
  TrainOptions opts;
  opts.epochs = 2;
  opts.lr = 0.1;
  CHECK_THROWS_AS(train(net, tr, tr, opts), DivergenceError);
}

TEST_CASE("evaluate scores memorization, chance, and permuted labels") {
  ir::ModelSpec model = ir::parse_prototxt(kNet);
  ToyNet net = ToyNet::from_model(model, random_store(model, 45));
  Dataset tr = make_blob_dataset(128, 8, 8, 46);
  // 8x8 input vs the 6x6 net: rebuild a matching net from a resized model
  ir::ModelSpec model8 = ir::parse_prototxt(std::string(R"(
name: "t8"
layer { name: "data" type: "Input" top: "data" input_param { dim: 1 dim: 8 dim: 8 } }
layer { name: "c1" type: "Convolution" bottom: "data" top: "c1"
        convolution_param { num_output: 4 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "r1" type: "ReLU" bottom: "c1" top: "r1" }
layer { name: "p1" type: "Pooling" bottom: "r1" top: "p1" pooling_param { kernel_size: 2 stride: 2 } }
layer { name: "fc" type: "InnerProduct" bottom: "p1" top: "fc"
        inner_product_param { num_output: 4 } }
)"));
  ToyNet net8 = ToyNet::from_model(model8, random_store(model8, 47));
  TrainOptions opts;
  opts.epochs = 40;
  opts.lr = 0.1;
  train(net8, tr, tr, opts);
  CHECK(evaluate(net8, tr) == 1.0);  // memorized the training set

  // uniform-random predictor: accuracy near 1/4 within 3 sigma
  ToyNet zero = net8;
  for (auto& layer : zero.layers) {
    if (layer.kind == ir::LayerKind::kConvolution) {
      std::fill(layer.conv.w.begin(), layer.conv.w.end(), 0.0);
      std::fill(layer.conv.b.begin(), layer.conv.b.end(), 0.0);
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      std::fill(layer.fc.w.begin(), layer.fc.w.end(), 0.0);
      // distinct bias noise so argmax is label-independent
      std::mt19937_64 rng(48);
      std::normal_distribution<double> d(0.0, 1.0);
      for (double& b : layer.fc.b) b = d(rng);
    }
  }
  Dataset big = make_blob_dataset(1024, 8, 8, 49);
  double acc = evaluate(zero, big);
  double sigma = std::sqrt(0.25 * 0.75 / 1024.0);
  CHECK(std::abs(acc - 0.25) <= 3 * sigma + 1e-9);

  // permuted labels share no mass with a perfect predictor
  Dataset permuted = tr;
  for (int& label : permuted.labels) label = (label + 1) % 4;
  CHECK(evaluate(net8, permuted) == 0.0);
}

TEST_CASE("identity student starts and stays at zero reconstruction error") {
  ir::ModelSpec model = ir::parse_prototxt(kNet);
  std::string text = ir::print_model(model);
  // add one module covering c1..p1 so a block can reference it
  text += "module { name: \"m0\" from: \"c1\" to: \"p1\" }\n";
  text += "module { name: \"m1\" from: \"c2\" to: \"r2\" }\n";
  ir::ModelSpec m = ir::parse_prototxt(text);
  ir::WeightStore store = random_store(m, 51);
  ToyNet teacher = ToyNet::from_model(m, store);

  plan::TuningBlock block;
  block.rule_id = 1;
  block.symbols = {{0, 0.0}};  // rate 0: the student equals the teacher
  prune::PruneConfig pc;
  TeacherStudentGraph graph = make_teacher_student(m, teacher, {block}, pc);
  Dataset ds = two_class_blobs(64, 52);
  PretrainOptions opts;
  opts.epochs = 3;
  PretrainReport rep = pretrain_blocks(graph, ds, opts);
  for (double mse : rep.epoch_mse[0]) CHECK(mse == 0.0);
}

TEST_CASE("pruned student reduces held-out reconstruction error; teacher frozen") {
  // module m0 spans both convs, so its first conv genuinely prunes
  ir::ModelSpec model = ir::parse_prototxt(kNet);
  std::string text = ir::print_model(model);
  text += "module { name: \"m0\" from: \"c1\" to: \"r2\" }\n";
  ir::ModelSpec m = ir::parse_prototxt(text);
  ir::WeightStore store = random_store(m, 53);
  ToyNet teacher = ToyNet::from_model(m, store);
  std::vector<double> teacher_before = teacher.flatten_params();

  plan::TuningBlock block;
  block.rule_id = 1;
  block.symbols = {{0, 0.5}};
  prune::PruneConfig pc;
  Dataset ds = two_class_blobs(96, 54);
  Dataset held_out = two_class_blobs(32, 540);

  std::vector<double> initial_mses, final_mses;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    TeacherStudentGraph graph = make_teacher_student(m, teacher, {block}, pc);
    REQUIRE(!graph.students[0].net.layers[0].conv.mask.empty());

    auto held_out_mse = [&](const StudentBlock& student) {
      int n = static_cast<int>(teacher.layers.size());
      Activations tacts = forward_range(teacher, held_out.images, 0, n);
      const TensorD& input =
          tacts.values[static_cast<std::size_t>(student.range.first)];
      const TensorD& target =
          tacts.values[static_cast<std::size_t>(student.range.last) + 1];
      Activations sacts = forward_range(
          student.net, input, 0, static_cast<int>(student.net.layers.size()));
      return mse_loss(sacts.values.back(), target);
    };
    initial_mses.push_back(held_out_mse(graph.students[0]));

    PretrainOptions opts;
    opts.epochs = 50;
    opts.lr = 0.05;
    opts.seed = seed;
    pretrain_blocks(graph, ds, opts);
    final_mses.push_back(held_out_mse(graph.students[0]));
  }
  std::sort(initial_mses.begin(), initial_mses.end());
  std::sort(final_mses.begin(), final_mses.end());
  CHECK(final_mses[1] < initial_mses[1]);  // median over the seeds

  CHECK(teacher.flatten_params() == teacher_before);
}

TEST_CASE("one teacher forward per batch regardless of student count") {
  ir::ModelSpec model = ir::parse_prototxt(kNet);
  std::string text = ir::print_model(model);
  text += "module { name: \"m0\" from: \"c1\" to: \"p1\" }\n";
  text += "module { name: \"m1\" from: \"c2\" to: \"r2\" }\n";
  ir::ModelSpec m = ir::parse_prototxt(text);
  ir::WeightStore store = random_store(m, 55);
  ToyNet teacher = ToyNet::from_model(m, store);
  prune::PruneConfig pc;
  Dataset ds = two_class_blobs(64, 56);
  PretrainOptions opts;
  opts.epochs = 2;
  opts.batch_size = 16;

  plan::TuningBlock b0;
  b0.rule_id = 1;
  b0.symbols = {{0, 0.0}};
  plan::TuningBlock b1;
  b1.rule_id = 2;
  b1.symbols = {{1, 0.0}};

  TeacherStudentGraph one = make_teacher_student(m, teacher, {b0}, pc);
  pretrain_blocks(one, ds, opts);
  TeacherStudentGraph two = make_teacher_student(m, teacher, {b0, b1}, pc);
  pretrain_blocks(two, ds, opts);
  long batches = 2 * (64 / 16);
  CHECK(one.teacher_forwards == batches);
  CHECK(two.teacher_forwards == batches);
}

TEST_CASE("masked positions never receive nonzero values in training") {
  ir::ModelSpec model = ir::parse_prototxt(kNet);
  ToyNet net = ToyNet::from_model(model, random_store(model, 57));
  // mask half of c1's weights
  auto& c1 = net.layers[0].conv;
  c1.mask.assign(c1.w.size(), 1);
  for (std::size_t i = 0; i < c1.mask.size(); i += 2) c1.mask[i] = 0;
  net.zero_masked();
  Dataset tr = two_class_blobs(64, 58);
  TrainOptions opts;
  opts.epochs = 5;
  opts.lr = 0.1;
  train(net, tr, tr, opts);
  for (std::size_t i = 0; i < c1.w.size(); i += 2) CHECK(c1.w[i] == 0.0);
}

TEST_CASE("config size estimates equal instantiated parameter counts") {
  const char* text = R"(
name: "sized"
layer { name: "data" type: "Input" top: "data" input_param { dim: 1 dim: 8 dim: 8 } }
layer { name: "stem" type: "Convolution" bottom: "data" top: "stem"
        convolution_param { num_output: 8 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "sr" type: "ReLU" bottom: "stem" top: "sr" }
layer { name: "conv1" type: "Convolution" bottom: "sr" top: "conv1"
        convolution_param { num_output: 12 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "r1" type: "ReLU" bottom: "conv1" top: "r1" }
layer { name: "conv2" type: "Convolution" bottom: "r1" top: "conv2"
        convolution_param { num_output: 12 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "r2" type: "ReLU" bottom: "conv2" top: "r2" }
layer { name: "conv3" type: "Convolution" bottom: "r2" top: "conv3"
        convolution_param { num_output: 16 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "r3" type: "ReLU" bottom: "conv3" top: "r3" }
layer { name: "conv4" type: "Convolution" bottom: "r3" top: "conv4"
        convolution_param { num_output: 16 kernel_size: 3 stride: 1 pad: 1 } }
layer { name: "r4" type: "ReLU" bottom: "conv4" top: "r4" }
layer { name: "pool" type: "Pooling" bottom: "r4" top: "pool" pooling_param { kernel_size: 2 stride: 2 } }
layer { name: "fc" type: "InnerProduct" bottom: "pool" top: "fc"
        inner_product_param { num_output: 4 } }
module { name: "m0" from: "conv1" to: "r2" }
module { name: "m1" from: "conv3" to: "pool" }
)";
  ir::ModelSpec m = ir::parse_prototxt(text);
  ir::WeightStore store = random_store(m, 61);
  prune::PruneConfig pc;
  for (double r0 : {0.0, 0.3, 0.7}) {
    for (double r1 : {0.0, 0.5}) {
      plan::NetworkConfig config;
      config.id = 0;
      config.symbols = {{0, r0}, {1, r1}};
      ToyNet net = make_pruned_net(m, store, config, pc);
      long estimate = estimate_config_size(m, config, pc);
      CHECK(net.parameter_count() == estimate);
    }
  }
  // dense config recovers the full parameter count
  plan::NetworkConfig dense;
  dense.id = 0;
  dense.symbols = {{0, 0.0}, {1, 0.0}};
  ToyNet full = ToyNet::from_model(m, store);
  CHECK(estimate_config_size(m, dense, pc) == full.parameter_count());
}

TEST_CASE("assemble: zero tiles reduces to training the pruned baseline") {
  ir::ModelSpec m = ir::parse_prototxt(kNet);
  std::string text = ir::print_model(m);
  text += "module { name: \"m0\" from: \"c1\" to: \"p1\" }\n";
  ir::ModelSpec model = ir::parse_prototxt(text);
  ir::WeightStore store = random_store(model, 63);
  plan::NetworkConfig config;
  config.id = 0;
  config.symbols = {{0, 0.0}};
  prune::PruneConfig pc;
  Dataset tr = two_class_blobs(64, 64);
  TrainOptions opts;
  opts.epochs = 4;
  opts.lr = 0.1;

  TrainReport with_blocks =
      assemble_and_finetune(model, store, config, {}, tr, tr, opts, pc);

  ToyNet baseline = make_pruned_net(model, store, config, pc);
  TrainReport plain = train(baseline, tr, tr, opts);
  CHECK(with_blocks.epoch_loss == plain.epoch_loss);
  CHECK(with_blocks.initial_loss == plain.initial_loss);
}

TEST_CASE("assemble raises MissingBlockError for absent tile weights") {
  ir::ModelSpec m = ir::parse_prototxt(kNet);
  std::string text = ir::print_model(m);
  text += "module { name: \"m0\" from: \"c1\" to: \"p1\" }\n";
  ir::ModelSpec model = ir::parse_prototxt(text);
  ir::WeightStore store = random_store(model, 65);
  plan::NetworkConfig config;
  config.id = 0;
  config.symbols = {{0, 0.0}};
  prune::PruneConfig pc;
  Dataset tr = two_class_blobs(32, 66);
  TrainOptions opts;
  opts.epochs = 1;

  BlockWeights broken;
  broken.block.rule_id = 1;
  broken.block.symbols = {{0, 0.0}};
  // weights store left empty: the tile matches but has no tensors
  CHECK_THROWS_AS(assemble_and_finetune(model, store, config, {broken}, tr,
                                        tr, opts, pc),
                  MissingBlockError);
}
