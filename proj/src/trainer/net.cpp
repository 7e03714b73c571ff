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

#include "ppct/net.hpp"

#include <algorithm>
#include <cmath>

namespace ppct::train {

namespace {

int out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace

ToyNet ToyNet::from_model(const ir::ModelSpec& model,
                          const ir::WeightStore& store) {
  ToyNet net;
  net.input_c = model.input_c;
  net.input_h = model.input_h;
  net.input_w = model.input_w;
  for (const ir::LayerSpec& spec : model.layers) {
    if (spec.kind == ir::LayerKind::kInput) continue;
    Layer layer;
    layer.kind = spec.kind;
    layer.name = spec.name;
    switch (spec.kind) {
      case ir::LayerKind::kConvolution: {
        ConvLayer& c = layer.conv;
        c.filters = spec.conv.num_output;
        c.channels = spec.conv.channels;
        c.kh = spec.conv.kernel_h;
        c.kw = spec.conv.kernel_w;
        c.stride = spec.conv.stride;
        c.pad = spec.conv.pad;
        const TensorF& w = store.at(spec.name);
        c.w.assign(w.values().begin(), w.values().end());
        c.b.assign(static_cast<std::size_t>(c.filters), 0.0);
        if (const TensorF* b = store.find(spec.name + ".bias"))
          c.b.assign(b->values().begin(), b->values().end());
        break;
      }
      case ir::LayerKind::kFullyConnected: {
        FcLayer& f = layer.fc;
        f.out = spec.fc.num_output;
        f.in = spec.fc.inputs;
        const TensorF& w = store.at(spec.name);
        f.w.assign(w.values().begin(), w.values().end());
        f.b.assign(static_cast<std::size_t>(f.out), 0.0);
        if (const TensorF* b = store.find(spec.name + ".bias"))
          f.b.assign(b->values().begin(), b->values().end());
        break;
      }
      case ir::LayerKind::kPool:
        layer.pool.kernel = spec.pool.kernel;
        layer.pool.stride = spec.pool.stride;
        break;
      case ir::LayerKind::kRelu:
        break;
      case ir::LayerKind::kInput:
        break;
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

ir::WeightStore ToyNet::to_weights() const {
  ir::WeightStore store;
  for (const Layer& layer : layers) {
    if (layer.kind == ir::LayerKind::kConvolution) {
      const ConvLayer& c = layer.conv;
      std::vector<float> w(c.w.begin(), c.w.end());
      store.set(layer.name, TensorF({c.filters, c.channels, c.kh, c.kw},
                                    std::move(w)));
      std::vector<float> b(c.b.begin(), c.b.end());
      store.set(layer.name + ".bias", TensorF({c.filters}, std::move(b)));
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      const FcLayer& f = layer.fc;
      std::vector<float> w(f.w.begin(), f.w.end());
      store.set(layer.name, TensorF({f.out, f.in}, std::move(w)));
      std::vector<float> b(f.b.begin(), f.b.end());
      store.set(layer.name + ".bias", TensorF({f.out}, std::move(b)));
    }
  }
  return store;
}

long ToyNet::parameter_count() const {
  long n = 0;
  for (const Layer& layer : layers) {
    if (layer.kind == ir::LayerKind::kConvolution) {
      const ConvLayer& c = layer.conv;
      if (c.mask.empty())
        n += static_cast<long>(c.w.size());
      else
        n += std::count(c.mask.begin(), c.mask.end(), std::uint8_t{1});
      n += static_cast<long>(c.b.size());
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      const FcLayer& f = layer.fc;
      if (f.mask.empty())
        n += static_cast<long>(f.w.size());
      else
        n += std::count(f.mask.begin(), f.mask.end(), std::uint8_t{1});
      n += static_cast<long>(f.b.size());
    }
  }
  return n;
}

void ToyNet::zero_masked() {
  for (Layer& layer : layers) {
    if (layer.kind == ir::LayerKind::kConvolution && !layer.conv.mask.empty())
      for (std::size_t i = 0; i < layer.conv.w.size(); ++i)
        if (!layer.conv.mask[i]) layer.conv.w[i] = 0.0;
    if (layer.kind == ir::LayerKind::kFullyConnected && !layer.fc.mask.empty())
      for (std::size_t i = 0; i < layer.fc.w.size(); ++i)
        if (!layer.fc.mask[i]) layer.fc.w[i] = 0.0;
  }
}

int ToyNet::layer_index(const std::string& name) const {
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> ToyNet::flatten_params() const {
  std::vector<double> out;
  for (const Layer& layer : layers) {
    if (layer.kind == ir::LayerKind::kConvolution) {
      out.insert(out.end(), layer.conv.w.begin(), layer.conv.w.end());
      out.insert(out.end(), layer.conv.b.begin(), layer.conv.b.end());
    } else if (layer.kind == ir::LayerKind::kFullyConnected) {
      out.insert(out.end(), layer.fc.w.begin(), layer.fc.w.end());
      out.insert(out.end(), layer.fc.b.begin(), layer.fc.b.end());
    }
  }
  return out;
}

namespace {

TensorD conv_forward(const ToyNet::ConvLayer& c, const TensorD& x) {
  int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  if (x.dim(1) != c.channels) throw ShapeError("conv input channel mismatch");
  int oh = out_dim(h, c.kh, c.stride, c.pad);
  int ow = out_dim(w, c.kw, c.stride, c.pad);
  if (oh < 1 || ow < 1) throw ShapeError("conv output is empty");
  TensorD y({n, c.filters, oh, ow});
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < c.filters; ++f)
      for (int r = 0; r < oh; ++r)
        for (int col = 0; col < ow; ++col) {
          double acc = c.b[static_cast<std::size_t>(f)];
          for (int ch = 0; ch < c.channels; ++ch)
            for (int kr = 0; kr < c.kh; ++kr)
              for (int kc = 0; kc < c.kw; ++kc) {
                int ih = r * c.stride - c.pad + kr;
                int iw = col * c.stride - c.pad + kc;
                if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
                acc += c.w[((static_cast<std::size_t>(f) * c.channels + ch) *
                                c.kh +
                            kr) *
                               c.kw +
                           kc] *
                       x[((static_cast<std::size_t>(i) * c.channels + ch) * h +
                          ih) *
                             w +
                         iw];
              }
          y[((static_cast<std::size_t>(i) * c.filters + f) * oh + r) * ow +
            col] = acc;
        }
  }
  return y;
}

TensorD relu_forward(const TensorD& x) {
  TensorD y = x;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] < 0.0) y[i] = 0.0;
  return y;
}

TensorD pool_forward(const ToyNet::PoolLayer& p, const TensorD& x) {
  int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  int oh = (h - p.kernel) / p.stride + 1;
  int ow = (w - p.kernel) / p.stride + 1;
  if (oh < 1 || ow < 1) throw ShapeError("pool output is empty");
  TensorD y({n, c, oh, ow});
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (int r = 0; r < oh; ++r)
        for (int col = 0; col < ow; ++col) {
          double best = -1e300;
          for (int kr = 0; kr < p.kernel; ++kr)
            for (int kc = 0; kc < p.kernel; ++kc) {
              double v = x[((static_cast<std::size_t>(i) * c + ch) * h +
                            r * p.stride + kr) *
                               w +
                           col * p.stride + kc];
              if (v > best) best = v;  // first max wins ties
            }
          y[((static_cast<std::size_t>(i) * c + ch) * oh + r) * ow + col] =
              best;
        }
  return y;
}

TensorD fc_forward(const ToyNet::FcLayer& f, const TensorD& x) {
  int n = x.dim(0);
  std::size_t d = x.size() / static_cast<std::size_t>(n);
  if (static_cast<int>(d) != f.in) throw ShapeError("fc input size mismatch");
  TensorD y({n, f.out, 1, 1});
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < f.out; ++o) {
      double acc = f.b[static_cast<std::size_t>(o)];
      for (std::size_t j = 0; j < d; ++j)
        acc += f.w[static_cast<std::size_t>(o) * d + j] *
               x[static_cast<std::size_t>(i) * d + j];
      y[static_cast<std::size_t>(i) * f.out + o] = acc;
    }
  return y;
}

}  // namespace

Activations forward_range(const ToyNet& net, const TensorD& input, int lo,
                          int hi) {
  if (input.rank() != 4) throw ShapeError("batch must be [N,C,H,W]");
  Activations acts;
  acts.values.push_back(input);
  for (int i = lo; i < hi; ++i) {
    const ToyNet::Layer& layer = net.layers[static_cast<std::size_t>(i)];
    const TensorD& x = acts.values.back();
    switch (layer.kind) {
      case ir::LayerKind::kConvolution:
        acts.values.push_back(conv_forward(layer.conv, x));
        break;
      case ir::LayerKind::kRelu:
        acts.values.push_back(relu_forward(x));
        break;
      case ir::LayerKind::kPool:
        acts.values.push_back(pool_forward(layer.pool, x));
        break;
      case ir::LayerKind::kFullyConnected:
        acts.values.push_back(fc_forward(layer.fc, x));
        break;
      case ir::LayerKind::kInput:
        throw ShapeError("unexpected input layer inside a net");
    }
  }
  return acts;
}

namespace {

// Softmax cross-entropy over logits [N, classes, 1, 1]; fills dlogits with
// (softmax - onehot)/N when non-null.
double cross_entropy(const TensorD& logits, const std::vector<int>& labels,
                     TensorD* dlogits) {
  int n = logits.dim(0);
  int classes = logits.dim(1);
  if (static_cast<int>(labels.size()) != n)
    throw ShapeError("label count does not match batch");
  double loss = 0.0;
  if (dlogits) *dlogits = TensorD(logits.dims());
  for (int i = 0; i < n; ++i) {
    const double* row = logits.data() + static_cast<std::size_t>(i) * classes;
    double mx = row[0];
    for (int k = 1; k < classes; ++k) mx = std::max(mx, row[k]);
    double sum = 0.0;
    for (int k = 0; k < classes; ++k) sum += std::exp(row[k] - mx);
    double lse = mx + std::log(sum);
    int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= classes) throw ShapeError("label out of range");
    loss += lse - row[y];
    if (dlogits) {
      double* drow =
          dlogits->data() + static_cast<std::size_t>(i) * classes;
      for (int k = 0; k < classes; ++k)
        drow[k] = (std::exp(row[k] - lse) - (k == y ? 1.0 : 0.0)) / n;
    }
  }
  return loss / n;
}

}  // namespace

ForwardResult forward(const ToyNet& net, const TensorD& batch,
                      const std::vector<int>& labels) {
  ForwardResult result;
  result.acts =
      forward_range(net, batch, 0, static_cast<int>(net.layers.size()));
  result.loss = cross_entropy(result.acts.values.back(), labels, nullptr);
  return result;
}

double mse_loss(const TensorD& out, const TensorD& target) {
  if (out.dims() != target.dims())
    throw ShapeError("MSE operands have different shapes");
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double d = out[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(out.size());
}

namespace {

struct BackwardScratch {
  NetGradients grads;
  TensorD dx;
};

void conv_backward(const ToyNet::ConvLayer& c, const TensorD& x,
                   const TensorD& dy, LayerGrads& g, TensorD& dx) {
  int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  int oh = dy.dim(2), ow = dy.dim(3);
  g.w.assign(c.w.size(), 0.0);
  g.b.assign(c.b.size(), 0.0);
  dx = TensorD(x.dims());

  // dw/db: parallel over filters, items accumulated in ascending order so
  // the reduction order is fixed for any thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int f = 0; f < c.filters; ++f) {
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < oh; ++r)
        for (int col = 0; col < ow; ++col) {
          double d = dy[((static_cast<std::size_t>(i) * c.filters + f) * oh +
                         r) *
                            ow +
                        col];
          g.b[static_cast<std::size_t>(f)] += d;
          for (int ch = 0; ch < c.channels; ++ch)
            for (int kr = 0; kr < c.kh; ++kr)
              for (int kc = 0; kc < c.kw; ++kc) {
                int ih = r * c.stride - c.pad + kr;
                int iw = col * c.stride - c.pad + kc;
                if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
                g.w[((static_cast<std::size_t>(f) * c.channels + ch) * c.kh +
                     kr) *
                        c.kw +
                    kc] +=
                    d * x[((static_cast<std::size_t>(i) * c.channels + ch) *
                               h +
                           ih) *
                              w +
                          iw];
              }
        }
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < c.filters; ++f)
      for (int r = 0; r < oh; ++r)
        for (int col = 0; col < ow; ++col) {
          double d = dy[((static_cast<std::size_t>(i) * c.filters + f) * oh +
                         r) *
                            ow +
                        col];
          for (int ch = 0; ch < c.channels; ++ch)
            for (int kr = 0; kr < c.kh; ++kr)
              for (int kc = 0; kc < c.kw; ++kc) {
                int ih = r * c.stride - c.pad + kr;
                int iw = col * c.stride - c.pad + kc;
                if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
                dx[((static_cast<std::size_t>(i) * c.channels + ch) * h + ih) *
                       w +
                   iw] +=
                    d * c.w[((static_cast<std::size_t>(f) * c.channels + ch) *
                                 c.kh +
                             kr) *
                                c.kw +
                            kc];
              }
        }
}

void relu_backward(const TensorD& x, const TensorD& dy, TensorD& dx) {
  dx = TensorD(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void pool_backward(const ToyNet::PoolLayer& p, const TensorD& x,
                   const TensorD& dy, TensorD& dx) {
  int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  int oh = dy.dim(2), ow = dy.dim(3);
  dx = TensorD(x.dims());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (int r = 0; r < oh; ++r)
        for (int col = 0; col < ow; ++col) {
          double best = -1e300;
          int best_ih = 0, best_iw = 0;
          for (int kr = 0; kr < p.kernel; ++kr)
            for (int kc = 0; kc < p.kernel; ++kc) {
              int ih = r * p.stride + kr, iw = col * p.stride + kc;
              double v =
                  x[((static_cast<std::size_t>(i) * c + ch) * h + ih) * w +
                    iw];
              if (v > best) {
                best = v;
                best_ih = ih;
                best_iw = iw;
              }
            }
          dx[((static_cast<std::size_t>(i) * c + ch) * h + best_ih) * w +
             best_iw] +=
              dy[((static_cast<std::size_t>(i) * c + ch) * oh + r) * ow +
                 col];
        }
}

void fc_backward(const ToyNet::FcLayer& f, const TensorD& x, const TensorD& dy,
                 LayerGrads& g, TensorD& dx) {
  int n = x.dim(0);
  std::size_t d = x.size() / static_cast<std::size_t>(n);
  g.w.assign(f.w.size(), 0.0);
  g.b.assign(f.b.size(), 0.0);
  dx = TensorD(x.dims());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int o = 0; o < f.out; ++o) {
    for (int i = 0; i < n; ++i) {
      double dv = dy[static_cast<std::size_t>(i) * f.out + o];
      g.b[static_cast<std::size_t>(o)] += dv;
      for (std::size_t j = 0; j < d; ++j)
        g.w[static_cast<std::size_t>(o) * d + j] +=
            dv * x[static_cast<std::size_t>(i) * d + j];
    }
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int o = 0; o < f.out; ++o)
        acc += dy[static_cast<std::size_t>(i) * f.out + o] *
               f.w[static_cast<std::size_t>(o) * d + j];
      dx[static_cast<std::size_t>(i) * d + j] = acc;
    }
}

NetGradients backprop(const ToyNet& net, const Activations& acts,
                      TensorD dloss, int lo, int hi) {
  NetGradients grads;
  grads.layers.resize(net.layers.size());
  TensorD dy = std::move(dloss);
  for (int i = hi - 1; i >= lo; --i) {
    const ToyNet::Layer& layer = net.layers[static_cast<std::size_t>(i)];
    const TensorD& x = acts.values[static_cast<std::size_t>(i - lo)];
    TensorD dx;
    switch (layer.kind) {
      case ir::LayerKind::kConvolution: {
        // dy arrives flattened when an FC layer follows; restore dims.
        const TensorD& y = acts.values[static_cast<std::size_t>(i - lo + 1)];
        TensorD dy4(y.dims(), dy.values());
        conv_backward(layer.conv, x, dy4,
                      grads.layers[static_cast<std::size_t>(i)], dx);
        break;
      }
      case ir::LayerKind::kRelu:
        relu_backward(x, TensorD(x.dims(), dy.values()), dx);
        break;
      case ir::LayerKind::kPool: {
        const TensorD& y = acts.values[static_cast<std::size_t>(i - lo + 1)];
        pool_backward(layer.pool, x, TensorD(y.dims(), dy.values()), dx);
        break;
      }
      case ir::LayerKind::kFullyConnected:
        fc_backward(layer.fc, x, dy,
                    grads.layers[static_cast<std::size_t>(i)], dx);
        break;
      case ir::LayerKind::kInput:
        throw ShapeError("unexpected input layer inside a net");
    }
    dy = std::move(dx);
  }
  return grads;
}

}  // namespace

NetGradients gradients(const ToyNet& net, const TensorD& batch,
                       const std::vector<int>& labels) {
  Activations acts =
      forward_range(net, batch, 0, static_cast<int>(net.layers.size()));
  TensorD dlogits;
  cross_entropy(acts.values.back(), labels, &dlogits);
  return backprop(net, acts, std::move(dlogits), 0,
                  static_cast<int>(net.layers.size()));
}

NetGradients gradients_range(const ToyNet& net, const TensorD& input,
                             const TensorD& target, int lo, int hi) {
  Activations acts = forward_range(net, input, lo, hi);
  const TensorD& out = acts.values.back();
  if (out.dims() != target.dims())
    throw ShapeError("reconstruction target shape mismatch");
  TensorD dout(out.dims());
  double scale = 2.0 / static_cast<double>(out.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    dout[i] = scale * (out[i] - target[i]);
  return backprop(net, acts, std::move(dout), lo, hi);
}

}  // namespace ppct::train
