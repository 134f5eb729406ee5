#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrl/rng.hpp"

namespace qrl::nn {

// Convolutional dueling q-network, hand-rolled so the whole training loop is
// dependency-free and exactly reproducible. Templated on the scalar type:
// float is the production precision, double exists for finite-difference
// gradient tests.
//
// Data layout conventions (performance-relevant):
//   - activations are channel-last, flat [y][x][c]
//   - conv weights are [ky][kx][ic][oc], biases [oc]
//   - dense weights are [in][out]
// so the innermost loops run contiguously over output channels/units.

struct ConvSpec {
  int filters = 0;
  int width = 0;
  int stride = 0;

  bool operator==(const ConvSpec&) const = default;
};

struct NetworkSpec {
  int in_channels = 0;
  int in_height = 0;
  int in_width = 0;
  std::vector<ConvSpec> convs;  // e.g. {{64,3,2},{32,2,1},{32,2,1}}
  int dense_units = 0;          // e.g. 512
  double dropout = 0.0;         // on the dense layer's activations
  int n_actions = 0;

  bool operator==(const NetworkSpec&) const = default;
};

// The standard architecture: [[64,3,2],[32,2,1],[32,2,1]] convolutions, a
// 512-unit dense layer with 0.2 dropout, and dueling heads, applied to the
// (volume_depth+2, 2d+1, 2d+1) encoded state.
inline NetworkSpec default_network_spec(int distance, int volume_depth,
                                        int n_actions) {
  if (distance < 3 || volume_depth < 1 || n_actions < 1) {
    throw std::invalid_argument("invalid network dimensions");
  }
  NetworkSpec spec;
  spec.in_channels = volume_depth + 2;
  spec.in_height = 2 * distance + 1;
  spec.in_width = 2 * distance + 1;
  spec.convs = {{64, 3, 2}, {32, 2, 1}, {32, 2, 1}};
  spec.dense_units = 512;
  spec.dropout = 0.2;
  spec.n_actions = n_actions;
  return spec;
}

template <typename T>
struct NamedParam {
  std::string name;
  std::vector<T>* data;
};

template <typename T>
struct NamedParamView {
  std::string name;
  const std::vector<T>* data;
};

template <typename T>
struct Gradients {
  std::vector<std::vector<T>> by_param;  // aligned with Network::parameters()

  void zero() {
    for (auto& g : by_param) std::fill(g.begin(), g.end(), T(0));
  }
};

template <typename T>
class Network {
 public:
  // Weights: fan-in-scaled uniform, drawn from `rng` in a fixed order
  // (convs, dense, value head, advantage head); biases zero.
  Network(const NetworkSpec& spec, Rng& rng) : spec_(spec) {
    if (spec.in_channels < 1 || spec.in_height < 1 || spec.in_width < 1 ||
        spec.dense_units < 1 || spec.n_actions < 1) {
      throw std::invalid_argument("network spec has non-positive dimensions");
    }
    if (spec.dropout < 0.0 || spec.dropout >= 1.0) {
      throw std::invalid_argument("dropout must be in [0, 1)");
    }
    int c = spec.in_channels, h = spec.in_height, w = spec.in_width;
    for (const auto& conv : spec.convs) {
      if (conv.filters < 1 || conv.width < 1 || conv.stride < 1) {
        throw std::invalid_argument("conv spec has non-positive dimensions");
      }
      if (conv.width > h || conv.width > w) {
        throw std::invalid_argument("conv kernel exceeds its input");
      }
      Conv layer;
      layer.in_c = c;
      layer.in_h = h;
      layer.in_w = w;
      layer.out_c = conv.filters;
      layer.k = conv.width;
      layer.stride = conv.stride;
      layer.out_h = (h - conv.width) / conv.stride + 1;
      layer.out_w = (w - conv.width) / conv.stride + 1;
      init_uniform(layer.w, conv.width * conv.width * c * conv.filters,
                   conv.width * conv.width * c, rng);
      layer.b.assign(conv.filters, T(0));
      convs_.push_back(std::move(layer));
      c = conv.filters;
      h = convs_.back().out_h;
      w = convs_.back().out_w;
    }
    flat_size_ = c * h * w;
    init_uniform(dense_w_, flat_size_ * spec.dense_units, flat_size_, rng);
    dense_b_.assign(spec.dense_units, T(0));
    init_uniform(value_w_, spec.dense_units, spec.dense_units, rng);
    value_b_.assign(1, T(0));
    init_uniform(adv_w_, spec.dense_units * spec.n_actions, spec.dense_units, rng);
    adv_b_.assign(spec.n_actions, T(0));
  }

  const NetworkSpec& spec() const { return spec_; }
  int input_size() const {
    return spec_.in_channels * spec_.in_height * spec_.in_width;
  }
  int flat_size() const { return flat_size_; }

  // Everything forward/backward needs to remember about one sample.
  struct Cache {
    std::vector<std::vector<T>> conv_in;   // input to each conv layer
    std::vector<std::vector<T>> conv_pre;  // conv outputs before ReLU
    std::vector<T> flat;                   // last conv activations (post ReLU)
    std::vector<T> dense_pre;
    std::vector<T> hidden;                 // dense after ReLU + dropout
    std::vector<T> dropout_mask;           // multiplicative, 0 or 1/(1-p)
    std::vector<T> q;
  };

  // Training mode samples a dropout mask from `rng`; inference is
  // deterministic with dropout disabled (inverted-dropout scaling).
  const std::vector<T>& forward(const std::vector<T>& input, Cache& cache,
                                bool training = false, Rng* rng = nullptr) const {
    if (static_cast<int>(input.size()) != input_size()) {
      throw std::invalid_argument("network input size mismatch");
    }
    if (training && spec_.dropout > 0.0 && rng == nullptr) {
      throw std::invalid_argument("training-mode forward needs an rng for dropout");
    }
    cache.conv_in.resize(convs_.size());
    cache.conv_pre.resize(convs_.size());
    const std::vector<T>* cur = &input;
    for (size_t li = 0; li < convs_.size(); ++li) {
      cache.conv_in[li] = *cur;
      conv_forward(convs_[li], *cur, cache.conv_pre[li]);
      if (li + 1 < convs_.size()) {
        relu_into(cache.conv_pre[li], scratch_);
        cur = &scratch_;
      }
    }
    if (convs_.empty()) {
      cache.flat = input;  // conv-free networks feed the dense layer directly
    } else {
      relu_into(cache.conv_pre.back(), cache.flat);
    }

    dense_forward(cache.flat, dense_w_, dense_b_, spec_.dense_units,
                  cache.dense_pre);
    cache.hidden.resize(spec_.dense_units);
    cache.dropout_mask.assign(spec_.dense_units, T(1));
    const T keep = T(1) - T(spec_.dropout);
    for (int i = 0; i < spec_.dense_units; ++i) {
      T a = cache.dense_pre[i] > T(0) ? cache.dense_pre[i] : T(0);
      if (training && spec_.dropout > 0.0) {
        if (rng->uniform() < spec_.dropout) {
          cache.dropout_mask[i] = T(0);
          a = T(0);
        } else {
          cache.dropout_mask[i] = T(1) / keep;
          a *= cache.dropout_mask[i];
        }
      }
      cache.hidden[i] = a;
    }

    // Dueling combination: q = V + A - mean(A).
    T value = value_b_[0];
    for (int i = 0; i < spec_.dense_units; ++i) {
      value += cache.hidden[i] * value_w_[i];
    }
    dense_forward(cache.hidden, adv_w_, adv_b_, spec_.n_actions, adv_scratch_);
    T mean_adv = T(0);
    for (T a : adv_scratch_) mean_adv += a;
    mean_adv /= T(spec_.n_actions);
    cache.q.resize(spec_.n_actions);
    for (int a = 0; a < spec_.n_actions; ++a) {
      cache.q[a] = value + adv_scratch_[a] - mean_adv;
    }
    return cache.q;
  }

  // Convenience inference entry point.
  std::vector<T> predict(const std::vector<T>& input) const {
    Cache cache;
    return forward(input, cache);
  }

  // Accumulates parameter gradients (aligned with parameters()) for one
  // sample, given dL/dq. Cache must come from a forward() on this network.
  void backward(const Cache& cache, const std::vector<T>& dq,
                Gradients<T>& grads) const {
    if (static_cast<int>(dq.size()) != spec_.n_actions) {
      throw std::invalid_argument("dq size mismatch");
    }
    // Dueling heads: dV = sum(dq), dA_a = dq_a - sum(dq)/|A|.
    T dsum = T(0);
    for (T d : dq) dsum += d;
    const T dvalue = dsum;
    dadv_scratch_.resize(spec_.n_actions);
    for (int a = 0; a < spec_.n_actions; ++a) {
      dadv_scratch_[a] = dq[a] - dsum / T(spec_.n_actions);
    }

    auto& g = grads.by_param;
    const int base = static_cast<int>(convs_.size()) * 2;
    // parameters() order: conv w/b pairs, dense w/b, value w/b, adv w/b.
    std::vector<T>& g_dense_w = g[base + 0];
    std::vector<T>& g_dense_b = g[base + 1];
    std::vector<T>& g_value_w = g[base + 2];
    std::vector<T>& g_value_b = g[base + 3];
    std::vector<T>& g_adv_w = g[base + 4];
    std::vector<T>& g_adv_b = g[base + 5];

    dhidden_.assign(spec_.dense_units, T(0));
    for (int i = 0; i < spec_.dense_units; ++i) {
      g_value_w[i] += cache.hidden[i] * dvalue;
      dhidden_[i] += value_w_[i] * dvalue;
    }
    g_value_b[0] += dvalue;
    for (int i = 0; i < spec_.dense_units; ++i) {
      const T h = cache.hidden[i];
      T acc = T(0);
      const T* wrow = adv_w_.data() + static_cast<size_t>(i) * spec_.n_actions;
      T* grow = g_adv_w.data() + static_cast<size_t>(i) * spec_.n_actions;
      for (int a = 0; a < spec_.n_actions; ++a) {
        grow[a] += h * dadv_scratch_[a];
        acc += wrow[a] * dadv_scratch_[a];
      }
      dhidden_[i] += acc;
    }
    for (int a = 0; a < spec_.n_actions; ++a) g_adv_b[a] += dadv_scratch_[a];

    // Through dropout + ReLU of the dense layer.
    for (int i = 0; i < spec_.dense_units; ++i) {
      T d = dhidden_[i] * cache.dropout_mask[i];
      if (cache.dense_pre[i] <= T(0)) d = T(0);
      dhidden_[i] = d;
    }
    dflat_.assign(flat_size_, T(0));
    for (int i = 0; i < flat_size_; ++i) {
      const T x = cache.flat[i];
      T acc = T(0);
      const T* wrow = dense_w_.data() + static_cast<size_t>(i) * spec_.dense_units;
      T* grow = g_dense_w.data() + static_cast<size_t>(i) * spec_.dense_units;
      for (int u = 0; u < spec_.dense_units; ++u) {
        grow[u] += x * dhidden_[u];
        acc += wrow[u] * dhidden_[u];
      }
      dflat_[i] = acc;
    }
    for (int u = 0; u < spec_.dense_units; ++u) g_dense_b[u] += dhidden_[u];

    // Conv stack, newest first. dflat_ holds dL/d(post-ReLU activations).
    std::vector<T>* dout = &dflat_;
    for (int li = static_cast<int>(convs_.size()) - 1; li >= 0; --li) {
      const Conv& conv = convs_[li];
      // ReLU gate on this layer's outputs.
      for (size_t i = 0; i < dout->size(); ++i) {
        if (cache.conv_pre[li][i] <= T(0)) (*dout)[i] = T(0);
      }
      conv_backward(conv, cache.conv_in[li], *dout, g[2 * li], g[2 * li + 1],
                    li > 0 ? &din_ : nullptr);
      if (li > 0) {
        std::swap(*dout, din_);  // din_ sized by conv_backward
      }
    }
  }

  std::vector<NamedParam<T>> parameters() {
    std::vector<NamedParam<T>> out;
    for (size_t i = 0; i < convs_.size(); ++i) {
      out.push_back({"conv" + std::to_string(i) + ".weight", &convs_[i].w});
      out.push_back({"conv" + std::to_string(i) + ".bias", &convs_[i].b});
    }
    out.push_back({"dense.weight", &dense_w_});
    out.push_back({"dense.bias", &dense_b_});
    out.push_back({"value.weight", &value_w_});
    out.push_back({"value.bias", &value_b_});
    out.push_back({"advantage.weight", &adv_w_});
    out.push_back({"advantage.bias", &adv_b_});
    return out;
  }
  std::vector<NamedParamView<T>> parameters() const {
    std::vector<NamedParamView<T>> out;
    for (auto& p : const_cast<Network&>(*this).parameters()) {
      out.push_back({p.name, p.data});
    }
    return out;
  }

  Gradients<T> make_gradients() const {
    Gradients<T> g;
    for (const auto& p : parameters()) {
      g.by_param.emplace_back(p.data->size(), T(0));
    }
    return g;
  }

  // Hard copy of all weights from another network with an identical spec.
  void copy_weights_from(const Network& other) {
    if (!(other.spec_ == spec_)) {
      throw std::invalid_argument("cannot sync networks with different specs");
    }
    auto dst = parameters();
    auto src = const_cast<Network&>(other).parameters();
    for (size_t i = 0; i < dst.size(); ++i) *dst[i].data = *src[i].data;
  }

 private:
  struct Conv {
    int in_c, in_h, in_w, out_c, k, stride, out_h, out_w;
    std::vector<T> w, b;
  };

  void init_uniform(std::vector<T>& w, int count, int fan_in, Rng& rng) {
    const float scale = std::sqrt(1.0f / static_cast<float>(fan_in));
    w.resize(count);
    for (auto& x : w) x = static_cast<T>(rng.uniform_symmetric(scale));
  }

  static void relu_into(const std::vector<T>& in, std::vector<T>& out) {
    out.resize(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
  }

  static void dense_forward(const std::vector<T>& in, const std::vector<T>& w,
                            const std::vector<T>& b, int out_n, std::vector<T>& out) {
    out.assign(b.begin(), b.end());
    for (size_t i = 0; i < in.size(); ++i) {
      const T x = in[i];
      if (x == T(0)) continue;
      const T* wrow = w.data() + i * out_n;
      for (int o = 0; o < out_n; ++o) out[o] += x * wrow[o];
    }
  }

  static void conv_forward(const Conv& conv, const std::vector<T>& in,
                           std::vector<T>& out) {
    out.resize(static_cast<size_t>(conv.out_h) * conv.out_w * conv.out_c);
    const int row_span = conv.k * conv.in_c;  // contiguous input run per ky
    for (int oy = 0; oy < conv.out_h; ++oy) {
      for (int ox = 0; ox < conv.out_w; ++ox) {
        T* o = out.data() +
               (static_cast<size_t>(oy) * conv.out_w + ox) * conv.out_c;
        for (int c = 0; c < conv.out_c; ++c) o[c] = conv.b[c];
        for (int ky = 0; ky < conv.k; ++ky) {
          const T* irow = in.data() +
                          (static_cast<size_t>(oy * conv.stride + ky) * conv.in_w +
                           ox * conv.stride) *
                              conv.in_c;
          const T* wrow = conv.w.data() +
                          static_cast<size_t>(ky) * row_span * conv.out_c;
          for (int j = 0; j < row_span; ++j) {
            const T x = irow[j];
            if (x == T(0)) continue;  // encoded states are sparse
            const T* wv = wrow + static_cast<size_t>(j) * conv.out_c;
            for (int c = 0; c < conv.out_c; ++c) o[c] += x * wv[c];
          }
        }
      }
    }
  }

  void conv_backward(const Conv& conv, const std::vector<T>& in,
                     const std::vector<T>& dout, std::vector<T>& gw,
                     std::vector<T>& gb, std::vector<T>* din) const {
    if (din) din->assign(in.size(), T(0));
    const int row_span = conv.k * conv.in_c;
    for (int oy = 0; oy < conv.out_h; ++oy) {
      for (int ox = 0; ox < conv.out_w; ++ox) {
        const T* d = dout.data() +
                     (static_cast<size_t>(oy) * conv.out_w + ox) * conv.out_c;
        for (int c = 0; c < conv.out_c; ++c) gb[c] += d[c];
        for (int ky = 0; ky < conv.k; ++ky) {
          const size_t ibase =
              (static_cast<size_t>(oy * conv.stride + ky) * conv.in_w +
               ox * conv.stride) *
              conv.in_c;
          const T* irow = in.data() + ibase;
          const size_t wbase = static_cast<size_t>(ky) * row_span * conv.out_c;
          for (int j = 0; j < row_span; ++j) {
            const T* wv = conv.w.data() + wbase + static_cast<size_t>(j) * conv.out_c;
            T* gv = gw.data() + wbase + static_cast<size_t>(j) * conv.out_c;
            const T x = irow[j];
            T acc = T(0);
            for (int c = 0; c < conv.out_c; ++c) {
              gv[c] += x * d[c];
              acc += wv[c] * d[c];
            }
            if (din) (*din)[ibase + j] += acc;
          }
        }
      }
    }
  }

  NetworkSpec spec_;
  std::vector<Conv> convs_;
  int flat_size_ = 0;
  std::vector<T> dense_w_, dense_b_;
  std::vector<T> value_w_, value_b_;
  std::vector<T> adv_w_, adv_b_;
  // Scratch buffers (mutable: forward/backward are logically const).
  mutable std::vector<T> scratch_, adv_scratch_, dadv_scratch_;
  mutable std::vector<T> dhidden_, dflat_, din_;
};

// Adaptive-moment gradient descent with the customary constants; state is
// kept per parameter tensor, aligned with Network::parameters().
template <typename T>
class Adam {
 public:
  explicit Adam(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  T learning_rate() const { return lr_; }

  void step(Network<T>& net, const Gradients<T>& grads) {
    auto params = net.parameters();
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.data->size(), T(0));
        v_.emplace_back(p.data->size(), T(0));
      }
    }
    if (params.size() != grads.by_param.size() || params.size() != m_.size()) {
      throw std::invalid_argument("optimizer/gradient/network shape mismatch");
    }
    ++t_;
    const T bc1 = T(1) - std::pow(beta1_, T(t_));
    const T bc2 = T(1) - std::pow(beta2_, T(t_));
    for (size_t pi = 0; pi < params.size(); ++pi) {
      std::vector<T>& w = *params[pi].data;
      const std::vector<T>& g = grads.by_param[pi];
      std::vector<T>& m = m_[pi];
      std::vector<T>& v = v_[pi];
      for (size_t i = 0; i < w.size(); ++i) {
        m[i] = beta1_ * m[i] + (T(1) - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (T(1) - beta2_) * g[i] * g[i];
        const T mhat = m[i] / bc1;
        const T vhat = v[i] / bc2;
        w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  T lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace qrl::nn
