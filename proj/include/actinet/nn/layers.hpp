#pragma once

// Layer zoo with manual forward/backward. Convolution is cross-correlation
// (no kernel flip) with valid padding: out[i,k] = sum_f sum_n w[k,f,n] *
// in[i*stride+n, f] + b[k]. Inner loops run along the contiguous length axis.
//
// backward() accumulates: input gradients are += into the caller's buffers
// and parameter gradients are += into the layer's grad arrays, so minibatch
// accumulation order stays fixed and reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/nn/tensor.hpp"
#include "actinet/rng.hpp"

namespace actinet {

enum class Mode { Train, Eval };

struct ParamBlock {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;
};

// Non-trainable persistent values (batchnorm running statistics).
struct StateBlock {
  std::string name;
  std::vector<double> value;
};

// Per-sample feature-map shape; batch size is never part of layer geometry.
struct FeatShape {
  int channels = 0;
  int length = 0;
  std::string str() const {
    return std::to_string(channels) + "x" + std::to_string(length);
  }
};

// Layer-specific forward state needed again at backward time.
struct Trace {
  std::vector<int> iaux;
  std::vector<double> daux;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual const char* kind() const = 0;
  virtual int arity() const { return 1; }
  virtual FeatShape infer(const std::vector<FeatShape>& in) const = 0;
  virtual void forward(const std::vector<const Tensor*>& in, Mode mode, Rng* rng,
                       Tensor& out, Trace& tr) const = 0;
  virtual void backward(const std::vector<const Tensor*>& in, const Tensor& out,
                        const Trace& tr, const Tensor& dout,
                        const std::vector<Tensor*>& din) = 0;
  virtual std::vector<ParamBlock*> params() { return {}; }
  virtual std::vector<StateBlock*> state() { return {}; }
  // Fan-in-scaled uniform init (He bound sqrt(6/fan_in)); biases zero.
  virtual void init_params(Rng&) {}
};

namespace detail {
inline void init_uniform(std::vector<double>& w, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& x : w) x = rng.uniform(-bound, bound);
}
}  // namespace detail

class Conv1d final : public Layer {
 public:
  Conv1d(int in_channels, int out_channels, int kernel_width, int stride = 1)
      : in_(in_channels), out_(out_channels), n_(kernel_width), stride_(stride) {
    if (in_ < 1 || out_ < 1 || n_ < 1 || stride_ < 1)
      throw std::invalid_argument("Conv1d: channels, width and stride must be >= 1");
    w_.name = "w";
    w_.value.assign(static_cast<std::size_t>(out_) * in_ * n_, 0.0);
    w_.grad = w_.value;
    b_.name = "b";
    b_.value.assign(out_, 0.0);
    b_.grad = b_.value;
  }

  const char* kind() const override { return "conv1d"; }

  FeatShape infer(const std::vector<FeatShape>& in) const override {
    if (in[0].channels != in_)
      throw std::invalid_argument("conv1d: expected " + std::to_string(in_) +
                                  " input channels, got " + std::to_string(in[0].channels));
    if (in[0].length < n_)
      throw std::invalid_argument("conv1d: input length " + std::to_string(in[0].length) +
                                  " shorter than kernel width " + std::to_string(n_));
    return {out_, (in[0].length - n_) / stride_ + 1};
  }

  void forward(const std::vector<const Tensor*>& in, Mode, Rng*, Tensor& out,
               Trace&) const override {
    const Tensor& x = *in[0];
    const int to = (x.length - n_) / stride_ + 1;
    out.reshape(x.batch, out_, to);
    // Output positions accumulate in a stack buffer: no aliasing with the
    // input, so the inner loops vectorize.
    constexpr int kChunk = 768;
    double acc[kChunk];
    for (int b = 0; b < x.batch; ++b) {
      for (int k = 0; k < out_; ++k) {
        double* o = out.row(b, k);
        for (int c0 = 0; c0 < to; c0 += kChunk) {
          const int cs = std::min(kChunk, to - c0);
          const double bias = b_.value[k];
          for (int i = 0; i < cs; ++i) acc[i] = bias;
          for (int f = 0; f < in_; ++f) {
            const double* r = x.row(b, f);
            const double* __restrict wk =
                &w_.value[(static_cast<std::size_t>(k) * in_ + f) * n_];
            if (stride_ == 1) {
              for (int n = 0; n < n_; ++n) {
                const double wv = wk[n];
                const double* __restrict rn = r + c0 + n;
                for (int i = 0; i < cs; ++i) acc[i] += wv * rn[i];
              }
            } else {
              for (int n = 0; n < n_; ++n) {
                const double wv = wk[n];
                for (int i = 0; i < cs; ++i)
                  acc[i] += wv * r[(c0 + i) * stride_ + n];
              }
            }
          }
          for (int i = 0; i < cs; ++i) o[c0 + i] = acc[i];
        }
      }
    }
  }

  void backward(const std::vector<const Tensor*>& in, const Tensor& out, const Trace&,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    const Tensor& x = *in[0];
    Tensor* dx = din[0];
    const int to = out.length;
    constexpr int kChunk = 768;

    // Bias gradients.
    for (int b = 0; b < x.batch; ++b)
      for (int k = 0; k < out_; ++k) {
        const double* __restrict g = dout.row(b, k);
        double gsum = 0.0;
        for (int i = 0; i < to; ++i) gsum += g[i];
        b_.grad[k] += gsum;
      }

    // Weight gradients. One pass over output positions accumulates all
    // kernel taps at once (the inner n-loop vectorizes); the input row
    // stays cache-hot across the k loop.
    for (int b = 0; b < x.batch; ++b) {
      for (int f = 0; f < in_; ++f) {
        const double* r = x.row(b, f);
        for (int k = 0; k < out_; ++k) {
          const double* __restrict g = dout.row(b, k);
          double* __restrict gw =
              &w_.grad[(static_cast<std::size_t>(k) * in_ + f) * n_];
          if (stride_ == 1 && n_ <= 64) {
            double acc[64];
            for (int n = 0; n < n_; ++n) acc[n] = 0.0;
            for (int i = 0; i < to; ++i) {
              const double gv = g[i];
              const double* __restrict ri = r + i;
              for (int n = 0; n < n_; ++n) acc[n] += ri[n] * gv;
            }
            for (int n = 0; n < n_; ++n) gw[n] += acc[n];
          } else {
            for (int n = 0; n < n_; ++n) {
              double acc = 0.0;
              for (int i = 0; i < to; ++i) acc += r[i * stride_ + n] * g[i];
              gw[n] += acc;
            }
          }
        }
      }
    }

    if (!dx) return;
    // Input gradients, chunk-accumulated like the forward pass.
    double dacc[kChunk];
    for (int b = 0; b < x.batch; ++b) {
      for (int f = 0; f < in_; ++f) {
        double* dr = dx->row(b, f);
        for (int c0 = 0; c0 < x.length; c0 += kChunk) {
          const int cs = std::min(kChunk, x.length - c0);
          for (int i = 0; i < cs; ++i) dacc[i] = 0.0;
          for (int k = 0; k < out_; ++k) {
            const double* __restrict g = dout.row(b, k);
            const double* __restrict wk =
                &w_.value[(static_cast<std::size_t>(k) * in_ + f) * n_];
            if (stride_ == 1) {
              for (int n = 0; n < n_; ++n) {
                const double wv = wk[n];
                // positions c0+i receive wv * g[c0+i-n]
                const int i0 = std::max(0, 0 - (c0 - n));
                const int i1 = std::min(cs, to - (c0 - n));
                const double* __restrict gn = g + c0 - n;
                for (int i = i0; i < i1; ++i) dacc[i] += wv * gn[i];
              }
            } else {
              for (int n = 0; n < n_; ++n) {
                const double wv = wk[n];
                for (int i = 0; i < to; ++i) {
                  const int t = i * stride_ + n;
                  if (t >= c0 && t < c0 + cs) dacc[t - c0] += wv * g[i];
                }
              }
            }
          }
          for (int i = 0; i < cs; ++i) dr[c0 + i] += dacc[i];
        }
      }
    }
  }

  std::vector<ParamBlock*> params() override { return {&w_, &b_}; }
  void init_params(Rng& rng) override {
    detail::init_uniform(w_.value, in_ * n_, rng);
    std::fill(b_.value.begin(), b_.value.end(), 0.0);
  }

  int kernel_width() const { return n_; }

 private:
  int in_, out_, n_, stride_;
  ParamBlock w_, b_;
};

class MaxPool1d final : public Layer {
 public:
  MaxPool1d(int width, int stride) : width_(width), stride_(stride) {
    if (width_ < 1) throw std::invalid_argument("maxpool: width must be >= 1");
    if (stride_ < 1) throw std::invalid_argument("maxpool: stride must be >= 1");
  }

  const char* kind() const override { return "maxpool"; }

  FeatShape infer(const std::vector<FeatShape>& in) const override {
    if (in[0].length < width_)
      throw std::invalid_argument("maxpool: input length " + std::to_string(in[0].length) +
                                  " shorter than window " + std::to_string(width_));
    return {in[0].channels, (in[0].length - width_) / stride_ + 1};
  }

  void forward(const std::vector<const Tensor*>& in, Mode, Rng*, Tensor& out,
               Trace& tr) const override {
    const Tensor& x = *in[0];
    const int to = (x.length - width_) / stride_ + 1;
    out.reshape(x.batch, x.channels, to);
    tr.iaux.resize(out.size());
    std::size_t a = 0;
    for (int b = 0; b < x.batch; ++b)
      for (int c = 0; c < x.channels; ++c) {
        const double* r = x.row(b, c);
        double* o = out.row(b, c);
        for (int i = 0; i < to; ++i) {
          int best = i * stride_;
          double bv = r[best];
          for (int t = best + 1; t < i * stride_ + width_; ++t)
            if (r[t] > bv) {  // ties keep the earliest position
              bv = r[t];
              best = t;
            }
          o[i] = bv;
          tr.iaux[a++] = best;
        }
      }
  }

  void backward(const std::vector<const Tensor*>& in, const Tensor& out, const Trace& tr,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    Tensor* dx = din[0];
    if (!dx) return;
    const Tensor& x = *in[0];
    std::size_t a = 0;
    for (int b = 0; b < x.batch; ++b)
      for (int c = 0; c < x.channels; ++c) {
        double* dr = dx->row(b, c);
        const double* g = dout.row(b, c);
        for (int i = 0; i < out.length; ++i) dr[tr.iaux[a++]] += g[i];
      }
  }

 private:
  int width_, stride_;
};

// Fully connected layer; any (channels, length) input is read as a flat
// feature vector in row (channel-major) order.
class Dense final : public Layer {
 public:
  Dense(int in_features, int out_units) : in_(in_features), out_(out_units) {
    if (in_ < 1 || out_ < 1) throw std::invalid_argument("dense: sizes must be >= 1");
    w_.name = "w";
    w_.value.assign(static_cast<std::size_t>(in_) * out_, 0.0);
    w_.grad = w_.value;
    b_.name = "b";
    b_.value.assign(out_, 0.0);
    b_.grad = b_.value;
  }

  const char* kind() const override { return "dense"; }

  FeatShape infer(const std::vector<FeatShape>& in) const override {
    if (in[0].channels * in[0].length != in_)
      throw std::invalid_argument("dense: expected " + std::to_string(in_) +
                                  " input features, got " + in[0].str());
    return {out_, 1};
  }

  void forward(const std::vector<const Tensor*>& in, Mode, Rng*, Tensor& out,
               Trace&) const override {
    const Tensor& x = *in[0];
    out.reshape(x.batch, out_, 1);
    constexpr int kChunk = 768;
    double acc[kChunk];
    for (int b = 0; b < x.batch; ++b) {
      const double* __restrict xi = x.sample(b);
      double* o = out.sample(b);
      for (int c0 = 0; c0 < out_; c0 += kChunk) {
        const int cs = std::min(kChunk, out_ - c0);
        const double* __restrict bb = b_.value.data() + c0;
        for (int j = 0; j < cs; ++j) acc[j] = bb[j];
        for (int i = 0; i < in_; ++i) {
          const double v = xi[i];
          if (v == 0.0) continue;  // ReLU sparsity
          const double* __restrict wr =
              &w_.value[static_cast<std::size_t>(i) * out_ + c0];
          for (int j = 0; j < cs; ++j) acc[j] += v * wr[j];
        }
        for (int j = 0; j < cs; ++j) o[c0 + j] = acc[j];
      }
    }
  }

  void backward(const std::vector<const Tensor*>& in, const Tensor&, const Trace&,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    const Tensor& x = *in[0];
    Tensor* dx = din[0];
    for (int b = 0; b < x.batch; ++b) {
      const double* __restrict xi = x.sample(b);
      const double* __restrict g = dout.sample(b);
      double* dxi = dx ? dx->sample(b) : nullptr;
      for (int j = 0; j < out_; ++j) b_.grad[j] += g[j];
      for (int i = 0; i < in_; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * out_;
        const double v = xi[i];
        if (dxi) {
          const double* __restrict wr = &w_.value[base];
          double acc = 0.0;
          for (int j = 0; j < out_; ++j) acc += wr[j] * g[j];
          dxi[i] += acc;
        }
        if (v != 0.0) {
          double* __restrict gw = &w_.grad[base];
          for (int j = 0; j < out_; ++j) gw[j] += v * g[j];
        }
      }
    }
  }

  std::vector<ParamBlock*> params() override { return {&w_, &b_}; }
  void init_params(Rng& rng) override {
    detail::init_uniform(w_.value, in_, rng);
    std::fill(b_.value.begin(), b_.value.end(), 0.0);
  }

 private:
  int in_, out_;
  ParamBlock w_, b_;
};

class Relu final : public Layer {
 public:
  const char* kind() const override { return "relu"; }
  FeatShape infer(const std::vector<FeatShape>& in) const override { return in[0]; }

  void forward(const std::vector<const Tensor*>& in, Mode, Rng*, Tensor& out,
               Trace&) const override {
    out = *in[0];
    for (double& v : out.v) v = v > 0.0 ? v : 0.0;
  }

  void backward(const std::vector<const Tensor*>&, const Tensor& out, const Trace&,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    Tensor* dx = din[0];
    if (!dx) return;
    for (std::size_t i = 0; i < out.v.size(); ++i)
      if (out.v[i] > 0.0) dx->v[i] += dout.v[i];
  }
};

// Per-channel normalization over (batch x length). Batch statistics are used
// in training; exponential running averages (decay 0.99) in inference.
// Running statistics advance in backward(), which keeps forward() const and
// side-effect free.
class BatchNorm1d final : public Layer {
 public:
  explicit BatchNorm1d(int channels, double epsilon = 1e-5, double decay = 0.99)
      : c_(channels), eps_(epsilon), decay_(decay) {
    if (c_ < 1) throw std::invalid_argument("batchnorm: channels must be >= 1");
    if (!(eps_ > 0.0)) throw std::invalid_argument("batchnorm: epsilon must be > 0");
    gamma_.name = "gamma";
    gamma_.value.assign(c_, 1.0);
    gamma_.grad.assign(c_, 0.0);
    beta_.name = "beta";
    beta_.value.assign(c_, 0.0);
    beta_.grad.assign(c_, 0.0);
    running_mean_.name = "running_mean";
    running_mean_.value.assign(c_, 0.0);
    running_var_.name = "running_var";
    running_var_.value.assign(c_, 1.0);
  }

  const char* kind() const override { return "batchnorm"; }

  FeatShape infer(const std::vector<FeatShape>& in) const override {
    if (in[0].channels != c_)
      throw std::invalid_argument("batchnorm: expected " + std::to_string(c_) +
                                  " channels, got " + std::to_string(in[0].channels));
    return in[0];
  }

  void forward(const std::vector<const Tensor*>& in, Mode mode, Rng*, Tensor& out,
               Trace& tr) const override {
    const Tensor& x = *in[0];
    out.reshape(x.batch, x.channels, x.length);
    const int nc = x.batch * x.length;
    if (mode == Mode::Train) tr.daux.resize(2 * static_cast<std::size_t>(c_));
    for (int c = 0; c < c_; ++c) {
      double m, var;
      if (mode == Mode::Train) {
        double s = 0.0, sq = 0.0;
        for (int b = 0; b < x.batch; ++b) {
          const double* r = x.row(b, c);
          for (int t = 0; t < x.length; ++t) {
            s += r[t];
            sq += r[t] * r[t];
          }
        }
        m = s / nc;
        var = std::max(0.0, sq / nc - m * m);
        tr.daux[2 * c] = m;
        tr.daux[2 * c + 1] = var;
      } else {
        m = running_mean_.value[c];
        var = running_var_.value[c];
      }
      const double inv = 1.0 / std::sqrt(var + eps_);
      const double g = gamma_.value[c], bt = beta_.value[c];
      for (int b = 0; b < x.batch; ++b) {
        const double* r = x.row(b, c);
        double* o = out.row(b, c);
        for (int t = 0; t < x.length; ++t) o[t] = g * (r[t] - m) * inv + bt;
      }
    }
  }

  void backward(const std::vector<const Tensor*>& in, const Tensor&, const Trace& tr,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    const Tensor& x = *in[0];
    Tensor* dx = din[0];
    const bool train = !tr.daux.empty();
    const int nc = x.batch * x.length;
    for (int c = 0; c < c_; ++c) {
      const double m = train ? tr.daux[2 * c] : running_mean_.value[c];
      const double var = train ? tr.daux[2 * c + 1] : running_var_.value[c];
      const double inv = 1.0 / std::sqrt(var + eps_);
      const double g = gamma_.value[c];
      double dgamma = 0.0, dbeta = 0.0, dxhat_sum = 0.0, dxhat_xc_sum = 0.0;
      for (int b = 0; b < x.batch; ++b) {
        const double* r = x.row(b, c);
        const double* go = dout.row(b, c);
        for (int t = 0; t < x.length; ++t) {
          const double xc = r[t] - m;
          dgamma += go[t] * xc * inv;
          dbeta += go[t];
          dxhat_sum += go[t] * g;
          dxhat_xc_sum += go[t] * g * xc;
        }
      }
      gamma_.grad[c] += dgamma;
      beta_.grad[c] += dbeta;
      if (dx) {
        if (train) {
          // dL/dx for batch statistics: standard closed form.
          const double k1 = inv / nc;
          for (int b = 0; b < x.batch; ++b) {
            const double* r = x.row(b, c);
            const double* go = dout.row(b, c);
            double* dr = dx->row(b, c);
            for (int t = 0; t < x.length; ++t) {
              const double xc = r[t] - m;
              dr[t] += k1 * (nc * go[t] * g - dxhat_sum -
                             xc * inv * inv * dxhat_xc_sum);
            }
          }
        } else {
          for (int b = 0; b < x.batch; ++b) {
            const double* go = dout.row(b, c);
            double* dr = dx->row(b, c);
            for (int t = 0; t < x.length; ++t) dr[t] += go[t] * g * inv;
          }
        }
      }
      if (train) {
        running_mean_.value[c] = decay_ * running_mean_.value[c] + (1.0 - decay_) * m;
        running_var_.value[c] = decay_ * running_var_.value[c] + (1.0 - decay_) * var;
      }
    }
  }

  std::vector<ParamBlock*> params() override { return {&gamma_, &beta_}; }
  std::vector<StateBlock*> state() override { return {&running_mean_, &running_var_}; }

 private:
  int c_;
  double eps_, decay_;
  ParamBlock gamma_, beta_;
  StateBlock running_mean_, running_var_;
};

// Inverted dropout: kept activations are scaled by 1/keep during training;
// inference is the identity.
class Dropout final : public Layer {
 public:
  explicit Dropout(double keep_prob) : keep_(keep_prob) {
    if (!(keep_ > 0.0 && keep_ <= 1.0))
      throw std::invalid_argument("dropout: keep probability must be in (0,1]");
  }

  const char* kind() const override { return "dropout"; }
  FeatShape infer(const std::vector<FeatShape>& in) const override { return in[0]; }

  void forward(const std::vector<const Tensor*>& in, Mode mode, Rng* rng, Tensor& out,
               Trace& tr) const override {
    out = *in[0];
    if (mode != Mode::Train || keep_ == 1.0) return;
    if (!rng)
      throw std::invalid_argument("dropout: training-mode forward needs an rng");
    tr.daux.resize(out.v.size());
    const double scale = 1.0 / keep_;
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      const double m = rng->bernoulli(keep_) ? scale : 0.0;
      tr.daux[i] = m;
      out.v[i] *= m;
    }
  }

  void backward(const std::vector<const Tensor*>&, const Tensor&, const Trace& tr,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    Tensor* dx = din[0];
    if (!dx) return;
    if (tr.daux.empty()) {
      for (std::size_t i = 0; i < dout.v.size(); ++i) dx->v[i] += dout.v[i];
    } else {
      for (std::size_t i = 0; i < dout.v.size(); ++i)
        dx->v[i] += dout.v[i] * tr.daux[i];
    }
  }

 private:
  double keep_;
};

// Channel-wise concatenation of two inputs with equal lengths.
class Concat final : public Layer {
 public:
  const char* kind() const override { return "concat"; }
  int arity() const override { return 2; }

  FeatShape infer(const std::vector<FeatShape>& in) const override {
    if (in[0].length != in[1].length)
      throw std::invalid_argument("concat: length mismatch " + in[0].str() + " vs " +
                                  in[1].str());
    return {in[0].channels + in[1].channels, in[0].length};
  }

  void forward(const std::vector<const Tensor*>& in, Mode, Rng*, Tensor& out,
               Trace&) const override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    out.reshape(a.batch, a.channels + b.channels, a.length);
    for (int bb = 0; bb < a.batch; ++bb) {
      std::copy(a.sample(bb), a.sample(bb) + a.features(), out.sample(bb));
      std::copy(b.sample(bb), b.sample(bb) + b.features(),
                out.sample(bb) + a.features());
    }
  }

  void backward(const std::vector<const Tensor*>& in, const Tensor&, const Trace&,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    for (int bb = 0; bb < a.batch; ++bb) {
      const double* g = dout.sample(bb);
      if (din[0]) {
        double* da = din[0]->sample(bb);
        for (int i = 0; i < a.features(); ++i) da[i] += g[i];
      }
      if (din[1]) {
        double* db = din[1]->sample(bb);
        for (int i = 0; i < b.features(); ++i) db[i] += g[i + a.features()];
      }
    }
  }
};

// Extracts one time position from every channel, e.g. the center epoch of
// the raw input window.
class CenterPick final : public Layer {
 public:
  explicit CenterPick(int index) : index_(index) {
    if (index_ < 0) throw std::invalid_argument("centerpick: negative index");
  }

  const char* kind() const override { return "centerpick"; }

  FeatShape infer(const std::vector<FeatShape>& in) const override {
    if (index_ >= in[0].length)
      throw std::invalid_argument("centerpick: index " + std::to_string(index_) +
                                  " outside length " + std::to_string(in[0].length));
    return {in[0].channels, 1};
  }

  void forward(const std::vector<const Tensor*>& in, Mode, Rng*, Tensor& out,
               Trace&) const override {
    const Tensor& x = *in[0];
    out.reshape(x.batch, x.channels, 1);
    for (int b = 0; b < x.batch; ++b)
      for (int c = 0; c < x.channels; ++c) out.at(b, c, 0) = x.at(b, c, index_);
  }

  void backward(const std::vector<const Tensor*>& in, const Tensor&, const Trace&,
                const Tensor& dout, const std::vector<Tensor*>& din) override {
    Tensor* dx = din[0];
    if (!dx) return;
    const Tensor& x = *in[0];
    for (int b = 0; b < x.batch; ++b)
      for (int c = 0; c < x.channels; ++c)
        dx->at(b, c, index_) += dout.at(b, c, 0);
  }

 private:
  int index_;
};

}  // namespace actinet
