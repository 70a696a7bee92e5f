#pragma once

// Dense 64-bit tensor with shape (batch, channels, length), stored with the
// length axis contiguous so convolution inner loops run over contiguous
// memory. Dense activations use length 1.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace actinet {

struct Tensor {
  int batch = 0;
  int channels = 0;
  int length = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int b, int c, int t)
      : batch(b), channels(c), length(t),
        v(static_cast<std::size_t>(b) * c * t, 0.0) {
    if (b < 0 || c < 0 || t < 0) throw std::invalid_argument("Tensor: negative dim");
  }

  // Re-dimension in place; reuses capacity, contents unspecified.
  void reshape(int b, int c, int t) {
    batch = b;
    channels = c;
    length = t;
    v.resize(static_cast<std::size_t>(b) * c * t);
  }

  std::size_t size() const { return v.size(); }
  int features() const { return channels * length; }  // per sample

  double& at(int b, int c, int t) {
    return v[(static_cast<std::size_t>(b) * channels + c) * length + t];
  }
  double at(int b, int c, int t) const {
    return v[(static_cast<std::size_t>(b) * channels + c) * length + t];
  }
  double* row(int b, int c) {
    return v.data() + (static_cast<std::size_t>(b) * channels + c) * length;
  }
  const double* row(int b, int c) const {
    return v.data() + (static_cast<std::size_t>(b) * channels + c) * length;
  }
  double* sample(int b) { return v.data() + static_cast<std::size_t>(b) * features(); }
  const double* sample(int b) const {
    return v.data() + static_cast<std::size_t>(b) * features();
  }

  bool same_shape(const Tensor& o) const {
    return batch == o.batch && channels == o.channels && length == o.length;
  }
  std::string shape_str() const {
    return "(" + std::to_string(batch) + "," + std::to_string(channels) + "," +
           std::to_string(length) + ")";
  }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

}  // namespace actinet
