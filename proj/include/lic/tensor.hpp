// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lic/common.hpp"

namespace lic {

/// Dense 4-D float tensor, row-major (n, c, h, w). The unit of all network
/// computation; immutable by convention once an op has returned it.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, float fill = 0.0f)
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {
    require(n_ >= 0 && c_ >= 0 && h_ >= 0 && w_ >= 0, "negative tensor dim (", n_, ",", c_,
            ",", h_, ",", w_, ")");
  }

  std::size_t numel() const { return data.size(); }

  std::size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw;
  }
  float& at(int in, int ic, int ih, int iw) { return data[index(in, ic, ih, iw)]; }
  float at(int in, int ic, int ih, int iw) const { return data[index(in, ic, ih, iw)]; }

  float* plane(int in, int ic) { return data.data() + index(in, ic, 0, 0); }
  const float* plane(int in, int ic) const { return data.data() + index(in, ic, 0, 0); }

  bool same_dims(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string dims_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
           "," + std::to_string(w) + ")";
  }
};

/// Symmetric int8 tensor: dequantized value = int * scale, zero point 0.
/// scale has one entry (per-tensor, activations) or `c` entries
/// (per-output-channel, weights).
struct QuantTensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<std::int8_t> data;
  std::vector<float> scale;

  QuantTensor() = default;
  QuantTensor(int n_, int c_, int h_, int w_, float s = 1.0f)
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0), scale(1, s) {}

  std::size_t numel() const { return data.size(); }
  std::size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw;
  }
  std::int8_t& at(int in, int ic, int ih, int iw) { return data[index(in, ic, ih, iw)]; }
  std::int8_t at(int in, int ic, int ih, int iw) const {
    return data[index(in, ic, ih, iw)];
  }

  /// Per-channel weight scales index the output-channel dim (n); activations
  /// carry a single per-tensor scale.
  bool per_channel() const { return scale.size() > 1; }
  float scale_for(int out_channel) const {
    return per_channel() ? scale[static_cast<std::size_t>(out_channel)] : scale[0];
  }

  float dequant(int in, int ic, int ih, int iw) const {
    return static_cast<float>(at(in, ic, ih, iw)) * scale_for(in);
  }

  std::string dims_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
           "," + std::to_string(w) + ")";
  }
};

enum class LayerKind : std::uint8_t { conv = 0, deconv = 1 };
enum class Activation : std::uint8_t { none = 0, relu = 1, relu6 = 2 };

/// Static description of one (de)convolution layer.
struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;  // 3 or 5 in shipped configs
  int stride = 1;  // 1 or 2
  Activation act = Activation::none;
  std::string name;  // used in error messages

  int pad() const { return (kernel - 1) / 2; }

  void validate() const {
    require(in_channels > 0 && out_channels > 0, "layer ", name, ": bad channels (",
            in_channels, " -> ", out_channels, ")");
    require(kernel > 0, "layer ", name, ": bad kernel ", kernel);
    require(stride == 1 || stride == 2, "layer ", name, ": stride must be 1 or 2, got ",
            stride);
  }
};

inline const char* to_string(LayerKind k) {
  return k == LayerKind::conv ? "conv" : "deconv";
}

/// Output spatial extent of a layer: ceil(h/stride) for conv (same padding),
/// stride*h for transposed conv.
inline int out_extent(LayerKind kind, int extent, int stride) {
  if (kind == LayerKind::conv) return (extent + stride - 1) / stride;
  return extent * stride;
}

} // namespace lic
