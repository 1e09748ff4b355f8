// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lic/common.hpp"
#include "lic/tensor.hpp"

namespace lic {

// ---------------------------------------------------------------------------
// Float kernels.
//
// Accumulation order for every output element is fixed at (ic, kh, kw), and
// work is partitioned across threads by whole output planes, so results are
// identical for any thread count.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_conv_args(const Tensor& x, const Tensor& w, std::size_t bias_len,
                            const LayerSpec& spec) {
  spec.validate();
  require(x.c == spec.in_channels, "layer ", spec.name, ": input has ", x.c,
          " channels, spec expects ", spec.in_channels);
  require(w.n == spec.out_channels && w.c == spec.in_channels && w.h == spec.kernel &&
              w.w == spec.kernel,
          "layer ", spec.name, ": weight dims ", w.dims_str(), " do not match spec (",
          spec.out_channels, ",", spec.in_channels, ",", spec.kernel, ",", spec.kernel,
          ")");
  require(bias_len == 0 || bias_len == static_cast<std::size_t>(spec.out_channels),
          "layer ", spec.name, ": bias length ", bias_len, " != out channels ",
          spec.out_channels);
}

inline float apply_act(float v, Activation act) {
  switch (act) {
    case Activation::relu: return v > 0.0f ? v : 0.0f;
    case Activation::relu6: return v < 0.0f ? 0.0f : (v > 6.0f ? 6.0f : v);
    default: return v;
  }
}

} // namespace detail

/// 2-D convolution with zero padding (k-1)/2; output spatial dims are
/// ceil(h/stride) x ceil(w/stride).
inline Tensor conv2d(const Tensor& x, const Tensor& w, const std::vector<float>& bias,
                     const LayerSpec& spec, int threads = 1) {
  detail::check_conv_args(x, w, bias.size(), spec);
  const int k = spec.kernel, s = spec.stride, p = spec.pad();
  const int oh = out_extent(LayerKind::conv, x.h, s);
  const int ow = out_extent(LayerKind::conv, x.w, s);
  Tensor out(x.n, spec.out_channels, oh, ow);

  parallel_for(0, static_cast<std::int64_t>(x.n) * spec.out_channels, threads,
               [&](std::int64_t plane) {
    const int in = static_cast<int>(plane / spec.out_channels);
    const int oc = static_cast<int>(plane % spec.out_channels);
    float* outp = out.plane(in, oc);
    const float b = bias.empty() ? 0.0f : bias[oc];
    for (int i = 0; i < oh * ow; ++i) outp[i] = b;
    for (int ic = 0; ic < spec.in_channels; ++ic) {
      const float* inp = x.plane(in, ic);
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw) {
          const float wv = w.at(oc, ic, kh, kw);
          if (wv == 0.0f) continue;
          for (int y = 0; y < oh; ++y) {
            const int ih = y * s - p + kh;
            if (ih < 0 || ih >= x.h) continue;
            const float* row = inp + static_cast<std::size_t>(ih) * x.w;
            float* orow = outp + static_cast<std::size_t>(y) * ow;
            for (int xo = 0; xo < ow; ++xo) {
              const int iw = xo * s - p + kw;
              if (iw < 0 || iw >= x.w) continue;
              orow[xo] += wv * row[iw];
            }
          }
        }
      }
    }
    if (spec.act != Activation::none)
      for (int i = 0; i < oh * ow; ++i) outp[i] = detail::apply_act(outp[i], spec.act);
  });
  return out;
}

/// Transposed convolution. Stride 2 doubles the spatial dims exactly
/// (scatter with padding (k-1)/2, contributions outside the 2h x 2w canvas
/// dropped); stride 1 preserves them. Weight layout matches conv2d:
/// (out_c, in_c, k, k).
inline Tensor deconv2d(const Tensor& x, const Tensor& w, const std::vector<float>& bias,
                       const LayerSpec& spec, int threads = 1) {
  detail::check_conv_args(x, w, bias.size(), spec);
  const int k = spec.kernel, s = spec.stride, p = (k - 1) / 2;
  const int oh = out_extent(LayerKind::deconv, x.h, s);
  const int ow = out_extent(LayerKind::deconv, x.w, s);
  Tensor out(x.n, spec.out_channels, oh, ow);

  parallel_for(0, static_cast<std::int64_t>(x.n) * spec.out_channels, threads,
               [&](std::int64_t plane) {
    const int in = static_cast<int>(plane / spec.out_channels);
    const int oc = static_cast<int>(plane % spec.out_channels);
    float* outp = out.plane(in, oc);
    const float b = bias.empty() ? 0.0f : bias[oc];
    for (int i = 0; i < oh * ow; ++i) outp[i] = b;
    for (int ic = 0; ic < spec.in_channels; ++ic) {
      const float* inp = x.plane(in, ic);
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw) {
          const float wv = w.at(oc, ic, kh, kw);
          if (wv == 0.0f) continue;
          for (int ih = 0; ih < x.h; ++ih) {
            const int y = ih * s - p + kh;
            if (y < 0 || y >= oh) continue;
            const float* row = inp + static_cast<std::size_t>(ih) * x.w;
            float* orow = outp + static_cast<std::size_t>(y) * ow;
            for (int iw = 0; iw < x.w; ++iw) {
              const int xo = iw * s - p + kw;
              if (xo < 0 || xo >= ow) continue;
              orow[xo] += wv * row[iw];
            }
          }
        }
      }
    }
    if (spec.act != Activation::none)
      for (int i = 0; i < oh * ow; ++i) outp[i] = detail::apply_act(outp[i], spec.act);
  });
  return out;
}

inline Tensor relu(Tensor x) {
  for (float& v : x.data) v = v > 0.0f ? v : 0.0f;
  return x;
}

inline Tensor relu6(Tensor x) {
  for (float& v : x.data) v = v < 0.0f ? 0.0f : (v > 6.0f ? 6.0f : v);
  return x;
}

/// Which constants the tanh-form GeLU uses. `standard` is the usual
/// approximation; `printed` keeps the swapped sqrt argument and the
/// 0.004715 cubic coefficient for side-by-side comparison.
enum class GeluVariant { standard, printed };

inline double gelu_tanh_scalar(double v, GeluVariant variant = GeluVariant::standard) {
  const double c0 = variant == GeluVariant::standard ? 0.7978845608028654   // sqrt(2/pi)
                                                     : 1.2533141373155003;  // sqrt(pi/2)
  const double c1 = variant == GeluVariant::standard ? 0.044715 : 0.004715;
  return 0.5 * v * (1.0 + std::tanh(c0 * (v + c1 * v * v * v)));
}

inline Tensor gelu_tanh(Tensor x, GeluVariant variant = GeluVariant::standard) {
  for (float& v : x.data) v = static_cast<float>(gelu_tanh_scalar(v, variant));
  return x;
}

/// Numerically stable softmax; subtracts the max before exponentiation.
inline std::vector<double> softmax(const std::vector<double>& v) {
  require(!v.empty(), "softmax of empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    sum += out[i];
  }
  for (double& o : out) o /= sum;
  return out;
}

inline bool all_finite(const Tensor& t) {
  for (float v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Integer kernels.
//
// int8 operands, int32 accumulators, fixed-point requantization. Every step
// is exact integer arithmetic, so outputs are byte-identical across runs,
// platforms and thread counts.
// ---------------------------------------------------------------------------

/// Raw int32 accumulator tensor (conv output before requantization).
struct Int32Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<std::int32_t> data;

  Int32Tensor() = default;
  Int32Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0) {}

  std::size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw;
  }
  std::int32_t& at(int in, int ic, int ih, int iw) { return data[index(in, ic, ih, iw)]; }
  std::int32_t at(int in, int ic, int ih, int iw) const {
    return data[index(in, ic, ih, iw)];
  }
  std::int32_t* plane(int in, int ic) { return data.data() + index(in, ic, 0, 0); }
};

/// Per-output-channel requantization: out = sat(round((acc * m) / 2^n)).
/// m in [2^30, 2^31) so m/2^n approximates s_in*s_w/s_out to < 2^-30.
struct RequantParams {
  std::vector<std::int32_t> mult;
  std::vector<std::int32_t> shift;
  float out_scale = 1.0f;
  std::int32_t act_hi = 127;  // int-domain clamp for relu6: round(6 / out_scale)
};

/// Fixed-point multiply + round-half-away shift, exact in int64.
inline std::int32_t requant_one(std::int32_t acc, std::int32_t mult, std::int32_t shift) {
  const std::int64_t t = static_cast<std::int64_t>(acc) * mult;
  if (shift <= 0) return static_cast<std::int32_t>(t << (-shift));
  const std::int64_t half = 1ll << (shift - 1);
  return static_cast<std::int32_t>(t >= 0 ? (t + half) >> shift : -((-t + half) >> shift));
}

namespace detail {

inline void check_quant_conv_args(const QuantTensor& x, const QuantTensor& w,
                                  std::size_t bias_len, const LayerSpec& spec) {
  spec.validate();
  require(x.c == spec.in_channels, "layer ", spec.name, ": int input has ", x.c,
          " channels, spec expects ", spec.in_channels);
  require(w.n == spec.out_channels && w.c == spec.in_channels && w.h == spec.kernel &&
              w.w == spec.kernel,
          "layer ", spec.name, ": int weight dims ", w.dims_str(), " do not match spec");
  require(bias_len == 0 || bias_len == static_cast<std::size_t>(spec.out_channels),
          "layer ", spec.name, ": int bias length ", bias_len, " != out channels ",
          spec.out_channels);
}

} // namespace detail

/// int8 convolution producing int32 accumulators (bias already added).
inline Int32Tensor quant_conv2d_acc(const QuantTensor& x, const QuantTensor& w,
                                    const std::vector<std::int32_t>& bias,
                                    const LayerSpec& spec, int threads = 1) {
  detail::check_quant_conv_args(x, w, bias.size(), spec);
  const int k = spec.kernel, s = spec.stride, p = spec.pad();
  const int oh = out_extent(LayerKind::conv, x.h, s);
  const int ow = out_extent(LayerKind::conv, x.w, s);
  Int32Tensor out(x.n, spec.out_channels, oh, ow);

  parallel_for(0, static_cast<std::int64_t>(x.n) * spec.out_channels, threads,
               [&](std::int64_t plane) {
    const int in = static_cast<int>(plane / spec.out_channels);
    const int oc = static_cast<int>(plane % spec.out_channels);
    std::int32_t* outp = out.plane(in, oc);
    const std::int32_t b = bias.empty() ? 0 : bias[oc];
    for (int i = 0; i < oh * ow; ++i) outp[i] = b;
    for (int ic = 0; ic < spec.in_channels; ++ic) {
      const std::int8_t* inp = x.data.data() + x.index(in, ic, 0, 0);
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw) {
          const std::int32_t wv = w.at(oc, ic, kh, kw);
          if (wv == 0) continue;
          for (int y = 0; y < oh; ++y) {
            const int ih = y * s - p + kh;
            if (ih < 0 || ih >= x.h) continue;
            const std::int8_t* row = inp + static_cast<std::size_t>(ih) * x.w;
            std::int32_t* orow = outp + static_cast<std::size_t>(y) * ow;
            for (int xo = 0; xo < ow; ++xo) {
              const int iw = xo * s - p + kw;
              if (iw < 0 || iw >= x.w) continue;
              orow[xo] += wv * row[iw];
            }
          }
        }
      }
    }
  });
  return out;
}

/// int8 transposed convolution producing int32 accumulators.
inline Int32Tensor quant_deconv2d_acc(const QuantTensor& x, const QuantTensor& w,
                                      const std::vector<std::int32_t>& bias,
                                      const LayerSpec& spec, int threads = 1) {
  detail::check_quant_conv_args(x, w, bias.size(), spec);
  const int k = spec.kernel, s = spec.stride, p = (k - 1) / 2;
  const int oh = out_extent(LayerKind::deconv, x.h, s);
  const int ow = out_extent(LayerKind::deconv, x.w, s);
  Int32Tensor out(x.n, spec.out_channels, oh, ow);

  parallel_for(0, static_cast<std::int64_t>(x.n) * spec.out_channels, threads,
               [&](std::int64_t plane) {
    const int in = static_cast<int>(plane / spec.out_channels);
    const int oc = static_cast<int>(plane % spec.out_channels);
    std::int32_t* outp = out.plane(in, oc);
    const std::int32_t b = bias.empty() ? 0 : bias[oc];
    for (int i = 0; i < oh * ow; ++i) outp[i] = b;
    for (int ic = 0; ic < spec.in_channels; ++ic) {
      const std::int8_t* inp = x.data.data() + x.index(in, ic, 0, 0);
      for (int kh = 0; kh < k; ++kh) {
        for (int kw = 0; kw < k; ++kw) {
          const std::int32_t wv = w.at(oc, ic, kh, kw);
          if (wv == 0) continue;
          for (int ih = 0; ih < x.h; ++ih) {
            const int y = ih * s - p + kh;
            if (y < 0 || y >= oh) continue;
            const std::int8_t* row = inp + static_cast<std::size_t>(ih) * x.w;
            std::int32_t* orow = outp + static_cast<std::size_t>(y) * ow;
            for (int iw = 0; iw < x.w; ++iw) {
              const int xo = iw * s - p + kw;
              if (xo < 0 || xo >= ow) continue;
              orow[xo] += wv * row[iw];
            }
          }
        }
      }
    }
  });
  return out;
}

/// Requantize int32 accumulators to int8, applying the integer-domain
/// activation clamp.
inline QuantTensor requantize(const Int32Tensor& acc, const RequantParams& rq,
                              Activation act, int threads = 1) {
  require(rq.mult.size() == static_cast<std::size_t>(acc.c) &&
              rq.shift.size() == static_cast<std::size_t>(acc.c),
          "requant params cover ", rq.mult.size(), " channels, tensor has ", acc.c);
  QuantTensor out(acc.n, acc.c, acc.h, acc.w, rq.out_scale);
  const std::size_t plane_sz = static_cast<std::size_t>(acc.h) * acc.w;
  parallel_for(0, static_cast<std::int64_t>(acc.n) * acc.c, threads,
               [&](std::int64_t plane) {
    const int ic = static_cast<int>(plane % acc.c);
    const std::int32_t* src = acc.data.data() + plane * plane_sz;
    std::int8_t* dst = out.data.data() + plane * plane_sz;
    const std::int32_t m = rq.mult[ic], sh = rq.shift[ic];
    for (std::size_t i = 0; i < plane_sz; ++i) {
      std::int64_t q = requant_one(src[i], m, sh);
      switch (act) {
        case Activation::relu:
          if (q < 0) q = 0;
          break;
        case Activation::relu6:
          if (q < 0) q = 0;
          if (q > rq.act_hi) q = rq.act_hi;
          break;
        default: break;
      }
      dst[i] = saturate_int8(q);
    }
  });
  return out;
}

/// int8 conv: accumulate, add bias, requantize. Pure function of its
/// integer inputs.
inline QuantTensor quant_conv2d(const QuantTensor& x, const QuantTensor& w,
                                const std::vector<std::int32_t>& bias,
                                const RequantParams& rq, const LayerSpec& spec,
                                int threads = 1) {
  return requantize(quant_conv2d_acc(x, w, bias, spec, threads), rq, spec.act, threads);
}

inline QuantTensor quant_deconv2d(const QuantTensor& x, const QuantTensor& w,
                                  const std::vector<std::int32_t>& bias,
                                  const RequantParams& rq, const LayerSpec& spec,
                                  int threads = 1) {
  return requantize(quant_deconv2d_acc(x, w, bias, spec, threads), rq, spec.act, threads);
}

/// Largest possible |accumulator| for a layer; checked against 2^30 at model
/// load so the int32 path cannot overflow.
inline std::int64_t int8_acc_bound(const LayerSpec& spec) {
  return static_cast<std::int64_t>(spec.kernel) * spec.kernel * spec.in_channels * 127 *
         127;
}

} // namespace lic
