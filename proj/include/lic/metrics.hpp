// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lic/common.hpp"
#include "lic/image_io.hpp"

namespace lic {

/// Mean squared error over all channels of two equal-size 8-bit rasters.
inline double mse(const Raster& a, const Raster& b) {
  require(a.width == b.width && a.height == b.height, "metric dims mismatch: ", a.width,
          "x", a.height, " vs ", b.width, "x", b.height);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - static_cast<double>(b.rgb[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.rgb.size());
}

/// PSNR in dB, capped at 100 for identical inputs.
inline double psnr(const Raster& a, const Raster& b) {
  const double m = mse(a, b);
  if (m == 0.0) return 100.0;
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

/// Bits per pixel of a compressed payload relative to the original area.
inline double bpp(std::size_t stream_bytes, int width, int height) {
  require(width > 0 && height > 0, "bpp of zero-area image");
  return 8.0 * static_cast<double>(stream_bytes) /
         (static_cast<double>(width) * static_cast<double>(height));
}

// ---------------------------------------------------------------------------
// MS-SSIM, 5 scales, 11x11 Gaussian window (sigma 1.5), 2x2 mean-pool
// downsampling. Inputs smaller than 176 px on a side use fewer scales with
// the weights renormalized; below 11 px the window shrinks.
// ---------------------------------------------------------------------------

namespace detail {

struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
};

inline std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& x : k) x /= sum;
  return k;
}

/// Separable valid-mode filter.
inline Plane filter_valid(const Plane& p, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  Plane horiz{p.h, p.w - n + 1, {}};
  horiz.v.resize(static_cast<std::size_t>(horiz.h) * horiz.w);
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < horiz.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * p.v[static_cast<std::size_t>(y) * p.w + x + i];
      horiz.v[static_cast<std::size_t>(y) * horiz.w + x] = acc;
    }
  Plane out{p.h - n + 1, horiz.w, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += k[i] * horiz.v[static_cast<std::size_t>(y + i) * horiz.w + x];
      out.v[static_cast<std::size_t>(y) * out.w + x] = acc;
    }
  return out;
}

inline Plane downsample2(const Plane& p) {
  Plane out{p.h / 2, p.w / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(2 * y) * p.w + 2 * x;
      out.v[static_cast<std::size_t>(y) * out.w + x] =
          (p.v[i] + p.v[i + 1] + p.v[i + p.w] + p.v[i + p.w + 1]) * 0.25;
    }
  return out;
}

inline Plane multiply(const Plane& a, const Plane& b) {
  Plane out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

/// Mean luminance and contrast-structure terms of one scale, one channel.
inline void ssim_terms(const Plane& a, const Plane& b, const std::vector<double>& win,
                       double& l_sum, double& cs_sum, std::size_t& count) {
  constexpr double C1 = (0.01 * 255) * (0.01 * 255);
  constexpr double C2 = (0.03 * 255) * (0.03 * 255);
  const Plane mu_a = filter_valid(a, win);
  const Plane mu_b = filter_valid(b, win);
  const Plane aa = filter_valid(multiply(a, a), win);
  const Plane bb = filter_valid(multiply(b, b), win);
  const Plane ab = filter_valid(multiply(a, b), win);
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = aa.v[i] - ma * ma;
    const double vb = bb.v[i] - mb * mb;
    const double cov = ab.v[i] - ma * mb;
    l_sum += (2.0 * ma * mb + C1) / (ma * ma + mb * mb + C1);
    cs_sum += (2.0 * cov + C2) / (va + vb + C2);
    ++count;
  }
}

} // namespace detail

inline double ms_ssim(const Raster& a, const Raster& b) {
  require(a.width == b.width && a.height == b.height, "metric dims mismatch: ", a.width,
          "x", a.height, " vs ", b.width, "x", b.height);
  static const double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

  const int min_dim = std::min(a.width, a.height);
  int scales = 1;
  while (scales < 5 && min_dim >= 11 * (1 << scales)) ++scales;
  int win_size = 11;
  double win_sigma = 1.5;
  if (min_dim < 11) {
    win_size = min_dim % 2 == 1 ? min_dim : min_dim - 1;
    require(win_size >= 1, "image too small for ms_ssim");
    win_sigma = 1.5 * win_size / 11.0;
  }
  const std::vector<double> win = detail::gaussian_kernel(win_size, win_sigma);

  double weight_sum = 0.0;
  for (int s = 0; s < scales; ++s) weight_sum += kWeights[s];

  std::vector<detail::Plane> pa(3), pb(3);
  for (int c = 0; c < 3; ++c) {
    pa[c].h = a.height;
    pa[c].w = a.width;
    pa[c].v.resize(static_cast<std::size_t>(a.width) * a.height);
    pb[c] = pa[c];
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) {
        pa[c].v[static_cast<std::size_t>(y) * a.width + x] = a.at(x, y, c);
        pb[c].v[static_cast<std::size_t>(y) * a.width + x] = b.at(x, y, c);
      }
  }

  double score = 1.0;
  for (int s = 0; s < scales; ++s) {
    double l_sum = 0.0, cs_sum = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < 3; ++c) detail::ssim_terms(pa[c], pb[c], win, l_sum, cs_sum, count);
    const double cs = std::max(0.0, cs_sum / static_cast<double>(count));
    const double w = kWeights[s] / weight_sum;
    score *= std::pow(cs, w);
    if (s == scales - 1) {
      const double l = std::max(0.0, l_sum / static_cast<double>(count));
      score *= std::pow(l, w);
    } else {
      for (int c = 0; c < 3; ++c) {
        pa[c] = detail::downsample2(pa[c]);
        pb[c] = detail::downsample2(pb[c]);
      }
    }
  }
  return score;
}

/// Reporting score blending structural and pixel error: lower is better,
/// 0 for identical images.
inline double hybrid_score(const Raster& a, const Raster& b, double weight = 0.5) {
  require(weight >= 0.0 && weight <= 1.0, "hybrid weight must be in [0,1], got ", weight);
  const double structural = weight == 0.0 ? 0.0 : 1.0 - ms_ssim(a, b);
  const double pixel = mse(a, b) / (255.0 * 255.0);
  return weight * structural + (1.0 - weight) * pixel;
}

} // namespace lic
