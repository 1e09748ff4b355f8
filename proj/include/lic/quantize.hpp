// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lic/codec.hpp"
#include "lic/common.hpp"
#include "lic/ops.hpp"
#include "lic/tensor.hpp"
#include "lic/weights.hpp"

namespace lic {

// ---------------------------------------------------------------------------
// LSQ primitives: signed 8-bit, Qn = 128, Qp = 127, learnable step s.
// ---------------------------------------------------------------------------

constexpr int kQn = 128;
constexpr int kQp = 127;

/// Forward: vhat = clip(round(v/s), -Qn, Qp) * s.
inline double lsq_quantize(double v, double s, int qn = kQn, int qp = kQp) {
  require(s > 0.0, "lsq step must be positive, got ", s);
  const double u = v / s;
  double r = static_cast<double>(round_half_away(u));
  r = std::clamp(r, static_cast<double>(-qn), static_cast<double>(qp));
  return r * s;
}

/// Straight-through gradient of vhat w.r.t. the step:
///   -v/s + round(v/s)  inside the clip range,
///   -Qn / Qp           at the clip branches.
inline double lsq_grad_step(double v, double s, int qn = kQn, int qp = kQp) {
  require(s > 0.0, "lsq step must be positive, got ", s);
  const double u = v / s;
  if (u <= -qn) return static_cast<double>(-qn);
  if (u >= qp) return static_cast<double>(qp);
  return static_cast<double>(round_half_away(u)) - u;
}

/// Straight-through input mask: 1 strictly inside (-Qn, Qp), else 0.
/// The boundary convention is the open interval; the clip points get
/// gradient 0 here and the clip value in lsq_grad_step.
inline double lsq_grad_input(double v, double s, int qn = kQn, int qp = kQp) {
  require(s > 0.0, "lsq step must be positive, got ", s);
  const double u = v / s;
  return (u > -qn && u < qp) ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// PTQ calibration statistics.
// ---------------------------------------------------------------------------

/// Running absmax plus a 2048-bin magnitude histogram. Bin edges live on a
/// power-of-two range, so merging two accumulators (or growing the range)
/// is exact integer coalescing and the result is independent of
/// accumulation order.
struct CalibrationStats {
  static constexpr int kBins = 2048;
  static constexpr int kMinLog2 = -40;

  std::uint64_t count = 0;
  double absmax = 0.0;
  int log2_range = kMinLog2;  // histogram covers [0, 2^log2_range)
  std::array<std::uint64_t, kBins> bins{};

  void grow() {
    for (int i = 0; i < kBins / 2; ++i) bins[i] = bins[2 * i] + bins[2 * i + 1];
    for (int i = kBins / 2; i < kBins; ++i) bins[i] = 0;
    ++log2_range;
  }

  void observe(double v) {
    require(std::isfinite(v), "calibration observed a non-finite value");
    const double a = std::fabs(v);
    absmax = std::max(absmax, a);
    while (a >= std::ldexp(1.0, log2_range)) grow();
    const int idx = std::min(
        kBins - 1, static_cast<int>(a * std::ldexp(1.0, -log2_range) * kBins));
    ++bins[static_cast<std::size_t>(idx)];
    ++count;
  }

  void observe_all(const Tensor& t) {
    for (float v : t.data) observe(v);
  }

  void merge(const CalibrationStats& o) {
    CalibrationStats other = o;
    while (log2_range < other.log2_range) grow();
    while (other.log2_range < log2_range) other.grow();
    for (int i = 0; i < kBins; ++i) bins[i] += other.bins[i];
    count += other.count;
    absmax = std::max(absmax, other.absmax);
  }

  /// Upper edge of the bin holding the p-th magnitude percentile.
  double percentile_magnitude(double p) const {
    require(count > 0, "calibration stats are empty");
    require(p > 0.0 && p <= 100.0, "percentile must be in (0, 100], got ", p);
    const std::uint64_t target = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(p / 100.0 * static_cast<double>(count))));
    std::uint64_t cum = 0;
    const double width = std::ldexp(1.0, log2_range) / kBins;
    for (int i = 0; i < kBins; ++i) {
      cum += bins[static_cast<std::size_t>(i)];
      if (cum >= target) return (i + 1) * width;
    }
    return std::ldexp(1.0, log2_range);
  }
};

enum class CalibPolicy { absmax, percentile };

/// Step size from the collected stats, floored at 1e-12.
inline double calibrate(const CalibrationStats& stats, CalibPolicy policy,
                        double percentile = 99.99, int qp = kQp) {
  require(stats.count > 0, "calibration stats are empty");
  const double mag = policy == CalibPolicy::absmax ? stats.absmax
                                                   : stats.percentile_magnitude(percentile);
  return std::max(mag / static_cast<double>(qp), 1e-12);
}

// ---------------------------------------------------------------------------
// Float model -> int8 inference path.
// ---------------------------------------------------------------------------

struct ConvertOptions {
  bool all_subnets = false;   // false: h_s only (the decodability requirement)
  double percentile = 99.99;  // activation calibration percentile
  int threads = 1;
};

namespace detail {

/// Walk a subnet in float, recording stats of every layer input and of the
/// final output. stats has net.size() + 1 slots.
inline Tensor observe_subnet(const std::vector<Layer>& net, Tensor x, int threads,
                             std::vector<CalibrationStats>& stats) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    stats[i].observe_all(x);
    const Layer& l = net[i];
    x = l.spec.kind == LayerKind::conv ? conv2d(x, l.weight, l.bias, l.spec, threads)
                                       : deconv2d(x, l.weight, l.bias, l.spec, threads);
  }
  stats[net.size()].observe_all(x);
  return x;
}

inline void attach_int_path(std::vector<Layer>& net,
                            const std::vector<CalibrationStats>& stats,
                            double percentile) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    const float in_scale =
        static_cast<float>(calibrate(stats[i], CalibPolicy::percentile, percentile));
    const float out_scale =
        static_cast<float>(calibrate(stats[i + 1], CalibPolicy::percentile, percentile));
    net[i].iq = build_int_layer(net[i], in_scale, out_scale);
  }
}

} // namespace detail

/// Post-training conversion: per-channel absmax weight scales, per-tensor
/// percentile activation scales, requant multipliers in [2^30, 2^31).
/// Always rebuilds the h_s integer path (and the sigma threshold rows);
/// with `all_subnets` the other three transforms get int paths too.
inline ModelWeights convert_to_int8(const ModelWeights& model,
                                    const std::vector<Tensor>& calib_images,
                                    const ConvertOptions& opts = {}) {
  require(!calib_images.empty(), "conversion needs a non-empty calibration set");
  ModelWeights out = model;

  std::vector<CalibrationStats> s_ga(5), s_ha(4), s_hs(4), s_gs(5);
  CalibrationStats s_mu;

  for (const Tensor& img : calib_images) {
    require(img.n == 1 && img.c == 3, "calibration image must be (1,3,H,W), got ",
            img.dims_str());
    const Tensor padded = pad_replicate(img, 64);
    const Tensor y = detail::observe_subnet(out.ga, padded, opts.threads, s_ga);
    const Tensor z = detail::observe_subnet(out.ha, y, opts.threads, s_ha);
    Tensor zhat(1, z.c, z.h, z.w);
    for (std::size_t i = 0; i < z.numel(); ++i)
      zhat.data[i] = static_cast<float>(round_half_away(z.data[i]));
    const Tensor hs_out = detail::observe_subnet(out.hs, zhat, opts.threads, s_hs);

    const int m = out.latent_channels();
    Tensor mu(1, m, hs_out.h, hs_out.w);
    for (int c = 0; c < m; ++c)
      for (int ih = 0; ih < hs_out.h; ++ih)
        for (int iw = 0; iw < hs_out.w; ++iw)
          mu.at(0, c, ih, iw) = hs_out.at(0, c, ih, iw);
    s_mu.observe_all(mu);

    Tensor yhat(1, y.c, y.h, y.w);
    for (std::size_t i = 0; i < y.numel(); ++i)
      yhat.data[i] = static_cast<float>(round_half_away(
                         static_cast<double>(y.data[i]) - mu.data[i])) +
                     mu.data[i];
    (void)detail::observe_subnet(out.gs, yhat, opts.threads, s_gs);
  }

  // h_s: calibrated chain scales, mu head scale, threshold rows.
  const float hs_in0 =
      static_cast<float>(calibrate(s_hs[0], CalibPolicy::percentile, opts.percentile));
  const float hs_in1 =
      static_cast<float>(calibrate(s_hs[1], CalibPolicy::percentile, opts.percentile));
  const float hs_in2 =
      static_cast<float>(calibrate(s_hs[2], CalibPolicy::percentile, opts.percentile));
  out.mu_scale =
      static_cast<float>(calibrate(s_mu, CalibPolicy::percentile, opts.percentile));
  out.hs[0].iq = build_int_layer(out.hs[0], hs_in0, hs_in1);
  out.hs[1].iq = build_int_layer(out.hs[1], hs_in1, hs_in2);
  out.hs[2].iq = build_int_layer(out.hs[2], hs_in2, out.mu_scale);
  const int m = out.latent_channels();
  out.sigma_thresholds.clear();
  out.sigma_thresholds.reserve(static_cast<std::size_t>(m));
  const ScaleTable& st = default_scale_table();
  for (int j = 0; j < m; ++j) {
    const double acc_scale = static_cast<double>(hs_in2) *
                             out.hs[2].iq->weight.scale[static_cast<std::size_t>(m + j)];
    out.sigma_thresholds.push_back(sigma_threshold_row(acc_scale, st));
  }

  if (opts.all_subnets) {
    detail::attach_int_path(out.ga, s_ga, opts.percentile);
    detail::attach_int_path(out.ha, s_ha, opts.percentile);
    detail::attach_int_path(out.gs, s_gs, opts.percentile);
  }

  out.model_id = compute_model_id(out);
  finalize_model(out);
  return out;
}

} // namespace lic
