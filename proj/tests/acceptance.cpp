// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "lic/bench.hpp"
#include "lic/codec.hpp"
#include "lic/image_io.hpp"
#include "lic/metrics.hpp"
#include "lic/quantize.hpp"
#include "lic/supernet.hpp"
#include "lic/weights.hpp"

using namespace lic;

namespace {

void expect(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

std::string fmt(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Round-trip losslessness across configs, seeds, sizes, runs and worker
//    counts.
// ---------------------------------------------------------------------------
std::string c1_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  SplitMix64 rng(20260809);
  for (int trial = 0; trial < 100; ++trial) {
    const bool use_nas = trial % 2 == 1;
    const ChannelConfig cfg = use_nas ? nas_config() : origin_config();
    const ModelWeights model = init_weights(cfg, 1000 + static_cast<std::uint64_t>(trial));

    // sizes up to 256x256, most of the mass below 128
    const bool large = trial % 6 == 0;
    const int h = large ? 129 + static_cast<int>(rng.next_below(128))
                        : 1 + static_cast<int>(rng.next_below(128));
    const int w = large ? 129 + static_cast<int>(rng.next_below(128))
                        : 1 + static_cast<int>(rng.next_below(128));
    Tensor x(1, 3, h, w);
    for (float& v : x.data) v = static_cast<float>(rng.next_double());

    DecodedLatents enc_lat;
    const auto bytes = encode_image(x, model, {QuantMode::hs_int, 4}, &enc_lat);

    DecodedLatents lat_a, lat_b, lat_c;
    const Raster run_a =
        tensor_to_raster(decode_image(bytes, model, {QuantMode::hs_int, 4}, &lat_a));
    const Raster run_b =
        tensor_to_raster(decode_image(bytes, model, {QuantMode::hs_int, 4}, &lat_b));
    const Raster run_c =
        tensor_to_raster(decode_image(bytes, model, {QuantMode::hs_int, 1}, &lat_c));

    expect(lat_a.zhat == enc_lat.zhat && lat_a.residual == enc_lat.residual,
           "decoded symbols differ from the encoder's (trial " + std::to_string(trial) + ")");
    expect(run_a == run_b, "repeat decode changed the raster (trial " +
                               std::to_string(trial) + ")");
    expect(run_a == run_c, "worker count changed the raster (trial " +
                               std::to_string(trial) + ")");
    expect(lat_c.zhat == enc_lat.zhat && lat_c.residual == enc_lat.residual,
           "worker count changed the symbols (trial " + std::to_string(trial) + ")");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  expect(secs < 300.0, "runtime " + fmt(secs, 1) + " s exceeds the 5 minute budget");
  return "100 cases lossless, " + fmt(secs, 1) + " s";
}

// ---------------------------------------------------------------------------
// 2. Entropy-coder optimality against the quantized cross-entropy.
// ---------------------------------------------------------------------------
std::string c2_coder_optimality() {
  SplitMix64 rng(2);
  double worst_over = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double sigma = 0.2 * std::exp(rng.next_double() * 6.0);
    const CdfTable t = build_cdf_table(sigma, 255);
    std::vector<std::int32_t> values(10000);
    for (auto& v : values) {
      while (true) {
        const std::uint32_t u = static_cast<std::uint32_t>(rng.next_below(kCdfTotal));
        const auto it = std::upper_bound(t.cum.begin(), t.cum.end(), u);
        const int idx = static_cast<int>(it - t.cum.begin()) - 1;
        if (idx == t.escape_index()) continue;
        v = t.value_of(idx);
        break;
      }
    }
    const auto table_for = [&](std::size_t) -> const CdfTable& { return t; };
    const EncodedStream enc = range_encode(values, table_for);
    double h_q = 0.0;
    for (std::int32_t v : values)
      h_q -= std::log2(static_cast<double>(t.freq(t.index_of(v))) / kCdfTotal);
    const double bits = 8.0 * static_cast<double>(enc.bytes.size());
    expect(bits >= h_q - 1.0, "coder beat its own model: " + fmt(bits, 1) + " < " +
                                  fmt(h_q, 1) + " - 1");
    expect(bits <= h_q * 1.01 + 32.0, "coded " + fmt(bits, 1) + " bits for entropy " +
                                          fmt(h_q, 1));
    worst_over = std::max(worst_over, bits - h_q);
    expect(range_decode(enc.bytes, table_for, values.size()) == values,
           "optimality stream failed to round trip");
  }
  return "20 streams within [H-1, 1.01H+32] (worst +" + fmt(worst_over, 1) + " bits)";
}

// ---------------------------------------------------------------------------
// 3. CDF validity for every sigma bin.
// ---------------------------------------------------------------------------
std::string c3_cdf_validity() {
  const ScaleTable& st = default_scale_table();
  expect(st.cdfs.size() == 64, "expected 64 sigma bins");
  for (std::size_t b = 0; b < st.cdfs.size(); ++b) {
    const CdfTable& t = st.cdfs[b];
    expect(t.cum.front() == 0, "bin " + std::to_string(b) + ": cum[0] != 0");
    expect(t.cum.back() == 65536, "bin " + std::to_string(b) + ": cum.back() != 65536");
    for (std::size_t i = 0; i + 1 < t.cum.size(); ++i)
      expect(t.cum[i + 1] > t.cum[i],
             "bin " + std::to_string(b) + ": cum not strictly increasing at " +
                 std::to_string(i));
  }
  return "all 64 bins strictly increasing, cum.back() = 65536";
}

// ---------------------------------------------------------------------------
// 4. Fuzz: random round trips plus corrupted-byte decodes.
// ---------------------------------------------------------------------------
std::string c4_fuzz() {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const double sigma = std::exp(rng.next_signed() * 4.5);
    const int a_max = 1 + static_cast<int>(rng.next_below(255));
    const CdfTable t = build_cdf_table(sigma, a_max);
    std::vector<std::int32_t> values(rng.next_below(300));
    for (auto& v : values)
      v = static_cast<std::int32_t>(rng.next_below(2 * a_max + 13)) - a_max - 6;
    const auto table_for = [&](std::size_t) -> const CdfTable& { return t; };
    const EncodedStream enc = range_encode(values, table_for);
    const auto back = range_decode(enc.bytes, table_for, values.size(), enc.escapes);
    expect(back == values, "fuzz round trip " + std::to_string(trial) + " failed");
  }

  const CdfTable t = build_cdf_table(3.0, 255);
  std::vector<std::int32_t> values(400);
  for (auto& v : values) v = static_cast<std::int32_t>(rng.next_below(11)) - 5;
  const auto table_for = [&](std::size_t) -> const CdfTable& { return t; };
  const EncodedStream enc = range_encode(values, table_for);
  int reported = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto bad = enc.bytes;
    bad[rng.next_below(bad.size())] ^= static_cast<std::uint8_t>(1 + rng.next_below(255));
    try {
      (void)range_decode(bad, table_for, values.size());
    } catch (const Error&) {
      ++reported;
    }
  }
  expect(reported == 100,
         "only " + std::to_string(reported) + "/100 corrupted decodes reported errors");
  return "1000 round trips clean, 100/100 corruptions reported";
}

// ---------------------------------------------------------------------------
// 5. FLOPS against an independent nested-loop MAC counter.
// ---------------------------------------------------------------------------
std::string c5_flops_oracle() {
  const auto oracle = [](const LayerSpec& spec, int h, int w) {
    std::uint64_t ops = 0;
    const int oh = spec.kind == LayerKind::conv ? (h + spec.stride - 1) / spec.stride : h;
    const int ow = spec.kind == LayerKind::conv ? (w + spec.stride - 1) / spec.stride : w;
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x)
        for (int oc = 0; oc < spec.out_channels; ++oc)
          for (int ic = 0; ic < spec.in_channels; ++ic)
            for (int kh = 0; kh < spec.kernel; ++kh)
              for (int kw = 0; kw < spec.kernel; ++kw) ops += 2;
    return ops;
  };
  const LayerSpec worked{LayerKind::conv, 3, 32, 5, 2, Activation::none, "w"};
  expect(layer_flops(worked, 64, 64) == 4915200ull,
         "worked example mismatch: " + std::to_string(layer_flops(worked, 64, 64)));
  const LayerSpec shapes[5] = {
      {LayerKind::conv, 3, 32, 5, 2, Activation::none, "a"},
      {LayerKind::conv, 2, 3, 3, 1, Activation::none, "b"},
      {LayerKind::deconv, 3, 5, 5, 2, Activation::none, "c"},
      {LayerKind::deconv, 4, 1, 3, 1, Activation::none, "d"},
      {LayerKind::conv, 7, 2, 3, 2, Activation::none, "e"},
  };
  for (const LayerSpec& s : shapes) {
    const int h = s.name == "a" ? 64 : 6, w = s.name == "a" ? 64 : 8;
    expect(layer_flops(s, h, w) == oracle(s, h, w),
           "flops mismatch on shape " + s.name);
  }
  return "5 shapes exact, worked example 4915200";
}

// ---------------------------------------------------------------------------
// 6. Latency LUT loaded with per-subnet reference milliseconds.
// ---------------------------------------------------------------------------
std::string c6_latency_lut() {
  LatencyTable t;
  t.device = "tesla-t4";
  const auto units = subnet_units(origin_config(), 1088, 1920);
  const double ms[4] = {7.25, 5.48, 1.15, 1.17};  // ga, gs, ha, hs
  for (int i = 0; i < 4; ++i) t.insert(units[static_cast<std::size_t>(i)], ms[i]);
  const double total = lut_latency(units, t);
  expect(total == 15.05, "whole-model latency " + fmt(total, 6) + " != 15.05");
  return "7.25 + 5.48 + 1.15 + 1.17 = 15.05 ms exactly";
}

// ---------------------------------------------------------------------------
// 7. Search correctness against exhaustive enumeration.
// ---------------------------------------------------------------------------
std::string c7_search() {
  SplitMix64 meta(7);
  for (int trial = 0; trial < 3; ++trial) {
    SearchSpace sp = default_search_space();
    for (std::size_t i = 0; i < sp.slots.size(); ++i) {
      if (i < 4) {
        const int base = 8 + static_cast<int>(meta.next_below(8)) * 2;
        sp.slots[i].candidates = {base, base + 8, base + 16, base + 24};
      } else {
        sp.slots[i].candidates = {8 + static_cast<int>(meta.next_below(4)) * 4};
      }
    }
    expect(space_size(sp) == 256, "space should have 256 configs");

    // random but structured landscape (weighted distance to a random target),
    // the regime the +-1-step mutation is built for
    std::vector<double> targets, weights;
    for (const SearchSlot& slot : sp.slots) {
      targets.push_back(static_cast<double>(
          slot.candidates[meta.next_below(slot.candidates.size())]));
      weights.push_back(0.5 + meta.next_double() * 2.0);
    }
    const Scorer scorer = [targets, weights](const SubConfig& c) {
      double s = 0.0;
      for (std::size_t i = 0; i < c.choices.size(); ++i)
        s += weights[i] * std::fabs(c.choices[i] - targets[i]);
      return s;
    };

    // independent brute force over the 4 active slots
    double best = std::numeric_limits<double>::infinity();
    SubConfig probe = min_config(sp);
    for (int a : sp.slots[0].candidates)
      for (int b : sp.slots[1].candidates)
        for (int c : sp.slots[2].candidates)
          for (int d : sp.slots[3].candidates) {
            probe.choices[0] = a;
            probe.choices[1] = b;
            probe.choices[2] = c;
            probe.choices[3] = d;
            best = std::min(best, scorer(probe));
          }

    const SearchResult exact = search(sp, {}, scorer, 1 << 20, 1);
    expect(exact.exhaustive && exact.feasible, "exhaustive search failed");
    expect(exact.best.score == best, "exhaustive optimum " + fmt(exact.best.score, 6) +
                                         " != brute force " + fmt(best, 6));

    const SearchResult evo = search(sp, {}, scorer, 230, 99, /*exhaustive_threshold=*/0);
    expect(!evo.exhaustive && evo.feasible, "evolutionary search failed");
    expect(evo.best.score <= best * 1.05 + 1e-9,
           "evolutionary " + fmt(evo.best.score, 6) + " misses 5% of " + fmt(best, 6));
  }
  return "3 spaces: exhaustive exact, evolutionary within 5%";
}

// ---------------------------------------------------------------------------
// 8. Supernet properties.
// ---------------------------------------------------------------------------
std::string c8_supernet() {
  SearchSpace sp = default_search_space();
  for (auto& slot : sp.slots) slot.candidates = {8, 12, 16};
  Supernet sn = init_supernet(sp, 8);
  SplitMix64 rng(88);

  // coefficients sum to 1 for random configs
  for (int trial = 0; trial < 20; ++trial) {
    const SubConfig cfg = random_config(sp, rng);
    const auto vec = encode_config(cfg, sp);
    for (const LayerBanks& lb : sn.layers) {
      const auto coeff = mixing_coefficients(lb, vec);
      double sum = 0.0;
      for (double c : coeff) sum += c;
      expect(std::fabs(sum - 1.0) <= 1e-9, "softmax coefficients sum to " + fmt(sum, 12));
    }
  }

  // one-hot limit reproduces a bank
  LayerBanks& lb = sn.layers[5];
  std::fill(lb.mix_w.begin(), lb.mix_w.end(), 0.0);
  lb.mix_b = {0.0, 35.0, 0.0, 0.0};
  const auto vec = encode_config(min_config(sp), sp);
  const Tensor w = generate_weight(lb, vec, lb.max_out, lb.max_in);
  for (std::size_t i = 0; i < w.numel(); ++i)
    expect(std::fabs(w.data[i] - lb.banks[1].data[i]) <= 1e-6,
           "one-hot mix strays from the selected bank");

  // slimmable slice consistency on a 2-layer toy net
  const ChannelConfig max_cfg{{8, 8, 8, 12}, {8, 8, 8}, {8, 8, 12}, {12, 8, 8, 3}};
  const ChannelConfig sub_cfg{{5, 6, 8, 12}, {8, 8, 8}, {8, 8, 12}, {12, 8, 8, 3}};
  const ModelWeights max_model = init_weights(max_cfg, 81);
  const ModelWeights sliced = slice_submodel(max_model, sub_cfg);
  ModelWeights zeroed = max_model;
  for (int oc = 5; oc < 8; ++oc) {
    for (int ic = 0; ic < 3; ++ic)
      for (int kh = 0; kh < 5; ++kh)
        for (int kw = 0; kw < 5; ++kw) zeroed.ga[0].weight.at(oc, ic, kh, kw) = 0.0f;
    zeroed.ga[0].bias[static_cast<std::size_t>(oc)] = 0.0f;
  }
  for (int oc = 0; oc < 8; ++oc)
    for (int ic = 5; ic < 8; ++ic)
      for (int kh = 0; kh < 5; ++kh)
        for (int kw = 0; kw < 5; ++kw) zeroed.ga[1].weight.at(oc, ic, kh, kw) = 0.0f;
  Tensor x(1, 3, 16, 16);
  for (float& v : x.data) v = static_cast<float>(rng.next_double());
  Tensor a = conv2d(x, sliced.ga[0].weight, sliced.ga[0].bias, sliced.ga[0].spec);
  a = conv2d(a, sliced.ga[1].weight, sliced.ga[1].bias, sliced.ga[1].spec);
  Tensor b = conv2d(x, zeroed.ga[0].weight, zeroed.ga[0].bias, zeroed.ga[0].spec);
  b = conv2d(b, zeroed.ga[1].weight, zeroed.ga[1].bias, zeroed.ga[1].spec);
  for (int oc = 0; oc < 6; ++oc)
    for (int y = 0; y < a.h; ++y)
      for (int xx = 0; xx < a.w; ++xx)
        expect(std::fabs(a.at(0, oc, y, xx) - b.at(0, oc, y, xx)) <= 1e-6,
               "slice-consistency oracle failed");
  return "coefficient sums, one-hot limit and slice consistency hold";
}

// ---------------------------------------------------------------------------
// 9. LSQ gradient and quantization error bound.
// ---------------------------------------------------------------------------
std::string c9_lsq() {
  SplitMix64 rng(9);
  int checked = 0;
  while (checked < 1000) {
    const double s = 0.005 + rng.next_double() * 2.0;
    const double v = rng.next_signed() * 200.0 * s;
    const double u = v / s;
    const double frac = std::fabs(u - std::nearbyint(u));
    if (std::fabs(frac - 0.5) < 0.01) continue;
    if (std::fabs(u + 128.0) < 0.01 || std::fabs(u - 127.0) < 0.01) continue;
    ++checked;
    const double eps = 1e-6 * s;
    double fd;
    if (u <= -128.0) {
      fd = -128.0;
    } else if (u >= 127.0) {
      fd = 127.0;
    } else {
      const double k = static_cast<double>(round_half_away(u));
      const auto frozen = [&](double sp) { return v + (k - u) * sp; };
      fd = (frozen(s + eps) - frozen(s - eps)) / (2.0 * eps);
    }
    expect(std::fabs(lsq_grad_step(v, s) - fd) < 1e-4,
           "gradient mismatch at v=" + fmt(v, 6) + " s=" + fmt(s, 6));
  }
  for (int trial = 0; trial < 100000; ++trial) {
    const double s = 0.001 + rng.next_double() * 4.0;
    const double v = rng.next_signed() * 130.0 * s;
    const double u = v / s;
    if (u < -128.0 || u > 127.0) continue;
    expect(std::fabs(v - lsq_quantize(v, s)) <= s / 2.0 + 1e-12,
           "in-range quantization error above s/2");
  }
  return "1000 gradient checks within 1e-4; error bound s/2 holds";
}

// ---------------------------------------------------------------------------
// 10. Quantized-path fidelity.
// ---------------------------------------------------------------------------
std::string c10_quant_fidelity() {
  SplitMix64 rng(10);
  Layer layer;
  layer.spec = {LayerKind::conv, 8, 16, 5, 2, Activation::none, "sqnr"};
  layer.weight = Tensor(16, 8, 5, 5);
  for (float& v : layer.weight.data) v = static_cast<float>(rng.next_signed() * 0.2);
  layer.bias.assign(16, 0.0f);
  Tensor x(1, 8, 32, 32);
  for (float& v : x.data)
    v = static_cast<float>(rng.next_signed() + rng.next_signed() + rng.next_signed());
  CalibrationStats in_stats, out_stats;
  in_stats.observe_all(x);
  const Tensor ref = conv2d(x, layer.weight, layer.bias, layer.spec);
  out_stats.observe_all(ref);
  const float s_in = static_cast<float>(calibrate(in_stats, CalibPolicy::absmax));
  const float s_out = static_cast<float>(calibrate(out_stats, CalibPolicy::absmax));
  const IntLayer iq = build_int_layer(layer, s_in, s_out);
  const QuantTensor got =
      quant_conv2d(quantize_activation(x, s_in), iq.weight, iq.bias, iq.requant, layer.spec);
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 0; i < ref.numel(); ++i) {
    const double r = ref.data[i], q = static_cast<double>(got.data[i]) * s_out;
    sig += r * r;
    err += (r - q) * (r - q);
  }
  const double sqnr = 10.0 * std::log10(sig / err);
  expect(sqnr > 20.0, "single-layer SQNR " + fmt(sqnr, 2) + " dB <= 20 dB");

  const ModelWeights model = init_weights(origin_config(), 17);
  Tensor zhat(1, model.z_channels(), 2, 3);
  for (float& v : zhat.data)
    v = static_cast<float>(static_cast<int>(rng.next_below(9)) - 4);
  const HyperParams a = hyper_decode_params(zhat, model, {QuantMode::hs_int, 1});
  const HyperParams b = hyper_decode_params(zhat, model, {QuantMode::hs_int, 4});
  const HyperParams c = hyper_decode_params(zhat, model, {QuantMode::hs_int, 1});
  expect(a.mu.data == b.mu.data && a.bins == b.bins,
         "hyper params differ across thread counts");
  expect(a.mu.data == c.mu.data && a.bins == c.bins, "hyper params differ across runs");
  return "SQNR " + fmt(sqnr, 1) + " dB; hyper params byte-identical";
}

// ---------------------------------------------------------------------------
// 11. Metric values.
// ---------------------------------------------------------------------------
std::string c11_metrics() {
  SplitMix64 rng(11);
  Raster a(96, 80);
  for (auto& v : a.rgb) v = static_cast<std::uint8_t>(rng.next_below(256));
  expect(psnr(a, a) == 100.0, "psnr identity cap violated");

  Raster plus1 = a;
  for (auto& v : plus1.rgb) v = static_cast<std::uint8_t>(v < 255 ? v + 1 : v - 1);
  expect(std::fabs(psnr(a, plus1) - 48.1308) <= 0.001,
         "psnr differ-by-1 = " + fmt(psnr(a, plus1), 5));

  expect(std::fabs(ms_ssim(a, a) - 1.0) <= 1e-9, "ms_ssim identity != 1");
  Raster b = a;
  for (auto& v : b.rgb)
    v = static_cast<std::uint8_t>(
        std::clamp<int>(v + static_cast<int>(rng.next_below(21)) - 10, 0, 255));
  expect(std::fabs(ms_ssim(a, b) - ms_ssim(b, a)) <= 1e-9, "ms_ssim asymmetric");
  return "psnr cap 100, +1 noise 48.1308, ms_ssim identity and symmetry";
}

// ---------------------------------------------------------------------------
// 12. Structural facts: latent widths and 1080p dims.
// ---------------------------------------------------------------------------
std::string c12_structure() {
  const ModelWeights origin = init_weights(origin_config(), 1);
  const ModelWeights nas = init_weights(nas_config(), 1);
  expect(origin.latent_channels() == 176, "origin latent width != 176");
  expect(origin.ga.back().spec.out_channels == 176, "origin g_a head width != 176");
  expect(nas.latent_channels() == 220, "nas latent width != 220");
  expect(nas.ga.back().spec.out_channels == 220, "nas g_a head width != 220");

  const Tensor hd(1, 3, 1080, 1920);
  const Tensor padded = pad_replicate(hd, 64);
  expect(padded.h == 1088 && padded.w == 1920,
         "1080p pads to " + std::to_string(padded.w) + "x" + std::to_string(padded.h));
  int yh = padded.h, yw = padded.w;
  for (const LayerSpec& s : make_network_plan(origin_config()).ga) {
    yh = out_extent(s.kind, yh, s.stride);
    yw = out_extent(s.kind, yw, s.stride);
  }
  expect(yh == 68 && yw == 120,
         "y dims (" + std::to_string(yh) + "," + std::to_string(yw) + ") != (68,120)");
  int zh = yh, zw = yw;
  for (const LayerSpec& s : make_network_plan(origin_config()).ha) {
    zh = out_extent(s.kind, zh, s.stride);
    zw = out_extent(s.kind, zw, s.stride);
  }
  expect(zh == 17 && zw == 30,
         "z dims (" + std::to_string(zh) + "," + std::to_string(zw) + ") != (17,30)");
  return "origin 176 / nas 220 channels; 1080p -> 1920x1088, y (68,120), z (17,30)";
}

// ---------------------------------------------------------------------------
// 13. Bench harness on a 10-image directory.
// ---------------------------------------------------------------------------
std::string c13_bench() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "lic_acceptance_bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  SplitMix64 rng(13);
  for (int i = 0; i < 10; ++i) {
    Raster r(60 + 4 * (i % 4), 44 + 4 * (i % 3));
    for (auto& v : r.rgb) v = static_cast<std::uint8_t>(rng.next_below(256));
    save_image((dir / ("img" + std::to_string(i) + (i % 2 ? ".png" : ".bmp"))).string(), r);
  }
  const ModelWeights model = init_weights(origin_config(), 3);
  const BenchReport r1 = bench_run(model, dir.string(), 4, 1, {QuantMode::hs_int, 1}, "origin");
  const BenchReport r2 = bench_run(model, dir.string(), 4, 1, {QuantMode::hs_int, 1}, "origin");
  fs::remove_all(dir);

  expect(r1.image_count == 10, "image count != 10");
  expect(r1.encode.samples_ms.size() == 10 && r1.decode.samples_ms.size() == 10,
         "sample count != image count");
  expect(r1.encode.p50_ms <= r1.encode.p99_ms && r1.decode.p50_ms <= r1.decode.p99_ms,
         "p50 > p99");
  const BenchReport parsed = report_from_json(to_json(r1));
  expect(parsed.image_count == r1.image_count &&
             parsed.encode.samples_ms == r1.encode.samples_ms &&
             parsed.rows.size() == r1.rows.size(),
         "report schema does not round trip");
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    expect(r1.rows[i].payload_hash == r2.rows[i].payload_hash &&
               r1.rows[i].bytes == r2.rows[i].bytes,
           "payloads differ across runs for " + r1.rows[i].image);
  }
  return "10 images, schema valid, payloads byte-identical across runs";
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<std::string()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "round-trip losslessness", c1_round_trip},
      {2, "entropy-coder optimality", c2_coder_optimality},
      {3, "cdf validity", c3_cdf_validity},
      {4, "range-coder fuzz", c4_fuzz},
      {5, "flops oracle", c5_flops_oracle},
      {6, "latency lut", c6_latency_lut},
      {7, "search correctness", c7_search},
      {8, "supernet properties", c8_supernet},
      {9, "lsq gradients", c9_lsq},
      {10, "quantized-path fidelity", c10_quant_fidelity},
      {11, "metrics", c11_metrics},
      {12, "structural facts", c12_structure},
      {13, "bench harness", c13_bench},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    try {
      const std::string detail = c.fn();
      std::cout << "[PASS] criterion " << c.id << " (" << c.name << "): " << detail
                << std::endl;
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "[FAIL] criterion " << c.id << " (" << c.name << "): " << e.what()
                << std::endl;
    }
  }
  if (failures == 0)
    std::cout << "all 13 acceptance criteria passed" << std::endl;
  else
    std::cout << failures << " acceptance criteria failed" << std::endl;
  return failures;
}
