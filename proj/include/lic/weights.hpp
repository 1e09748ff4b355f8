// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lic/common.hpp"
#include "lic/entropy.hpp"
#include "lic/ops.hpp"
#include "lic/tensor.hpp"

namespace lic {

// ---------------------------------------------------------------------------
// Channel configuration.
// ---------------------------------------------------------------------------

/// Output channels of every (de)convolution in the four subnetworks. The
/// last g_a entry is the main latent width M; the last h_s entry is the
/// per-parameter width of the mu/sigma head and must equal M; the last g_s
/// entry is the RGB output.
struct ChannelConfig {
  std::array<int, 4> ga{};
  std::array<int, 3> ha{};
  std::array<int, 3> hs{};
  std::array<int, 4> gs{};

  int latent_channels() const { return ga[3]; }
  int z_channels() const { return ha[2]; }

  void validate() const {
    for (int v : ga) require(v > 0, "config: non-positive g_a channel");
    for (int v : ha) require(v > 0, "config: non-positive h_a channel");
    for (int v : hs) require(v > 0, "config: non-positive h_s channel");
    for (int v : gs) require(v > 0, "config: non-positive g_s channel");
    require(gs[3] == 3, "config: last g_s layer must emit 3 channels, got ", gs[3]);
    require(hs[2] == ga[3], "config: h_s head width ", hs[2],
            " must equal the latent width ", ga[3]);
  }

  bool operator==(const ChannelConfig&) const = default;
};

inline ChannelConfig origin_config() {
  return ChannelConfig{{48, 96, 112, 176}, {176, 246, 176}, {246, 176, 176},
                       {176, 112, 96, 3}};
}

inline ChannelConfig nas_config() {
  return ChannelConfig{{32, 120, 104, 220}, {248, 224, 256}, {236, 200, 220},
                       {220, 112, 112, 3}};
}

/// The fixed layer plan behind a ChannelConfig. Kernel/stride follow the
/// k5s2 / k3s1 pattern of the main and hyper transforms; the final h_s conv
/// emits 2M channels (mu then sigma).
struct NetworkPlan {
  std::vector<LayerSpec> ga, ha, hs, gs;
};

inline NetworkPlan make_network_plan(const ChannelConfig& cfg) {
  cfg.validate();
  NetworkPlan p;
  const int m = cfg.latent_channels();
  int in = 3;
  for (int i = 0; i < 4; ++i) {
    p.ga.push_back({LayerKind::conv, in, cfg.ga[i], 5, 2,
                    i < 3 ? Activation::relu : Activation::none,
                    "ga" + std::to_string(i)});
    in = cfg.ga[i];
  }
  p.ha.push_back({LayerKind::conv, m, cfg.ha[0], 3, 1, Activation::relu, "ha0"});
  p.ha.push_back({LayerKind::conv, cfg.ha[0], cfg.ha[1], 5, 2, Activation::relu, "ha1"});
  p.ha.push_back({LayerKind::conv, cfg.ha[1], cfg.ha[2], 5, 2, Activation::none, "ha2"});

  p.hs.push_back({LayerKind::deconv, cfg.ha[2], cfg.hs[0], 5, 2, Activation::relu, "hs0"});
  p.hs.push_back({LayerKind::deconv, cfg.hs[0], cfg.hs[1], 5, 2, Activation::relu, "hs1"});
  p.hs.push_back({LayerKind::conv, cfg.hs[1], 2 * m, 3, 1, Activation::none, "hs2"});

  in = m;
  for (int i = 0; i < 4; ++i) {
    p.gs.push_back({LayerKind::deconv, in, cfg.gs[i], 5, 2,
                    i < 3 ? Activation::relu6 : Activation::none,
                    "gs" + std::to_string(i)});
    in = cfg.gs[i];
  }
  return p;
}

// ---------------------------------------------------------------------------
// Layers and the full parameter store.
// ---------------------------------------------------------------------------

/// Integer-path parameters of one layer: int8 weights with per-channel
/// scales, int32 bias, and fixed-point requantization.
struct IntLayer {
  float in_scale = 1.0f;
  QuantTensor weight;
  std::vector<std::int32_t> bias;
  RequantParams requant;
};

struct Layer {
  LayerSpec spec;
  Tensor weight;  // (out_c, in_c, k, k)
  std::vector<float> bias;
  std::optional<IntLayer> iq;
};

/// Serialized parameter store for one model. Immutable once loaded;
/// shareable across threads.
struct ModelWeights {
  ChannelConfig config;
  std::vector<Layer> ga, ha, hs, gs;
  std::vector<float> z_mu, z_sigma;  // z prior, per hyper-latent channel
  float mu_scale = 1.0f / 64.0f;     // dequantization scale of the integer mu path
  // One row of 64 int32 thresholds per sigma channel: bin(acc) is the first
  // entry >= acc, so larger accumulator values never map to a smaller bin.
  std::vector<std::array<std::int32_t, 64>> sigma_thresholds;
  std::uint64_t model_id = 0;

  // derived, not serialized
  std::vector<CdfTable> z_tables;

  int latent_channels() const { return config.latent_channels(); }
  int z_channels() const { return config.z_channels(); }

  const std::vector<Layer>& subnet(int i) const {
    switch (i) {
      case 0: return ga;
      case 1: return ha;
      case 2: return hs;
      default: return gs;
    }
  }
  std::vector<Layer>& subnet(int i) {
    switch (i) {
      case 0: return ga;
      case 1: return ha;
      case 2: return hs;
      default: return gs;
    }
  }
};

// ---------------------------------------------------------------------------
// Integer-path construction helpers.
// ---------------------------------------------------------------------------

/// Pick (mult, shift) with mult in [2^30, 2^31) so mult/2^shift approximates
/// ratio to better than 2^-30 relative. Ratios below ~2^-32 saturate to a
/// representation that requantizes every reachable accumulator to zero.
inline std::pair<std::int32_t, std::int32_t> choose_requant(double ratio) {
  require(ratio > 0.0 && std::isfinite(ratio), "requant ratio must be positive, got ",
          ratio);
  int shift = 0;
  double m = ratio;
  while (m < static_cast<double>(1u << 30) && shift < 62) {
    m *= 2.0;
    ++shift;
  }
  while (m >= 2147483648.0) {
    m *= 0.5;
    --shift;
  }
  std::int64_t mult = round_half_away(m);
  if (mult == 2147483648ll) {  // rounded up to 2^31
    mult >>= 1;
    --shift;
  }
  if (mult < (1ll << 30)) mult = 1ll << 30;  // underflow clamp at shift 62
  require(shift >= 0, "requant ratio ", ratio, " too large");
  return {static_cast<std::int32_t>(mult), shift};
}

/// Build the integer path of one layer from its float parameters and the
/// chosen activation scales. Weight scales are per-output-channel absmax;
/// each channel's scale is floored so its quantized bias fits in 2^29 of
/// accumulator headroom (relevant only for near-zero weight channels).
inline IntLayer build_int_layer(const Layer& layer, float in_scale, float out_scale) {
  require(in_scale > 0.0f && out_scale > 0.0f, "layer ", layer.spec.name,
          ": activation scales must be positive");
  require(int8_acc_bound(layer.spec) < (std::int64_t{1} << 30), "layer ", layer.spec.name,
          ": int8 accumulator bound exceeded (k=", layer.spec.kernel,
          ", in_c=", layer.spec.in_channels, ")");
  const Tensor& w = layer.weight;
  const int oc_n = layer.spec.out_channels;
  const std::size_t per = w.numel() / static_cast<std::size_t>(std::max(1, w.n));

  IntLayer out;
  out.in_scale = in_scale;
  out.weight.n = w.n;
  out.weight.c = w.c;
  out.weight.h = w.h;
  out.weight.w = w.w;
  out.weight.data.resize(w.numel());
  out.weight.scale.resize(static_cast<std::size_t>(oc_n));
  out.bias.resize(static_cast<std::size_t>(oc_n));
  out.requant.mult.resize(static_cast<std::size_t>(oc_n));
  out.requant.shift.resize(static_cast<std::size_t>(oc_n));
  out.requant.out_scale = out_scale;
  out.requant.act_hi = static_cast<std::int32_t>(
      std::min<std::int64_t>(127, round_half_away(6.0 / out_scale)));

  for (int oc = 0; oc < oc_n; ++oc) {
    const float* src = w.data.data() + per * static_cast<std::size_t>(oc);
    double absmax = 0.0;
    for (std::size_t i = 0; i < per; ++i)
      absmax = std::max(absmax, std::fabs(static_cast<double>(src[i])));
    const double b = layer.bias.empty() ? 0.0 : layer.bias[oc];
    const double scale =
        std::max({absmax / 127.0, 1e-12,
                  std::fabs(b) / (static_cast<double>(in_scale) * std::ldexp(1.0, 29))});
    out.weight.scale[oc] = static_cast<float>(scale);
    std::int8_t* dst = out.weight.data.data() + per * static_cast<std::size_t>(oc);
    for (std::size_t i = 0; i < per; ++i)
      dst[i] = saturate_int8(round_half_away(static_cast<double>(src[i]) / scale));

    const double acc_scale = static_cast<double>(in_scale) * out.weight.scale[oc];
    const std::int64_t bq = round_half_away(b / acc_scale);
    require(std::llabs(bq) < (std::int64_t{1} << 30), "layer ", layer.spec.name,
            ": quantized bias overflows the accumulator headroom");
    out.bias[oc] = static_cast<std::int32_t>(bq);
    const auto [m, n] = choose_requant(acc_scale / out_scale);
    out.requant.mult[oc] = m;
    out.requant.shift[oc] = n;
  }
  return out;
}

/// Threshold rows that reproduce sigma_to_bin(exp(acc * acc_scale)) in pure
/// integer comparisons: bin = first b with acc <= T[b].
inline std::array<std::int32_t, 64> sigma_threshold_row(double acc_scale,
                                                        const ScaleTable& st) {
  require(acc_scale > 0.0, "sigma threshold row: non-positive accumulator scale");
  std::array<std::int32_t, 64> row{};
  for (std::size_t b = 0; b < st.bins.size() && b < 64; ++b) {
    const double t = std::log(st.bins[b]) / acc_scale;
    row[b] = static_cast<std::int32_t>(
        std::max<double>(std::min<double>(std::floor(t), 2147483647.0), -2147483648.0));
  }
  return row;
}

/// Map a raw sigma-channel accumulator to its bin.
inline int sigma_bin_from_acc(std::int32_t acc, const std::array<std::int32_t, 64>& row) {
  const auto it = std::lower_bound(row.begin(), row.end(), acc);
  if (it == row.end()) return 63;
  return static_cast<int>(it - row.begin());
}

namespace detail {

// Default activation scales for the synthesized (uncalibrated) h_s integer
// path. The z latent enters as small integers; hidden activations are kept
// on a coarse grid. Calibration replaces these with measured scales.
constexpr float kDefaultZInScale = 0.25f;
constexpr float kDefaultHiddenScale = 0.125f;

} // namespace detail

/// Synthesize the h_s integer path (weights, requant, mu scale, sigma
/// thresholds) from the float parameters. Deterministic; used by
/// init_weights so a freshly initialized model can already decode.
inline void synthesize_hs_int_path(ModelWeights& model) {
  require(model.hs.size() == 3, "h_s must have 3 layers");
  const float scales[4] = {detail::kDefaultZInScale, detail::kDefaultHiddenScale,
                           detail::kDefaultHiddenScale, model.mu_scale};
  for (std::size_t i = 0; i < 3; ++i)
    model.hs[i].iq = build_int_layer(model.hs[i], scales[i], scales[i + 1]);

  const Layer& head = model.hs[2];
  const int m = model.latent_channels();
  model.sigma_thresholds.clear();
  model.sigma_thresholds.reserve(static_cast<std::size_t>(m));
  const ScaleTable& st = default_scale_table();
  for (int j = 0; j < m; ++j) {
    const double acc_scale = static_cast<double>(head.iq->in_scale) *
                             head.iq->weight.scale[static_cast<std::size_t>(m + j)];
    model.sigma_thresholds.push_back(sigma_threshold_row(acc_scale, st));
  }
}

// ---------------------------------------------------------------------------
// Serialization ("LICW" format) and the model id.
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kWeightsMagic[4] = {'L', 'I', 'C', 'W'};
constexpr std::uint8_t kWeightsVersion = 1;

inline void write_layer(ByteWriter& w, const Layer& layer) {
  w.put_string(layer.spec.name);
  w.put_u8(static_cast<std::uint8_t>(layer.spec.kind));
  w.put_u8(static_cast<std::uint8_t>(layer.spec.act));
  w.put_u32(static_cast<std::uint32_t>(layer.spec.in_channels));
  w.put_u32(static_cast<std::uint32_t>(layer.spec.out_channels));
  w.put_u32(static_cast<std::uint32_t>(layer.spec.kernel));
  w.put_u32(static_cast<std::uint32_t>(layer.spec.stride));
  w.put_u8(0);  // dtype f32
  w.put_u32(static_cast<std::uint32_t>(layer.weight.n));
  w.put_u32(static_cast<std::uint32_t>(layer.weight.c));
  w.put_u32(static_cast<std::uint32_t>(layer.weight.h));
  w.put_u32(static_cast<std::uint32_t>(layer.weight.w));
  for (float v : layer.weight.data) w.put_f32(v);
  w.put_u32(static_cast<std::uint32_t>(layer.bias.size()));
  for (float v : layer.bias) w.put_f32(v);
  w.put_u8(layer.iq ? 1 : 0);
  if (layer.iq) {
    const IntLayer& q = *layer.iq;
    w.put_f32(q.in_scale);
    w.put_u32(static_cast<std::uint32_t>(q.weight.scale.size()));
    for (float v : q.weight.scale) w.put_f32(v);
    w.put_bytes(q.weight.data.data(), q.weight.data.size());
    for (std::int32_t v : q.bias) w.put_i32(v);
    for (std::int32_t v : q.requant.mult) w.put_i32(v);
    for (std::int32_t v : q.requant.shift) w.put_i32(v);
    w.put_f32(q.requant.out_scale);
    w.put_i32(q.requant.act_hi);
  }
}

inline Layer read_layer(ByteReader& r) {
  Layer layer;
  layer.spec.name = r.get_string();
  layer.spec.kind = static_cast<LayerKind>(r.get_u8());
  layer.spec.act = static_cast<Activation>(r.get_u8());
  layer.spec.in_channels = static_cast<int>(r.get_u32());
  layer.spec.out_channels = static_cast<int>(r.get_u32());
  layer.spec.kernel = static_cast<int>(r.get_u32());
  layer.spec.stride = static_cast<int>(r.get_u32());
  const std::uint8_t dtype = r.get_u8();
  require(dtype == 0, "layer ", layer.spec.name, ": unknown dtype tag ", int(dtype));
  const int wn = static_cast<int>(r.get_u32());
  const int wc = static_cast<int>(r.get_u32());
  const int wh = static_cast<int>(r.get_u32());
  const int ww = static_cast<int>(r.get_u32());
  require(wn >= 0 && wc >= 0 && wh >= 0 && ww >= 0 &&
              static_cast<std::uint64_t>(wn) * wc * wh * ww < (1ull << 32),
          "layer ", layer.spec.name, ": implausible weight dims");
  layer.weight = Tensor(wn, wc, wh, ww);
  for (float& v : layer.weight.data) v = r.get_f32();
  layer.bias.resize(r.get_u32());
  for (float& v : layer.bias) v = r.get_f32();
  if (r.get_u8()) {
    IntLayer q;
    q.in_scale = r.get_f32();
    q.weight.n = wn;
    q.weight.c = wc;
    q.weight.h = wh;
    q.weight.w = ww;
    const std::uint32_t n_scales = r.get_u32();
    require(n_scales == static_cast<std::uint32_t>(wn), "layer ", layer.spec.name,
            ": expected ", wn, " weight scales, file has ", n_scales);
    q.weight.scale.resize(n_scales);
    for (float& v : q.weight.scale) v = r.get_f32();
    q.weight.data.resize(layer.weight.numel());
    r.get_bytes(q.weight.data.data(), q.weight.data.size());
    const std::size_t oc = static_cast<std::size_t>(layer.spec.out_channels);
    q.bias.resize(oc);
    for (std::int32_t& v : q.bias) v = r.get_i32();
    q.requant.mult.resize(oc);
    for (std::int32_t& v : q.requant.mult) v = r.get_i32();
    q.requant.shift.resize(oc);
    for (std::int32_t& v : q.requant.shift) v = r.get_i32();
    q.requant.out_scale = r.get_f32();
    q.requant.act_hi = r.get_i32();
    layer.iq = std::move(q);
  }
  return layer;
}

inline void write_body(ByteWriter& w, const ModelWeights& m) {
  for (int v : m.config.ga) w.put_u32(static_cast<std::uint32_t>(v));
  for (int v : m.config.ha) w.put_u32(static_cast<std::uint32_t>(v));
  for (int v : m.config.hs) w.put_u32(static_cast<std::uint32_t>(v));
  for (int v : m.config.gs) w.put_u32(static_cast<std::uint32_t>(v));
  w.put_u32(static_cast<std::uint32_t>(m.z_mu.size()));
  for (float v : m.z_mu) w.put_f32(v);
  for (float v : m.z_sigma) w.put_f32(v);
  w.put_f32(m.mu_scale);
  w.put_u32(static_cast<std::uint32_t>(m.sigma_thresholds.size()));
  for (const auto& row : m.sigma_thresholds)
    for (std::int32_t v : row) w.put_i32(v);
  const std::vector<const std::vector<Layer>*> nets = {&m.ga, &m.ha, &m.hs, &m.gs};
  std::uint32_t n_layers = 0;
  for (const auto* net : nets) n_layers += static_cast<std::uint32_t>(net->size());
  w.put_u32(n_layers);
  for (const auto* net : nets)
    for (const Layer& l : *net) write_layer(w, l);
}

} // namespace detail

inline std::uint64_t compute_model_id(const ModelWeights& m) {
  ByteWriter w;
  detail::write_body(w, m);
  return fnv1a64(w.bytes().data(), w.size());
}

/// Full-file serialization: magic, version, model id, body, CRC32.
inline std::vector<std::uint8_t> serialize_weights(const ModelWeights& m) {
  ByteWriter w;
  w.put_bytes(detail::kWeightsMagic, 4);
  w.put_u8(detail::kWeightsVersion);
  w.put_u64(m.model_id);
  detail::write_body(w, m);
  const std::uint32_t crc = crc32(w.bytes().data(), w.size());
  w.put_u32(crc);
  return std::move(w.bytes());
}

/// Rebuild the derived state (z-prior CDF tables) and validate invariants.
inline void finalize_model(ModelWeights& m) {
  m.config.validate();
  const NetworkPlan plan = make_network_plan(m.config);
  const std::vector<const std::vector<LayerSpec>*> specs = {&plan.ga, &plan.ha, &plan.hs,
                                                            &plan.gs};
  for (int s = 0; s < 4; ++s) {
    const auto& net = m.subnet(s);
    require(net.size() == specs[s]->size(), "model subnet ", s, " has ", net.size(),
            " layers, plan expects ", specs[s]->size());
    for (std::size_t i = 0; i < net.size(); ++i) {
      const LayerSpec& got = net[i].spec;
      const LayerSpec& want = (*specs[s])[i];
      require(got.kind == want.kind && got.in_channels == want.in_channels &&
                  got.out_channels == want.out_channels && got.kernel == want.kernel &&
                  got.stride == want.stride,
              "layer ", want.name, ": stored spec does not match the config plan");
      require(net[i].weight.n == got.out_channels && net[i].weight.c == got.in_channels &&
                  net[i].weight.h == got.kernel && net[i].weight.w == got.kernel,
              "layer ", want.name, ": weight dims ", net[i].weight.dims_str(),
              " inconsistent with spec");
      require(net[i].bias.size() == static_cast<std::size_t>(got.out_channels), "layer ",
              want.name, ": bias length mismatch");
      if (net[i].iq) {
        require(int8_acc_bound(got) < (std::int64_t{1} << 30), "layer ", want.name,
                ": int8 accumulator bound exceeded");
        require(net[i].iq->in_scale > 0.0f && net[i].iq->requant.out_scale > 0.0f,
                "layer ", want.name, ": non-positive activation scale");
        for (std::size_t c = 0; c < net[i].iq->requant.mult.size(); ++c) {
          const std::int32_t mult = net[i].iq->requant.mult[c];
          const std::int32_t shift = net[i].iq->requant.shift[c];
          require(mult >= (1 << 30) && shift >= 0 && shift <= 62, "layer ", want.name,
                  ": requantizer out of range (mult=", mult, ", shift=", shift, ")");
        }
        for (float s : net[i].iq->weight.scale)
          require(s > 0.0f, "layer ", want.name, ": non-positive weight scale");
      }
    }
  }
  require(m.z_mu.size() == static_cast<std::size_t>(m.z_channels()) &&
              m.z_sigma.size() == m.z_mu.size(),
          "z prior length mismatch: ", m.z_mu.size(), " for ", m.z_channels(),
          " channels");
  for (float s : m.z_sigma) require(s > 0.0f, "z prior sigma must be positive, got ", s);
  require(m.mu_scale > 0.0f, "mu scale must be positive");
  m.z_tables.clear();
  m.z_tables.reserve(m.z_sigma.size());
  for (float s : m.z_sigma) m.z_tables.push_back(build_cdf_table(s, 255));
}

inline ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 4 + 1 + 8 + 4, "weight file too short (", bytes.size(),
          " bytes)");
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
  require(crc32(bytes.data(), bytes.size() - 4) == stored_crc,
          "weight file CRC mismatch");

  ByteReader r(bytes.data(), bytes.size() - 4);
  char magic[4];
  r.get_bytes(magic, 4);
  require(std::memcmp(magic, detail::kWeightsMagic, 4) == 0, "bad weight file magic");
  const std::uint8_t version = r.get_u8();
  require(version == detail::kWeightsVersion, "unsupported weight file version ",
          int(version));
  ModelWeights m;
  m.model_id = r.get_u64();
  const std::size_t body_begin = r.pos();

  for (int& v : m.config.ga) v = static_cast<int>(r.get_u32());
  for (int& v : m.config.ha) v = static_cast<int>(r.get_u32());
  for (int& v : m.config.hs) v = static_cast<int>(r.get_u32());
  for (int& v : m.config.gs) v = static_cast<int>(r.get_u32());
  m.z_mu.resize(r.get_u32());
  for (float& v : m.z_mu) v = r.get_f32();
  m.z_sigma.resize(m.z_mu.size());
  for (float& v : m.z_sigma) v = r.get_f32();
  m.mu_scale = r.get_f32();
  m.sigma_thresholds.resize(r.get_u32());
  for (auto& row : m.sigma_thresholds)
    for (std::int32_t& v : row) v = r.get_i32();
  const std::uint32_t n_layers = r.get_u32();
  require(n_layers == 14, "expected 14 layers, file has ", n_layers);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    Layer layer = detail::read_layer(r);
    if (i < 4) m.ga.push_back(std::move(layer));
    else if (i < 7) m.ha.push_back(std::move(layer));
    else if (i < 10) m.hs.push_back(std::move(layer));
    else m.gs.push_back(std::move(layer));
  }
  require(r.remaining() == 0, "weight file has ", r.remaining(), " trailing bytes");

  const std::uint64_t recomputed =
      fnv1a64(bytes.data() + body_begin, bytes.size() - 4 - body_begin);
  require(recomputed == m.model_id, "model id mismatch: file says ", m.model_id,
          ", contents hash to ", recomputed);
  finalize_model(m);
  return m;
}

inline void save_weights(const ModelWeights& m, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_weights(m);
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "cannot open ", path, " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  require(f.good(), "short write to ", path);
}

inline ModelWeights load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  require(f.good(), "cannot open weight file ", path);
  const std::streamsize size = f.tellg();
  f.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  f.read(reinterpret_cast<char*>(bytes.data()), size);
  require(f.good(), "short read from ", path);
  return deserialize_weights(bytes);
}

// ---------------------------------------------------------------------------
// Seed initialization.
// ---------------------------------------------------------------------------

/// Deterministic pseudo-random model: SplitMix64 draws in layer order,
/// weights and biases uniform in [-1, 1) scaled by 1/sqrt(fan_in). The z
/// prior starts at N(0, 1) per channel and the h_s integer path is
/// synthesized so the model can encode and decode immediately.
inline ModelWeights init_weights(const ChannelConfig& cfg, std::uint64_t seed) {
  const NetworkPlan plan = make_network_plan(cfg);
  ModelWeights m;
  m.config = cfg;
  SplitMix64 rng(seed);
  const std::vector<const std::vector<LayerSpec>*> nets = {&plan.ga, &plan.ha, &plan.hs,
                                                           &plan.gs};
  for (int s = 0; s < 4; ++s) {
    for (const LayerSpec& spec : *nets[s]) {
      Layer layer;
      layer.spec = spec;
      const double scale =
          1.0 / std::sqrt(static_cast<double>(spec.in_channels) * spec.kernel *
                          spec.kernel);
      layer.weight = Tensor(spec.out_channels, spec.in_channels, spec.kernel, spec.kernel);
      for (float& v : layer.weight.data)
        v = static_cast<float>(rng.next_signed() * scale);
      layer.bias.resize(static_cast<std::size_t>(spec.out_channels));
      for (float& v : layer.bias) v = static_cast<float>(rng.next_signed() * scale);
      m.subnet(s).push_back(std::move(layer));
    }
  }
  m.z_mu.assign(static_cast<std::size_t>(cfg.z_channels()), 0.0f);
  m.z_sigma.assign(static_cast<std::size_t>(cfg.z_channels()), 1.0f);
  m.mu_scale = 1.0f / 64.0f;
  synthesize_hs_int_path(m);
  m.model_id = compute_model_id(m);
  finalize_model(m);
  return m;
}

} // namespace lic
