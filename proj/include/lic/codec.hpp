// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lic/common.hpp"
#include "lic/entropy.hpp"
#include "lic/ops.hpp"
#include "lic/tensor.hpp"
#include "lic/weights.hpp"

namespace lic {

// ---------------------------------------------------------------------------
// Bitstream container.
// ---------------------------------------------------------------------------

enum class QuantMode : std::uint8_t { float_path = 0, hs_int = 1, full_int = 2 };

inline const char* to_string(QuantMode m) {
  switch (m) {
    case QuantMode::float_path: return "float";
    case QuantMode::hs_int: return "hs-int";
    default: return "full-int";
  }
}

struct CodecOptions {
  QuantMode mode = QuantMode::hs_int;
  int threads = 1;
};

/// Fixed 34-byte little-endian container header.
struct BitstreamHeader {
  static constexpr std::size_t kSize = 34;
  std::uint8_t version = 1;
  std::uint8_t flags = 0;  // bits 0-1: QuantMode
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t model_id = 0;
  std::uint32_t z_stream_len = 0;
  std::uint32_t y_stream_len = 0;
  std::uint32_t bypass_len = 0;

  QuantMode mode() const { return static_cast<QuantMode>(flags & 0x3); }

  void write(ByteWriter& w) const {
    w.put_bytes("LICP", 4);
    w.put_u8(version);
    w.put_u8(flags);
    w.put_u32(width);
    w.put_u32(height);
    w.put_u64(model_id);
    w.put_u32(z_stream_len);
    w.put_u32(y_stream_len);
    w.put_u32(bypass_len);
  }

  static BitstreamHeader parse(ByteReader& r) {
    char magic[4];
    r.get_bytes(magic, 4);
    require(std::memcmp(magic, "LICP", 4) == 0, "bad bitstream magic");
    BitstreamHeader h;
    h.version = r.get_u8();
    require(h.version == 1, "unsupported bitstream version ", int(h.version));
    h.flags = r.get_u8();
    require((h.flags & 0x3) <= 2, "bad quantization mode flag ", int(h.flags & 0x3));
    h.width = r.get_u32();
    h.height = r.get_u32();
    h.model_id = r.get_u64();
    h.z_stream_len = r.get_u32();
    h.y_stream_len = r.get_u32();
    h.bypass_len = r.get_u32();
    require(h.width > 0 && h.height > 0, "bitstream declares empty image");
    return h;
  }
};

// ---------------------------------------------------------------------------
// Padding.
// ---------------------------------------------------------------------------

/// Pad right/bottom by edge replication to the next multiple.
inline Tensor pad_replicate(const Tensor& x, int multiple = 64) {
  require(multiple > 0, "pad multiple must be positive");
  const int ph = (x.h + multiple - 1) / multiple * multiple;
  const int pw = (x.w + multiple - 1) / multiple * multiple;
  if (ph == x.h && pw == x.w) return x;
  Tensor out(x.n, x.c, ph, pw);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic)
      for (int ih = 0; ih < ph; ++ih) {
        const int sh = std::min(ih, x.h - 1);
        for (int iw = 0; iw < pw; ++iw)
          out.at(in, ic, ih, iw) = x.at(in, ic, sh, std::min(iw, x.w - 1));
      }
  return out;
}

/// Top-left crop back to (h, w).
inline Tensor crop(const Tensor& x, int h, int w) {
  require(h >= 1 && w >= 1 && h <= x.h && w <= x.w, "crop to (", h, ",", w,
          ") outside tensor ", x.dims_str());
  if (h == x.h && w == x.w) return x;
  Tensor out(x.n, x.c, h, w);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic)
      for (int ih = 0; ih < h; ++ih)
        for (int iw = 0; iw < w; ++iw) out.at(in, ic, ih, iw) = x.at(in, ic, ih, iw);
  return out;
}

// ---------------------------------------------------------------------------
// Subnet execution.
// ---------------------------------------------------------------------------

inline Tensor run_subnet_float(const std::vector<Layer>& net, Tensor x, int threads) {
  for (const Layer& l : net) {
    x = l.spec.kind == LayerKind::conv ? conv2d(x, l.weight, l.bias, l.spec, threads)
                                       : deconv2d(x, l.weight, l.bias, l.spec, threads);
  }
  return x;
}

/// Per-tensor symmetric int8 quantization of an activation.
inline QuantTensor quantize_activation(const Tensor& x, float scale, int threads = 1) {
  QuantTensor q(x.n, x.c, x.h, x.w, scale);
  const double inv = 1.0 / scale;
  parallel_for(0, static_cast<std::int64_t>(x.numel()), threads, [&](std::int64_t i) {
    q.data[i] = saturate_int8(round_half_away(x.data[i] * inv));
  });
  return q;
}

inline Tensor dequantize(const QuantTensor& q) {
  Tensor x(q.n, q.c, q.h, q.w);
  const float s = q.scale[0];
  for (std::size_t i = 0; i < q.numel(); ++i)
    x.data[i] = static_cast<float>(q.data[i]) * s;
  return x;
}

/// Run a whole subnet on the integer path. The float input is quantized
/// with the first layer's activation scale; each layer requantizes into the
/// next layer's input scale.
inline QuantTensor run_subnet_int(const std::vector<Layer>& net, const Tensor& x,
                                  int threads) {
  require(!net.empty(), "empty subnet");
  require(net.front().iq.has_value(), "layer ", net.front().spec.name,
          ": integer path requested but not present in the model");
  QuantTensor q = quantize_activation(x, net.front().iq->in_scale, threads);
  for (const Layer& l : net) {
    require(l.iq.has_value(), "layer ", l.spec.name,
            ": integer path requested but not present in the model");
    require(q.scale[0] == l.iq->in_scale, "layer ", l.spec.name,
            ": activation scale chain broken");
    q = l.spec.kind == LayerKind::conv
            ? quant_conv2d(q, l.iq->weight, l.iq->bias, l.iq->requant, l.spec, threads)
            : quant_deconv2d(q, l.iq->weight, l.iq->bias, l.iq->requant, l.spec, threads);
  }
  return q;
}

// ---------------------------------------------------------------------------
// The deterministic hyper-decoder.
// ---------------------------------------------------------------------------

/// Entropy parameters of the main latent: mu per element plus the sigma bin
/// selecting a precomputed CDF table.
struct HyperParams {
  Tensor mu;                      // (1, M, yh, yw)
  std::vector<std::uint8_t> bins; // one bin per mu element, same layout
};

/// Evaluate h_s on the quantized hyper-latent. On the integer path the
/// whole transform runs in int8/int32; mu is a single float multiply of the
/// requantized head output by mu_scale, and sigma bins come from the int32
/// threshold rows -- identical bits on every run, platform and thread count.
inline HyperParams hyper_decode_params(const Tensor& zhat, const ModelWeights& model,
                                       const CodecOptions& opts = {}) {
  const int m = model.latent_channels();
  HyperParams out;
  if (opts.mode == QuantMode::float_path) {
    Tensor hs = run_subnet_float(model.hs, zhat, opts.threads);
    require(hs.c == 2 * m, "h_s emitted ", hs.c, " channels, expected ", 2 * m);
    out.mu = Tensor(1, m, hs.h, hs.w);
    out.bins.resize(out.mu.numel());
    const ScaleTable& st = default_scale_table();
    for (int c = 0; c < m; ++c)
      for (int ih = 0; ih < hs.h; ++ih)
        for (int iw = 0; iw < hs.w; ++iw) {
          out.mu.at(0, c, ih, iw) = hs.at(0, c, ih, iw);
          const double sigma = std::exp(static_cast<double>(hs.at(0, c + m, ih, iw)));
          out.bins[out.mu.index(0, c, ih, iw)] =
              static_cast<std::uint8_t>(sigma_to_bin(sigma, st));
        }
    return out;
  }

  require(model.hs.size() == 3, "h_s must have 3 layers");
  require(model.sigma_thresholds.size() == static_cast<std::size_t>(m),
          "model lacks sigma threshold rows");
  // First two layers on the int8 path, head kept as raw int32 accumulators.
  require(model.hs[0].iq.has_value(), "layer hs0: integer path missing");
  QuantTensor a = quantize_activation(zhat, model.hs[0].iq->in_scale, opts.threads);
  for (int i = 0; i < 2; ++i) {
    const Layer& l = model.hs[i];
    require(l.iq.has_value(), "layer ", l.spec.name, ": integer path missing");
    require(a.scale[0] == l.iq->in_scale, "layer ", l.spec.name,
            ": activation scale chain broken");
    a = quant_deconv2d(a, l.iq->weight, l.iq->bias, l.iq->requant, l.spec, opts.threads);
  }
  const Layer& head = model.hs[2];
  require(head.iq.has_value(), "layer hs2: integer path missing");
  require(a.scale[0] == head.iq->in_scale, "layer hs2: activation scale chain broken");
  Int32Tensor acc =
      quant_conv2d_acc(a, head.iq->weight, head.iq->bias, head.spec, opts.threads);

  out.mu = Tensor(1, m, acc.h, acc.w);
  out.bins.resize(out.mu.numel());
  const float s_mu = model.mu_scale;
  for (int c = 0; c < m; ++c) {
    const std::int32_t mult = head.iq->requant.mult[c];
    const std::int32_t shift = head.iq->requant.shift[c];
    const auto& row = model.sigma_thresholds[static_cast<std::size_t>(c)];
    for (int ih = 0; ih < acc.h; ++ih)
      for (int iw = 0; iw < acc.w; ++iw) {
        const std::int32_t m_int =
            saturate_int8(requant_one(acc.at(0, c, ih, iw), mult, shift));
        out.mu.at(0, c, ih, iw) = static_cast<float>(m_int) * s_mu;
        out.bins[out.mu.index(0, c, ih, iw)] = static_cast<std::uint8_t>(
            sigma_bin_from_acc(acc.at(0, c + m, ih, iw), row));
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encode / decode.
// ---------------------------------------------------------------------------

namespace detail {

inline Tensor forward_analysis(const std::vector<Layer>& net, const Tensor& x,
                               const CodecOptions& opts) {
  if (opts.mode == QuantMode::full_int) return dequantize(run_subnet_int(net, x, opts.threads));
  return run_subnet_float(net, x, opts.threads);
}

inline std::vector<std::int32_t> z_symbols_from(const Tensor& z,
                                                const ModelWeights& model,
                                                std::vector<std::int32_t>& zq_out) {
  std::vector<std::int32_t> syms(z.numel());
  zq_out.resize(z.numel());
  for (int c = 0; c < z.c; ++c) {
    const std::int32_t mu_q = round_half_away_i32(model.z_mu[static_cast<std::size_t>(c)]);
    for (int ih = 0; ih < z.h; ++ih)
      for (int iw = 0; iw < z.w; ++iw) {
        const std::size_t i = z.index(0, c, ih, iw);
        zq_out[i] = round_half_away_i32(z.data[i]);
        syms[i] = zq_out[i] - mu_q;
      }
  }
  return syms;
}

inline TableSelector z_table_selector(const ModelWeights& model, int zh, int zw) {
  const std::size_t plane = static_cast<std::size_t>(zh) * zw;
  return [&model, plane](std::size_t i) -> const CdfTable& {
    return model.z_tables[i / plane];
  };
}

inline TableSelector y_table_selector(const std::vector<std::uint8_t>& bins) {
  const ScaleTable& st = default_scale_table();
  return [&bins, &st](std::size_t i) -> const CdfTable& { return st.cdfs[bins[i]]; };
}

} // namespace detail

/// The exact symbols a codec run committed to (or recovered from) a stream.
struct DecodedLatents {
  std::vector<std::int32_t> zhat;
  std::vector<std::int32_t> residual;
};

/// Encode an RGB image tensor (1, 3, H, W) in [0, 1]. The container is
/// header || z stream || y stream || bypass stream, bit-exact.
/// `latents_out`, when given, receives the transported symbols.
inline std::vector<std::uint8_t> encode_image(const Tensor& x, const ModelWeights& model,
                                              const CodecOptions& opts = {},
                                              DecodedLatents* latents_out = nullptr) {
  require(x.n == 1 && x.c == 3, "encoder expects a (1,3,H,W) tensor, got ", x.dims_str());
  require(x.h >= 1 && x.w >= 1, "empty image");
  require(static_cast<std::uint64_t>(x.h) <= 0xffffffffull &&
              static_cast<std::uint64_t>(x.w) <= 0xffffffffull,
          "image dims overflow the container header");

  const Tensor padded = pad_replicate(x, 64);
  const Tensor y = detail::forward_analysis(model.ga, padded, opts);
  const Tensor z = detail::forward_analysis(model.ha, y, opts);

  // hyper latent: zhat = round(z), coded zero-mean against the channel prior
  std::vector<std::int32_t> zq;
  const std::vector<std::int32_t> z_syms = detail::z_symbols_from(z, model, zq);
  EncodedStream z_stream = range_encode(z_syms, detail::z_table_selector(model, z.h, z.w));

  Tensor zhat(1, z.c, z.h, z.w);
  for (std::size_t i = 0; i < zq.size(); ++i)
    zhat.data[i] = static_cast<float>(zq[i]);

  const HyperParams hp = hyper_decode_params(zhat, model, opts);
  require(hp.mu.h == y.h && hp.mu.w == y.w && hp.mu.c == y.c,
          "hyper decoder produced ", hp.mu.dims_str(), " for latent ", y.dims_str());

  // main latent: code the centered residual r = round(y - mu)
  std::vector<std::int32_t> r_syms(y.numel());
  for (std::size_t i = 0; i < y.numel(); ++i)
    r_syms[i] = round_half_away_i32(static_cast<double>(y.data[i]) -
                                    static_cast<double>(hp.mu.data[i]));
  EncodedStream y_stream = range_encode(r_syms, detail::y_table_selector(hp.bins));

  std::vector<std::int32_t> escapes = std::move(z_stream.escapes);
  escapes.insert(escapes.end(), y_stream.escapes.begin(), y_stream.escapes.end());
  const std::vector<std::uint8_t> bypass = bypass_encode(escapes, 16);

  BitstreamHeader h;
  h.flags = static_cast<std::uint8_t>(opts.mode);
  h.width = static_cast<std::uint32_t>(x.w);
  h.height = static_cast<std::uint32_t>(x.h);
  h.model_id = model.model_id;
  h.z_stream_len = static_cast<std::uint32_t>(z_stream.bytes.size());
  h.y_stream_len = static_cast<std::uint32_t>(y_stream.bytes.size());
  h.bypass_len = static_cast<std::uint32_t>(bypass.size());

  if (latents_out) {
    latents_out->zhat = std::move(zq);
    latents_out->residual = std::move(r_syms);
  }

  ByteWriter w;
  h.write(w);
  w.put_bytes(z_stream.bytes.data(), z_stream.bytes.size());
  w.put_bytes(y_stream.bytes.data(), y_stream.bytes.size());
  w.put_bytes(bypass.data(), bypass.size());
  return std::move(w.bytes());
}

namespace detail {

struct ParsedContainer {
  BitstreamHeader header;
  std::vector<std::uint8_t> z_bytes, y_bytes;
  std::vector<std::int32_t> escapes;
};

inline ParsedContainer parse_container(const std::vector<std::uint8_t>& bytes,
                                       const ModelWeights& model) {
  ByteReader r(bytes);
  ParsedContainer pc;
  pc.header = BitstreamHeader::parse(r);
  require(pc.header.model_id == model.model_id,
          "bitstream was produced by a different model (id ", pc.header.model_id,
          " vs ", model.model_id, ")");
  const std::uint64_t expected = BitstreamHeader::kSize +
                                 static_cast<std::uint64_t>(pc.header.z_stream_len) +
                                 pc.header.y_stream_len + pc.header.bypass_len;
  require(expected == bytes.size(), "container length mismatch: header declares ",
          expected, " bytes, input has ", bytes.size());
  pc.z_bytes.resize(pc.header.z_stream_len);
  r.get_bytes(pc.z_bytes.data(), pc.z_bytes.size());
  pc.y_bytes.resize(pc.header.y_stream_len);
  r.get_bytes(pc.y_bytes.data(), pc.y_bytes.size());
  std::vector<std::uint8_t> bypass(pc.header.bypass_len);
  r.get_bytes(bypass.data(), bypass.size());
  require(pc.header.bypass_len % 2 == 0, "bypass stream length must be even");
  pc.escapes = bypass_decode(bypass, 16, pc.header.bypass_len / 2);
  return pc;
}

} // namespace detail

/// Decode a container back to the reconstructed image (1, 3, H, W).
/// `latents_out`, when given, receives the transported symbols.
inline Tensor decode_image(const std::vector<std::uint8_t>& bytes,
                           const ModelWeights& model, const CodecOptions& opts = {},
                           DecodedLatents* latents_out = nullptr) {
  detail::ParsedContainer pc = detail::parse_container(bytes, model);
  CodecOptions run = opts;
  run.mode = pc.header.mode();

  const int ph = (static_cast<int>(pc.header.height) + 63) / 64 * 64;
  const int pw = (static_cast<int>(pc.header.width) + 63) / 64 * 64;
  const int yh = ph / 16, yw = pw / 16;
  const int zh = ph / 64, zw = pw / 64;
  const int m = model.latent_channels();
  const int cz = model.z_channels();

  std::size_t escape_cursor = 0;
  const std::size_t z_count = static_cast<std::size_t>(cz) * zh * zw;
  const std::vector<std::int32_t> z_syms =
      range_decode(pc.z_bytes, detail::z_table_selector(model, zh, zw), z_count,
                   pc.escapes, &escape_cursor);

  Tensor zhat(1, cz, zh, zw);
  std::vector<std::int32_t> zq(z_count);
  for (int c = 0; c < cz; ++c) {
    const std::int32_t mu_q = round_half_away_i32(model.z_mu[static_cast<std::size_t>(c)]);
    for (int ih = 0; ih < zh; ++ih)
      for (int iw = 0; iw < zw; ++iw) {
        const std::size_t i = zhat.index(0, c, ih, iw);
        zq[i] = z_syms[i] + mu_q;
        zhat.data[i] = static_cast<float>(zq[i]);
      }
  }

  const HyperParams hp = hyper_decode_params(zhat, model, run);
  require(hp.mu.c == m && hp.mu.h == yh && hp.mu.w == yw, "hyper decoder produced ",
          hp.mu.dims_str(), ", expected (1,", m, ",", yh, ",", yw, ")");

  const std::size_t y_count = static_cast<std::size_t>(m) * yh * yw;
  const std::vector<std::int32_t> r_syms = range_decode(
      pc.y_bytes, detail::y_table_selector(hp.bins), y_count, pc.escapes, &escape_cursor);
  require(escape_cursor == pc.escapes.size(), "corrupt stream: ",
          pc.escapes.size() - escape_cursor, " unused bypass values");

  Tensor yhat(1, m, yh, yw);
  for (std::size_t i = 0; i < y_count; ++i)
    yhat.data[i] = static_cast<float>(r_syms[i]) + hp.mu.data[i];

  Tensor xhat = run.mode == QuantMode::full_int
                    ? dequantize(run_subnet_int(model.gs, yhat, run.threads))
                    : run_subnet_float(model.gs, yhat, run.threads);
  for (float& v : xhat.data) v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);

  if (latents_out) {
    latents_out->zhat = std::move(zq);
    latents_out->residual = r_syms;
  }
  return crop(xhat, static_cast<int>(pc.header.height), static_cast<int>(pc.header.width));
}

/// Parse just the header (for inspection tools).
inline BitstreamHeader inspect_bitstream(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  return BitstreamHeader::parse(r);
}

} // namespace lic
