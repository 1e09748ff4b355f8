// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "lic/common.hpp"
#include "lic/ops.hpp"
#include "lic/tensor.hpp"
#include "lic/weights.hpp"

namespace lic {

// ---------------------------------------------------------------------------
// Search space and sub-configurations.
// ---------------------------------------------------------------------------

/// One searchable layer: a strictly increasing list of candidate output
/// channel widths.
struct SearchSlot {
  std::string name;
  std::vector<int> candidates;

  void validate() const {
    require(!candidates.empty(), "slot ", name, ": empty candidate list");
    for (std::size_t i = 1; i < candidates.size(); ++i)
      require(candidates[i] > candidates[i - 1], "slot ", name,
              ": candidates must be strictly increasing");
  }
};

/// Searchable widths of the codec. Slot order is ga0..ga3, ha0..ha2,
/// hs0..hs1, then g_s. The h_s head is tied to the latent width M, the last
/// g_s layer is fixed at 3, and the g_s input stage defaults to M unless
/// `search_gs_head` adds it as a slot.
struct SearchSpace {
  std::vector<SearchSlot> slots;
  bool search_gs_head = false;

  std::size_t expected_slots() const { return search_gs_head ? 12 : 11; }

  void validate() const {
    require(slots.size() == expected_slots(), "search space has ", slots.size(),
            " slots, expected ", expected_slots());
    for (const auto& s : slots) s.validate();
  }
};

/// One chosen width per searchable slot.
struct SubConfig {
  std::vector<int> choices;

  bool operator==(const SubConfig&) const = default;
  bool operator<(const SubConfig& o) const { return choices < o.choices; }
};

inline SearchSpace default_search_space(int min_c = 32, int max_c = 256, int step = 2) {
  SearchSpace sp;
  std::vector<int> cands;
  for (int c = min_c; c <= max_c; c += step) cands.push_back(c);
  const char* names[] = {"ga0", "ga1", "ga2", "ga3", "ha0", "ha1",
                         "ha2", "hs0", "hs1", "gs1", "gs2"};
  for (const char* n : names) sp.slots.push_back({n, cands});
  return sp;
}

inline void check_choice(const SubConfig& cfg, const SearchSpace& space) {
  space.validate();
  require(cfg.choices.size() == space.slots.size(), "config has ", cfg.choices.size(),
          " choices for ", space.slots.size(), " slots");
  for (std::size_t i = 0; i < cfg.choices.size(); ++i) {
    const auto& c = space.slots[i].candidates;
    require(std::binary_search(c.begin(), c.end(), cfg.choices[i]), "slot ",
            space.slots[i].name, ": choice ", cfg.choices[i], " not a candidate");
  }
}

/// Materialize a SubConfig into the full channel configuration.
inline ChannelConfig materialize(const SubConfig& cfg, const SearchSpace& space) {
  check_choice(cfg, space);
  ChannelConfig out;
  for (int i = 0; i < 4; ++i) out.ga[i] = cfg.choices[static_cast<std::size_t>(i)];
  for (int i = 0; i < 3; ++i) out.ha[i] = cfg.choices[static_cast<std::size_t>(4 + i)];
  out.hs[0] = cfg.choices[7];
  out.hs[1] = cfg.choices[8];
  out.hs[2] = out.ga[3];  // head width tied to M
  std::size_t g = 9;
  out.gs[0] = space.search_gs_head ? cfg.choices[g++] : out.ga[3];
  out.gs[1] = cfg.choices[g++];
  out.gs[2] = cfg.choices[g++];
  out.gs[3] = 3;
  return out;
}

/// Per-layer min-max normalization of the chosen widths to [0, 1];
/// single-candidate slots encode to 0.
inline std::vector<double> encode_config(const SubConfig& cfg, const SearchSpace& space) {
  check_choice(cfg, space);
  std::vector<double> out(cfg.choices.size());
  for (std::size_t i = 0; i < cfg.choices.size(); ++i) {
    const auto& c = space.slots[i].candidates;
    out[i] = c.size() == 1 ? 0.0
                           : static_cast<double>(cfg.choices[i] - c.front()) /
                                 static_cast<double>(c.back() - c.front());
  }
  return out;
}

inline SubConfig min_config(const SearchSpace& space) {
  SubConfig c;
  for (const auto& s : space.slots) c.choices.push_back(s.candidates.front());
  return c;
}

inline SubConfig max_config(const SearchSpace& space) {
  SubConfig c;
  for (const auto& s : space.slots) c.choices.push_back(s.candidates.back());
  return c;
}

inline SubConfig random_config(const SearchSpace& space, SplitMix64& rng) {
  SubConfig c;
  for (const auto& s : space.slots)
    c.choices.push_back(s.candidates[rng.next_below(s.candidates.size())]);
  return c;
}

/// Sandwich sample: {min, random, random, max}, seeded.
inline std::array<SubConfig, 4> sample_sandwich(const SearchSpace& space,
                                                std::uint64_t seed) {
  space.validate();
  SplitMix64 rng(seed);
  return {min_config(space), random_config(space, rng), random_config(space, rng),
          max_config(space)};
}

// ---------------------------------------------------------------------------
// Hypernetwork: per-layer weight banks mixed by softmax coefficients, bias
// from a two-layer MLP with GeLU.
// ---------------------------------------------------------------------------

constexpr int kBankCount = 4;

struct LayerBanks {
  std::string layer;
  int max_out = 0, max_in = 0, kernel = 3;
  std::vector<Tensor> banks;  // kBankCount tensors of (max_out, max_in, k, k)
  std::vector<double> mix_w;  // kBankCount x L, row-major
  std::vector<double> mix_b;  // kBankCount
  int hidden = 0;
  std::vector<double> b1_w;   // hidden x L
  std::vector<double> b1_b;
  std::vector<double> b2_w;   // max_out x hidden
  std::vector<double> b2_b;
};

/// Softmax mixing coefficients of the bank group for one encoded config.
inline std::vector<double> mixing_coefficients(const LayerBanks& lb,
                                               const std::vector<double>& cfg_vec) {
  require(lb.mix_w.size() == static_cast<std::size_t>(kBankCount) * cfg_vec.size(),
          "layer ", lb.layer, ": mixer expects ",
          lb.mix_w.size() / static_cast<std::size_t>(kBankCount), " inputs, got ",
          cfg_vec.size());
  std::vector<double> logits(kBankCount);
  for (int g = 0; g < kBankCount; ++g) {
    double acc = lb.mix_b[static_cast<std::size_t>(g)];
    for (std::size_t i = 0; i < cfg_vec.size(); ++i)
      acc += lb.mix_w[static_cast<std::size_t>(g) * cfg_vec.size() + i] * cfg_vec[i];
    logits[g] = acc;
  }
  return softmax(logits);
}

/// Convex bank combination sliced to the chosen (out_c, in_c) leading
/// channels.
inline Tensor generate_weight(const LayerBanks& lb, const std::vector<double>& cfg_vec,
                              int out_c, int in_c) {
  require(out_c >= 1 && out_c <= lb.max_out && in_c >= 1 && in_c <= lb.max_in, "layer ",
          lb.layer, ": slice (", out_c, ",", in_c, ") outside banks (", lb.max_out, ",",
          lb.max_in, ")");
  const std::vector<double> coeff = mixing_coefficients(lb, cfg_vec);
  Tensor out(out_c, in_c, lb.kernel, lb.kernel);
  for (int oc = 0; oc < out_c; ++oc)
    for (int ic = 0; ic < in_c; ++ic)
      for (int kh = 0; kh < lb.kernel; ++kh)
        for (int kw = 0; kw < lb.kernel; ++kw) {
          double acc = 0.0;
          for (int g = 0; g < kBankCount; ++g)
            acc += coeff[static_cast<std::size_t>(g)] *
                   lb.banks[static_cast<std::size_t>(g)].at(oc, ic, kh, kw);
          out.at(oc, ic, kh, kw) = static_cast<float>(acc);
        }
  return out;
}

/// Bias head: Linear -> GeLU -> Linear, sliced to out_c.
inline std::vector<float> generate_bias(const LayerBanks& lb,
                                        const std::vector<double>& cfg_vec, int out_c) {
  require(out_c >= 1 && out_c <= lb.max_out, "layer ", lb.layer, ": bias slice ", out_c,
          " outside max ", lb.max_out);
  std::vector<double> h(static_cast<std::size_t>(lb.hidden));
  for (int j = 0; j < lb.hidden; ++j) {
    double acc = lb.b1_b[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < cfg_vec.size(); ++i)
      acc += lb.b1_w[static_cast<std::size_t>(j) * cfg_vec.size() + i] * cfg_vec[i];
    h[static_cast<std::size_t>(j)] = gelu_tanh_scalar(acc);
  }
  std::vector<float> out(static_cast<std::size_t>(out_c));
  for (int o = 0; o < out_c; ++o) {
    double acc = lb.b2_b[static_cast<std::size_t>(o)];
    for (int j = 0; j < lb.hidden; ++j)
      acc += lb.b2_w[static_cast<std::size_t>(o) * lb.hidden + j] * h[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(o)] = static_cast<float>(acc);
  }
  return out;
}

struct Supernet {
  SearchSpace space;
  std::vector<LayerBanks> layers;  // one per plan layer, in plan order
};

/// Seeded bank and MLP parameters at the maximal widths of the space.
inline Supernet init_supernet(const SearchSpace& space, std::uint64_t seed,
                              int hidden = 32) {
  space.validate();
  Supernet sn;
  sn.space = space;
  const NetworkPlan plan = make_network_plan(materialize(max_config(space), space));
  const std::size_t L = space.slots.size();
  SplitMix64 rng(seed);
  const std::vector<const std::vector<LayerSpec>*> nets = {&plan.ga, &plan.ha, &plan.hs,
                                                           &plan.gs};
  for (const auto* net : nets) {
    for (const LayerSpec& spec : *net) {
      LayerBanks lb;
      lb.layer = spec.name;
      lb.max_out = spec.out_channels;
      lb.max_in = spec.in_channels;
      lb.kernel = spec.kernel;
      lb.hidden = hidden;
      const double wscale =
          1.0 / std::sqrt(static_cast<double>(spec.in_channels) * spec.kernel * spec.kernel);
      for (int g = 0; g < kBankCount; ++g) {
        Tensor bank(lb.max_out, lb.max_in, lb.kernel, lb.kernel);
        for (float& v : bank.data) v = static_cast<float>(rng.next_signed() * wscale);
        lb.banks.push_back(std::move(bank));
      }
      lb.mix_w.resize(static_cast<std::size_t>(kBankCount) * L);
      for (double& v : lb.mix_w) v = rng.next_signed();
      lb.mix_b.resize(kBankCount);
      for (double& v : lb.mix_b) v = rng.next_signed();
      lb.b1_w.resize(static_cast<std::size_t>(hidden) * L);
      for (double& v : lb.b1_w) v = rng.next_signed();
      lb.b1_b.resize(static_cast<std::size_t>(hidden));
      for (double& v : lb.b1_b) v = rng.next_signed();
      lb.b2_w.resize(static_cast<std::size_t>(lb.max_out) * hidden);
      for (double& v : lb.b2_w) v = rng.next_signed() * wscale;
      lb.b2_b.resize(static_cast<std::size_t>(lb.max_out));
      for (double& v : lb.b2_b) v = rng.next_signed() * wscale;
      sn.layers.push_back(std::move(lb));
    }
  }
  return sn;
}

namespace detail {

/// Leading-channel slice of a weight tensor; the h_s head (two parameter
/// groups stacked on the output dim) slices each half separately.
inline Tensor slice_weight(const Tensor& w, int out_c, int in_c, bool dual_head,
                           int max_half) {
  const int half = dual_head ? out_c / 2 : 0;
  Tensor out(out_c, in_c, w.h, w.w);
  for (int oc = 0; oc < out_c; ++oc) {
    const int src_oc = dual_head && oc >= half ? max_half + (oc - half) : oc;
    for (int ic = 0; ic < in_c; ++ic)
      for (int kh = 0; kh < w.h; ++kh)
        for (int kw = 0; kw < w.w; ++kw)
          out.at(oc, ic, kh, kw) = w.at(src_oc, ic, kh, kw);
  }
  return out;
}

inline std::vector<float> slice_bias(const std::vector<float>& b, int out_c,
                                     bool dual_head, int max_half) {
  std::vector<float> out(static_cast<std::size_t>(out_c));
  const int half = dual_head ? out_c / 2 : 0;
  for (int oc = 0; oc < out_c; ++oc)
    out[static_cast<std::size_t>(oc)] =
        b[static_cast<std::size_t>(dual_head && oc >= half ? max_half + (oc - half) : oc)];
  return out;
}

} // namespace detail

/// Build a concrete model from the hypernetwork for one sub-configuration.
/// The z prior and the h_s integer path use the same defaults as
/// init_weights.
inline ModelWeights materialize_model(const Supernet& sn, const SubConfig& cfg) {
  const ChannelConfig channels = materialize(cfg, sn.space);
  const NetworkPlan plan = make_network_plan(channels);
  const ChannelConfig max_channels = materialize(max_config(sn.space), sn.space);
  const std::vector<double> cfg_vec = encode_config(cfg, sn.space);

  ModelWeights m;
  m.config = channels;
  const std::vector<const std::vector<LayerSpec>*> nets = {&plan.ga, &plan.ha, &plan.hs,
                                                           &plan.gs};
  std::size_t li = 0;
  for (int s = 0; s < 4; ++s) {
    for (const LayerSpec& spec : *nets[s]) {
      const LayerBanks& lb = sn.layers[li++];
      const bool dual = spec.name == "hs2";
      Layer layer;
      layer.spec = spec;
      const Tensor full = generate_weight(lb, cfg_vec, lb.max_out, lb.max_in);
      layer.weight = detail::slice_weight(full, spec.out_channels, spec.in_channels, dual,
                                          max_channels.latent_channels());
      const std::vector<float> full_bias = generate_bias(lb, cfg_vec, lb.max_out);
      layer.bias = detail::slice_bias(full_bias, spec.out_channels, dual,
                                      max_channels.latent_channels());
      m.subnet(s).push_back(std::move(layer));
    }
  }
  m.z_mu.assign(static_cast<std::size_t>(channels.z_channels()), 0.0f);
  m.z_sigma.assign(static_cast<std::size_t>(channels.z_channels()), 1.0f);
  m.mu_scale = 1.0f / 64.0f;
  synthesize_hs_int_path(m);
  m.model_id = compute_model_id(m);
  finalize_model(m);
  return m;
}

/// Slice a trained max-width model down to a sub-configuration: keep the
/// leading output filters and input channels per layer. The h_s integer
/// path is re-synthesized for the sliced widths.
inline ModelWeights slice_submodel(const ModelWeights& max_model,
                                   const ChannelConfig& cfg) {
  cfg.validate();
  const NetworkPlan plan = make_network_plan(cfg);
  ModelWeights m;
  m.config = cfg;
  const std::vector<const std::vector<LayerSpec>*> nets = {&plan.ga, &plan.ha, &plan.hs,
                                                           &plan.gs};
  for (int s = 0; s < 4; ++s) {
    const auto& src_net = max_model.subnet(s);
    for (std::size_t i = 0; i < nets[s]->size(); ++i) {
      const LayerSpec& spec = (*nets[s])[i];
      const Layer& src = src_net[i];
      require(spec.out_channels <= src.spec.out_channels &&
                  spec.in_channels <= src.spec.in_channels,
              "layer ", spec.name, ": slice (", spec.out_channels, ",", spec.in_channels,
              ") exceeds max (", src.spec.out_channels, ",", src.spec.in_channels, ")");
      const bool dual = spec.name == "hs2";
      Layer layer;
      layer.spec = spec;
      layer.weight = detail::slice_weight(src.weight, spec.out_channels, spec.in_channels,
                                          dual, max_model.latent_channels());
      layer.bias = detail::slice_bias(src.bias, spec.out_channels, dual,
                                      max_model.latent_channels());
      m.subnet(s).push_back(std::move(layer));
    }
  }
  const std::size_t cz = static_cast<std::size_t>(cfg.z_channels());
  require(cz <= max_model.z_mu.size(), "sliced z width exceeds the max model");
  m.z_mu.assign(max_model.z_mu.begin(), max_model.z_mu.begin() + cz);
  m.z_sigma.assign(max_model.z_sigma.begin(), max_model.z_sigma.begin() + cz);
  m.mu_scale = max_model.mu_scale;
  synthesize_hs_int_path(m);
  m.model_id = compute_model_id(m);
  finalize_model(m);
  return m;
}

// ---------------------------------------------------------------------------
// FLOPS accounting (multiply + add, bias and activations excluded).
// ---------------------------------------------------------------------------

inline std::uint64_t layer_flops(const LayerSpec& spec, int in_h, int in_w) {
  const std::uint64_t k2 = static_cast<std::uint64_t>(spec.kernel) * spec.kernel;
  if (spec.kind == LayerKind::conv) {
    const std::uint64_t oh = static_cast<std::uint64_t>(out_extent(spec.kind, in_h, spec.stride));
    const std::uint64_t ow = static_cast<std::uint64_t>(out_extent(spec.kind, in_w, spec.stride));
    return 2 * oh * ow * spec.out_channels * static_cast<std::uint64_t>(spec.in_channels) * k2;
  }
  return 2 * static_cast<std::uint64_t>(in_h) * in_w * spec.in_channels *
         static_cast<std::uint64_t>(spec.out_channels) * k2;
}

inline std::uint64_t subnet_flops(const std::vector<LayerSpec>& net, int h, int w) {
  std::uint64_t total = 0;
  for (const LayerSpec& spec : net) {
    total += layer_flops(spec, h, w);
    h = out_extent(spec.kind, h, spec.stride);
    w = out_extent(spec.kind, w, spec.stride);
  }
  return total;
}

/// Whole-model FLOPS for an input of (h, w) pixels (pass padded dims).
inline std::uint64_t model_flops(const ChannelConfig& cfg, int h, int w) {
  const NetworkPlan plan = make_network_plan(cfg);
  const int yh = (h + 15) / 16, yw = (w + 15) / 16;
  const int zh = (yh + 3) / 4, zw = (yw + 3) / 4;
  return subnet_flops(plan.ga, h, w) + subnet_flops(plan.ha, yh, yw) +
         subnet_flops(plan.hs, zh, zw) + subnet_flops(plan.gs, yh, yw);
}

inline std::uint64_t flops(const SubConfig& cfg, const SearchSpace& space, int h, int w) {
  return model_flops(materialize(cfg, space), h, w);
}

// ---------------------------------------------------------------------------
// Latency lookup table.
// ---------------------------------------------------------------------------

struct LutKey {
  std::string kind;  // conv / deconv, or a subnet aggregate (ga, ha, hs, gs)
  int in_c = 0, out_c = 0, kernel = 0, stride = 0, h = 0, w = 0;

  auto tie() const { return std::tie(kind, in_c, out_c, kernel, stride, h, w); }
  bool operator<(const LutKey& o) const { return tie() < o.tie(); }
  bool operator==(const LutKey& o) const { return tie() == o.tie(); }

  std::string str() const {
    std::ostringstream oss;
    oss << kind << "," << in_c << "," << out_c << "," << kernel << "," << stride << ","
        << h << "," << w;
    return oss.str();
  }
};

/// Measured per-operation latencies on one device. Lookups interpolate
/// linearly in out_c between the nearest measured widths; every other key
/// field must match exactly.
struct LatencyTable {
  std::string device;
  std::string timestamp;
  std::map<LutKey, double> entries;

  void insert(const LutKey& key, double ms) {
    require(ms > 0.0, "latency for ", key.str(), " must be positive, got ", ms);
    entries[key] = ms;
  }

  double lookup(const LutKey& key) const {
    const auto it = entries.find(key);
    if (it != entries.end()) return it->second;
    // interpolate in out_c
    double lo_c = 0, lo_ms = 0, hi_c = 0, hi_ms = 0;
    bool has_lo = false, has_hi = false;
    for (const auto& [k, ms] : entries) {
      if (k.kind != key.kind || k.in_c != key.in_c || k.kernel != key.kernel ||
          k.stride != key.stride || k.h != key.h || k.w != key.w)
        continue;
      if (k.out_c <= key.out_c && (!has_lo || k.out_c > lo_c)) {
        lo_c = k.out_c;
        lo_ms = ms;
        has_lo = true;
      }
      if (k.out_c >= key.out_c && (!has_hi || k.out_c < hi_c)) {
        hi_c = k.out_c;
        hi_ms = ms;
        has_hi = true;
      }
    }
    require(has_lo && has_hi, "latency table has no entry covering ", key.str(),
            " (out_c outside the measured hull)");
    if (hi_c == lo_c) return lo_ms;
    const double t = (key.out_c - lo_c) / (hi_c - lo_c);
    return lo_ms + t * (hi_ms - lo_ms);
  }
};

/// Layer-granularity lookup units for a model on an (h, w) input.
inline std::vector<LutKey> layer_units(const ChannelConfig& cfg, int h, int w) {
  const NetworkPlan plan = make_network_plan(cfg);
  std::vector<LutKey> units;
  const std::vector<const std::vector<LayerSpec>*> nets = {&plan.ga, &plan.ha, &plan.hs,
                                                           &plan.gs};
  const int yh = (h + 15) / 16, yw = (w + 15) / 16;
  const int zh = (yh + 3) / 4, zw = (yw + 3) / 4;
  const int hs[4] = {h, yh, zh, yh}, ws[4] = {w, yw, zw, yw};
  for (int s = 0; s < 4; ++s) {
    int ch = hs[s], cw = ws[s];
    for (const LayerSpec& spec : *nets[s]) {
      units.push_back({to_string(spec.kind), spec.in_channels, spec.out_channels,
                       spec.kernel, spec.stride, ch, cw});
      ch = out_extent(spec.kind, ch, spec.stride);
      cw = out_extent(spec.kind, cw, spec.stride);
    }
  }
  return units;
}

/// Subnet-granularity units (one aggregate entry per transform), for tables
/// measured at whole-subnetwork level.
inline std::vector<LutKey> subnet_units(const ChannelConfig& cfg, int h, int w) {
  const int m = cfg.latent_channels(), cz = cfg.z_channels();
  const int yh = (h + 15) / 16, yw = (w + 15) / 16;
  const int zh = (yh + 3) / 4, zw = (yw + 3) / 4;
  return {{"ga", 3, m, 0, 0, h, w},
          {"gs", m, 3, 0, 0, yh, yw},
          {"ha", m, cz, 0, 0, yh, yw},
          {"hs", cz, 2 * m, 0, 0, zh, zw}};
}

inline double lut_latency(const std::vector<LutKey>& units, const LatencyTable& table) {
  double total = 0.0;
  for (const LutKey& u : units) total += table.lookup(u);
  return total;
}

inline double lut_latency(const ChannelConfig& cfg, const LatencyTable& table, int h,
                          int w) {
  return lut_latency(layer_units(cfg, h, w), table);
}

// --- table file format: versioned text, one record per line ---------------

inline void save_latency_table(const LatencyTable& t, const std::string& path) {
  std::ofstream f(path);
  require(f.good(), "cannot open ", path, " for writing");
  f << "licodec-lut v1\n";
  f << "device," << t.device << "\n";
  f << "timestamp," << t.timestamp << "\n";
  f << "kind,in_c,out_c,k,s,h,w,ms\n";
  f.precision(12);
  for (const auto& [k, ms] : t.entries)
    f << k.kind << "," << k.in_c << "," << k.out_c << "," << k.kernel << "," << k.stride
      << "," << k.h << "," << k.w << "," << ms << "\n";
  require(f.good(), "short write to ", path);
}

inline LatencyTable load_latency_table(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot open latency table ", path);
  std::string line;
  require(std::getline(f, line) && line == "licodec-lut v1",
          "bad latency table header in ", path);
  LatencyTable t;
  require(std::getline(f, line) && line.rfind("device,", 0) == 0,
          "latency table missing device line");
  t.device = line.substr(7);
  require(std::getline(f, line) && line.rfind("timestamp,", 0) == 0,
          "latency table missing timestamp line");
  t.timestamp = line.substr(10);
  require(std::getline(f, line) && line == "kind,in_c,out_c,k,s,h,w,ms",
          "latency table missing column header");
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream iss(line);
    LutKey k;
    std::string field;
    auto next = [&](const char* what) {
      require(static_cast<bool>(std::getline(iss, field, ',')), "bad latency record '",
              line, "': missing ", what);
      return field;
    };
    k.kind = next("kind");
    k.in_c = std::stoi(next("in_c"));
    k.out_c = std::stoi(next("out_c"));
    k.kernel = std::stoi(next("k"));
    k.stride = std::stoi(next("s"));
    k.h = std::stoi(next("h"));
    k.w = std::stoi(next("w"));
    t.insert(k, std::stod(next("ms")));
  }
  return t;
}

/// Measure conv/deconv latencies on the host: 3 warmup runs, then the
/// median of `repetitions` timed runs per key.
inline LatencyTable measure_latency_table(const std::vector<LutKey>& keys,
                                          int repetitions, const std::string& device,
                                          std::uint64_t seed = 1, int threads = 1) {
  require(repetitions >= 10, "measurement needs at least 10 repetitions, got ",
          repetitions);
  LatencyTable t;
  t.device = device;
  {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    t.timestamp = buf;
  }
  SplitMix64 rng(seed);
  for (const LutKey& key : keys) {
    require(key.kind == "conv" || key.kind == "deconv",
            "cannot measure aggregate kind '", key.kind, "'");
    LayerSpec spec{key.kind == "conv" ? LayerKind::conv : LayerKind::deconv, key.in_c,
                   key.out_c, key.kernel, key.stride, Activation::none, "measure"};
    Tensor x(1, key.in_c, key.h, key.w);
    for (float& v : x.data) v = static_cast<float>(rng.next_signed());
    Tensor w(key.out_c, key.in_c, key.kernel, key.kernel);
    for (float& v : w.data) v = static_cast<float>(rng.next_signed());
    const std::vector<float> bias(static_cast<std::size_t>(key.out_c), 0.1f);
    auto run = [&] {
      return spec.kind == LayerKind::conv ? conv2d(x, w, bias, spec, threads)
                                          : deconv2d(x, w, bias, spec, threads);
    };
    for (int i = 0; i < 3; ++i) (void)run();
    std::vector<double> samples(static_cast<std::size_t>(repetitions));
    for (int i = 0; i < repetitions; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)run();
      const auto t1 = std::chrono::steady_clock::now();
      samples[static_cast<std::size_t>(i)] =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    const double median =
        n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    t.insert(key, std::max(median, 1e-9));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Constrained search.
// ---------------------------------------------------------------------------

struct SearchConstraints {
  std::optional<std::uint64_t> max_flops;
  std::optional<double> max_latency_ms;
  const LatencyTable* table = nullptr;
  int input_h = 1088;
  int input_w = 1920;
};

using Scorer = std::function<double(const SubConfig&)>;

struct SearchPoint {
  SubConfig config;
  std::uint64_t flops = 0;
  double latency_ms = 0.0;
  double score = 0.0;
  bool feasible = false;
};

struct SearchResult {
  bool feasible = false;
  SearchPoint best;
  std::vector<SearchPoint> pareto;  // (latency, score) front over feasible configs
  std::size_t evaluations = 0;
  bool exhaustive = false;
};

inline std::uint64_t space_size(const SearchSpace& space) {
  std::uint64_t n = 1;
  for (const auto& s : space.slots) {
    const std::uint64_t c = s.candidates.size();
    if (n > UINT64_MAX / c) return UINT64_MAX;
    n *= c;
  }
  return n;
}

namespace detail {

inline SearchPoint evaluate_point(const SubConfig& cfg, const SearchSpace& space,
                                  const SearchConstraints& cons, const Scorer& scorer) {
  SearchPoint p;
  p.config = cfg;
  p.flops = flops(cfg, space, cons.input_h, cons.input_w);
  const ChannelConfig channels = materialize(cfg, space);
  p.latency_ms =
      cons.table ? lut_latency(channels, *cons.table, cons.input_h, cons.input_w)
                 : static_cast<double>(p.flops);
  p.feasible = (!cons.max_flops || p.flops <= *cons.max_flops) &&
               (!cons.max_latency_ms || p.latency_ms <= *cons.max_latency_ms);
  if (p.feasible) p.score = scorer(cfg);
  return p;
}

/// Keep (score, config) as the deterministic order: parallel evaluation of
/// distinct configs can never change the winner.
inline bool better(const SearchPoint& a, const SearchPoint& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.config < b.config;
}

inline std::vector<SearchPoint> pareto_front(std::vector<SearchPoint> pts) {
  std::vector<SearchPoint> front;
  std::sort(pts.begin(), pts.end(), [](const SearchPoint& a, const SearchPoint& b) {
    if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
    if (a.score != b.score) return a.score < b.score;
    return a.config < b.config;
  });
  double best_score = std::numeric_limits<double>::infinity();
  for (const SearchPoint& p : pts) {
    if (!front.empty() && front.back().config == p.config) continue;
    if (p.score < best_score) {
      front.push_back(p);
      best_score = p.score;
    }
  }
  return front;
}

} // namespace detail

/// Feasible argmin of the scorer: exhaustive when the space has at most
/// `exhaustive_threshold` configs (default 4096), otherwise a seeded
/// evolutionary loop (population 16, tournament 4, one-slot +-1-step
/// mutation).
inline SearchResult search(const SearchSpace& space, const SearchConstraints& cons,
                           const Scorer& scorer, std::size_t budget,
                           std::uint64_t seed = 1,
                           std::uint64_t exhaustive_threshold = 4096) {
  space.validate();
  SearchResult result;
  std::vector<SearchPoint> feasible_pts;

  if (space_size(space) <= exhaustive_threshold) {
    result.exhaustive = true;
    SubConfig cfg = min_config(space);
    std::vector<std::size_t> idx(space.slots.size(), 0);
    while (true) {
      const SearchPoint p = detail::evaluate_point(cfg, space, cons, scorer);
      ++result.evaluations;
      if (p.feasible) feasible_pts.push_back(p);
      // odometer increment
      std::size_t i = 0;
      for (; i < idx.size(); ++i) {
        if (++idx[i] < space.slots[i].candidates.size()) {
          cfg.choices[i] = space.slots[i].candidates[idx[i]];
          break;
        }
        idx[i] = 0;
        cfg.choices[i] = space.slots[i].candidates[0];
      }
      if (i == idx.size()) break;
    }
  } else {
    SplitMix64 rng(seed);
    std::map<SubConfig, SearchPoint> seen;
    auto eval = [&](const SubConfig& cfg) -> const SearchPoint& {
      auto it = seen.find(cfg);
      if (it == seen.end()) {
        it = seen.emplace(cfg, detail::evaluate_point(cfg, space, cons, scorer)).first;
        ++result.evaluations;
        if (it->second.feasible) feasible_pts.push_back(it->second);
      }
      return it->second;
    };

    constexpr std::size_t kPop = 16, kTournament = 4;
    // revisiting a cached config costs no budget, so cap total iterations
    // to guarantee termination on spaces smaller than the budget
    std::size_t iterations_left = budget * 16 + 1024;
    std::vector<SearchPoint> pop;
    while (pop.size() < kPop && result.evaluations < budget && iterations_left-- > 0) {
      const SearchPoint& p = eval(random_config(space, rng));
      if (p.feasible) pop.push_back(p);
    }
    while (!pop.empty() && result.evaluations < budget && iterations_left-- > 0) {
      const SearchPoint* parent = nullptr;
      for (std::size_t t = 0; t < kTournament; ++t) {
        const SearchPoint& cand = pop[rng.next_below(pop.size())];
        if (!parent || detail::better(cand, *parent)) parent = &cand;
      }
      SubConfig child = parent->config;
      const std::size_t slot = rng.next_below(child.choices.size());
      const auto& cands = space.slots[slot].candidates;
      const auto cur = std::lower_bound(cands.begin(), cands.end(), child.choices[slot]);
      const std::ptrdiff_t pos = cur - cands.begin();
      const std::ptrdiff_t step = rng.next() & 1 ? 1 : -1;
      const std::ptrdiff_t next =
          std::clamp<std::ptrdiff_t>(pos + step, 0, static_cast<std::ptrdiff_t>(cands.size()) - 1);
      child.choices[slot] = cands[static_cast<std::size_t>(next)];
      const SearchPoint& cp = eval(child);
      if (cp.feasible) {
        auto worst = std::max_element(pop.begin(), pop.end(),
                                      [](const SearchPoint& a, const SearchPoint& b) {
                                        return detail::better(a, b);
                                      });
        if (detail::better(cp, *worst)) *worst = cp;
      }
    }
  }

  if (feasible_pts.empty()) {
    result.feasible = false;
    return result;
  }
  result.feasible = true;
  result.best = *std::min_element(feasible_pts.begin(), feasible_pts.end(),
                                  detail::better);
  result.pareto = detail::pareto_front(std::move(feasible_pts));
  return result;
}

} // namespace lic
