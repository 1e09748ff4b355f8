// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "lic/common.hpp"

namespace lic {

// ---------------------------------------------------------------------------
// Discretized Gaussian probability model.
// ---------------------------------------------------------------------------

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865476); }

/// P(round(v) == symbol) for v ~ N(mu, sigma^2):
/// Phi((s+0.5-mu)/sigma) - Phi((s-0.5-mu)/sigma).
/// Zero-mean inputs go through |s| so the +-k symmetry is exact in floats,
/// not just up to erfc rounding.
inline double discretized_gaussian_pmf(double mu, double sigma, int symbol) {
  require(sigma > 0.0, "discretized_gaussian_pmf: sigma must be positive, got ", sigma);
  if (mu == 0.0) symbol = std::abs(symbol);
  const double hi = (symbol + 0.5 - mu) / sigma;
  const double lo = (symbol - 0.5 - mu) / sigma;
  return normal_cdf(hi) - normal_cdf(lo);
}

// ---------------------------------------------------------------------------
// Integer CDF tables, 16-bit precision.
// ---------------------------------------------------------------------------

constexpr std::uint32_t kCdfPrecision = 16;
constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecision;

/// Cumulative-frequency table over symbols {-a_max..a_max} plus one escape
/// symbol. cum is strictly increasing with cum[0] = 0 and cum.back() = 2^16,
/// so every symbol has pmf >= 1/65536 and the table is total.
struct CdfTable {
  int a_max = 0;
  std::vector<std::uint32_t> cum;

  int alphabet_size() const { return 2 * a_max + 2; }
  int escape_index() const { return 2 * a_max + 1; }
  int index_of(int value) const { return value + a_max; }
  int value_of(int index) const { return index - a_max; }

  std::uint32_t low(int index) const { return cum[static_cast<std::size_t>(index)]; }
  std::uint32_t freq(int index) const {
    return cum[static_cast<std::size_t>(index) + 1] - cum[static_cast<std::size_t>(index)];
  }

  bool valid() const {
    if (cum.size() != static_cast<std::size_t>(alphabet_size()) + 1) return false;
    if (cum.front() != 0 || cum.back() != kCdfTotal) return false;
    for (std::size_t i = 0; i + 1 < cum.size(); ++i)
      if (cum[i + 1] <= cum[i]) return false;
    return true;
  }
};

/// Quantize the zero-mean discretized Gaussian to a total integer table.
/// Tail mass beyond +-a_max goes to the escape symbol; rounding surplus or
/// deficit is absorbed by the largest-mass symbol (ties broken by lowest
/// index). Total for any sigma > 0.
inline CdfTable build_cdf_table(double sigma, int a_max) {
  require(sigma > 0.0, "build_cdf_table: sigma must be positive, got ", sigma);
  require(a_max >= 0, "build_cdf_table: negative a_max");
  const int n_symbols = 2 * a_max + 2;

  // pmf computed for k >= 0 and mirrored, so the real-valued table is
  // exactly symmetric before quantization.
  std::vector<double> half(static_cast<std::size_t>(a_max) + 1);
  for (int k = 0; k <= a_max; ++k) half[k] = discretized_gaussian_pmf(0.0, sigma, k);
  const double escape_mass =
      std::max(0.0, 2.0 * (1.0 - normal_cdf((a_max + 0.5) / sigma)));

  std::vector<double> mass(static_cast<std::size_t>(n_symbols));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_symbols));
  for (int i = 0; i < n_symbols - 1; ++i) {
    const int value = i - a_max;
    mass[i] = half[static_cast<std::size_t>(std::abs(value))];
    counts[i] = std::max<std::int64_t>(1, round_half_away(mass[i] * kCdfTotal));
  }
  mass[n_symbols - 1] = escape_mass;
  counts[n_symbols - 1] = std::max<std::int64_t>(1, round_half_away(escape_mass * kCdfTotal));

  // Absorb the rounding deficit/surplus into the largest-mass symbol (the
  // real-valued mass, so a +-k pair can never be preferred over the center;
  // ties break toward the lowest index). If a subtraction would push the
  // absorber below 1, the remainder cascades to the next-largest mass.
  std::int64_t diff = static_cast<std::int64_t>(kCdfTotal) -
                      std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  std::vector<std::size_t> by_mass(counts.size());
  for (std::size_t i = 0; i < by_mass.size(); ++i) by_mass[i] = i;
  std::stable_sort(by_mass.begin(), by_mass.end(),
                   [&mass](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
  for (std::size_t rank = 0; diff != 0 && rank < by_mass.size(); ++rank) {
    const std::size_t i = by_mass[rank];
    if (diff > 0) {
      counts[i] += diff;
      diff = 0;
    } else {
      const std::int64_t take = std::min(counts[i] - 1, -diff);
      counts[i] -= take;
      diff += take;
    }
  }
  require(diff == 0, "cdf quantization could not settle (sigma=", sigma, ")");

  CdfTable t;
  t.a_max = a_max;
  t.cum.resize(static_cast<std::size_t>(n_symbols) + 1);
  t.cum[0] = 0;
  for (int i = 0; i < n_symbols; ++i)
    t.cum[i + 1] = t.cum[i] + static_cast<std::uint32_t>(counts[i]);
  return t;
}

/// 64 sigma bins, log-spaced over [0.11, 256], each with a precomputed
/// zero-mean table. Shared by encoder and decoder so the probability models
/// are bit-identical.
struct ScaleTable {
  std::vector<double> bins;
  std::vector<CdfTable> cdfs;
};

inline ScaleTable make_scale_table(int n_bins = 64, double sigma_min = 0.11,
                                   double sigma_max = 256.0, int a_max = 255) {
  require(n_bins >= 2, "scale table needs at least 2 bins");
  ScaleTable t;
  t.bins.resize(static_cast<std::size_t>(n_bins));
  const double lo = std::log(sigma_min), hi = std::log(sigma_max);
  for (int i = 0; i < n_bins; ++i)
    t.bins[i] = std::exp(lo + (hi - lo) * i / (n_bins - 1));
  t.cdfs.reserve(t.bins.size());
  for (double s : t.bins) t.cdfs.push_back(build_cdf_table(s, a_max));
  return t;
}

inline const ScaleTable& default_scale_table() {
  static const ScaleTable table = make_scale_table();
  return table;
}

/// Smallest bin whose sigma covers the input, clamped to the table.
inline int sigma_to_bin(double sigma, const ScaleTable& table) {
  const auto it = std::lower_bound(table.bins.begin(), table.bins.end(), sigma);
  if (it == table.bins.end()) return static_cast<int>(table.bins.size()) - 1;
  return static_cast<int>(it - table.bins.begin());
}

// ---------------------------------------------------------------------------
// Range coder: 64-bit low (32-bit active window, carries resolved in the
// output buffer), 32-bit range, byte-wise renormalization. The flush emits
// the exact final low, which lets the decoder verify that its state returns
// to zero after the last symbol -- a free whole-stream integrity check.
// ---------------------------------------------------------------------------

class RangeEncoder {
public:
  /// Narrow the interval to [cum_low, cum_low + freq) / 2^16.
  void put(std::uint32_t cum_low, std::uint32_t freq) {
    const std::uint32_t r = range_ >> kCdfPrecision;
    low_ += static_cast<std::uint64_t>(r) * cum_low;
    range_ = r * freq;
    if (low_ >> 32) {
      propagate_carry();
      low_ &= 0xffffffffull;
    }
    while (range_ < kTop) {
      out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
      low_ = (low_ << 8) & 0xffffffffull;
      range_ <<= 8;
    }
  }

  void put(const CdfTable& table, int index) { put(table.low(index), table.freq(index)); }

  /// Terminate: emit the four bytes of the final low. Fixed 32-bit overhead.
  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
      low_ = (low_ << 8) & 0xffffffffull;
    }
    return std::move(out_);
  }

private:
  void propagate_carry() {
    for (auto it = out_.rbegin(); it != out_.rend(); ++it) {
      if (++(*it) != 0) return;
    }
    // Interval nesting keeps the code value below the initial range, so a
    // carry can never run off the front of the buffer.
    fail("range encoder carry escaped the output buffer");
  }

  static constexpr std::uint32_t kTop = 1u << 24;
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xffffffffu;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
  RangeDecoder(const std::uint8_t* data, std::size_t len) : data_(data), len_(len) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }
  explicit RangeDecoder(const std::vector<std::uint8_t>& bytes)
      : RangeDecoder(bytes.data(), bytes.size()) {}

  /// Decode one symbol index against `table`.
  int get(const CdfTable& table) {
    const std::uint32_t r = range_ >> kCdfPrecision;
    const std::uint32_t target = std::min<std::uint32_t>(code_ / r, kCdfTotal - 1);
    // Largest index with cum[index] <= target.
    const auto it = std::upper_bound(table.cum.begin(), table.cum.end(), target);
    const int index = static_cast<int>(it - table.cum.begin()) - 1;
    code_ -= r * table.low(index);
    range_ = r * table.freq(index);
    while (range_ < kTop) {
      code_ = ((code_ << 8) | next_byte()) & 0xffffffffu;
      range_ <<= 8;
    }
    return index;
  }

  /// After the last symbol the decoder must have consumed the whole buffer
  /// and returned to code 0; anything else means the stream is corrupt.
  void verify_end() const {
    require(pos_ == len_, "corrupt range-coded stream: ", len_ - pos_, " trailing bytes");
    require(code_ == 0, "corrupt range-coded stream: nonzero final state");
  }

  std::size_t consumed() const { return pos_; }

private:
  std::uint8_t next_byte() {
    require(pos_ < len_, "truncated range-coded stream at byte ", pos_);
    return data_[pos_++];
  }

  static constexpr std::uint32_t kTop = 1u << 24;
  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xffffffffu;
};

// ---------------------------------------------------------------------------
// Value-level coding with the escape path.
// ---------------------------------------------------------------------------

using TableSelector = std::function<const CdfTable&(std::size_t)>;

/// Main stream bytes plus the raw values that escaped the alphabet; the
/// caller packs the escapes through the bypass coder.
struct EncodedStream {
  std::vector<std::uint8_t> bytes;
  std::vector<std::int32_t> escapes;
};

/// Encode integer values; anything outside [-a_max, a_max] is coded as the
/// escape symbol and appended to the side channel.
inline EncodedStream range_encode(const std::vector<std::int32_t>& values,
                                  const TableSelector& table_for) {
  RangeEncoder enc;
  EncodedStream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const CdfTable& t = table_for(i);
    const std::int32_t v = values[i];
    if (v < -t.a_max || v > t.a_max) {
      enc.put(t, t.escape_index());
      out.escapes.push_back(v);
    } else {
      enc.put(t, t.index_of(v));
    }
  }
  out.bytes = enc.finish();
  return out;
}

/// Inverse of range_encode. `escapes` supplies the side-channel values in
/// order. When `escape_cursor` is null the whole side channel must be
/// consumed; otherwise consumption starts at *escape_cursor and the cursor
/// is advanced (several streams can share one side channel).
inline std::vector<std::int32_t> range_decode(const std::vector<std::uint8_t>& bytes,
                                              const TableSelector& table_for,
                                              std::size_t count,
                                              const std::vector<std::int32_t>& escapes = {},
                                              std::size_t* escape_cursor = nullptr) {
  RangeDecoder dec(bytes);
  std::vector<std::int32_t> values(count);
  std::size_t esc = escape_cursor ? *escape_cursor : 0;
  for (std::size_t i = 0; i < count; ++i) {
    const CdfTable& t = table_for(i);
    const int index = dec.get(t);
    if (index == t.escape_index()) {
      require(esc < escapes.size(), "corrupt stream: escape side channel exhausted");
      values[i] = escapes[esc++];
    } else {
      values[i] = t.value_of(index);
    }
  }
  if (escape_cursor)
    *escape_cursor = esc;
  else
    require(esc == escapes.size(), "corrupt stream: ", escapes.size() - esc,
            " unused escape values");
  dec.verify_end();
  return values;
}

/// Ideal coded size of a value sequence under its own quantized tables,
/// in bits. Escaped values cost the escape symbol (side-channel bits not
/// included).
inline double quantized_cost_bits(const std::vector<std::int32_t>& values,
                                  const TableSelector& table_for) {
  double bits = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const CdfTable& t = table_for(i);
    const int index = (values[i] < -t.a_max || values[i] > t.a_max)
                          ? t.escape_index()
                          : t.index_of(values[i]);
    bits -= std::log2(static_cast<double>(t.freq(index)) / kCdfTotal);
  }
  return bits;
}

// ---------------------------------------------------------------------------
// Bypass coding: fixed-width two's-complement packing, MSB first.
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> bypass_encode(const std::vector<std::int32_t>& values,
                                               int bits_per_value) {
  require(bits_per_value >= 1 && bits_per_value <= 32, "bypass width must be in [1,32]");
  const std::int64_t lo = -(std::int64_t{1} << (bits_per_value - 1));
  const std::int64_t hi = (std::int64_t{1} << (bits_per_value - 1)) - 1;
  std::vector<std::uint8_t> out;
  out.reserve((values.size() * bits_per_value + 7) / 8);
  std::uint32_t acc = 0;
  int acc_bits = 0;
  for (std::int32_t v : values) {
    require(v >= lo && v <= hi, "bypass value ", v, " does not fit in ", bits_per_value,
            " bits");
    const std::uint32_t u =
        static_cast<std::uint32_t>(v) &
        (bits_per_value == 32 ? 0xffffffffu : ((1u << bits_per_value) - 1));
    for (int b = bits_per_value - 1; b >= 0; --b) {
      acc = (acc << 1) | ((u >> b) & 1u);
      if (++acc_bits == 8) {
        out.push_back(static_cast<std::uint8_t>(acc));
        acc = 0;
        acc_bits = 0;
      }
    }
  }
  if (acc_bits > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - acc_bits)));
  return out;
}

inline std::vector<std::int32_t> bypass_decode(const std::vector<std::uint8_t>& bytes,
                                               int bits_per_value, std::size_t count) {
  require(bits_per_value >= 1 && bits_per_value <= 32, "bypass width must be in [1,32]");
  require(bytes.size() * 8 >= count * static_cast<std::size_t>(bits_per_value),
          "bypass stream too short: ", bytes.size(), " bytes for ", count, " values of ",
          bits_per_value, " bits");
  std::vector<std::int32_t> out(count);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < bits_per_value; ++b, ++bit)
      u = (u << 1) | ((bytes[bit / 8] >> (7 - bit % 8)) & 1u);
    // sign extend
    if (bits_per_value < 32 && (u & (1u << (bits_per_value - 1))))
      u |= ~((1u << bits_per_value) - 1u);
    out[i] = static_cast<std::int32_t>(u);
  }
  return out;
}

} // namespace lic
