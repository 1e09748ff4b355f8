// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "lic/common.hpp"
#include "lic/tensor.hpp"

namespace lic {

/// 8-bit RGB raster, row-major, interleaved.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  Raster() = default;
  Raster(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool operator==(const Raster&) const = default;
};

/// Pixel-to-float mapping v / 255 into a (1, 3, H, W) tensor.
inline Tensor raster_to_tensor(const Raster& r) {
  Tensor t(1, 3, r.height, r.width);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < 3; ++c)
        t.at(0, c, y, x) = static_cast<float>(r.at(x, y, c)) / 255.0f;
  return t;
}

inline Raster tensor_to_raster(const Tensor& t) {
  require(t.n == 1 && t.c == 3, "raster conversion expects (1,3,H,W), got ",
          t.dims_str());
  Raster r(t.w, t.h);
  for (int y = 0; y < t.h; ++y)
    for (int x = 0; x < t.w; ++x)
      for (int c = 0; c < 3; ++c) {
        const std::int64_t v = round_half_away(static_cast<double>(t.at(0, c, y, x)) * 255.0);
        r.at(x, y, c) = static_cast<std::uint8_t>(std::clamp<std::int64_t>(v, 0, 255));
      }
  return r;
}

// ---------------------------------------------------------------------------
// BMP: 24-bit uncompressed BI_RGB.
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_bmp(const Raster& r) {
  const int row_bytes = r.width * 3;
  const int row_padded = (row_bytes + 3) & ~3;
  const std::uint32_t data_size = static_cast<std::uint32_t>(row_padded) * r.height;
  ByteWriter w;
  w.put_u8('B');
  w.put_u8('M');
  w.put_u32(14 + 40 + data_size);
  w.put_u32(0);
  w.put_u32(14 + 40);
  w.put_u32(40);  // BITMAPINFOHEADER
  w.put_u32(static_cast<std::uint32_t>(r.width));
  w.put_u32(static_cast<std::uint32_t>(r.height));
  w.put_u16(1);
  w.put_u16(24);
  w.put_u32(0);  // BI_RGB
  w.put_u32(data_size);
  w.put_u32(2835);
  w.put_u32(2835);
  w.put_u32(0);
  w.put_u32(0);
  for (int y = r.height - 1; y >= 0; --y) {  // bottom-up, BGR
    for (int x = 0; x < r.width; ++x) {
      w.put_u8(r.at(x, y, 2));
      w.put_u8(r.at(x, y, 1));
      w.put_u8(r.at(x, y, 0));
    }
    for (int p = row_bytes; p < row_padded; ++p) w.put_u8(0);
  }
  return std::move(w.bytes());
}

inline Raster decode_bmp(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  require(r.get_u8() == 'B' && r.get_u8() == 'M', "not a BMP file");
  r.get_u32();  // file size
  r.get_u32();
  const std::uint32_t data_offset = r.get_u32();
  const std::uint32_t header_size = r.get_u32();
  require(header_size >= 40, "unsupported BMP header size ", header_size);
  const std::int32_t width = r.get_i32();
  const std::int32_t height_raw = r.get_i32();
  const bool top_down = height_raw < 0;
  const std::int32_t height = top_down ? -height_raw : height_raw;
  require(width > 0 && height > 0, "bad BMP dims ", width, "x", height_raw);
  r.get_u16();
  const std::uint16_t bpp = r.get_u16();
  const std::uint32_t compression = r.get_u32();
  require(compression == 0, "only uncompressed BI_RGB BMP supported");
  require(bpp == 24 || bpp == 32, "only 24/32-bit BMP supported, got ", bpp);

  const int channels = bpp / 8;
  const std::size_t row_padded = (static_cast<std::size_t>(width) * channels + 3) & ~std::size_t{3};
  require(bytes.size() >= data_offset + row_padded * height, "truncated BMP pixel data");

  Raster out(width, height);
  for (int row = 0; row < height; ++row) {
    const int y = top_down ? row : height - 1 - row;
    const std::uint8_t* src = bytes.data() + data_offset + row_padded * row;
    for (int x = 0; x < width; ++x) {
      out.at(x, y, 0) = src[x * channels + 2];
      out.at(x, y, 1) = src[x * channels + 1];
      out.at(x, y, 2) = src[x * channels + 0];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PNG: 8-bit gray / RGB / RGBA, no interlace; deflate via zlib.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_png_chunk(ByteWriter& w, const char type[4],
                          const std::vector<std::uint8_t>& data) {
  auto be32 = [&w](std::uint32_t v) {
    w.put_u8(static_cast<std::uint8_t>(v >> 24));
    w.put_u8(static_cast<std::uint8_t>(v >> 16));
    w.put_u8(static_cast<std::uint8_t>(v >> 8));
    w.put_u8(static_cast<std::uint8_t>(v));
  };
  be32(static_cast<std::uint32_t>(data.size()));
  std::vector<std::uint8_t> chunk(4 + data.size());
  std::memcpy(chunk.data(), type, 4);
  std::memcpy(chunk.data() + 4, data.data(), data.size());
  w.put_bytes(chunk.data(), chunk.size());
  be32(crc32(chunk.data(), chunk.size()));
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

} // namespace detail

inline std::vector<std::uint8_t> encode_png(const Raster& r) {
  // raw scanlines, filter 0
  const std::size_t stride = static_cast<std::size_t>(r.width) * 3;
  std::vector<std::uint8_t> raw((stride + 1) * r.height);
  for (int y = 0; y < r.height; ++y) {
    raw[(stride + 1) * y] = 0;
    std::memcpy(raw.data() + (stride + 1) * y + 1, r.rgb.data() + stride * y, stride);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> deflated(bound);
  require(compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                    Z_DEFAULT_COMPRESSION) == Z_OK,
          "PNG deflate failed");
  deflated.resize(bound);

  ByteWriter w;
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  w.put_bytes(sig, 8);
  std::vector<std::uint8_t> ihdr(13);
  auto be32_into = [](std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
  };
  be32_into(ihdr.data(), static_cast<std::uint32_t>(r.width));
  be32_into(ihdr.data() + 4, static_cast<std::uint32_t>(r.height));
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // color type: RGB
  ihdr[10] = 0;  // compression
  ihdr[11] = 0;  // filter
  ihdr[12] = 0;  // no interlace
  detail::put_png_chunk(w, "IHDR", ihdr);
  detail::put_png_chunk(w, "IDAT", deflated);
  detail::put_png_chunk(w, "IEND", {});
  return std::move(w.bytes());
}

inline Raster decode_png(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() > 8, "truncated PNG");
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  require(std::memcmp(bytes.data(), sig, 8) == 0, "not a PNG file");

  auto be32 = [&bytes](std::size_t off) {
    return (static_cast<std::uint32_t>(bytes[off]) << 24) |
           (static_cast<std::uint32_t>(bytes[off + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[off + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[off + 3]);
  };

  std::uint32_t width = 0, height = 0;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  std::size_t off = 8;
  while (off + 8 <= bytes.size()) {
    const std::uint32_t len = be32(off);
    require(off + 12 + len <= bytes.size(), "truncated PNG chunk at offset ", off);
    const char* type = reinterpret_cast<const char*>(bytes.data() + off + 4);
    const std::uint8_t* data = bytes.data() + off + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      require(len == 13, "bad IHDR length");
      width = be32(off + 8);
      height = be32(off + 12);
      require(data[8] == 8, "only 8-bit PNG supported, depth ", int(data[8]));
      color_type = data[9];
      require(color_type == 0 || color_type == 2 || color_type == 6,
              "unsupported PNG color type ", color_type);
      require(data[12] == 0, "interlaced PNG unsupported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    off += 12 + len;
  }
  require(width > 0 && height > 0 && color_type >= 0, "PNG missing IHDR");
  require(!idat.empty(), "PNG missing IDAT");

  const int channels = color_type == 0 ? 1 : (color_type == 2 ? 3 : 4);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  std::vector<std::uint8_t> raw((stride + 1) * height);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  require(uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) ==
                  Z_OK &&
              raw_len == raw.size(),
          "PNG inflate failed");

  // undo per-row filters in place
  std::vector<std::uint8_t> prev(stride, 0);
  Raster out(static_cast<int>(width), static_cast<int>(height));
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[(stride + 1) * y];
    std::uint8_t* row = raw.data() + (stride + 1) * y + 1;
    require(filter <= 4, "bad PNG filter ", int(filter), " on row ", y);
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(channels) ? row[i - channels] : 0;
      const int b = prev[i];
      const int c = i >= static_cast<std::size_t>(channels) ? prev[i - channels] : 0;
      switch (filter) {
        case 1: row[i] = static_cast<std::uint8_t>(row[i] + a); break;
        case 2: row[i] = static_cast<std::uint8_t>(row[i] + b); break;
        case 3: row[i] = static_cast<std::uint8_t>(row[i] + (a + b) / 2); break;
        case 4: row[i] = static_cast<std::uint8_t>(row[i] + detail::paeth(a, b, c)); break;
        default: break;
      }
    }
    std::memcpy(prev.data(), row, stride);
    for (std::uint32_t x = 0; x < width; ++x) {
      if (channels == 1) {
        out.at(x, y, 0) = out.at(x, y, 1) = out.at(x, y, 2) = row[x];
      } else {
        out.at(x, y, 0) = row[x * channels + 0];
        out.at(x, y, 1) = row[x * channels + 1];
        out.at(x, y, 2) = row[x * channels + 2];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// File-level helpers.
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  require(f.good(), "cannot open ", path);
  const std::streamsize size = f.tellg();
  f.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  f.read(reinterpret_cast<char*>(bytes.data()), size);
  require(f.good(), "short read from ", path);
  return bytes;
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "cannot open ", path, " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  require(f.good(), "short write to ", path);
}

/// Load a raster, dispatching on the file magic (BMP or PNG).
inline Raster load_image(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  require(bytes.size() >= 8, "image file too short: ", path);
  if (bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes);
  if (bytes[0] == 0x89 && bytes[1] == 'P') return decode_png(bytes);
  fail("unrecognized image format in ", path, " (want BMP or PNG)");
}

/// Save a raster, dispatching on the file extension.
inline void save_image(const std::string& path, const Raster& r) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == "bmp") {
    write_file(path, encode_bmp(r));
  } else if (ext == "png") {
    write_file(path, encode_png(r));
  } else {
    fail("unsupported output extension .", ext, " (want .bmp or .png)");
  }
}

} // namespace lic
