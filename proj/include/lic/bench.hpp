// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lic/codec.hpp"
#include "lic/common.hpp"
#include "lic/image_io.hpp"
#include "lic/metrics.hpp"
#include "lic/weights.hpp"

namespace lic {

struct PhaseStats {
  std::vector<double> samples_ms;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double mean_ms = 0.0;
  double fps_workers_1 = 0.0;
  double fps_workers_p = 0.0;
};

struct BenchRow {
  std::string image;
  std::size_t bytes = 0;
  double encode_ms = 0.0;
  double decode_ms = 0.0;
  double psnr_db = 0.0;
  double ms_ssim_score = 0.0;
  double bpp_value = 0.0;
  std::uint64_t payload_hash = 0;
};

struct BenchReport {
  std::string config_label;
  int workers = 1;
  std::size_t image_count = 0;
  PhaseStats encode;
  PhaseStats decode;
  std::vector<BenchRow> rows;
  std::optional<std::uint64_t> peak_rss_bytes;
};

namespace detail {

inline double percentile_of_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(n)));
  return sorted[std::min(n - 1, std::max<std::size_t>(1, rank) - 1)];
}

inline void finish_phase(PhaseStats& ph) {
  std::vector<double> sorted = ph.samples_ms;
  std::sort(sorted.begin(), sorted.end());
  ph.p50_ms = detail::percentile_of_sorted(sorted, 50.0);
  ph.p99_ms = detail::percentile_of_sorted(sorted, 99.0);
  double sum = 0.0;
  for (double v : sorted) sum += v;
  ph.mean_ms = sum / static_cast<double>(sorted.size());
  ph.fps_workers_1 = sum > 0.0 ? 1000.0 * static_cast<double>(sorted.size()) / sum : 0.0;
}

/// Best-effort peak resident memory: VmRSS sampled at 10 Hz plus the
/// kernel's own high-water mark when /proc is available.
class MemorySampler {
public:
  MemorySampler() {
    if (!read_kb("VmRSS:")) return;  // no /proc: stay unavailable
    available_ = true;
    worker_ = std::thread([this] {
      while (!stop_.load(std::memory_order_relaxed)) {
        if (const auto kb = read_kb("VmRSS:")) {
          const std::uint64_t b = *kb * 1024;
          std::uint64_t cur = peak_.load(std::memory_order_relaxed);
          while (b > cur && !peak_.compare_exchange_weak(cur, b)) {
          }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
    });
  }

  std::optional<std::uint64_t> finish() {
    if (!available_) return std::nullopt;
    stop_.store(true);
    worker_.join();
    std::uint64_t peak = peak_.load();
    if (const auto hwm = read_kb("VmHWM:")) peak = std::max(peak, *hwm * 1024);
    return peak;
  }

  ~MemorySampler() {
    if (available_ && worker_.joinable()) {
      stop_.store(true);
      worker_.join();
    }
  }

private:
  static std::optional<std::uint64_t> read_kb(const char* field) {
    std::ifstream f("/proc/self/status");
    if (!f.good()) return std::nullopt;
    std::string line;
    while (std::getline(f, line)) {
      if (line.rfind(field, 0) == 0) {
        std::istringstream iss(line.substr(std::strlen(field)));
        std::uint64_t kb = 0;
        iss >> kb;
        return kb;
      }
    }
    return std::nullopt;
  }

  bool available_ = false;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> peak_{0};
  std::thread worker_;
};

} // namespace detail

/// List the .bmp/.png files of a directory in name order.
inline std::vector<std::string> list_images(const std::string& dir) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), "not a directory: ", dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".bmp" || ext == ".png") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), "no .bmp/.png images in ", dir);
  return files;
}

/// Run the codec over a directory: single-stream latency per image (wall
/// clock including file read and raster conversion), then whole-image
/// parallel throughput at the requested worker count. Warmup iterations are
/// excluded from the samples.
inline BenchReport bench_run(const ModelWeights& model, const std::string& image_dir,
                             int workers, int warmup = 1, const CodecOptions& codec = {},
                             const std::string& label = "") {
  require(workers >= 1, "worker count must be >= 1, got ", workers);
  require(warmup >= 0, "negative warmup");
  const std::vector<std::string> files = list_images(image_dir);

  detail::MemorySampler mem;
  BenchReport rep;
  rep.config_label = label;
  rep.workers = workers;
  rep.image_count = files.size();

  using clock = std::chrono::steady_clock;
  auto ms_between = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  for (int i = 0; i < warmup; ++i) {
    const Raster r = load_image(files[static_cast<std::size_t>(i) % files.size()]);
    const auto bytes = encode_image(raster_to_tensor(r), model, codec);
    (void)decode_image(bytes, model, codec);
  }

  // single-stream latency pass
  for (const std::string& path : files) {
    BenchRow row;
    row.image = std::filesystem::path(path).filename().string();

    const auto t0 = clock::now();
    const Raster original = load_image(path);
    const std::vector<std::uint8_t> payload =
        encode_image(raster_to_tensor(original), model, codec);
    const auto t1 = clock::now();
    const Tensor decoded = decode_image(payload, model, codec);
    const Raster reconstructed = tensor_to_raster(decoded);
    const auto t2 = clock::now();

    row.encode_ms = ms_between(t0, t1);
    row.decode_ms = ms_between(t1, t2);
    row.bytes = payload.size();
    row.payload_hash = fnv1a64(payload.data(), payload.size());
    row.psnr_db = psnr(original, reconstructed);
    row.ms_ssim_score = ms_ssim(original, reconstructed);
    row.bpp_value = bpp(payload.size(), original.width, original.height);
    rep.encode.samples_ms.push_back(row.encode_ms);
    rep.decode.samples_ms.push_back(row.decode_ms);
    rep.rows.push_back(std::move(row));
  }
  detail::finish_phase(rep.encode);
  detail::finish_phase(rep.decode);

  // parallel throughput pass
  if (workers == 1) {
    rep.encode.fps_workers_p = rep.encode.fps_workers_1;
    rep.decode.fps_workers_p = rep.decode.fps_workers_1;
  } else {
    std::vector<std::vector<std::uint8_t>> payloads(files.size());
    auto parallel_pass = [&](auto&& fn) {
      std::atomic<std::size_t> next{0};
      const auto t0 = clock::now();
      std::vector<std::thread> pool;
      for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
          for (std::size_t i = next.fetch_add(1); i < files.size();
               i = next.fetch_add(1))
            fn(i);
        });
      for (auto& th : pool) th.join();
      return ms_between(t0, clock::now());
    };
    const double enc_wall = parallel_pass([&](std::size_t i) {
      const Raster r = load_image(files[i]);
      payloads[i] = encode_image(raster_to_tensor(r), model, codec);
    });
    const double dec_wall = parallel_pass([&](std::size_t i) {
      (void)tensor_to_raster(decode_image(payloads[i], model, codec));
    });
    rep.encode.fps_workers_p =
        enc_wall > 0.0 ? 1000.0 * static_cast<double>(files.size()) / enc_wall : 0.0;
    rep.decode.fps_workers_p =
        dec_wall > 0.0 ? 1000.0 * static_cast<double>(files.size()) / dec_wall : 0.0;
  }

  rep.peak_rss_bytes = mem.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// Report serialization.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const PhaseStats& p) {
  return {{"samples_ms", p.samples_ms}, {"p50_ms", p.p50_ms},
          {"p99_ms", p.p99_ms},         {"mean_ms", p.mean_ms},
          {"fps_workers_1", p.fps_workers_1}, {"fps_workers_p", p.fps_workers_p}};
}

inline PhaseStats phase_from_json(const nlohmann::json& j) {
  PhaseStats p;
  p.samples_ms = j.at("samples_ms").get<std::vector<double>>();
  p.p50_ms = j.at("p50_ms");
  p.p99_ms = j.at("p99_ms");
  p.mean_ms = j.at("mean_ms");
  p.fps_workers_1 = j.at("fps_workers_1");
  p.fps_workers_p = j.at("fps_workers_p");
  return p;
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const BenchRow& row : r.rows)
    rows.push_back({{"image", row.image},
                    {"bytes", row.bytes},
                    {"encode_ms", row.encode_ms},
                    {"decode_ms", row.decode_ms},
                    {"psnr", row.psnr_db},
                    {"ms_ssim", row.ms_ssim_score},
                    {"bpp", row.bpp_value},
                    {"payload_hash", row.payload_hash}});
  nlohmann::json j{{"config", r.config_label},
                   {"workers", r.workers},
                   {"image_count", r.image_count},
                   {"encode", to_json(r.encode)},
                   {"decode", to_json(r.decode)},
                   {"rows", rows}};
  if (r.peak_rss_bytes)
    j["peak_rss_bytes"] = *r.peak_rss_bytes;
  else
    j["peak_rss_bytes"] = nullptr;
  return j;
}

inline BenchReport report_from_json(const nlohmann::json& j) {
  BenchReport r;
  r.config_label = j.at("config");
  r.workers = j.at("workers");
  r.image_count = j.at("image_count");
  r.encode = phase_from_json(j.at("encode"));
  r.decode = phase_from_json(j.at("decode"));
  for (const auto& row : j.at("rows")) {
    BenchRow b;
    b.image = row.at("image");
    b.bytes = row.at("bytes");
    b.encode_ms = row.at("encode_ms");
    b.decode_ms = row.at("decode_ms");
    b.psnr_db = row.at("psnr");
    b.ms_ssim_score = row.at("ms_ssim");
    b.bpp_value = row.at("bpp");
    b.payload_hash = row.at("payload_hash");
    r.rows.push_back(std::move(b));
  }
  if (!j.at("peak_rss_bytes").is_null())
    r.peak_rss_bytes = j.at("peak_rss_bytes").get<std::uint64_t>();
  return r;
}

/// CSV rows: phase,image,bytes,ms,psnr,ms_ssim,bpp
inline std::string to_csv(const BenchReport& r) {
  std::ostringstream oss;
  oss.precision(9);
  oss << "phase,image,bytes,ms,psnr,ms_ssim,bpp\n";
  for (const BenchRow& row : r.rows)
    oss << "encode," << row.image << "," << row.bytes << "," << row.encode_ms << ","
        << row.psnr_db << "," << row.ms_ssim_score << "," << row.bpp_value << "\n";
  for (const BenchRow& row : r.rows)
    oss << "decode," << row.image << "," << row.bytes << "," << row.decode_ms << ","
        << row.psnr_db << "," << row.ms_ssim_score << "," << row.bpp_value << "\n";
  return oss.str();
}

inline std::string to_text(const BenchReport& r) {
  std::ostringstream oss;
  oss.precision(4);
  oss << "bench " << (r.config_label.empty() ? "(unlabeled)" : r.config_label) << ": "
      << r.image_count << " images, " << r.workers << " workers\n";
  auto phase = [&oss](const char* name, const PhaseStats& p) {
    oss << "  " << name << ": p50 " << p.p50_ms << " ms, p99 " << p.p99_ms << " ms, mean "
        << p.mean_ms << " ms, " << p.fps_workers_1 << " fps @1, " << p.fps_workers_p
        << " fps @P\n";
  };
  phase("encode", r.encode);
  phase("decode", r.decode);
  if (r.peak_rss_bytes)
    oss << "  peak rss: " << (*r.peak_rss_bytes / (1024.0 * 1024.0)) << " MiB\n";
  else
    oss << "  peak rss: unavailable\n";
  return oss.str();
}

} // namespace lic
