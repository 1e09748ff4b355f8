// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "lic/bench.hpp"

using namespace lic;

namespace {

ChannelConfig tiny_config() {
  return ChannelConfig{{8, 8, 8, 12}, {8, 8, 8}, {8, 8, 12}, {12, 8, 8, 3}};
}

struct TempImageDir {
  std::filesystem::path dir;

  explicit TempImageDir(int images, std::uint64_t seed) {
    dir = std::filesystem::temp_directory_path() /
          ("lic_bench_" + std::to_string(seed));
    std::filesystem::create_directories(dir);
    SplitMix64 rng(seed);
    for (int i = 0; i < images; ++i) {
      Raster r(40 + 8 * (i % 3), 32 + 8 * (i % 2));
      for (auto& v : r.rgb) v = static_cast<std::uint8_t>(rng.next_below(256));
      const char* ext = i % 2 ? ".png" : ".bmp";
      save_image((dir / ("img" + std::to_string(i) + ext)).string(), r);
    }
  }
  ~TempImageDir() { std::filesystem::remove_all(dir); }
};

} // namespace

TEST_CASE("bench_run produces a schema-valid report") {
  const TempImageDir images(4, 900);
  const ModelWeights model = init_weights(tiny_config(), 5);
  const BenchReport rep = bench_run(model, images.dir.string(), 2, 1, {}, "tiny");

  CHECK(rep.image_count == 4);
  CHECK(rep.workers == 2);
  CHECK(rep.encode.samples_ms.size() == 4);
  CHECK(rep.decode.samples_ms.size() == 4);
  CHECK(rep.encode.p50_ms <= rep.encode.p99_ms);
  CHECK(rep.decode.p50_ms <= rep.decode.p99_ms);
  CHECK(rep.encode.fps_workers_1 > 0.0);
  CHECK(rep.encode.fps_workers_p > 0.0);
  CHECK(rep.rows.size() == 4);
  for (const BenchRow& row : rep.rows) {
    CHECK(row.bytes > 0);
    CHECK(row.encode_ms > 0.0);
    CHECK(row.decode_ms > 0.0);
    CHECK(row.bpp_value > 0.0);
    CHECK(row.ms_ssim_score <= 1.0);
  }
}

TEST_CASE("bench report round trips through json") {
  const TempImageDir images(3, 901);
  const ModelWeights model = init_weights(tiny_config(), 6);
  const BenchReport rep = bench_run(model, images.dir.string(), 1, 0, {}, "rt");
  const nlohmann::json j = to_json(rep);
  const BenchReport back = report_from_json(j);
  CHECK(back.config_label == rep.config_label);
  CHECK(back.image_count == rep.image_count);
  CHECK(back.encode.samples_ms == rep.encode.samples_ms);
  CHECK(back.decode.p99_ms == rep.decode.p99_ms);
  CHECK(back.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(back.rows[i].image == rep.rows[i].image);
    CHECK(back.rows[i].payload_hash == rep.rows[i].payload_hash);
  }
  CHECK(back.peak_rss_bytes == rep.peak_rss_bytes);
}

TEST_CASE("bench csv carries the documented columns") {
  const TempImageDir images(2, 902);
  const ModelWeights model = init_weights(tiny_config(), 7);
  const BenchReport rep = bench_run(model, images.dir.string(), 1, 0);
  const std::string csv = to_csv(rep);
  CHECK(csv.rfind("phase,image,bytes,ms,psnr,ms_ssim,bpp\n", 0) == 0);
  // one encode and one decode row per image, plus the header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2);
  CHECK(csv.find("encode,img0.bmp") != std::string::npos);
  CHECK(csv.find("decode,img1.png") != std::string::npos);
  CHECK_FALSE(to_text(rep).empty());
}

TEST_CASE("payloads are byte-identical across bench runs") {
  const TempImageDir images(3, 903);
  const ModelWeights model = init_weights(tiny_config(), 8);
  const BenchReport a = bench_run(model, images.dir.string(), 2, 0);
  const BenchReport b = bench_run(model, images.dir.string(), 2, 0);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].bytes == b.rows[i].bytes);
    CHECK(a.rows[i].payload_hash == b.rows[i].payload_hash);
    CHECK(a.rows[i].psnr_db == b.rows[i].psnr_db);
  }
}

TEST_CASE("single image at one worker: throughput is the reciprocal latency") {
  const TempImageDir images(1, 904);
  const ModelWeights model = init_weights(tiny_config(), 9);
  const BenchReport rep = bench_run(model, images.dir.string(), 1, 0);
  CHECK(rep.image_count == 1);
  CHECK(rep.encode.samples_ms.size() == 1);
  CHECK(rep.encode.fps_workers_1 ==
        Catch::Approx(1000.0 / rep.encode.samples_ms[0]).epsilon(1e-9));
  CHECK(rep.encode.fps_workers_p == rep.encode.fps_workers_1);
}

TEST_CASE("bench rejects an empty directory") {
  const auto dir = std::filesystem::temp_directory_path() / "lic_bench_empty";
  std::filesystem::create_directories(dir);
  const ModelWeights model = init_weights(tiny_config(), 10);
  CHECK_THROWS_AS(bench_run(model, dir.string(), 1, 0), Error);
  CHECK_THROWS_AS(bench_run(model, (dir / "nope").string(), 1, 0), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench validates worker and warmup arguments") {
  const TempImageDir images(1, 905);
  const ModelWeights model = init_weights(tiny_config(), 11);
  CHECK_THROWS_AS(bench_run(model, images.dir.string(), 0, 0), Error);
  CHECK_THROWS_AS(bench_run(model, images.dir.string(), 1, -1), Error);
}
