// Copyright 2026 The licodec Authors
// SPDX-License-Identifier: Apache-2.0
//
// licodec: batch codec front-end. Subcommands map 1:1 onto library
// operations; exit code 0 on success, 1 with a one-line `error: ...`
// otherwise.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lic/bench.hpp"
#include "lic/codec.hpp"
#include "lic/image_io.hpp"
#include "lic/metrics.hpp"
#include "lic/quantize.hpp"
#include "lic/supernet.hpp"
#include "lic/weights.hpp"

namespace {

using nlohmann::json;

lic::QuantMode parse_mode(const std::string& s) {
  if (s == "float") return lic::QuantMode::float_path;
  if (s == "hs-int") return lic::QuantMode::hs_int;
  if (s == "full-int") return lic::QuantMode::full_int;
  lic::fail("unknown quant mode '", s, "' (want float, hs-int or full-int)");
}

lic::ChannelConfig parse_config(const std::string& name) {
  if (name == "origin") return lic::origin_config();
  if (name == "nas") return lic::nas_config();
  // anything else is a JSON file with ga/ha/hs/gs arrays
  std::ifstream f(name);
  lic::require(f.good(), "cannot open config file ", name);
  json j;
  f >> j;
  lic::ChannelConfig cfg;
  const auto fill = [&j](const char* key, auto& arr) {
    const auto& v = j.at(key);
    lic::require(v.size() == arr.size(), "config key '", key, "' needs ", arr.size(),
                 " entries, got ", v.size());
    for (std::size_t i = 0; i < arr.size(); ++i) arr[i] = v[i].get<int>();
  };
  fill("ga", cfg.ga);
  fill("ha", cfg.ha);
  fill("hs", cfg.hs);
  fill("gs", cfg.gs);
  cfg.validate();
  return cfg;
}

lic::SearchSpace parse_space(const std::string& path) {
  std::ifstream f(path);
  lic::require(f.good(), "cannot open search space file ", path);
  json j;
  f >> j;
  lic::SearchSpace sp;
  const auto slots_of = [&j, &sp](const char* key, std::size_t expected,
                                  std::size_t optional_extra) {
    const auto& groups = j.at(key);
    lic::require(groups.size() == expected || groups.size() == expected + optional_extra,
                 "space key '", key, "' needs ", expected, " candidate lists, got ",
                 groups.size());
    std::size_t idx = 0;
    for (const auto& g : groups) {
      lic::SearchSlot slot;
      slot.name = std::string(key) + std::to_string(idx++);
      for (const auto& c : g) slot.candidates.push_back(c.get<int>());
      sp.slots.push_back(std::move(slot));
    }
    return groups.size();
  };
  slots_of("ga", 4, 0);
  slots_of("ha", 3, 0);
  slots_of("hs", 2, 0);
  const std::size_t gs = slots_of("gs", 2, 1);  // 3 lists makes the head searchable
  sp.search_gs_head = gs == 3;
  sp.validate();
  return sp;
}

json config_to_json(const lic::ChannelConfig& cfg) {
  return {{"ga", cfg.ga}, {"ha", cfg.ha}, {"hs", cfg.hs}, {"gs", cfg.gs}};
}

json point_to_json(const lic::SearchPoint& p, const lic::SearchSpace& sp) {
  return {{"choices", p.config.choices},
          {"channels", config_to_json(materialize(p.config, sp))},
          {"flops", p.flops},
          {"latency_ms", p.latency_ms},
          {"score", p.score},
          {"feasible", p.feasible}};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  lic::require(f.good(), "cannot open ", path, " for writing");
  f << text;
  lic::require(f.good(), "short write to ", path);
}

std::vector<lic::LutKey> parse_shapes_file(const std::string& path) {
  std::ifstream f(path);
  lic::require(f.good(), "cannot open shapes file ", path);
  std::vector<lic::LutKey> keys;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line == "kind,in_c,out_c,k,s,h,w" || line[0] == '#') continue;
    std::istringstream iss(line);
    lic::LutKey k;
    std::string field;
    auto next = [&](const char* what) {
      lic::require(static_cast<bool>(std::getline(iss, field, ',')), "bad shapes record '",
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
    keys.push_back(std::move(k));
  }
  lic::require(!keys.empty(), "shapes file ", path, " has no records");
  return keys;
}

std::vector<lic::Tensor> load_calibration_images(const std::string& dir) {
  std::vector<lic::Tensor> images;
  for (const std::string& path : lic::list_images(dir))
    images.push_back(lic::raster_to_tensor(lic::load_image(path)));
  return images;
}

int cmd_info(const std::string& input) {
  const std::vector<std::uint8_t> bytes = lic::read_file(input);
  lic::require(bytes.size() >= 4, "file too short: ", input);
  if (std::memcmp(bytes.data(), "LICP", 4) == 0) {
    const lic::BitstreamHeader h = lic::inspect_bitstream(bytes);
    std::cout << "bitstream " << input << "\n"
              << "  version: " << int(h.version) << "\n"
              << "  mode: " << lic::to_string(h.mode()) << "\n"
              << "  width: " << h.width << "\n"
              << "  height: " << h.height << "\n"
              << "  model_id: " << h.model_id << "\n"
              << "  z_stream: " << h.z_stream_len << " bytes\n"
              << "  y_stream: " << h.y_stream_len << " bytes\n"
              << "  bypass: " << h.bypass_len << " bytes\n"
              << "  total: " << bytes.size() << " bytes\n"
              << "  bpp: " << lic::bpp(bytes.size(), static_cast<int>(h.width),
                                       static_cast<int>(h.height))
              << "\n";
    return 0;
  }
  if (std::memcmp(bytes.data(), "LICW", 4) == 0) {
    const lic::ModelWeights m = lic::load_weights(input);
    std::cout << "weights " << input << "\n"
              << "  model_id: " << m.model_id << "\n"
              << "  ga channels: ";
    for (int v : m.config.ga) std::cout << v << " ";
    std::cout << "\n  ha channels: ";
    for (int v : m.config.ha) std::cout << v << " ";
    std::cout << "\n  hs channels: ";
    for (int v : m.config.hs) std::cout << v << " ";
    std::cout << "\n  gs channels: ";
    for (int v : m.config.gs) std::cout << v << " ";
    std::cout << "\n  file size: " << bytes.size() << " bytes\n";
    for (int s = 0; s < 4; ++s)
      for (const lic::Layer& l : m.subnet(s))
        std::cout << "  layer " << l.spec.name << ": " << lic::to_string(l.spec.kind)
                  << " " << l.spec.in_channels << "->" << l.spec.out_channels << " k"
                  << l.spec.kernel << "s" << l.spec.stride
                  << (l.iq ? " (int8 path)" : "") << "\n";
    return 0;
  }
  lic::fail("unrecognized file magic in ", input, " (want LICP or LICW)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"licodec: learned image codec with NAS and int8 tooling"};
  app.require_subcommand(1);

  // --- init ---
  auto* init = app.add_subcommand("init", "write seed-initialized model weights");
  std::string init_config = "origin", init_out;
  std::uint64_t init_seed = 1;
  init->add_option("--config", init_config, "origin, nas, or a JSON config file");
  init->add_option("--seed", init_seed, "PRNG seed");
  init->add_option("--out", init_out, "output .licw path")->required();

  // --- encode ---
  auto* enc = app.add_subcommand("encode", "compress an image");
  std::string enc_model, enc_in, enc_out, enc_mode = "hs-int";
  int enc_threads = 1;
  enc->add_option("--model", enc_model, "model weights (.licw)")->required();
  enc->add_option("--in", enc_in, "input image (.bmp/.png)")->required();
  enc->add_option("--out", enc_out, "output bitstream (.licp)")->required();
  enc->add_option("--quant-mode", enc_mode, "float, hs-int or full-int");
  enc->add_option("--threads", enc_threads, "intra-image threads");

  // --- decode ---
  auto* dec = app.add_subcommand("decode", "decompress a bitstream");
  std::string dec_model, dec_in, dec_out;
  int dec_threads = 1;
  dec->add_option("--model", dec_model, "model weights (.licw)")->required();
  dec->add_option("--in", dec_in, "input bitstream (.licp)")->required();
  dec->add_option("--out", dec_out, "output image (.bmp/.png)")->required();
  dec->add_option("--threads", dec_threads, "intra-image threads");

  // --- bench ---
  auto* bench = app.add_subcommand("bench", "measure latency and throughput");
  std::string bench_model, bench_dir, bench_out, bench_csv, bench_mode = "hs-int",
                                                            bench_label;
  int bench_workers = 1, bench_warmup = 1, bench_threads = 1;
  bench->add_option("--model", bench_model, "model weights (.licw)")->required();
  bench->add_option("--images", bench_dir, "directory of .bmp/.png images")->required();
  bench->add_option("--workers", bench_workers, "parallel worker count");
  bench->add_option("--warmup", bench_warmup, "warmup iterations");
  bench->add_option("--out", bench_out, "JSON report path");
  bench->add_option("--csv", bench_csv, "CSV report path");
  bench->add_option("--quant-mode", bench_mode, "float, hs-int or full-int");
  bench->add_option("--threads", bench_threads, "intra-image threads");
  bench->add_option("--label", bench_label, "config label for the report");

  // --- measure-lut ---
  auto* mlut = app.add_subcommand("measure-lut", "measure a latency lookup table");
  std::string mlut_shapes, mlut_out, mlut_device = "host-cpu";
  int mlut_reps = 10, mlut_threads = 1;
  std::uint64_t mlut_seed = 1;
  mlut->add_option("--shapes", mlut_shapes, "CSV of kind,in_c,out_c,k,s,h,w")->required();
  mlut->add_option("--out", mlut_out, "output table path")->required();
  mlut->add_option("--reps", mlut_reps, "timed repetitions per key (>= 10)");
  mlut->add_option("--device", mlut_device, "device label");
  mlut->add_option("--seed", mlut_seed, "input generation seed");
  mlut->add_option("--threads", mlut_threads, "kernel threads");

  // --- search ---
  auto* sch = app.add_subcommand("search", "constrained architecture search");
  std::string sch_space, sch_out, sch_lut, sch_scorer = "flops", sch_input = "1088x1920";
  std::uint64_t sch_budget = 512, sch_seed = 1;
  std::optional<std::uint64_t> sch_max_flops;
  std::optional<double> sch_max_latency;
  sch->add_option("--space", sch_space, "search space JSON")->required();
  sch->add_option("--out", sch_out, "report JSON path")->required();
  sch->add_option("--lut", sch_lut, "latency table path");
  sch->add_option("--max-flops", sch_max_flops, "FLOPS constraint");
  sch->add_option("--max-latency", sch_max_latency, "latency constraint, ms");
  sch->add_option("--budget", sch_budget, "max scorer evaluations");
  sch->add_option("--seed", sch_seed, "search seed");
  sch->add_option("--scorer", sch_scorer, "flops, latency or proxy");
  sch->add_option("--input", sch_input, "input size HxW for cost models");

  // --- calibrate ---
  auto* cal = app.add_subcommand("calibrate", "PTQ conversion to the int8 path");
  std::string cal_model, cal_dir, cal_out, cal_mode = "hs-int";
  double cal_percentile = 99.99;
  int cal_threads = 1;
  cal->add_option("--model", cal_model, "input model (.licw)")->required();
  cal->add_option("--images", cal_dir, "calibration image directory")->required();
  cal->add_option("--out", cal_out, "output model (.licw)")->required();
  cal->add_option("--mode", cal_mode, "hs-int (h_s only) or full-int (all subnets)");
  cal->add_option("--percentile", cal_percentile, "activation percentile");
  cal->add_option("--threads", cal_threads, "calibration threads");

  // --- info ---
  auto* info = app.add_subcommand("info", "print bitstream or weight file details");
  std::string info_in;
  info->add_option("--input", info_in, "a .licp or .licw file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*init) {
      const lic::ModelWeights m = lic::init_weights(parse_config(init_config), init_seed);
      lic::save_weights(m, init_out);
      std::cout << "wrote " << init_out << " (model_id " << m.model_id << ")\n";
    } else if (*enc) {
      const lic::ModelWeights m = lic::load_weights(enc_model);
      const lic::Raster img = lic::load_image(enc_in);
      lic::CodecOptions opts{parse_mode(enc_mode), enc_threads};
      const auto bytes = lic::encode_image(lic::raster_to_tensor(img), m, opts);
      lic::write_file(enc_out, bytes);
      std::cout << "wrote " << enc_out << " (" << bytes.size() << " bytes, "
                << lic::bpp(bytes.size(), img.width, img.height) << " bpp)\n";
    } else if (*dec) {
      const lic::ModelWeights m = lic::load_weights(dec_model);
      const auto bytes = lic::read_file(dec_in);
      lic::CodecOptions opts;
      opts.threads = dec_threads;
      const lic::Tensor xhat = lic::decode_image(bytes, m, opts);
      lic::save_image(dec_out, lic::tensor_to_raster(xhat));
      std::cout << "wrote " << dec_out << " (" << xhat.w << "x" << xhat.h << ")\n";
    } else if (*bench) {
      const lic::ModelWeights m = lic::load_weights(bench_model);
      lic::CodecOptions opts{parse_mode(bench_mode), bench_threads};
      const lic::BenchReport rep =
          lic::bench_run(m, bench_dir, bench_workers, bench_warmup, opts, bench_label);
      if (!bench_out.empty()) write_text_file(bench_out, lic::to_json(rep).dump(2) + "\n");
      if (!bench_csv.empty()) write_text_file(bench_csv, lic::to_csv(rep));
      std::cout << lic::to_text(rep);
    } else if (*mlut) {
      const auto keys = parse_shapes_file(mlut_shapes);
      const lic::LatencyTable t =
          lic::measure_latency_table(keys, mlut_reps, mlut_device, mlut_seed, mlut_threads);
      lic::save_latency_table(t, mlut_out);
      std::cout << "wrote " << mlut_out << " (" << t.entries.size() << " entries)\n";
    } else if (*sch) {
      const lic::SearchSpace space = parse_space(sch_space);
      lic::LatencyTable table;
      lic::SearchConstraints cons;
      if (!sch_lut.empty()) {
        table = lic::load_latency_table(sch_lut);
        cons.table = &table;
      }
      cons.max_flops = sch_max_flops;
      cons.max_latency_ms = sch_max_latency;
      const auto xpos = sch_input.find('x');
      lic::require(xpos != std::string::npos, "--input must look like 1088x1920");
      cons.input_h = std::stoi(sch_input.substr(0, xpos));
      cons.input_w = std::stoi(sch_input.substr(xpos + 1));

      lic::Scorer scorer;
      if (sch_scorer == "flops") {
        scorer = [&](const lic::SubConfig& c) {
          return static_cast<double>(lic::flops(c, space, cons.input_h, cons.input_w));
        };
      } else if (sch_scorer == "latency") {
        lic::require(cons.table != nullptr, "--scorer latency needs --lut");
        scorer = [&](const lic::SubConfig& c) {
          return lic::lut_latency(materialize(c, space), *cons.table, cons.input_h,
                                  cons.input_w);
        };
      } else if (sch_scorer == "proxy") {
        // rate-distortion proxy on a seed-initialized model and image
        scorer = [&space](const lic::SubConfig& c) {
          const lic::ModelWeights m = lic::init_weights(materialize(c, space), 7);
          lic::SplitMix64 rng(11);
          lic::Tensor img(1, 3, 64, 64);
          for (float& v : img.data) v = static_cast<float>(rng.next_double());
          const auto bytes = lic::encode_image(img, m, {lic::QuantMode::hs_int, 1});
          const lic::Raster orig = lic::tensor_to_raster(img);
          const lic::Raster recon = lic::tensor_to_raster(
              lic::decode_image(bytes, m, {lic::QuantMode::hs_int, 1}));
          return lic::bpp(bytes.size(), 64, 64) + lic::hybrid_score(orig, recon);
        };
      } else {
        lic::fail("unknown scorer '", sch_scorer, "' (want flops, latency or proxy)");
      }

      const lic::SearchResult r = lic::search(space, cons, scorer, sch_budget, sch_seed);
      json out{{"feasible", r.feasible},
               {"exhaustive", r.exhaustive},
               {"evaluations", r.evaluations}};
      if (r.feasible) {
        out["best"] = point_to_json(r.best, space);
        json front = json::array();
        for (const auto& p : r.pareto) front.push_back(point_to_json(p, space));
        out["pareto"] = front;
      }
      write_text_file(sch_out, out.dump(2) + "\n");
      if (r.feasible)
        std::cout << "best score " << r.best.score << " after " << r.evaluations
                  << " evaluations (" << (r.exhaustive ? "exhaustive" : "evolutionary")
                  << ")\n";
      else
        std::cout << "no feasible configuration\n";
    } else if (*cal) {
      const lic::ModelWeights m = lic::load_weights(cal_model);
      lic::ConvertOptions opts;
      if (cal_mode == "full-int") {
        opts.all_subnets = true;
      } else {
        lic::require(cal_mode == "hs-int", "unknown calibrate mode '", cal_mode, "'");
      }
      opts.percentile = cal_percentile;
      opts.threads = cal_threads;
      const lic::ModelWeights converted =
          lic::convert_to_int8(m, load_calibration_images(cal_dir), opts);
      lic::save_weights(converted, cal_out);
      std::cout << "wrote " << cal_out << " (model_id " << converted.model_id << ")\n";
    } else if (*info) {
      return cmd_info(info_in);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
