// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "curaug/curaug.hpp"

namespace {

using nlohmann::json;
using namespace curaug;

json rect_json(const Rect& r) {
  return json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}};
}

json color_json(const Rgb& c) {
  return json::array({c.r, c.g, c.b});
}

json grid_json(const GridLayout& layout, int rows, int cell_w, int cell_h) {
  return json{{"columns", layout.columns}, {"rows", rows},         {"cell_w", cell_w},
              {"cell_h", cell_h},          {"padding", layout.cell_padding}};
}

void emit(const json& sidecar) {
  std::cout << sidecar.dump() << "\n";
}

std::uint64_t fnv1a(const Image& img, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(img.pixels().data());
  const std::size_t len = img.pixels().size() * sizeof(Rgb);
  for (std::size_t i = 0; i < len; ++i) {
    h = (h ^ bytes[i]) * 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// augment: one image in, one augmented PNG out, sampled parameters on stdout
// ---------------------------------------------------------------------------

struct AugmentOpts {
  std::string input;
  std::string output;
  std::string technique = "colorful-cutout";
  std::string partner;
  int box = 32;
  int epoch = 0;
  double alpha = 0.2;
  std::uint64_t seed = 0;
};

void run_augment(const AugmentOpts& opt) {
  const Technique technique = technique_from_string(opt.technique);
  const Image img = decode(opt.input);
  json sidecar{{"technique", to_string(technique)}, {"seed", opt.seed}, {"output", opt.output}};

  Image out;
  RngStream rng(opt.seed);
  switch (technique) {
    case Technique::baseline:
      out = img;
      break;
    case Technique::cutout: {
      out = cutout(img, opt.box, rng);
      RngStream replay(opt.seed);
      sidecar["box"] = rect_json(sample_box(replay, img.width(), img.height(), opt.box));
      break;
    }
    case Technique::colorful_cutout: {
      CurriculumSchedule schedule;
      schedule.box = opt.box;
      const DifficultyParams params = params_for_epoch(schedule, opt.epoch);
      out = colorful_cutout(img, params, rng);
      RngStream replay(opt.seed);
      const Rect box = sample_box(replay, img.width(), img.height(), params.box);
      json colors = json::array();
      for (std::size_t i = 0; i < subdivide(box, params.n_regions).size(); ++i) {
        colors.push_back(color_json(random_color(replay)));
      }
      sidecar["box"] = rect_json(box);
      sidecar["n_regions"] = params.n_regions;
      sidecar["colors"] = std::move(colors);
      break;
    }
    case Technique::mixup: {
      if (opt.partner.empty()) {
        throw InvalidParameter("mixup requires --partner");
      }
      const Image partner = decode(opt.partner);
      const double lambda = sample_lambda(rng, opt.alpha);
      out = mixup(img, partner, SoftLabel{{1.0, 0.0}}, SoftLabel{{0.0, 1.0}}, lambda).first;
      sidecar["partner"] = opt.partner;
      sidecar["lambda"] = lambda;
      break;
    }
    case Technique::cutmix: {
      if (opt.partner.empty()) {
        throw InvalidParameter("cutmix requires --partner");
      }
      const Image partner = decode(opt.partner);
      out = cutmix(img, partner, SoftLabel{{1.0, 0.0}}, SoftLabel{{0.0, 1.0}}, opt.box, rng)
                .first;
      RngStream replay(opt.seed);
      sidecar["box"] = rect_json(sample_box(replay, img.width(), img.height(), opt.box));
      sidecar["partner"] = opt.partner;
      sidecar["lambda_label"] = cutmix_lambda(img.width(), img.height(), opt.box);
      break;
    }
  }
  encode_png(out, opt.output);
  emit(sidecar);
}

// ---------------------------------------------------------------------------
// preview: difficulty progression strip with a single shared erasure box
// ---------------------------------------------------------------------------

struct PreviewOpts {
  std::string input;
  std::string output;
  int epochs = 5;
  int box = 32;
  int columns = 0;  // 0: one row
  std::uint64_t seed = 0;
};

void run_preview(const PreviewOpts& opt) {
  if (opt.epochs < 1) {
    throw InvalidParameter("preview: epochs must be >= 1");
  }
  const Image img = decode(opt.input);
  RngStream rng(opt.seed);
  const Rect box = sample_box(rng, img.width(), img.height(), opt.box);

  CurriculumSchedule schedule;
  schedule.box = opt.box;

  std::vector<Image> cells;
  json cells_json = json::array();
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const int n_regions = regions_for_epoch(schedule, epoch);
    Image cell = img;
    json colors = json::array();
    for (const Rect& region : subdivide(box, n_regions)) {
      const Rgb color = random_color(rng);
      cell.fill(region, color);
      colors.push_back(color_json(color));
    }
    cells.push_back(std::move(cell));
    cells_json.push_back(json{{"epoch", epoch}, {"n_regions", n_regions}, {"colors", colors}});
  }

  GridLayout layout;
  layout.columns = opt.columns > 0 ? opt.columns : opt.epochs;
  const Image grid = compose_grid(cells, layout);
  encode_png(grid, opt.output);

  const int rows = static_cast<int>((cells.size() + layout.columns - 1) / layout.columns);
  emit(json{{"seed", opt.seed},
            {"epochs", opt.epochs},
            {"box", rect_json(box)},
            {"cells", std::move(cells_json)},
            {"grid", grid_json(layout, rows, img.width(), img.height())},
            {"output", opt.output}});
}

// ---------------------------------------------------------------------------
// compare: original vs cutout vs mixup vs cutmix vs colorful cutout
// ---------------------------------------------------------------------------

struct CompareOpts {
  std::string input_a;
  std::string input_b;
  std::string output;
  int epoch = 2;
  int box = 32;
  int columns = 5;
  int resize = 0;
  double alpha = 0.2;
  std::uint64_t seed = 0;
};

void run_compare(const CompareOpts& opt) {
  Image a = decode(opt.input_a);
  Image b = decode(opt.input_b);
  if (opt.resize > 0) {
    a = resize_bilinear(a, opt.resize, opt.resize);
    b = resize_bilinear(b, opt.resize, opt.resize);
  }
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeMismatch("compare: images differ in size (use --resize)");
  }
  const SoftLabel label_a{{1.0, 0.0}};
  const SoftLabel label_b{{0.0, 1.0}};

  std::vector<Image> cells;
  json panels = json::array();

  cells.push_back(a);
  panels.push_back(json{{"name", "original"}});

  {
    RngStream rng(derive_seed(opt.seed, 0, 1));
    cells.push_back(cutout(a, opt.box, rng));
    RngStream replay(derive_seed(opt.seed, 0, 1));
    panels.push_back(json{{"name", "cutout"},
                          {"box", rect_json(sample_box(replay, a.width(), a.height(), opt.box))}});
  }
  {
    RngStream rng(derive_seed(opt.seed, 0, 2));
    const double lambda = sample_lambda(rng, opt.alpha);
    cells.push_back(mixup(a, b, label_a, label_b, lambda).first);
    panels.push_back(json{{"name", "mixup"}, {"lambda", lambda}});
  }
  {
    RngStream rng(derive_seed(opt.seed, 0, 3));
    cells.push_back(cutmix(a, b, label_a, label_b, opt.box, rng).first);
    RngStream replay(derive_seed(opt.seed, 0, 3));
    panels.push_back(json{{"name", "cutmix"},
                          {"box", rect_json(sample_box(replay, a.width(), a.height(), opt.box))},
                          {"lambda_label", cutmix_lambda(a.width(), a.height(), opt.box)}});
  }
  {
    CurriculumSchedule schedule;
    schedule.box = opt.box;
    const DifficultyParams params = params_for_epoch(schedule, opt.epoch);
    RngStream rng(derive_seed(opt.seed, 0, 4));
    cells.push_back(colorful_cutout(a, params, rng));
    RngStream replay(derive_seed(opt.seed, 0, 4));
    const Rect box = sample_box(replay, a.width(), a.height(), params.box);
    json colors = json::array();
    for (std::size_t i = 0; i < subdivide(box, params.n_regions).size(); ++i) {
      colors.push_back(color_json(random_color(replay)));
    }
    panels.push_back(json{{"name", "colorful_cutout"},
                          {"box", rect_json(box)},
                          {"n_regions", params.n_regions},
                          {"colors", std::move(colors)}});
  }

  GridLayout layout;
  layout.columns = opt.columns;
  const Image grid = compose_grid(cells, layout);
  encode_png(grid, opt.output);

  const int rows = static_cast<int>((cells.size() + layout.columns - 1) / layout.columns);
  emit(json{{"seed", opt.seed},
            {"panels", std::move(panels)},
            {"grid", grid_json(layout, rows, a.width(), a.height())},
            {"output", opt.output}});
}

// ---------------------------------------------------------------------------
// run: batch augmentation over a manifest, driven by a JSON config
// ---------------------------------------------------------------------------

struct RunOpts {
  std::string config;
  std::string manifest;
  int classes = 0;  // 0: take the manifest's #classes line
};

void run_run(const RunOpts& opt) {
  const RunConfig cfg = load_run_config(opt.config);
  std::optional<int> override;
  if (opt.classes > 0) {
    override = opt.classes;
  }
  const DatasetManifest manifest = load_manifest(opt.manifest, override);
  const std::vector<EpochReport> reports = run_all(manifest, cfg);

  std::printf("%-6s %-9s %-9s %-10s %-12s %s\n", "epoch", "samples", "regions", "wall_s",
              "img_per_s", "failures");
  for (const EpochReport& r : reports) {
    std::printf("%-6d %-9d %-9d %-10.3f %-12.1f %zu\n", r.epoch, r.n_samples, r.n_regions_used,
                r.wall_time, r.throughput, r.failures.size());
  }
}

// ---------------------------------------------------------------------------
// bench: synthetic-image throughput measurement
// ---------------------------------------------------------------------------

struct BenchOpts {
  std::string technique = "colorful-cutout";
  int size = 224;
  long iterations = 1000;
  int workers = 1;
  int epoch = 2;
  int box = 32;
  double alpha = 0.2;
  std::uint64_t seed = 0;
};

Image synthesize(int size, std::uint64_t seed) {
  RngStream rng(seed);
  Image img(size, size);
  for (Rgb& px : img.pixels()) {
    px = random_color(rng);
  }
  return img;
}

void run_bench(const BenchOpts& opt) {
  if (opt.iterations < 1) {
    throw InvalidParameter("bench: iterations must be >= 1");
  }
  if (opt.workers < 1) {
    throw InvalidParameter("bench: workers must be >= 1");
  }
  if (opt.size < 1 || opt.box > opt.size) {
    throw InvalidParameter("bench: box exceeds image size");
  }
  const Technique technique = technique_from_string(opt.technique);

  constexpr int kPool = 8;
  std::vector<Image> pool;
  pool.reserve(kPool);
  for (int k = 0; k < kPool; ++k) {
    pool.push_back(synthesize(opt.size, derive_seed(opt.seed, 1, static_cast<std::uint64_t>(k))));
  }
  CurriculumSchedule schedule;
  schedule.box = opt.box;
  const DifficultyParams params = params_for_epoch(schedule, opt.epoch);
  const SoftLabel label_a{{1.0, 0.0}};
  const SoftLabel label_b{{0.0, 1.0}};

  const auto n = static_cast<std::size_t>(opt.iterations);
  std::vector<double> latency_ms(n);
  std::vector<std::uint64_t> hashes(n);
  std::atomic<std::size_t> cursor{0};

  auto work = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= n) {
        return;
      }
      const Image& base = pool[i % kPool];
      const Image& other = pool[(i + 1) % kPool];
      RngStream rng(derive_seed(opt.seed, 0, i));
      const auto t0 = std::chrono::steady_clock::now();
      Image out;
      switch (technique) {
        case Technique::baseline:
          out = base;
          break;
        case Technique::cutout:
          out = cutout(base, opt.box, rng);
          break;
        case Technique::colorful_cutout:
          out = colorful_cutout(base, params, rng);
          break;
        case Technique::mixup:
          out = mixup(base, other, label_a, label_b, sample_lambda(rng, opt.alpha)).first;
          break;
        case Technique::cutmix:
          out = cutmix(base, other, label_a, label_b, opt.box, rng).first;
          break;
      }
      latency_ms[i] =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
      hashes[i] = fnv1a(out);
    }
  };

  const auto started = std::chrono::steady_clock::now();
  if (opt.workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < opt.workers; ++t) {
      threads.emplace_back(work);
    }
    for (std::thread& t : threads) {
      t.join();
    }
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  for (std::uint64_t h : hashes) {
    for (int byte = 0; byte < 8; ++byte) {
      checksum = (checksum ^ ((h >> (8 * byte)) & 0xff)) * 0x100000001b3ULL;
    }
  }

  std::vector<double> sorted = latency_ms;
  std::sort(sorted.begin(), sorted.end());
  auto percentile = [&](double q) {
    return sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))];
  };
  char checksum_hex[17];
  std::snprintf(checksum_hex, sizeof(checksum_hex), "%016" PRIx64, checksum);

  emit(json{{"technique", to_string(technique)},
            {"size", opt.size},
            {"iterations", opt.iterations},
            {"workers", opt.workers},
            {"seed", opt.seed},
            {"wall_time", wall},
            {"images_per_second", wall > 0.0 ? static_cast<double>(opt.iterations) / wall : 0.0},
            {"latency_ms",
             json{{"p50", percentile(0.50)}, {"p90", percentile(0.90)}, {"p99", percentile(0.99)}}},
            {"checksum", checksum_hex}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curriculum image augmentation toolkit"};
  app.require_subcommand(1);

  AugmentOpts augment_opts;
  CLI::App* augment = app.add_subcommand("augment", "augment one image");
  augment->add_option("input", augment_opts.input, "input image (png/jpeg)")->required();
  augment->add_option("output", augment_opts.output, "output png")->required();
  augment->add_option("--technique", augment_opts.technique,
                      "baseline|cutout|colorful-cutout|mixup|cutmix");
  augment->add_option("--box", augment_opts.box, "erasure box side in pixels");
  augment->add_option("--epoch", augment_opts.epoch, "epoch index for the curriculum");
  augment->add_option("--alpha", augment_opts.alpha, "beta distribution bound for mixup");
  augment->add_option("--seed", augment_opts.seed, "rng seed");
  augment->add_option("--partner", augment_opts.partner, "second image for mixup/cutmix");
  augment->callback([&] { run_augment(augment_opts); });

  PreviewOpts preview_opts;
  CLI::App* preview = app.add_subcommand("preview", "curriculum progression strip");
  preview->add_option("input", preview_opts.input, "input image")->required();
  preview->add_option("output", preview_opts.output, "output png")->required();
  preview->add_option("--epochs", preview_opts.epochs, "number of cells");
  preview->add_option("--box", preview_opts.box, "erasure box side in pixels");
  preview->add_option("--columns", preview_opts.columns, "grid columns (default: epochs)");
  preview->add_option("--seed", preview_opts.seed, "rng seed");
  preview->callback([&] { run_preview(preview_opts); });

  CompareOpts compare_opts;
  CLI::App* compare = app.add_subcommand("compare", "technique comparison grid");
  compare->add_option("input_a", compare_opts.input_a, "first image")->required();
  compare->add_option("input_b", compare_opts.input_b, "second image")->required();
  compare->add_option("output", compare_opts.output, "output png")->required();
  compare->add_option("--epoch", compare_opts.epoch, "epoch for the colorful cutout panel");
  compare->add_option("--box", compare_opts.box, "erasure box side in pixels");
  compare->add_option("--columns", compare_opts.columns, "grid columns");
  compare->add_option("--resize", compare_opts.resize, "resize both inputs to this square size");
  compare->add_option("--alpha", compare_opts.alpha, "beta distribution bound for mixup");
  compare->add_option("--seed", compare_opts.seed, "rng seed");
  compare->callback([&] { run_compare(compare_opts); });

  RunOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "batch augmentation from a JSON config");
  run->add_option("config", run_opts.config, "run config (json)")->required();
  run->add_option("--manifest", run_opts.manifest, "dataset manifest csv")->required();
  run->add_option("--classes", run_opts.classes, "override the manifest class count");
  run->callback([&] { run_run(run_opts); });

  BenchOpts bench_opts;
  CLI::App* bench = app.add_subcommand("bench", "synthetic throughput benchmark");
  bench->add_option("--technique", bench_opts.technique,
                    "baseline|cutout|colorful-cutout|mixup|cutmix");
  bench->add_option("--size", bench_opts.size, "synthetic image side in pixels");
  bench->add_option("--iterations", bench_opts.iterations, "number of images to augment");
  bench->add_option("--workers", bench_opts.workers, "worker threads");
  bench->add_option("--epoch", bench_opts.epoch, "epoch for colorful cutout");
  bench->add_option("--box", bench_opts.box, "erasure box side in pixels");
  bench->add_option("--alpha", bench_opts.alpha, "beta distribution bound for mixup");
  bench->add_option("--seed", bench_opts.seed, "rng seed");
  bench->callback([&] { run_bench(bench_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const EpochAborted& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const InvalidParameter& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const DecodeError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
