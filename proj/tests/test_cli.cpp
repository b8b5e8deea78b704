// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include "curaug/augment.hpp"
#include "curaug/imageio.hpp"
#include "helpers.hpp"

using namespace curaug;
using nlohmann::json;
using testutil::CliResult;
using testutil::random_image;
using testutil::TempDir;

namespace {

CliResult run_cli(const std::vector<std::string>& args, const TempDir& tmp) {
  return testutil::run_cli(args, tmp.path());
}

}  // namespace

TEST_CASE("augment is byte-deterministic for a fixed seed", "[cli]") {
  TempDir tmp("cli_augment");
  const auto in = tmp.path() / "in.png";
  encode_png(random_image(96, 96, 1), in);

  const std::vector<std::string> args{"augment",  in.string(), (tmp.path() / "out1.png").string(),
                                      "--technique", "colorful-cutout",
                                      "--box",    "32",        "--epoch",
                                      "3",        "--seed",    "7"};
  const CliResult r1 = run_cli(args, tmp);
  REQUIRE(r1.exit_code == 0);

  auto args2 = args;
  args2[2] = (tmp.path() / "out2.png").string();
  const CliResult r2 = run_cli(args2, tmp);
  REQUIRE(r2.exit_code == 0);
  REQUIRE(testutil::read_bytes(tmp.path() / "out1.png") ==
          testutil::read_bytes(tmp.path() / "out2.png"));

  const json sidecar = json::parse(r1.out);
  REQUIRE(sidecar["technique"] == "colorful_cutout");
  REQUIRE(sidecar["n_regions"] == 8);
  REQUIRE(sidecar["colors"].size() == 8);
  const json box = sidecar["box"];
  REQUIRE(box["w"] == 32);
  REQUIRE(box["h"] == 32);
  REQUIRE(box["x"].get<int>() <= 64);
  REQUIRE(box["y"].get<int>() <= 64);

  // the sidecar matches the image: count at most 8 colors inside the box
  const Image out = decode(tmp.path() / "out1.png");
  std::set<std::array<std::uint8_t, 3>> colors;
  for (int y = box["y"].get<int>(); y < box["y"].get<int>() + 32; ++y) {
    for (int x = box["x"].get<int>(); x < box["x"].get<int>() + 32; ++x) {
      const Rgb c = out.at(x, y);
      colors.insert({c.r, c.g, c.b});
    }
  }
  REQUIRE(colors.size() <= 8);
}

TEST_CASE("augment maps error classes onto exit codes", "[cli]") {
  TempDir tmp("cli_exit");
  const auto in = tmp.path() / "in.png";
  encode_png(random_image(32, 32, 1), in);
  const auto out = (tmp.path() / "out.png").string();

  // oversized box: validation error
  const CliResult too_big =
      run_cli({"augment", in.string(), out, "--box", "4096"}, tmp);
  REQUIRE(too_big.exit_code == 2);
  REQUIRE(too_big.err.find("box exceeds image") != std::string::npos);
  REQUIRE(too_big.out.empty());

  // missing input: io error
  const CliResult missing =
      run_cli({"augment", (tmp.path() / "nope.png").string(), out}, tmp);
  REQUIRE(missing.exit_code == 1);

  // unknown technique and missing partner: validation errors
  REQUIRE(run_cli({"augment", in.string(), out, "--technique", "sharpen"}, tmp).exit_code == 2);
  REQUIRE(run_cli({"augment", in.string(), out, "--technique", "mixup"}, tmp).exit_code == 2);

  // corrupt input: decode error
  testutil::write_bytes(tmp.path() / "bad.png", {1, 2, 3, 4});
  REQUIRE(run_cli({"augment", (tmp.path() / "bad.png").string(), out}, tmp).exit_code == 1);

  // unparsable flags: CLI validation
  REQUIRE(run_cli({"augment", in.string()}, tmp).exit_code == 2);
}

TEST_CASE("augment mixup and cutmix take a partner image", "[cli]") {
  TempDir tmp("cli_partner");
  const auto a = tmp.path() / "a.png";
  const auto b = tmp.path() / "b.png";
  encode_png(random_image(48, 48, 1), a);
  encode_png(random_image(48, 48, 2), b);

  const CliResult mix = run_cli({"augment", a.string(), (tmp.path() / "mix.png").string(),
                                 "--technique", "mixup", "--partner", b.string(), "--seed", "3"},
                                tmp);
  REQUIRE(mix.exit_code == 0);
  const json mix_sidecar = json::parse(mix.out);
  const double lambda = mix_sidecar["lambda"].get<double>();
  REQUIRE(lambda >= 0.0);
  REQUIRE(lambda <= 1.0);

  // recompute the blend from the sidecar lambda
  const Image img_a = decode(a);
  const Image img_b = decode(b);
  const Image mixed = decode(tmp.path() / "mix.png");
  for (int y = 0; y < 48; y += 7) {
    for (int x = 0; x < 48; x += 7) {
      const double expected = lambda * img_a.at(x, y).r + (1 - lambda) * img_b.at(x, y).r;
      REQUIRE(std::abs(mixed.at(x, y).r - expected) <= 0.5);
    }
  }

  const CliResult cut = run_cli({"augment", a.string(), (tmp.path() / "cm.png").string(),
                                 "--technique", "cutmix", "--partner", b.string(), "--seed", "4",
                                 "--box", "16"},
                                tmp);
  REQUIRE(cut.exit_code == 0);
  const json cut_sidecar = json::parse(cut.out);
  REQUIRE_THAT(cut_sidecar["lambda_label"].get<double>(),
               Catch::Matchers::WithinAbs(1.0 - 256.0 / 2304.0, 1e-12));
}

TEST_CASE("preview emits one shared box and doubling region counts", "[cli]") {
  TempDir tmp("cli_preview");
  const auto in = tmp.path() / "in.png";
  encode_png(random_image(64, 64, 9), in);
  const auto out = tmp.path() / "strip.png";

  const CliResult r = run_cli(
      {"preview", in.string(), out.string(), "--epochs", "5", "--box", "16", "--seed", "11"},
      tmp);
  REQUIRE(r.exit_code == 0);
  const json sidecar = json::parse(r.out);
  REQUIRE(sidecar["cells"].size() == 5);
  const std::vector<int> expected{1, 2, 4, 8, 16};
  for (int e = 0; e < 5; ++e) {
    REQUIRE(sidecar["cells"][e]["epoch"] == e);
    REQUIRE(sidecar["cells"][e]["n_regions"] == expected[static_cast<std::size_t>(e)]);
    REQUIRE(sidecar["cells"][e]["colors"].size() ==
            static_cast<std::size_t>(expected[static_cast<std::size_t>(e)]));
  }
  // a single box serves every cell
  REQUIRE(sidecar["box"]["w"] == 16);

  const Image strip = decode(out);
  REQUIRE(strip.width() == 5 * 64);
  REQUIRE(strip.height() == 64);
}

TEST_CASE("preview of one epoch equals augment at epoch zero", "[cli]") {
  TempDir tmp("cli_preview_eq");
  const auto in = tmp.path() / "in.png";
  encode_png(random_image(40, 40, 4), in);

  const CliResult p = run_cli({"preview", in.string(), (tmp.path() / "p.png").string(),
                               "--epochs", "1", "--box", "10", "--seed", "21"},
                              tmp);
  const CliResult a = run_cli({"augment", in.string(), (tmp.path() / "a.png").string(),
                               "--technique", "colorful-cutout", "--epoch", "0", "--box", "10",
                               "--seed", "21"},
                              tmp);
  REQUIRE(p.exit_code == 0);
  REQUIRE(a.exit_code == 0);
  REQUIRE(testutil::read_bytes(tmp.path() / "p.png") == testutil::read_bytes(tmp.path() / "a.png"));
}

TEST_CASE("compare renders the five-panel grid", "[cli]") {
  TempDir tmp("cli_compare");
  const auto a = tmp.path() / "a.png";
  const auto b = tmp.path() / "b.png";
  encode_png(random_image(48, 48, 100), a);
  encode_png(random_image(48, 48, 200), b);
  const auto out = tmp.path() / "grid.png";

  const CliResult r = run_cli(
      {"compare", a.string(), b.string(), out.string(), "--seed", "5", "--box", "12"}, tmp);
  REQUIRE(r.exit_code == 0);
  const json sidecar = json::parse(r.out);
  REQUIRE(sidecar["panels"].size() == 5);
  REQUIRE(sidecar["panels"][0]["name"] == "original");
  REQUIRE(sidecar["panels"][2]["name"] == "mixup");

  const Image grid = decode(out);
  REQUIRE(grid.width() == 5 * 48);
  REQUIRE(grid.height() == 48);

  // panel 1 is the untouched input
  const Image img_a = decode(a);
  const Image cell0 = crop(grid, Rect{0, 0, 48, 48});
  REQUIRE(cell0 == img_a);

  // the mixup panel obeys the emitted lambda to within rounding
  const Image img_b = decode(b);
  const double lambda = sidecar["panels"][2]["lambda"].get<double>();
  const Image cell2 = crop(grid, Rect{2 * 48, 0, 48, 48});
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      const double want = lambda * img_a.at(x, y).g + (1 - lambda) * img_b.at(x, y).g;
      REQUIRE(std::abs(cell2.at(x, y).g - want) <= 0.5);
    }
  }

  // size mismatch is a validation error unless --resize is given
  const auto c = tmp.path() / "c.png";
  encode_png(random_image(32, 48, 7), c);
  REQUIRE(run_cli({"compare", a.string(), c.string(), out.string()}, tmp).exit_code == 2);
  REQUIRE(run_cli({"compare", a.string(), c.string(), out.string(), "--resize", "48"}, tmp)
              .exit_code == 0);
}

TEST_CASE("run executes a config end to end and reruns identically", "[cli]") {
  TempDir tmp("cli_run");
  for (int i = 0; i < 8; ++i) {
    encode_png(random_image(40, 40, static_cast<std::uint64_t>(i)),
               tmp.path() / ("img_" + std::to_string(i) + ".png"));
  }
  std::string manifest = "#classes=2\npath,label\n";
  for (int i = 0; i < 8; ++i) {
    manifest += "img_" + std::to_string(i) + ".png," + std::to_string(i % 2) + "\n";
  }
  std::ofstream(tmp.path() / "manifest.csv") << manifest;

  const json config{{"technique", "colorful_cutout"},
                    {"schedule", {{"base", 1}, {"growth_factor", 2}, {"max_regions", 256}, {"box", 8}}},
                    {"alpha", 0.2},
                    {"epochs", 2},
                    {"master_seed", 7},
                    {"preprocessing", {{"resize_to", 32}, {"crop_to", 28}, {"crop_mode", "random"}}},
                    {"workers", 2},
                    {"output_dir", (tmp.path() / "out1").string()},
                    {"smoothing", 0.05}};
  std::ofstream(tmp.path() / "config.json") << config.dump(2);

  const CliResult r1 =
      run_cli({"run", (tmp.path() / "config.json").string(), "--manifest",
               (tmp.path() / "manifest.csv").string()},
              tmp);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r1.out.find("epoch") != std::string::npos);
  REQUIRE(std::filesystem::exists(tmp.path() / "out1" / "summary.json"));
  REQUIRE(std::filesystem::exists(tmp.path() / "out1" / "epoch_0" / "labels.csv"));
  REQUIRE(std::filesystem::exists(tmp.path() / "out1" / "epoch_1" / "img_7.png"));

  // identical rerun into a second directory
  json config2 = config;
  config2["output_dir"] = (tmp.path() / "out2").string();
  std::ofstream(tmp.path() / "config2.json") << config2.dump(2);
  const CliResult r2 =
      run_cli({"run", (tmp.path() / "config2.json").string(), "--manifest",
               (tmp.path() / "manifest.csv").string()},
              tmp);
  REQUIRE(r2.exit_code == 0);
  for (int e = 0; e < 2; ++e) {
    for (int i = 0; i < 8; ++i) {
      const auto rel = "epoch_" + std::to_string(e) + "/img_" + std::to_string(i) + ".png";
      REQUIRE(testutil::read_bytes(tmp.path() / "out1" / rel) ==
              testutil::read_bytes(tmp.path() / "out2" / rel));
    }
  }
}

TEST_CASE("run maps config, io and abort failures onto exit codes", "[cli]") {
  TempDir tmp("cli_run_err");
  const json bad_config{{"technique", "cutout"}, {"output_dir", "o"}, {"verbsoe", 1}};
  std::ofstream(tmp.path() / "bad.json") << bad_config.dump();
  const CliResult unknown_key = run_cli(
      {"run", (tmp.path() / "bad.json").string(), "--manifest", "none.csv"}, tmp);
  REQUIRE(unknown_key.exit_code == 2);
  REQUIRE(unknown_key.err.find("/verbsoe") != std::string::npos);

  const json ok_config{{"technique", "cutout"},
                       {"schedule", {{"box", 8}}},
                       {"preprocessing", {{"resize_to", 32}, {"crop_to", 28}}},
                       {"output_dir", (tmp.path() / "o").string()}};
  std::ofstream(tmp.path() / "ok.json") << ok_config.dump();
  REQUIRE(run_cli({"run", (tmp.path() / "ok.json").string(), "--manifest",
                   (tmp.path() / "missing.csv").string()},
                  tmp)
              .exit_code == 1);

  // manifest whose images are all absent: epoch aborts
  std::ofstream(tmp.path() / "m.csv") << "#classes=2\npath,label\ngone.png,0\n";
  REQUIRE(run_cli({"run", (tmp.path() / "ok.json").string(), "--manifest",
                   (tmp.path() / "m.csv").string()},
                  tmp)
              .exit_code == 3);
}

TEST_CASE("seeded subcommands are bit-deterministic on rerun", "[cli]") {
  TempDir tmp("cli_rerun");
  const auto a = tmp.path() / "a.png";
  const auto b = tmp.path() / "b.png";
  encode_png(random_image(40, 40, 6), a);
  encode_png(random_image(40, 40, 7), b);

  for (int round = 0; round < 2; ++round) {
    const auto suffix = std::to_string(round) + ".png";
    REQUIRE(run_cli({"preview", a.string(), (tmp.path() / ("p" + suffix)).string(), "--box",
                     "10", "--seed", "31"},
                    tmp)
                .exit_code == 0);
    REQUIRE(run_cli({"compare", a.string(), b.string(), (tmp.path() / ("c" + suffix)).string(),
                     "--box", "10", "--seed", "31"},
                    tmp)
                .exit_code == 0);
  }
  REQUIRE(testutil::read_bytes(tmp.path() / "p0.png") ==
          testutil::read_bytes(tmp.path() / "p1.png"));
  REQUIRE(testutil::read_bytes(tmp.path() / "c0.png") ==
          testutil::read_bytes(tmp.path() / "c1.png"));
}

TEST_CASE("the log level env var gates stderr detail", "[cli]") {
  TempDir tmp("cli_log");
  for (int i = 0; i < 2; ++i) {
    encode_png(random_image(40, 40, static_cast<std::uint64_t>(i)),
               tmp.path() / ("img_" + std::to_string(i) + ".png"));
  }
  std::ofstream(tmp.path() / "m.csv") << "#classes=2\npath,label\nimg_0.png,0\nimg_1.png,1\n";
  const json config{{"technique", "cutout"},
                    {"schedule", {{"box", 8}}},
                    {"epochs", 1},
                    {"preprocessing", {{"resize_to", 32}, {"crop_to", 28}}},
                    {"output_dir", (tmp.path() / "o").string()}};
  std::ofstream(tmp.path() / "cfg.json") << config.dump();

  const auto out_path = tmp.path() / "_stdout.txt";
  const auto err_path = tmp.path() / "_stderr.txt";
  auto run_with_env = [&](const std::string& level) {
    const std::string cmd = "CURRICULUM_AUGMENT_LOG=" + level + " \"" + CURAUG_CLI_PATH +
                            "\" run \"" + (tmp.path() / "cfg.json").string() + "\" --manifest \"" +
                            (tmp.path() / "m.csv").string() + "\" > \"" + out_path.string() +
                            "\" 2> \"" + err_path.string() + "\"";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream err(err_path);
    return std::string((std::istreambuf_iterator<char>(err)),
                       std::istreambuf_iterator<char>());
  };
  REQUIRE(run_with_env("debug").find("[debug]") != std::string::npos);
  REQUIRE(run_with_env("error").find("[debug]") == std::string::npos);
}

TEST_CASE("bench reports throughput and a scheduling-independent checksum", "[cli]") {
  TempDir tmp("cli_bench");
  const CliResult single = run_cli(
      {"bench", "--technique", "cutout", "--size", "64", "--iterations", "1", "--box", "16"},
      tmp);
  REQUIRE(single.exit_code == 0);
  const json single_doc = json::parse(single.out);
  REQUIRE(single_doc["iterations"] == 1);
  REQUIRE(single_doc["images_per_second"].get<double>() > 0.0);

  json checksums;
  for (const char* workers : {"1", "2"}) {
    const CliResult r = run_cli({"bench", "--technique", "colorful-cutout", "--size", "48",
                                 "--iterations", "64", "--box", "16", "--seed", "3",
                                 "--workers", workers},
                                tmp);
    REQUIRE(r.exit_code == 0);
    checksums[workers] = json::parse(r.out)["checksum"];
  }
  REQUIRE(checksums["1"] == checksums["2"]);

  REQUIRE(run_cli({"bench", "--iterations", "0"}, tmp).exit_code == 2);
  REQUIRE(run_cli({"bench", "--size", "16", "--box", "32"}, tmp).exit_code == 2);
}
