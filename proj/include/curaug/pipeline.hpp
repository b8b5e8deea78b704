// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "curaug/augment.hpp"
#include "curaug/core.hpp"
#include "curaug/curriculum.hpp"
#include "curaug/imageio.hpp"
#include "curaug/log.hpp"
#include "curaug/rng.hpp"

namespace curaug {

/** Manifest row with a value that violates a declared bound. */
class RangeError : public FormatError {
public:
  using FormatError::FormatError;
};

/** Raised when an epoch exceeds the 10% per-sample failure budget. */
class EpochAborted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string relative_path;
  int class_index = 0;
};

/**
 * Ordered dataset listing. Entry order is the canonical sample index
 * order that seeding, label rows and partner draws all key off.
 */
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int n_classes = 0;
  std::filesystem::path root;

  void validate() const {
    if (entries.empty()) {
      throw FormatError("manifest: no entries");
    }
    if (n_classes < 1) {
      throw FormatError("manifest: class count must be >= 1");
    }
    for (const ManifestEntry& e : entries) {
      if (e.class_index < 0 || e.class_index >= n_classes) {
        throw RangeError("manifest: class index out of range");
      }
    }
  }
};

/**
 * Per-sample seed: an avalanche-quality mix of master seed, epoch and
 * sample index, fixed for all time so outputs are reproducible across
 * platforms and worker counts.
 */
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t epoch,
                                 std::uint64_t sample_index) {
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(master_seed + 0x9e3779b97f4a7c15ULL);
  h = mix(h ^ (epoch + 0xbf58476d1ce4e5b9ULL));
  h = mix(h ^ (sample_index + 0x94d049bb133111ebULL));
  return h;
}

namespace detail {

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  return line;
}

inline int parse_int_strict(const std::string& text, const std::string& context) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("expected integer " + context + ", got '" + text + "'");
  }
  return value;
}

inline void check_relative(const std::string& rel, int line_no) {
  const std::filesystem::path p(rel);
  if (rel.empty() || p.is_absolute()) {
    throw FormatError("manifest line " + std::to_string(line_no) +
                      ": path must be relative: '" + rel + "'");
  }
  for (const auto& part : p) {
    if (part == "..") {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": path escapes dataset root: '" + rel + "'");
    }
  }
}

}  // namespace detail

/**
 * Load a `path,label` CSV manifest. The class count comes from a
 * `#classes=<K>` first line or from the override; entries keep file order.
 * Duplicate paths are kept with a warning.
 */
inline DatasetManifest load_manifest(const std::filesystem::path& path,
                                     std::optional<int> classes_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest: " + path.string());
  }
  DatasetManifest manifest;
  manifest.root = path.parent_path();

  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::optional<int> classes_sidecar;

  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(line);
    if (line_no == 1 && line.rfind('#', 0) == 0) {
      const std::string prefix = "#classes=";
      if (line.rfind(prefix, 0) != 0) {
        throw FormatError("manifest line 1: unrecognized directive '" + line + "'");
      }
      classes_sidecar = detail::parse_int_strict(line.substr(prefix.size()),
                                                 "in #classes directive");
      continue;
    }
    if (!have_header) {
      if (line != "path,label") {
        throw FormatError("manifest line " + std::to_string(line_no) +
                          ": missing 'path,label' header");
      }
      have_header = true;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected 'path,label'");
    }
    ManifestEntry entry;
    entry.relative_path = line.substr(0, comma);
    entry.class_index = detail::parse_int_strict(
        line.substr(comma + 1), "at manifest line " + std::to_string(line_no));
    detail::check_relative(entry.relative_path, line_no);
    if (!seen.insert(entry.relative_path).second) {
      log_info("warning: duplicate manifest path '" + entry.relative_path + "' at line " +
               std::to_string(line_no) + " (kept)");
    }
    manifest.entries.push_back(std::move(entry));
  }
  if (!have_header) {
    throw FormatError("manifest: missing 'path,label' header");
  }

  if (classes_override) {
    manifest.n_classes = *classes_override;
  } else if (classes_sidecar) {
    manifest.n_classes = *classes_sidecar;
  } else {
    throw FormatError("manifest: class count unknown (no #classes line, no override)");
  }
  if (manifest.n_classes < 1) {
    throw FormatError("manifest: class count must be >= 1");
  }
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const int label = manifest.entries[i].class_index;
    if (label < 0 || label >= manifest.n_classes) {
      // header and any #classes line precede the first data row
      const int row_line = static_cast<int>(i) + (classes_sidecar ? 3 : 2);
      throw RangeError("manifest line " + std::to_string(row_line) + ": label " +
                       std::to_string(label) + " out of range for " +
                       std::to_string(manifest.n_classes) + " classes");
    }
  }
  if (manifest.entries.empty()) {
    throw FormatError("manifest: no entries");
  }
  return manifest;
}

enum class Technique { baseline, cutout, colorful_cutout, mixup, cutmix };

inline Technique technique_from_string(const std::string& name) {
  if (name == "baseline") return Technique::baseline;
  if (name == "cutout") return Technique::cutout;
  if (name == "colorful_cutout" || name == "colorful-cutout") return Technique::colorful_cutout;
  if (name == "mixup") return Technique::mixup;
  if (name == "cutmix") return Technique::cutmix;
  throw FormatError("unknown technique '" + name + "'");
}

inline const char* to_string(Technique t) {
  switch (t) {
    case Technique::baseline: return "baseline";
    case Technique::cutout: return "cutout";
    case Technique::colorful_cutout: return "colorful_cutout";
    case Technique::mixup: return "mixup";
    case Technique::cutmix: return "cutmix";
  }
  return "?";
}

enum class CropMode { random, center };

struct Preprocessing {
  int resize_to = 256;
  int crop_to = 224;
  CropMode crop_mode = CropMode::random;
};

struct RunConfig {
  Technique technique = Technique::colorful_cutout;
  CurriculumSchedule schedule;
  double alpha = 0.2;
  int epochs = 5;
  std::uint64_t master_seed = 0;
  Preprocessing preprocessing;
  int workers = 1;
  std::filesystem::path output_dir;
  double smoothing = 0.05;

  void validate() const {
    schedule.validate();
    if (epochs < 1) throw FormatError("config: epochs must be >= 1");
    if (workers < 1) throw FormatError("config: workers must be >= 1");
    if (!(alpha > 0.0)) throw FormatError("config: alpha must be positive");
    if (!(smoothing >= 0.0 && smoothing < 1.0)) {
      throw FormatError("config: smoothing must be in [0, 1)");
    }
    if (preprocessing.crop_to < 1 || preprocessing.resize_to < preprocessing.crop_to) {
      throw FormatError("config: need 1 <= crop_to <= resize_to");
    }
    if (schedule.box > preprocessing.crop_to) {
      throw FormatError("config: schedule box exceeds crop size");
    }
    if (output_dir.empty()) throw FormatError("config: output_dir must be set");
  }
};

struct SampleFailure {
  int index = 0;
  std::string path;
  std::string error;
};

struct EpochReport {
  int epoch = 0;
  int n_samples = 0;
  int n_regions_used = 1;
  double wall_time = 0.0;
  double throughput = 0.0;
  std::vector<SampleFailure> failures;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::string& pointer,
                                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw FormatError("config: unknown key at " + pointer + "/" + item.key());
    }
  }
}

inline const json* find_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline int get_int(const json& obj, const std::string& pointer, const char* key, int fallback) {
  const json* f = find_field(obj, key);
  if (!f) return fallback;
  if (!f->is_number_integer()) {
    throw FormatError("config: expected integer at " + pointer + "/" + key);
  }
  return f->get<int>();
}

inline double get_double(const json& obj, const std::string& pointer, const char* key,
                         double fallback) {
  const json* f = find_field(obj, key);
  if (!f) return fallback;
  if (!f->is_number()) {
    throw FormatError("config: expected number at " + pointer + "/" + key);
  }
  return f->get<double>();
}

inline std::uint64_t get_u64(const json& obj, const std::string& pointer, const char* key,
                             std::uint64_t fallback) {
  const json* f = find_field(obj, key);
  if (!f) return fallback;
  if (!f->is_number_integer() || (f->is_number_integer() && !f->is_number_unsigned() &&
                                  f->get<std::int64_t>() < 0)) {
    throw FormatError("config: expected unsigned integer at " + pointer + "/" + key);
  }
  return f->get<std::uint64_t>();
}

inline std::string get_string(const json& obj, const std::string& pointer, const char* key) {
  const json* f = find_field(obj, key);
  if (!f || !f->is_string()) {
    throw FormatError("config: expected string at " + pointer + "/" + key);
  }
  return f->get<std::string>();
}

}  // namespace detail

/** Parse a RunConfig JSON document. Unknown keys are rejected by pointer. */
inline RunConfig parse_run_config(const nlohmann::json& doc) {
  using detail::json;
  if (!doc.is_object()) {
    throw FormatError("config: expected a JSON object at /");
  }
  detail::reject_unknown_keys(doc, "",
                              {"technique", "schedule", "alpha", "epochs", "master_seed",
                               "preprocessing", "workers", "output_dir", "smoothing"});
  RunConfig cfg;
  cfg.technique = technique_from_string(detail::get_string(doc, "", "technique"));
  if (const json* sched = detail::find_field(doc, "schedule")) {
    if (!sched->is_object()) {
      throw FormatError("config: expected object at /schedule");
    }
    detail::reject_unknown_keys(*sched, "/schedule",
                                {"base", "growth_factor", "max_regions", "box"});
    cfg.schedule.base = detail::get_int(*sched, "/schedule", "base", cfg.schedule.base);
    cfg.schedule.growth_factor =
        detail::get_int(*sched, "/schedule", "growth_factor", cfg.schedule.growth_factor);
    cfg.schedule.max_regions =
        detail::get_int(*sched, "/schedule", "max_regions", cfg.schedule.max_regions);
    cfg.schedule.box = detail::get_int(*sched, "/schedule", "box", cfg.schedule.box);
  }
  cfg.alpha = detail::get_double(doc, "", "alpha", cfg.alpha);
  cfg.epochs = detail::get_int(doc, "", "epochs", cfg.epochs);
  cfg.master_seed = detail::get_u64(doc, "", "master_seed", cfg.master_seed);
  if (const json* pre = detail::find_field(doc, "preprocessing")) {
    if (!pre->is_object()) {
      throw FormatError("config: expected object at /preprocessing");
    }
    detail::reject_unknown_keys(*pre, "/preprocessing", {"resize_to", "crop_to", "crop_mode"});
    cfg.preprocessing.resize_to =
        detail::get_int(*pre, "/preprocessing", "resize_to", cfg.preprocessing.resize_to);
    cfg.preprocessing.crop_to =
        detail::get_int(*pre, "/preprocessing", "crop_to", cfg.preprocessing.crop_to);
    if (detail::find_field(*pre, "crop_mode")) {
      const std::string mode = detail::get_string(*pre, "/preprocessing", "crop_mode");
      if (mode == "random") {
        cfg.preprocessing.crop_mode = CropMode::random;
      } else if (mode == "center") {
        cfg.preprocessing.crop_mode = CropMode::center;
      } else {
        throw FormatError("config: invalid value at /preprocessing/crop_mode");
      }
    }
  }
  cfg.workers = detail::get_int(doc, "", "workers", cfg.workers);
  cfg.output_dir = detail::get_string(doc, "", "output_dir");
  cfg.smoothing = detail::get_double(doc, "", "smoothing", cfg.smoothing);
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config: " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return parse_run_config(doc);
}

namespace detail {

inline SoftLabel label_for_class(int class_index, int n_classes, double smoothing) {
  if (n_classes == 1) {
    return SoftLabel{{1.0}};
  }
  return smooth_labels(class_index, n_classes, smoothing);
}

inline Image preprocess(Image img, const Preprocessing& pre, RngStream& rng) {
  img = resize_bilinear(img, pre.resize_to, pre.resize_to);
  if (pre.crop_mode == CropMode::random) {
    return random_crop(img, pre.crop_to, rng);
  }
  return center_crop(img, pre.crop_to);
}

inline Image load_preprocessed(const DatasetManifest& manifest, std::size_t index,
                               const Preprocessing& pre, RngStream& rng) {
  const std::filesystem::path full = manifest.root / manifest.entries[index].relative_path;
  return preprocess(decode(full), pre, rng);
}

/**
 * Augment sample i of one epoch. All randomness comes from a stream seeded
 * by derive_seed(master, epoch, i); the draw order per sample is: own crop
 * offsets, partner index, partner crop offsets, then technique draws.
 */
inline std::pair<Image, SoftLabel> augment_sample(const DatasetManifest& manifest,
                                                  const RunConfig& cfg, int epoch,
                                                  std::size_t index) {
  RngStream rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(epoch),
                            static_cast<std::uint64_t>(index)));
  Image img = load_preprocessed(manifest, index, cfg.preprocessing, rng);
  SoftLabel label = label_for_class(manifest.entries[index].class_index, manifest.n_classes,
                                    cfg.smoothing);
  switch (cfg.technique) {
    case Technique::baseline:
      break;
    case Technique::cutout:
      img = cutout(img, cfg.schedule.box, rng);
      break;
    case Technique::colorful_cutout:
      img = colorful_cutout(img, params_for_epoch(cfg.schedule, epoch), rng);
      break;
    case Technique::mixup: {
      const auto partner = static_cast<std::size_t>(rng.uniform_below(manifest.entries.size()));
      const Image partner_img = load_preprocessed(manifest, partner, cfg.preprocessing, rng);
      const SoftLabel partner_label = label_for_class(
          manifest.entries[partner].class_index, manifest.n_classes, cfg.smoothing);
      const double lambda = sample_lambda(rng, cfg.alpha);
      std::tie(img, label) = mixup(img, partner_img, label, partner_label, lambda);
      break;
    }
    case Technique::cutmix: {
      const auto partner = static_cast<std::size_t>(rng.uniform_below(manifest.entries.size()));
      const Image partner_img = load_preprocessed(manifest, partner, cfg.preprocessing, rng);
      const SoftLabel partner_label = label_for_class(
          manifest.entries[partner].class_index, manifest.n_classes, cfg.smoothing);
      std::tie(img, label) = cutmix(img, partner_img, label, partner_label, cfg.schedule.box, rng);
      break;
    }
  }
  return {std::move(img), std::move(label)};
}

/**
 * Output file names: relative path with the extension swapped to .png.
 * Any name that would collide (duplicate manifest rows, or a.jpg next to
 * a.png) gets its sample index appended, for every colliding row.
 */
inline std::vector<std::filesystem::path> output_names(const DatasetManifest& manifest) {
  const std::size_t n = manifest.entries.size();
  std::vector<std::filesystem::path> names(n);
  std::unordered_map<std::string, int> uses;
  for (std::size_t i = 0; i < n; ++i) {
    std::filesystem::path p(manifest.entries[i].relative_path);
    p.replace_extension(".png");
    names[i] = p;
    ++uses[p.generic_string()];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (uses[names[i].generic_string()] > 1) {
      std::filesystem::path p = names[i];
      p.replace_extension();
      names[i] = p.generic_string() + "_" + std::to_string(i) + ".png";
    }
  }
  return names;
}

inline std::string format_label_row(const std::string& filename, const SoftLabel& label) {
  std::string row = filename;
  char buf[32];
  for (double p : label.probs) {
    std::snprintf(buf, sizeof(buf), ",%.9g", p);
    row += buf;
  }
  return row;
}

}  // namespace detail

/**
 * Augment every manifest sample once and persist the epoch's output tree:
 * epoch_<e>/<name>.png plus a labels.csv with one probability row per
 * written image. Work is spread over cfg.workers threads; every byte of
 * output is a pure function of (manifest, config, epoch), never of
 * scheduling. Individual sample failures are recorded and skipped; more
 * than 10% failures aborts the epoch.
 */
inline EpochReport run_epoch(const DatasetManifest& manifest, const RunConfig& cfg, int epoch) {
  manifest.validate();
  cfg.validate();
  if (epoch < 0) {
    throw InvalidParameter("run_epoch: epoch must be >= 0");
  }

  const std::size_t n = manifest.entries.size();
  const std::filesystem::path epoch_dir =
      cfg.output_dir / ("epoch_" + std::to_string(epoch));
  const std::vector<std::filesystem::path> names = detail::output_names(manifest);

  std::error_code ec;
  std::filesystem::create_directories(epoch_dir, ec);
  std::set<std::filesystem::path> parents;
  for (const auto& name : names) {
    if (name.has_parent_path()) {
      parents.insert(epoch_dir / name.parent_path());
    }
  }
  for (const auto& dir : parents) {
    std::filesystem::create_directories(dir, ec);
  }

  log_debug("epoch " + std::to_string(epoch) + ": " + std::to_string(n) + " samples, " +
            std::to_string(cfg.workers) + " workers");

  std::vector<std::string> rows(n);
  std::vector<std::optional<SampleFailure>> failures(n);
  std::atomic<std::size_t> cursor{0};

  const auto started = std::chrono::steady_clock::now();
  auto work = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        auto [img, label] = detail::augment_sample(manifest, cfg, epoch, i);
        encode_png(img, epoch_dir / names[i]);
        rows[i] = detail::format_label_row(names[i].generic_string(), label);
      } catch (const std::exception& e) {
        failures[i] = SampleFailure{static_cast<int>(i), manifest.entries[i].relative_path,
                                    e.what()};
      }
    }
  };
  if (cfg.workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(cfg.workers));
    for (int t = 0; t < cfg.workers; ++t) {
      pool.emplace_back(work);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  EpochReport report;
  report.epoch = epoch;
  report.n_regions_used = regions_for_epoch(cfg.schedule, epoch);
  for (auto& failure : failures) {
    if (failure) {
      log_info("sample " + std::to_string(failure->index) + " failed: " + failure->error);
      report.failures.push_back(std::move(*failure));
    }
  }
  report.n_samples = static_cast<int>(n - report.failures.size());
  report.wall_time = wall;
  report.throughput = wall > 0.0 ? report.n_samples / wall : 0.0;

  if (report.failures.size() * 10 > n) {
    throw EpochAborted("epoch " + std::to_string(epoch) + " aborted: " +
                       std::to_string(report.failures.size()) + " of " + std::to_string(n) +
                       " samples failed");
  }

  std::ofstream labels(epoch_dir / "labels.csv", std::ios::trunc);
  if (!labels) {
    throw IoError("cannot write labels.csv in " + epoch_dir.string());
  }
  labels << "filename";
  for (int k = 0; k < manifest.n_classes; ++k) {
    labels << ",p" << k;
  }
  labels << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].empty()) {
      labels << rows[i] << "\n";
    }
  }
  if (!labels.good()) {
    throw IoError("write failed for labels.csv in " + epoch_dir.string());
  }
  return report;
}

inline nlohmann::json report_to_json(const EpochReport& report) {
  nlohmann::json failures = nlohmann::json::array();
  for (const SampleFailure& f : report.failures) {
    failures.push_back({{"index", f.index}, {"path", f.path}, {"error", f.error}});
  }
  return nlohmann::json{{"epoch", report.epoch},
                        {"n_samples", report.n_samples},
                        {"n_regions_used", report.n_regions_used},
                        {"wall_time", report.wall_time},
                        {"throughput", report.throughput},
                        {"failures", std::move(failures)}};
}

/**
 * Run epochs 0..cfg.epochs-1 in order and write a summary.json of all
 * reports to the output directory.
 */
inline std::vector<EpochReport> run_all(const DatasetManifest& manifest, const RunConfig& cfg) {
  manifest.validate();
  cfg.validate();
  std::vector<EpochReport> reports;
  reports.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    reports.push_back(run_epoch(manifest, cfg, epoch));
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const EpochReport& report : reports) {
    summary.push_back(report_to_json(report));
  }
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / "summary.json", std::ios::trunc);
  if (!out) {
    throw IoError("cannot write summary.json in " + cfg.output_dir.string());
  }
  out << summary.dump(2) << "\n";
  return reports;
}

}  // namespace curaug
