// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#ifdef CURAUG_CLI_PATH
#include <sys/wait.h>
#endif

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "curaug/core.hpp"
#include "curaug/rng.hpp"

namespace testutil {

inline curaug::Image random_image(int w, int h, std::uint64_t seed) {
  curaug::RngStream rng(seed);
  curaug::Image img(w, h);
  for (curaug::Rgb& px : img.pixels()) {
    px.r = static_cast<std::uint8_t>(rng.uniform_below(256));
    px.g = static_cast<std::uint8_t>(rng.uniform_below(256));
    px.b = static_cast<std::uint8_t>(rng.uniform_below(256));
  }
  return img;
}

/** Fresh scratch directory under the system temp root, removed on destruction. */
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("curaug_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
}

#ifdef CURAUG_CLI_PATH
struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/** Run the built CLI with stdout/stderr captured into scratch files. */
inline CliResult run_cli(const std::vector<std::string>& args,
                         const std::filesystem::path& scratch) {
  const auto out_path = scratch / "_stdout.txt";
  const auto err_path = scratch / "_stderr.txt";
  std::string cmd = std::string("\"") + CURAUG_CLI_PATH + "\"";
  for (const std::string& a : args) {
    cmd += " \"" + a + "\"";
  }
  cmd += " > \"" + out_path.string() + "\" 2> \"" + err_path.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  {
    std::ifstream in(out_path, std::ios::binary);
    result.out.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  {
    std::ifstream in(err_path, std::ios::binary);
    result.err.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return result;
}
#endif  // CURAUG_CLI_PATH

/** Test-only JPEG writer (the library itself only writes PNG). */
inline void write_jpeg(const curaug::Image& img, const std::filesystem::path& path,
                       int quality = 90, bool progressive = false) {
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);

  FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) {
    jpeg_destroy_compress(&cinfo);
    throw curaug::IoError("cannot open for writing: " + path.string());
  }
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  if (progressive) {
    jpeg_simple_progression(&cinfo);
  }
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * 3);
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < img.width(); ++x) {
      const curaug::Rgb px = img.at(x, y);
      row[3 * x] = px.r;
      row[3 * x + 1] = px.g;
      row[3 * x + 2] = px.b;
    }
    JSAMPROW rp = row.data();
    jpeg_write_scanlines(&cinfo, &rp, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

}  // namespace testutil
