// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "curaug/core.hpp"
#include "curaug/rng.hpp"

namespace curaug {

enum class ImageFormat { png, jpeg };

/** A raster file reference; the format comes from magic bytes, never the name. */
struct ImageFile {
  std::filesystem::path path;
  ImageFormat format;
};

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return bytes;
}

struct MemReader {
  const unsigned char* data = nullptr;
  std::size_t len = 0;
  std::size_t pos = 0;
  char message[256] = {};
};

extern "C" inline void png_mem_read(png_structp png, png_bytep out, png_size_t count) {
  auto* reader = static_cast<MemReader*>(png_get_io_ptr(png));
  if (reader->pos + count > reader->len) {
    png_error(png, "unexpected end of stream");
  }
  std::memcpy(out, reader->data + reader->pos, count);
  reader->pos += count;
}

extern "C" inline void png_on_error(png_structp png, png_const_charp msg) {
  auto* reader = static_cast<MemReader*>(png_get_error_ptr(png));
  std::snprintf(reader->message, sizeof(reader->message), "%s", msg);
  longjmp(png_jmpbuf(png), 1);
}

extern "C" inline void png_on_warning(png_structp, png_const_charp) {}

inline Image decode_png_bytes(const unsigned char* data, std::size_t len) {
  MemReader reader{data, len, 0, {}};
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &reader, png_on_error, png_on_warning);
  if (!png) {
    throw DecodeError("png: reader allocation failed", 0);
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DecodeError("png: info allocation failed", 0);
  }

  std::vector<unsigned char> interleaved;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    const std::size_t offset = reader.pos;
    std::string message = reader.message[0] ? reader.message : "corrupt stream";
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("png: " + message, offset);
  }

  png_set_read_fn(png, &reader, png_mem_read);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);

  // Normalize everything to 8-bit RGB or RGBA: expand palettes and
  // sub-byte gray, promote tRNS to alpha, fold 16-bit down, gray to RGB.
  png_set_expand(png);
  if (png_get_bit_depth(png, info) == 16) {
    png_set_strip_16(png);
  }
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  channels = png_get_channels(png, info);
  if (channels != 3 && channels != 4) {
    png_error(png, "unsupported channel layout");
  }
  if (width < 1 || height < 1) {
    png_error(png, "empty image");
  }

  interleaved.resize(static_cast<std::size_t>(width) * height * channels);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = interleaved.data() + static_cast<std::size_t>(y) * width * channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
  if (channels == 3) {
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      pixels[i] = Rgb{interleaved[3 * i], interleaved[3 * i + 1], interleaved[3 * i + 2]};
    }
  } else {
    // Composite alpha over black.
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const unsigned a = interleaved[4 * i + 3];
      auto mul = [a](unsigned c) {
        return static_cast<std::uint8_t>((c * a + 127) / 255);
      };
      pixels[i] = Rgb{mul(interleaved[4 * i]), mul(interleaved[4 * i + 1]),
                      mul(interleaved[4 * i + 2])};
    }
  }
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

struct JpegErrorTrap {
  jpeg_error_mgr mgr;
  jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

extern "C" inline void jpeg_on_error(j_common_ptr cinfo) {
  auto* trap = reinterpret_cast<JpegErrorTrap*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, trap->message);
  longjmp(trap->jump, 1);
}

// Corrupt-data warnings (truncated stream, bad markers) become hard decode
// errors; libjpeg would otherwise patch the image and report success.
extern "C" inline void jpeg_on_warning(j_common_ptr cinfo, int msg_level) {
  if (msg_level < 0) {
    (*cinfo->err->error_exit)(cinfo);
  }
}

inline Image decode_jpeg_bytes(const unsigned char* data, std::size_t len) {
  jpeg_decompress_struct cinfo;
  JpegErrorTrap trap;
  cinfo.err = jpeg_std_error(&trap.mgr);
  trap.mgr.error_exit = jpeg_on_error;
  trap.mgr.emit_message = jpeg_on_warning;

  std::vector<unsigned char> interleaved;

  if (setjmp(trap.jump)) {
    std::size_t offset = len;
    if (cinfo.src && cinfo.src->bytes_in_buffer <= len) {
      offset = len - cinfo.src->bytes_in_buffer;
    }
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("jpeg: ") + trap.message, offset);
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(len));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;  // also promotes grayscale
  jpeg_start_decompress(&cinfo);

  const int width = static_cast<int>(cinfo.output_width);
  const int height = static_cast<int>(cinfo.output_height);
  if (width < 1 || height < 1 || cinfo.output_components != 3) {
    std::snprintf(trap.message, sizeof(trap.message), "unsupported output layout");
    longjmp(trap.jump, 1);
  }
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  interleaved.resize(stride * height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = interleaved.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = Rgb{interleaved[3 * i], interleaved[3 * i + 1], interleaved[3 * i + 2]};
  }
  return Image(width, height, std::move(pixels));
}

extern "C" inline void png_mem_write(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + count);
}

extern "C" inline void png_mem_flush(png_structp) {}

}  // namespace detail

inline ImageFormat sniff_format(std::span<const unsigned char> head) {
  static const unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (head.size() >= 8 && std::memcmp(head.data(), png_magic, 8) == 0) {
    return ImageFormat::png;
  }
  if (head.size() >= 3 && head[0] == 0xff && head[1] == 0xd8 && head[2] == 0xff) {
    return ImageFormat::jpeg;
  }
  throw DecodeError("unrecognized image format", 0);
}

/** Decode a PNG or JPEG file into 8-bit RGB, sniffing the format from magic bytes. */
inline Image decode(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
  switch (sniff_format(bytes)) {
    case ImageFormat::png:
      return detail::decode_png_bytes(bytes.data(), bytes.size());
    case ImageFormat::jpeg:
      return detail::decode_jpeg_bytes(bytes.data(), bytes.size());
  }
  throw DecodeError("unrecognized image format", 0);
}

/**
 * Encode to lossless PNG with pinned settings (compression level 6), so
 * identical pixels give identical bytes.
 */
inline std::vector<unsigned char> encode_png_bytes(const Image& img) {
  static_assert(sizeof(Rgb) == 3, "Rgb must be a packed byte triple");
  std::vector<unsigned char> out;
  detail::MemReader errctx;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &errctx,
                                            detail::png_on_error, detail::png_on_warning);
  if (!png) {
    throw IoError("png: writer allocation failed");
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: info allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    std::string message = errctx.message[0] ? errctx.message : "write failed";
    png_destroy_write_struct(&png, &info);
    throw IoError("png: " + message);
  }
  png_set_write_fn(png, &out, detail::png_mem_write, detail::png_mem_flush);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto* base = reinterpret_cast<const unsigned char*>(img.pixels().data());
  const std::size_t stride = static_cast<std::size_t>(img.width()) * 3;
  for (int y = 0; y < img.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(base + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline void encode_png(const Image& img, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = encode_png_bytes(img);
  std::ofstream outfile(path, std::ios::binary | std::ios::trunc);
  if (!outfile) {
    throw IoError("cannot open for writing: " + path.string());
  }
  outfile.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
  if (!outfile) {
    throw IoError("write failed: " + path.string());
  }
}

/** Exact pixel copy of a window; the rect must lie inside the image. */
inline Image crop(const Image& img, const Rect& window) {
  if (!img.bounds(window)) {
    throw InvalidParameter("crop: window out of image bounds");
  }
  Image out(window.w, window.h);
  for (int y = 0; y < window.h; ++y) {
    for (int x = 0; x < window.w; ++x) {
      out.at(x, y) = img.at(window.x + x, window.y + y);
    }
  }
  return out;
}

/**
 * Bilinear resize with half-pixel-center coordinate mapping, channels
 * interpolated independently. Constant images stay constant and output
 * channels never leave the local neighborhood's [min, max].
 */
inline Image resize_bilinear(const Image& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw InvalidParameter("resize_bilinear: output dimensions must be >= 1");
  }
  if (out_w == img.width() && out_h == img.height()) {
    return img;
  }
  Image out(out_w, out_h);
  const double scale_x = static_cast<double>(img.width()) / out_w;
  const double scale_y = static_cast<double>(img.height()) / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    const double sy = std::max(0.0, (oy + 0.5) * scale_y - 0.5);
    const int y0 = std::min(static_cast<int>(sy), img.height() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double sx = std::max(0.0, (ox + 0.5) * scale_x - 0.5);
      const int x0 = std::min(static_cast<int>(sx), img.width() - 1);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = sx - x0;
      const Rgb p00 = img.at(x0, y0);
      const Rgb p10 = img.at(x1, y0);
      const Rgb p01 = img.at(x0, y1);
      const Rgb p11 = img.at(x1, y1);
      auto lerp2 = [&](std::uint8_t c00, std::uint8_t c10, std::uint8_t c01,
                       std::uint8_t c11) {
        const double top = c00 + fx * (c10 - c00);
        const double bot = c01 + fx * (c11 - c01);
        return static_cast<std::uint8_t>(std::lround(top + fy * (bot - top)));
      };
      out.at(ox, oy) = Rgb{lerp2(p00.r, p10.r, p01.r, p11.r),
                           lerp2(p00.g, p10.g, p01.g, p11.g),
                           lerp2(p00.b, p10.b, p01.b, p11.b)};
    }
  }
  return out;
}

/** Square crop at a uniformly drawn offset. Draw order is x then y. */
inline Image random_crop(const Image& img, int size, RngStream& rng) {
  if (size < 1 || size > img.width() || size > img.height()) {
    throw InvalidParameter("random_crop: size exceeds image");
  }
  const int dx = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(img.width() - size) + 1));
  const int dy = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(img.height() - size) + 1));
  return crop(img, Rect{dx, dy, size, size});
}

/** Square crop at offset floor((dim - size) / 2) on each axis. */
inline Image center_crop(const Image& img, int size) {
  if (size < 1 || size > img.width() || size > img.height()) {
    throw InvalidParameter("center_crop: size exceeds image");
  }
  return crop(img, Rect{(img.width() - size) / 2, (img.height() - size) / 2, size, size});
}

}  // namespace curaug
