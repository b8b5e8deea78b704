// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curaug {

/** Parameter outside its documented domain (bad box size, bad alpha, ...). */
class InvalidParameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/** Two operands whose dimensions must agree do not. */
class ShapeMismatch : public InvalidParameter {
public:
  using InvalidParameter::InvalidParameter;
};

/** Filesystem-level failure: missing file, unwritable path. */
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/** Malformed image stream. Carries the byte offset where decoding stopped. */
class DecodeError : public std::runtime_error {
public:
  DecodeError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

private:
  std::size_t byte_offset_;
};

/** Structural problem in a manifest or config document. */
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/** Integer pixel rectangle, top-left anchored, at least 1x1. */
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }

  bool contains(int px, int py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/**
 * Owned 8-bit RGB raster, row-major. Pure value type: augmentations copy
 * the image and return the copy, they never write through a source.
 */
class Image {
public:
  Image() = default;

  Image(int width, int height, Rgb fill = Rgb{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw InvalidParameter("image dimensions must be at least 1x1");
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Image(int width, int height, std::vector<Rgb> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) {
      throw InvalidParameter("image dimensions must be at least 1x1");
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * height) {
      throw InvalidParameter("pixel buffer length does not match width*height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const Rgb& at(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<Rgb> pixels() { return pixels_; }
  std::span<const Rgb> pixels() const { return pixels_; }

  /** True when `r` lies fully inside the image. */
  bool bounds(const Rect& r) const {
    return r.x >= 0 && r.y >= 0 && r.w >= 1 && r.h >= 1 && r.x + r.w <= width_ &&
           r.y + r.h <= height_;
  }

  void fill(const Rect& r, Rgb color) {
    if (!bounds(r)) {
      throw InvalidParameter("fill rect out of image bounds");
    }
    for (int y = r.y; y < r.y + r.h; ++y) {
      for (int x = r.x; x < r.x + r.w; ++x) {
        at(x, y) = color;
      }
    }
  }

  friend bool operator==(const Image&, const Image&) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

/** Probability vector over classes; non-negative, sums to 1. */
struct SoftLabel {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }

  double sum() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }

  friend bool operator==(const SoftLabel&, const SoftLabel&) = default;
};

}  // namespace curaug
