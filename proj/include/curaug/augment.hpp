// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "curaug/core.hpp"
#include "curaug/curriculum.hpp"
#include "curaug/rng.hpp"

namespace curaug {

/**
 * Sample a box x box erasure rectangle uniformly over all placements that
 * lie fully inside a image_w x image_h image. Draw order is x then y.
 */
inline Rect sample_box(RngStream& rng, int image_w, int image_h, int box) {
  if (box < 1) {
    throw InvalidParameter("sample_box: box must be >= 1");
  }
  if (box > image_w || box > image_h) {
    throw InvalidParameter("sample_box: box exceeds image");
  }
  const int x = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(image_w - box) + 1));
  const int y = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(image_h - box) + 1));
  return Rect{x, y, box, box};
}

namespace detail {

inline void bisect(const Rect& r, long long budget, int level, std::vector<Rect>& out) {
  if (budget == 1) {
    out.push_back(r);
    return;
  }
  // Alternate cut orientation by depth, vertical (left/right) first. A
  // 1-pixel extent cannot be cut, so fall to the other orientation.
  bool vertical = (level % 2 == 0);
  if (vertical ? r.w < 2 : r.h < 2) {
    vertical = !vertical;
  }
  const int extent = vertical ? r.w : r.h;
  const int head = extent - extent / 2;  // ceil half goes leftmost/topmost
  Rect a, b;
  if (vertical) {
    a = Rect{r.x, r.y, head, r.h};
    b = Rect{r.x + head, r.y, r.w - head, r.h};
  } else {
    a = Rect{r.x, r.y, r.w, head};
    b = Rect{r.x, r.y + head, r.w, r.h - head};
  }
  // Split the remaining region budget evenly, larger share to the larger
  // half. Near-degenerate rects cannot host half the budget on both sides;
  // clamp so each side gets at least one region and at most its pixel area.
  long long budget_a = budget - budget / 2;
  budget_a = std::max(budget_a, budget - b.area());
  budget_a = std::min({budget_a, a.area(), budget - 1});
  bisect(a, budget_a, level + 1, out);
  bisect(b, budget - budget_a, level + 1, out);
}

inline bool is_power_of_two(long long n) {
  return n > 0 && (n & (n - 1)) == 0;
}

}  // namespace detail

/**
 * Tile `box` into exactly n_regions rectangles by recursive alternating
 * bisection: the first cut is vertical, the next horizontal, and so on,
 * with odd extents split floor/ceil (larger piece leftmost/topmost).
 * The result is a disjoint exact cover of the box, emitted in recursion
 * order (left/top subtree first). n_regions must be a power of two and
 * must not exceed the box pixel area.
 */
inline std::vector<Rect> subdivide(const Rect& box, int n_regions) {
  if (!detail::is_power_of_two(n_regions)) {
    throw InvalidParameter("subdivide: n_regions must be a power of two >= 1");
  }
  if (box.w < 1 || box.h < 1) {
    throw InvalidParameter("subdivide: box must be at least 1x1");
  }
  if (n_regions > box.area()) {
    throw InvalidParameter("subdivide: n_regions exceeds box pixel area");
  }
  std::vector<Rect> out;
  out.reserve(static_cast<std::size_t>(n_regions));
  detail::bisect(box, n_regions, 0, out);
  return out;
}

/** One color with each channel drawn independently, uniform over [0, 255]. */
inline Rgb random_color(RngStream& rng) {
  const auto r = static_cast<std::uint8_t>(rng.uniform_below(256));
  const auto g = static_cast<std::uint8_t>(rng.uniform_below(256));
  const auto b = static_cast<std::uint8_t>(rng.uniform_below(256));
  return Rgb{r, g, b};
}

/**
 * Colorful cutout at an explicit difficulty: sample the erasure box, tile
 * it into params.n_regions sub-regions, fill each with an independent
 * random color. Draws: box x, box y, then r,g,b per sub-region in emission
 * order. Pixels outside the box are untouched.
 */
inline Image colorful_cutout(const Image& img, const DifficultyParams& params,
                             RngStream& rng) {
  const Rect box = sample_box(rng, img.width(), img.height(), params.box);
  const std::vector<Rect> regions = subdivide(box, params.n_regions);
  Image out = img;
  for (const Rect& region : regions) {
    out.fill(region, random_color(rng));
  }
  return out;
}

/**
 * Colorful cutout with the difficulty taken from the epoch index under the
 * default doubling schedule: 2^n_epoch sub-regions, clamped to the box area
 * and to the 256-region cap.
 */
inline Image colorful_cutout(const Image& img, int box, int n_epoch, RngStream& rng) {
  CurriculumSchedule schedule;
  schedule.box = box;
  return colorful_cutout(img, params_for_epoch(schedule, n_epoch), rng);
}

/** Traditional cutout: the sampled box is erased to (0,0,0). */
inline Image cutout(const Image& img, int box, RngStream& rng) {
  const Rect rect = sample_box(rng, img.width(), img.height(), box);
  Image out = img;
  out.fill(rect, Rgb{0, 0, 0});
  return out;
}

/** One draw from Beta(alpha, alpha), the mixing ratio distribution. */
inline double sample_lambda(RngStream& rng, double alpha) {
  if (!(alpha > 0.0)) {
    throw InvalidParameter("sample_lambda: alpha must be positive");
  }
  const double ga = rng.gamma(alpha);
  const double gb = rng.gamma(alpha);
  if (ga + gb == 0.0) {
    return 0.5;
  }
  return ga / (ga + gb);
}

inline SoftLabel mix_labels(const SoftLabel& a, const SoftLabel& b, double lambda) {
  if (a.size() != b.size()) {
    throw ShapeMismatch("label mixing: class counts differ");
  }
  SoftLabel out;
  out.probs.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.probs[i] = lambda * a.probs[i] + (1.0 - lambda) * b.probs[i];
  }
  return out;
}

/**
 * Convex combination of two equally sized images and their labels.
 * Channels are mixed in real arithmetic and rounded half-to-even back to
 * 8 bits; the label mix is kept exact.
 */
inline std::pair<Image, SoftLabel> mixup(const Image& img_a, const Image& img_b,
                                         const SoftLabel& label_a, const SoftLabel& label_b,
                                         double lambda) {
  if (img_a.width() != img_b.width() || img_a.height() != img_b.height()) {
    throw ShapeMismatch("mixup: image dimensions differ");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidParameter("mixup: lambda must be in [0, 1]");
  }
  auto mix_channel = [lambda](std::uint8_t a, std::uint8_t b) {
    const double v = lambda * a + (1.0 - lambda) * b;
    return static_cast<std::uint8_t>(std::nearbyint(v));
  };
  Image out = img_a;
  auto dst = out.pixels();
  auto src = img_b.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i].r = mix_channel(dst[i].r, src[i].r);
    dst[i].g = mix_channel(dst[i].g, src[i].g);
    dst[i].b = mix_channel(dst[i].b, src[i].b);
  }
  return {std::move(out), mix_labels(label_a, label_b, lambda)};
}

/** Label weight kept by img_a when a box*box window is pasted from img_b. */
inline double cutmix_lambda(int width, int height, int box) {
  const long long total = static_cast<long long>(width) * height;
  const long long kept = total - static_cast<long long>(box) * box;
  return static_cast<double>(kept) / static_cast<double>(total);
}

/**
 * Cutmix: replace one sampled box of img_a with the co-located pixels of
 * img_b and mix the labels by kept-area ratio 1 - box^2/(w*h).
 */
inline std::pair<Image, SoftLabel> cutmix(const Image& img_a, const Image& img_b,
                                          const SoftLabel& label_a, const SoftLabel& label_b,
                                          int box, RngStream& rng) {
  if (img_a.width() != img_b.width() || img_a.height() != img_b.height()) {
    throw ShapeMismatch("cutmix: image dimensions differ");
  }
  const Rect rect = sample_box(rng, img_a.width(), img_a.height(), box);
  Image out = img_a;
  for (int y = rect.y; y < rect.y + rect.h; ++y) {
    for (int x = rect.x; x < rect.x + rect.w; ++x) {
      out.at(x, y) = img_b.at(x, y);
    }
  }
  const double lambda = cutmix_lambda(img_a.width(), img_a.height(), box);
  return {std::move(out), mix_labels(label_a, label_b, lambda)};
}

/**
 * Smoothed one-hot label: the target class keeps 1 - factor + factor/n,
 * every class receives factor/n.
 */
inline SoftLabel smooth_labels(int onehot_class, int n_classes, double factor) {
  if (n_classes < 2) {
    throw InvalidParameter("smooth_labels: need at least 2 classes");
  }
  if (onehot_class < 0 || onehot_class >= n_classes) {
    throw InvalidParameter("smooth_labels: class index out of range");
  }
  if (!(factor >= 0.0 && factor < 1.0)) {
    throw InvalidParameter("smooth_labels: factor must be in [0, 1)");
  }
  SoftLabel out;
  out.probs.assign(static_cast<std::size_t>(n_classes), factor / n_classes);
  out.probs[static_cast<std::size_t>(onehot_class)] = 1.0 - factor + factor / n_classes;
  return out;
}

}  // namespace curaug
