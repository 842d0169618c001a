// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Cropping of image and table regions out of rendered page rasters.
// Requires libpng.

#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "docflow/ingest.hpp"
#include "docflow/model.hpp"

namespace docflow {

struct RgbaImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGBA
};

inline std::optional<RgbaImage> read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) return std::nullopt;
  img.format = PNG_FORMAT_RGBA;
  RgbaImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    return std::nullopt;
  }
  return out;
}

inline bool write_png(const std::filesystem::path& path, const RgbaImage& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = image.width;
  img.height = image.height;
  img.format = PNG_FORMAT_RGBA;
  return png_image_write_to_file(&img, path.string().c_str(), 0, image.pixels.data(), 0,
                                 nullptr) != 0;
}

/// Crops a page-space rect out of a raster rendered at any resolution.
inline RgbaImage crop(const RgbaImage& page, const Rect& r, double page_w, double page_h) {
  double sx = page.width / page_w, sy = page.height / page_h;
  auto clampi = [](double v, std::uint32_t hi) {
    return static_cast<std::uint32_t>(std::clamp(v, 0.0, static_cast<double>(hi)));
  };
  std::uint32_t x0 = clampi(std::floor(r.x0 * sx), page.width);
  std::uint32_t y0 = clampi(std::floor(r.y0 * sy), page.height);
  std::uint32_t x1 = clampi(std::ceil(r.x1 * sx), page.width);
  std::uint32_t y1 = clampi(std::ceil(r.y1 * sy), page.height);
  RgbaImage out;
  out.width = std::max<std::uint32_t>(x1 - x0, 1);
  out.height = std::max<std::uint32_t>(y1 - y0, 1);
  out.pixels.assign(std::size_t{out.width} * out.height * 4, 0);
  for (std::uint32_t y = 0; y < out.height && y0 + y < page.height; ++y)
    for (std::uint32_t x = 0; x < out.width && x0 + x < page.width; ++x)
      for (int c = 0; c < 4; ++c)
        out.pixels[(std::size_t{y} * out.width + x) * 4 + c] =
            page.pixels[(std::size_t{y0 + y} * page.width + x0 + x) * 4 + c];
  return out;
}

inline std::string asset_name(const std::string& source_id, int page, int order_index) {
  return source_id + "_p" + std::to_string(page) + "_" + std::to_string(order_index) + ".png";
}

enum class AssetStatus { Written, Placeholder, IoFailure };

inline constexpr std::string_view to_string(AssetStatus s) {
  switch (s) {
    case AssetStatus::Written: return "written";
    case AssetStatus::Placeholder: return "placeholder";
    case AssetStatus::IoFailure: return "io-failure";
  }
  return "placeholder";
}

struct AssetEntry {
  int block_id = 0;
  int page = 0;
  std::string path;  // relative to the asset directory; empty for placeholders
  AssetStatus status = AssetStatus::Placeholder;
  std::string message;
};

/// Writes one PNG per image/table block whose page has a raster. Failures
/// are recorded per entry and never abort the run. Raster references are
/// resolved against `raster_base`.
inline std::vector<AssetEntry> crop_assets(const IntermediateDoc& doc, const DocumentBundle& bundle,
                                           const std::filesystem::path& asset_dir,
                                           const std::filesystem::path& raster_base) {
  std::vector<AssetEntry> manifest;
  std::error_code ec;
  bool dir_ok = !asset_dir.empty() && (std::filesystem::create_directories(asset_dir, ec), !ec) &&
                std::filesystem::is_directory(asset_dir, ec);
  std::map<int, std::optional<RgbaImage>> rasters;

  for (const auto& page : doc.pdf_info) {
    const PageDigest* digest = page.page_idx < static_cast<int>(bundle.pages.size())
                                   ? &bundle.pages[page.page_idx]
                                   : nullptr;
    for (const auto& b : page.para_blocks) {
      if (!is_visual(b.category)) continue;
      AssetEntry e{b.id, page.page_idx, {}, AssetStatus::Placeholder, {}};
      if (!digest || !digest->page_raster_ref || b.asset.empty()) {
        manifest.push_back(std::move(e));
        continue;
      }
      e.path = b.asset;
      if (!dir_ok) {
        e.status = AssetStatus::IoFailure;
        e.message = "asset directory not writable: " + asset_dir.string();
        manifest.push_back(std::move(e));
        continue;
      }
      auto [it, fresh] = rasters.try_emplace(page.page_idx);
      if (fresh) it->second = read_png(raster_base / *digest->page_raster_ref);
      if (!it->second) {
        e.status = AssetStatus::IoFailure;
        e.message = "cannot read page raster " + *digest->page_raster_ref;
      } else if (!write_png(asset_dir / b.asset,
                            crop(*it->second, b.rect, page.page_size.width, page.page_size.height))) {
        e.status = AssetStatus::IoFailure;
        e.message = "cannot write " + (asset_dir / b.asset).string();
      } else {
        e.status = AssetStatus::Written;
      }
      manifest.push_back(std::move(e));
    }
  }
  return manifest;
}

}  // namespace docflow
