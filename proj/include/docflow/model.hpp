// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Shared value types for the extraction pipeline: page geometry, span and
// block taxonomies, document metadata and the intermediate document that every
// output format is rendered from.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#ifndef DOCFLOW_VERSION
#define DOCFLOW_VERSION "0.1.0"
#endif

namespace docflow {

inline constexpr std::string_view kVersion = DOCFLOW_VERSION;

/// Axis-aligned box in page points. Origin top-left, y grows downward.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }

  bool valid() const {
    return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
           std::isfinite(y1) && x0 <= x1 && y0 <= y1;
  }

  bool contains(const Rect& o) const {
    return o.x0 >= x0 && o.y0 >= y0 && o.x1 <= x1 && o.y1 <= y1;
  }

  Rect clamped(double w, double h) const {
    auto c = [](double v, double hi) { return v < 0.0 ? 0.0 : (v > hi ? hi : v); };
    return Rect{c(x0, w), c(y0, h), c(x1, w), c(y1, h)};
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect hull(const Rect& a, const Rect& b) {
  return Rect{std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
              std::max(a.y1, b.y1)};
}

enum class BlockCategory : std::uint8_t {
  Title,
  Text,
  Image,
  ImageCaption,
  Table,
  TableCaption,
  TableFootnote,
  InterlineEquation,
  EquationLabel,
  Header,
  Footer,
  PageNumber,
  PageNote,
};

inline constexpr std::array kAllBlockCategories = {
    BlockCategory::Title,         BlockCategory::Text,
    BlockCategory::Image,         BlockCategory::ImageCaption,
    BlockCategory::Table,         BlockCategory::TableCaption,
    BlockCategory::TableFootnote, BlockCategory::InterlineEquation,
    BlockCategory::EquationLabel, BlockCategory::Header,
    BlockCategory::Footer,        BlockCategory::PageNumber,
    BlockCategory::PageNote,
};

enum class SpanKind : std::uint8_t {
  TextLineFragment,
  InlineFormula,
  DisplayedFormula,
  ImageRegion,
  TableRegion,
};

inline constexpr std::array kAllSpanKinds = {
    SpanKind::TextLineFragment, SpanKind::InlineFormula,
    SpanKind::DisplayedFormula, SpanKind::ImageRegion, SpanKind::TableRegion,
};

enum class ParseType : std::uint8_t { Txt, Ocr };
enum class LangType : std::uint8_t { Zh, En, Unknown };

inline constexpr std::string_view to_string(BlockCategory c) {
  switch (c) {
    case BlockCategory::Title: return "title";
    case BlockCategory::Text: return "text";
    case BlockCategory::Image: return "image";
    case BlockCategory::ImageCaption: return "image_caption";
    case BlockCategory::Table: return "table";
    case BlockCategory::TableCaption: return "table_caption";
    case BlockCategory::TableFootnote: return "table_footnote";
    case BlockCategory::InterlineEquation: return "interline_equation";
    case BlockCategory::EquationLabel: return "equation_label";
    case BlockCategory::Header: return "header";
    case BlockCategory::Footer: return "footer";
    case BlockCategory::PageNumber: return "page_number";
    case BlockCategory::PageNote: return "page_note";
  }
  return "text";
}

inline constexpr std::string_view to_string(SpanKind k) {
  switch (k) {
    case SpanKind::TextLineFragment: return "text";
    case SpanKind::InlineFormula: return "inline_equation";
    case SpanKind::DisplayedFormula: return "interline_equation";
    case SpanKind::ImageRegion: return "image";
    case SpanKind::TableRegion: return "table";
  }
  return "text";
}

inline constexpr std::string_view to_string(ParseType p) {
  return p == ParseType::Txt ? "txt" : "ocr";
}

inline constexpr std::string_view to_string(LangType l) {
  switch (l) {
    case LangType::Zh: return "zh";
    case LangType::En: return "en";
    case LangType::Unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<BlockCategory> parse_block_category(std::string_view s) {
  for (auto c : kAllBlockCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline std::optional<SpanKind> parse_span_kind(std::string_view s) {
  for (auto k : kAllSpanKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline std::optional<ParseType> parse_parse_type(std::string_view s) {
  if (s == "txt") return ParseType::Txt;
  if (s == "ocr") return ParseType::Ocr;
  return std::nullopt;
}

inline std::optional<LangType> parse_lang(std::string_view s) {
  if (s == "zh") return LangType::Zh;
  if (s == "en") return LangType::En;
  return std::nullopt;
}

/// Headers, footers, page numbers and page notes never reach the output.
inline constexpr bool is_discard(BlockCategory c) {
  return c == BlockCategory::Header || c == BlockCategory::Footer ||
         c == BlockCategory::PageNumber || c == BlockCategory::PageNote;
}

inline constexpr bool is_visual(BlockCategory c) {
  return c == BlockCategory::Image || c == BlockCategory::Table;
}

inline constexpr bool is_satellite(BlockCategory c) {
  return c == BlockCategory::ImageCaption || c == BlockCategory::TableCaption ||
         c == BlockCategory::TableFootnote || c == BlockCategory::EquationLabel;
}

/// Categories whose content is assembled from text spans.
inline constexpr bool is_text_like(BlockCategory c) {
  return c == BlockCategory::Title || c == BlockCategory::Text ||
         is_satellite(c) || is_discard(c);
}

struct Span {
  Rect rect;
  SpanKind kind = SpanKind::TextLineFragment;
  std::string content;
  double score = 1.0;

  friend bool operator==(const Span&, const Span&) = default;
};

/// Spans sharing a baseline band, sorted by x0.
struct Line {
  Rect rect;
  std::vector<Span> spans;

  friend bool operator==(const Line&, const Line&) = default;
};

struct TableMarkup {
  std::string html;
  std::string latex;

  friend bool operator==(const TableMarkup&, const TableMarkup&) = default;
};

struct Block {
  int id = 0;
  int page_index = 0;
  BlockCategory category = BlockCategory::Text;
  Rect rect;
  double score = 1.0;
  std::vector<Line> lines;
  std::optional<int> order_index;

  // Filled by content assembly.
  std::string text;
  std::optional<TableMarkup> table;
  std::string asset;         // cropped asset file name, empty when no raster
  std::optional<int> host_id;  // satellites: linked image/table/equation
  std::string equation_tag;  // equations: attached label text
  std::vector<int> merged_ids;  // continuation paragraphs folded into this one
  int region = -1;

  friend bool operator==(const Block&, const Block&) = default;
};

enum class BlockViolation : std::uint8_t {
  InvalidRect,
  SpanOutsideBlock,
  LineUnsorted,
  EmptyContent,
  ScoreOutOfRange,
};

inline constexpr std::string_view to_string(BlockViolation v) {
  switch (v) {
    case BlockViolation::InvalidRect: return "invalid-rect";
    case BlockViolation::SpanOutsideBlock: return "span-outside-block";
    case BlockViolation::LineUnsorted: return "line-unsorted";
    case BlockViolation::EmptyContent: return "empty-content";
    case BlockViolation::ScoreOutOfRange: return "score-out-of-range";
  }
  return "invalid-rect";
}

/// Reports each violated block invariant once. Empty when the block is well formed.
inline std::vector<BlockViolation> validate_block(const Block& b) {
  bool bad_rect = !b.rect.valid();
  bool outside = false, unsorted = false, empty = false, score = false;
  for (const auto& line : b.lines) {
    for (std::size_t i = 0; i < line.spans.size(); ++i) {
      const Span& s = line.spans[i];
      if (!s.rect.valid()) bad_rect = true;
      // interiors must overlap; edge contact does not count
      double ix = std::min(s.rect.x1, b.rect.x1) - std::max(s.rect.x0, b.rect.x0);
      double iy = std::min(s.rect.y1, b.rect.y1) - std::max(s.rect.y0, b.rect.y0);
      bool degenerate = s.rect.width() == 0.0 || s.rect.height() == 0.0;
      if (degenerate ? (ix < 0.0 || iy < 0.0) : (ix <= 0.0 || iy <= 0.0)) outside = true;
      if (i > 0 && line.spans[i - 1].rect.x0 > s.rect.x0) unsorted = true;
      if (s.content.empty()) empty = true;
      if (!(s.score >= 0.0 && s.score <= 1.0)) score = true;
    }
  }
  if (!(b.score >= 0.0 && b.score <= 1.0)) score = true;
  std::vector<BlockViolation> out;
  if (bad_rect) out.push_back(BlockViolation::InvalidRect);
  if (outside) out.push_back(BlockViolation::SpanOutsideBlock);
  if (unsorted) out.push_back(BlockViolation::LineUnsorted);
  if (empty) out.push_back(BlockViolation::EmptyContent);
  if (score) out.push_back(BlockViolation::ScoreOutOfRange);
  return out;
}

struct PageDims {
  double width = 0.0;
  double height = 0.0;
  friend bool operator==(const PageDims&, const PageDims&) = default;
};

struct DocMeta {
  int page_count = 0;
  std::vector<PageDims> page_dims;
  LangType language = LangType::Unknown;
  ParseType parse_type = ParseType::Txt;
  bool garbled = false;

  friend bool operator==(const DocMeta&, const DocMeta&) = default;
};

struct PageInfo {
  int page_idx = 0;
  PageDims page_size;
  std::vector<Block> para_blocks;

  friend bool operator==(const PageInfo&, const PageInfo&) = default;
};

struct IntermediateDoc {
  std::vector<PageInfo> pdf_info;
  ParseType parse_type = ParseType::Txt;
  std::string version_name{kVersion};

  friend bool operator==(const IntermediateDoc&, const IntermediateDoc&) = default;
};

}  // namespace docflow
