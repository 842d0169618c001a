// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Block content assembly: inline formula masking, grouping spans into lines
// with formulas reinserted, rule-based paragraph merging across columns and
// pages, and linking captions/labels to their host blocks.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docflow/geometry.hpp"
#include "docflow/model.hpp"
#include "docflow/unicode.hpp"

namespace docflow {

struct MaskedRegion {
  int parent_block_id = 0;
  std::vector<Rect> holes;
  std::vector<Rect> remnants;
};

/// Cuts formula areas out of a block. The remainder is decomposed into
/// horizontal bands at hole edges; inside each band the hole intervals are
/// subtracted. Formula rects are expected not to overlap one another.
inline MaskedRegion mask_formulas(const Block& block, std::span<const Span> formulas) {
  MaskedRegion out;
  out.parent_block_id = block.id;
  const Rect& br = block.rect;
  for (const auto& f : formulas)
    if (auto h = intersect(f.rect, br)) out.holes.push_back(*h);

  std::vector<double> ys{br.y0, br.y1};
  for (const auto& h : out.holes) ys.insert(ys.end(), {h.y0, h.y1});
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
    double top = ys[k], bottom = ys[k + 1];
    if (bottom <= top) continue;
    std::vector<std::pair<double, double>> cut;
    for (const auto& h : out.holes)
      if (h.y0 < bottom && h.y1 > top) cut.emplace_back(h.x0, h.x1);
    std::sort(cut.begin(), cut.end());
    double x = br.x0;
    for (const auto& [lo, hi] : cut) {
      if (lo > x) out.remnants.push_back({x, top, lo, bottom});
      x = std::max(x, hi);
    }
    if (x < br.x1) out.remnants.push_back({x, top, br.x1, bottom});
  }
  // merge vertically adjacent full-width bands back together
  std::vector<Rect> merged;
  for (const auto& r : out.remnants) {
    if (!merged.empty()) {
      Rect& last = merged.back();
      if (last.x0 == r.x0 && last.x1 == r.x1 && last.y1 == r.y0 && r.x0 == br.x0 &&
          r.x1 == br.x1) {
        last.y1 = r.y1;
        continue;
      }
    }
    merged.push_back(r);
  }
  out.remnants = std::move(merged);
  return out;
}

struct AssemblyConfig {
  double line_center_factor = 0.5;  // same line when center gap <= factor * median height
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline bool is_hyphen(char32_t c) { return c == '-' || c == 0x2010 || c == 0xAD; }

inline bool is_terminal_punct(char32_t c) {
  switch (c) {
    case '.': case 0x3002: case '!': case 0xFF01: case '?': case 0xFF1F: case ':': case 0xFF1A:
      return true;
    default:
      return false;
  }
}

/// Joins two fragments: no separator when either side already has whitespace
/// at the seam, the seam is between CJK characters, or closing punctuation
/// follows a formula; one space otherwise.
inline std::string join_fragments(std::string_view a, std::string_view b, bool formula_seam) {
  if (a.empty()) return std::string(b);
  if (b.empty()) return std::string(a);
  auto ca = unicode::decode(a), cb = unicode::decode(b);
  bool ws = unicode::is_whitespace(ca.back()) || unicode::is_whitespace(cb.front());
  bool cjk = unicode::is_cjk(ca.back()) || unicode::is_cjk(cb.front());
  bool closes = formula_seam && std::u32string_view(U".,;:!?)").find(cb.front()) != std::u32string_view::npos;
  std::string out(a);
  if (!ws && !closes && (formula_seam || !cjk)) out += ' ';
  out += b;
  return out;
}

inline std::string span_text(const Span& s) {
  return s.kind == SpanKind::InlineFormula ? "$" + s.content + "$" : s.content;
}

}  // namespace detail

/// Groups the spans of one block into lines. A span joins the current line
/// when its vertical center is within factor * median span height of the
/// line's mean center. Lines run top to bottom, spans left to right.
inline std::vector<Line> assemble_lines(std::span<const Span> text_spans,
                                        std::span<const Span> formula_spans,
                                        const AssemblyConfig& cfg = {}) {
  std::vector<Span> all(text_spans.begin(), text_spans.end());
  all.insert(all.end(), formula_spans.begin(), formula_spans.end());
  if (all.empty()) return {};
  std::vector<double> heights;
  for (const auto& s : all) heights.push_back(s.rect.height());
  const double tol = cfg.line_center_factor * detail::median(heights);

  std::stable_sort(all.begin(), all.end(), [](const Span& a, const Span& b) {
    return a.rect.cy() != b.rect.cy() ? a.rect.cy() < b.rect.cy() : a.rect.x0 < b.rect.x0;
  });

  std::vector<Line> lines;
  double sum_cy = 0.0;
  for (auto& s : all) {
    if (!lines.empty()) {
      double mean = sum_cy / static_cast<double>(lines.back().spans.size());
      if (std::abs(s.rect.cy() - mean) <= tol) {
        sum_cy += s.rect.cy();
        lines.back().rect = hull(lines.back().rect, s.rect);
        lines.back().spans.push_back(std::move(s));
        continue;
      }
    }
    sum_cy = s.rect.cy();
    lines.push_back(Line{s.rect, {std::move(s)}});
  }
  for (auto& line : lines)
    std::stable_sort(line.spans.begin(), line.spans.end(),
                     [](const Span& a, const Span& b) { return a.rect.x0 < b.rect.x0; });
  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return a.rect.cy() < b.rect.cy(); });
  return lines;
}

/// One line as text with inline formulas wrapped in `$`.
inline std::string render_line(const Line& line) {
  std::string out;
  bool prev_formula = false;
  for (const auto& s : line.spans) {
    bool formula = s.kind == SpanKind::InlineFormula;
    out = detail::join_fragments(out, detail::span_text(s), formula || prev_formula);
    prev_formula = formula;
  }
  return unicode::normalize_space(out);
}

/// Concatenates two pieces of running text at a paragraph or line seam: a
/// trailing hyphen before a lowercase continuation is dropped and the words
/// fused; CJK seams take no space; everything else takes one space.
inline std::string join_running_text(std::string_view a, std::string_view b) {
  std::string left = unicode::normalize_space(a);
  std::string right = unicode::normalize_space(b);
  if (left.empty()) return right;
  if (right.empty()) return left;
  char32_t tail = unicode::last_char(left), head = unicode::first_char(right);
  if (detail::is_hyphen(tail) && unicode::is_lower_latin(head)) {
    auto cps = unicode::decode(left);
    cps.pop_back();
    std::string trimmed;
    for (char32_t c : cps) unicode::append_utf8(trimmed, c);
    return trimmed + right;
  }
  return detail::join_fragments(left, right, false);
}

/// Block text from its lines, lines joined as running text.
inline std::string render_lines(std::span<const Line> lines) {
  std::string out;
  for (const auto& line : lines) out = join_running_text(out, render_line(line));
  return out;
}

/// Merge rule for two consecutive Text blocks.
inline bool should_merge(const Block& a, const Block& b, bool across_pages) {
  if (a.category != BlockCategory::Text || b.category != BlockCategory::Text) return false;
  if (a.page_index != b.page_index && (!across_pages || b.page_index != a.page_index + 1))
    return false;
  char32_t tail = unicode::last_char(a.text), head = unicode::first_char(b.text);
  if (tail == 0 || head == 0) return false;
  bool open_end = detail::is_hyphen(tail) || !detail::is_terminal_punct(tail);
  bool continuation = unicode::is_lower_latin(head) ||
                      (unicode::is_cjk_ideograph(head) && !unicode::is_opening_punct(head));
  return open_end && continuation;
}

/// Folds continuation paragraphs into their predecessor. Input and output are
/// in reading order; a merged block keeps the first block's geometry and
/// records the absorbed ids.
inline std::vector<Block> merge_paragraphs(std::vector<Block> ordered, bool across_pages) {
  std::vector<Block> out;
  out.reserve(ordered.size());
  for (auto& b : ordered) {
    if (!out.empty() && should_merge(out.back(), b, across_pages)) {
      Block& a = out.back();
      a.text = join_running_text(a.text, b.text);
      a.merged_ids.push_back(b.id);
      a.merged_ids.insert(a.merged_ids.end(), b.merged_ids.begin(), b.merged_ids.end());
      continue;
    }
    out.push_back(std::move(b));
  }
  return out;
}

inline std::optional<BlockCategory> host_category(BlockCategory satellite) {
  switch (satellite) {
    case BlockCategory::ImageCaption: return BlockCategory::Image;
    case BlockCategory::TableCaption:
    case BlockCategory::TableFootnote: return BlockCategory::Table;
    case BlockCategory::EquationLabel: return BlockCategory::InterlineEquation;
    default: return std::nullopt;
  }
}

/// Median height over all lines of the given blocks, 0 when there are none.
inline double median_line_height(std::span<const Block> blocks) {
  std::vector<double> h;
  for (const auto& b : blocks)
    for (const auto& l : b.lines)
      if (l.rect.height() > 0.0) h.push_back(l.rect.height());
  return detail::median(std::move(h));
}

struct AttachResult {
  std::vector<Block> blocks;
  std::vector<int> orphans;
};

/// Links each caption, footnote and equation label to the nearest host of
/// the matching kind in the same page region, within `max_dist`. Equal
/// distances prefer a host above image captions and table footnotes and a
/// host below table captions. Block order is not changed.
inline AttachResult attach_satellites(std::vector<Block> ordered, double max_dist) {
  AttachResult out;
  for (auto& s : ordered) {
    auto want = host_category(s.category);
    if (!want) continue;
    std::optional<std::size_t> best;
    double best_d = 0.0;
    int best_pref = 0;
    for (std::size_t h = 0; h < ordered.size(); ++h) {
      const Block& host = ordered[h];
      if (host.category != *want || host.page_index != s.page_index || host.region != s.region)
        continue;
      double d = rect_distance(s.rect, host.rect);
      if (d > max_dist) continue;
      bool above = host.rect.cy() < s.rect.cy();
      int pref = 0;
      if (s.category == BlockCategory::ImageCaption || s.category == BlockCategory::TableFootnote)
        pref = above ? 1 : 0;
      else if (s.category == BlockCategory::TableCaption)
        pref = above ? 0 : 1;
      constexpr double kTie = 1e-9;
      if (!best || d < best_d - kTie || (std::abs(d - best_d) <= kTie && pref > best_pref)) {
        best = h;
        best_d = d;
        best_pref = pref;
      }
    }
    if (best)
      s.host_id = ordered[*best].id;
    else
      out.orphans.push_back(s.id);
  }
  out.blocks = std::move(ordered);
  return out;
}

/// "(3.1)" -> "3.1"
inline std::string equation_tag_text(std::string_view label) {
  std::string t = unicode::normalize_space(label);
  while (!t.empty() && (t.front() == '(' || t.front() == '[')) t.erase(t.begin());
  while (!t.empty() && (t.back() == ')' || t.back() == ']')) t.pop_back();
  return unicode::normalize_space(t);
}

}  // namespace docflow
