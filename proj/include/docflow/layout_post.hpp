// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Block-level post-processing of one page: drop discard categories, remove
// boxes swallowed by images, tables and displayed formulas, then resolve the
// remaining partial overlaps so that no two kept boxes cover each other.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "docflow/geometry.hpp"
#include "docflow/model.hpp"

namespace docflow {

enum class RemovalReason {
  ContainedInImage,
  ContainedInTable,
  ContainedInFormula,
  DiscardCategory,
  AbsorbedByOverlap,
};

inline constexpr std::string_view to_string(RemovalReason r) {
  switch (r) {
    case RemovalReason::ContainedInImage: return "contained-in-image";
    case RemovalReason::ContainedInTable: return "contained-in-table";
    case RemovalReason::ContainedInFormula: return "contained-in-formula";
    case RemovalReason::DiscardCategory: return "discard-category";
    case RemovalReason::AbsorbedByOverlap: return "absorbed-by-overlap";
  }
  return "discard-category";
}

struct Removal {
  int id = 0;
  RemovalReason reason = RemovalReason::DiscardCategory;
  std::optional<int> container_id;
  friend bool operator==(const Removal&, const Removal&) = default;
};

struct ShrinkRecord {
  int id = 0;
  Rect old_rect;
  Rect new_rect;
  friend bool operator==(const ShrinkRecord&, const ShrinkRecord&) = default;
};

struct ResolutionReport {
  std::vector<Removal> removed;
  std::vector<ShrinkRecord> shrunk;
  std::vector<int> deferred;

  bool empty() const { return removed.empty() && shrunk.empty() && deferred.empty(); }

  bool is_deferred(int id) const {
    return std::find(deferred.begin(), deferred.end(), id) != deferred.end();
  }

  void append(const ResolutionReport& o) {
    removed.insert(removed.end(), o.removed.begin(), o.removed.end());
    shrunk.insert(shrunk.end(), o.shrunk.begin(), o.shrunk.end());
    deferred.insert(deferred.end(), o.deferred.begin(), o.deferred.end());
  }

  friend bool operator==(const ResolutionReport&, const ResolutionReport&) = default;
};

struct LayoutConfig {
  double containment_threshold = 0.8;
  double overlap_epsilon = 0.001;
  ShrinkOptions shrink{};
};

struct DiscardSplit {
  std::vector<Block> kept;
  std::vector<Block> dropped;
};

inline DiscardSplit filter_discard(std::span<const Block> blocks) {
  DiscardSplit out;
  for (const auto& b : blocks) (is_discard(b.category) ? out.dropped : out.kept).push_back(b);
  return out;
}

struct LayoutResult {
  std::vector<Block> blocks;
  ResolutionReport report;
};

/// Removes text and displayed formulas engulfed by an image or table, and any
/// box engulfed by a displayed formula. Captions and footnotes are exempt.
/// Smaller boxes are examined first so that of two near-identical boxes only
/// one is removed.
inline LayoutResult remove_contained(std::span<const Block> blocks, const LayoutConfig& cfg = {}) {
  std::vector<std::size_t> order(blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double aa = area(blocks[a].rect), ab = area(blocks[b].rect);
    return aa != ab ? aa < ab : blocks[a].id < blocks[b].id;
  });

  std::vector<bool> removed(blocks.size(), false);
  LayoutResult out;
  for (std::size_t i : order) {
    const Block& inner = blocks[i];
    if (inner.category == BlockCategory::ImageCaption ||
        inner.category == BlockCategory::TableCaption ||
        inner.category == BlockCategory::TableFootnote || area(inner.rect) <= 0.0)
      continue;
    bool swallowable_by_visual = inner.category == BlockCategory::Text ||
                                 inner.category == BlockCategory::InterlineEquation;
    std::optional<Removal> hit;
    for (std::size_t j = 0; j < blocks.size() && !hit; ++j) {
      const Block& outer = blocks[j];
      if (j == i || removed[j] || !swallowable_by_visual || !is_visual(outer.category)) continue;
      if (containment_ratio(inner.rect, outer.rect) >= cfg.containment_threshold)
        hit = Removal{inner.id,
                      outer.category == BlockCategory::Image ? RemovalReason::ContainedInImage
                                                             : RemovalReason::ContainedInTable,
                      outer.id};
    }
    for (std::size_t j = 0; j < blocks.size() && !hit; ++j) {
      const Block& outer = blocks[j];
      if (j == i || removed[j] || outer.category != BlockCategory::InterlineEquation) continue;
      if (containment_ratio(inner.rect, outer.rect) >= cfg.containment_threshold)
        hit = Removal{inner.id, RemovalReason::ContainedInFormula, outer.id};
    }
    if (hit) {
      removed[i] = true;
      out.report.removed.push_back(*hit);
    }
  }
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (!removed[i]) out.blocks.push_back(blocks[i]);
  return out;
}

namespace detail {

inline std::optional<Rect> span_hull(const Block& b) {
  std::optional<Rect> h;
  for (const auto& line : b.lines)
    for (const auto& s : line.spans) h = h ? hull(*h, s.rect) : s.rect;
  if (!h) return std::nullopt;
  return intersect(*h, b.rect);
}

/// Largest piece of `r` lying outside `other`; top and bottom bands first.
inline Rect largest_strip_outside(const Rect& r, const Rect& other) {
  Rect best{r.x0, r.y0, r.x0, r.y0};
  auto consider = [&](Rect s) {
    if (s.valid() && area(s) > area(best)) best = s;
  };
  if (other.y0 > r.y0) consider({r.x0, r.y0, r.x1, std::min(r.y1, other.y0)});
  if (other.y1 < r.y1) consider({r.x0, std::max(r.y0, other.y1), r.x1, r.y1});
  if (other.x0 > r.x0) consider({r.x0, r.y0, std::min(r.x1, other.x0), r.y1});
  if (other.x1 < r.x1) consider({std::max(r.x0, other.x1), r.y0, r.x1, r.y1});
  return best;
}

inline auto order_key(const Block& b) {
  return std::make_tuple(b.page_index, b.rect.y0, b.rect.x0, b.id);
}

}  // namespace detail

/// Makes the kept boxes of a page mutually non-overlapping. Text-like pairs
/// are shrunk apart; an image or table overlapping text is deferred; of two
/// overlapping images/tables the lower-confidence one is deferred. Pairs are
/// handled worst overlap first until no active pair exceeds the epsilon IoU.
inline LayoutResult resolve_overlaps(std::span<const Block> input, const LayoutConfig& cfg = {}) {
  std::vector<Block> blocks(input.begin(), input.end());
  const std::size_t n = blocks.size();
  std::vector<bool> inactive(n, false);
  std::vector<bool> absorbed(n, false);
  std::map<std::size_t, Rect> original;
  LayoutResult out;

  auto set_rect = [&](std::size_t i, const Rect& r) {
    if (r == blocks[i].rect) return;
    original.emplace(i, blocks[i].rect);
    blocks[i].rect = r;
  };
  // lower confidence loses; ties go against the later box in reading order
  auto loser = [&](std::size_t a, std::size_t b) {
    if (blocks[a].score != blocks[b].score) return blocks[a].score < blocks[b].score ? a : b;
    return detail::order_key(blocks[a]) > detail::order_key(blocks[b]) ? a : b;
  };

  // Overlap area never grows, so only initially intersecting pairs matter.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (intersect(blocks[i].rect, blocks[j].rect)) {
        bool i_first = detail::order_key(blocks[i]) <= detail::order_key(blocks[j]);
        pairs.emplace_back(i_first ? i : j, i_first ? j : i);
      }

  while (true) {
    std::optional<std::size_t> worst;
    double worst_area = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto [i, j] = pairs[k];
      if (inactive[i] || inactive[j]) continue;
      double inter = overlap_area(blocks[i].rect, blocks[j].rect);
      if (inter <= 0.0 || iou_or_zero(blocks[i].rect, blocks[j].rect) <= cfg.overlap_epsilon)
        continue;
      if (!worst || inter > worst_area ||
          (inter == worst_area &&
           std::make_tuple(detail::order_key(blocks[i]), detail::order_key(blocks[j])) <
               std::make_tuple(detail::order_key(blocks[pairs[*worst].first]),
                               detail::order_key(blocks[pairs[*worst].second])))) {
        worst = k;
        worst_area = inter;
      }
    }
    if (!worst) break;
    auto [i, j] = pairs[*worst];
    bool vi = is_visual(blocks[i].category), vj = is_visual(blocks[j].category);

    if (vi || vj) {
      std::size_t d = vi && vj ? loser(i, j) : (vi ? i : j);
      inactive[d] = true;
      out.report.deferred.push_back(blocks[d].id);
      continue;
    }

    ShrinkResult r = shrink_to_avoid(blocks[i].rect, blocks[j].rect, cfg.shrink);
    if (r.status == ShrinkStatus::Ok) {
      set_rect(i, r.a);
      set_rect(j, r.b);
      continue;
    }
    std::size_t l = loser(i, j), h = l == i ? j : i;
    if (auto sh = detail::span_hull(blocks[l]); sh && area(*sh) > 0.0) set_rect(l, *sh);
    if (intersect(blocks[l].rect, blocks[h].rect)) {
      Rect strip = detail::largest_strip_outside(blocks[l].rect, blocks[h].rect);
      if (area(strip) > 0.0) {
        set_rect(l, strip);
      } else {
        inactive[l] = absorbed[l] = true;
        out.report.removed.push_back({blocks[l].id, RemovalReason::AbsorbedByOverlap, blocks[h].id});
      }
    }
  }

  for (const auto& [i, old] : original)
    if (!absorbed[i]) out.report.shrunk.push_back({blocks[i].id, old, blocks[i].rect});
  std::sort(out.report.shrunk.begin(), out.report.shrunk.end(),
            [](const ShrinkRecord& a, const ShrinkRecord& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < n; ++i)
    if (!absorbed[i]) out.blocks.push_back(std::move(blocks[i]));
  return out;
}

}  // namespace docflow
