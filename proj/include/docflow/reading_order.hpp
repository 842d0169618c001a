// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Page segmentation into single-column regions by recursive XY-cut, and
// top-to-bottom, left-to-right ordering of regions and blocks.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "docflow/geometry.hpp"
#include "docflow/model.hpp"

namespace docflow {

struct OrderConfig {
  double gap_y = 8.0;   // minimum height of a horizontal whitespace band
  double gap_x = 12.0;  // minimum width of a vertical whitespace band
};

struct PageRegion {
  Rect rect;
  std::vector<int> member_block_ids;
  int column_count = 1;
  // Cut indices from the page root down to this region; lexicographic order
  // of paths is reading order.
  std::vector<int> path;

  friend bool operator==(const PageRegion&, const PageRegion&) = default;
};

/// Cut tree kept for diagnostics.
struct RegionNode {
  enum class Axis { Leaf, Horizontal, Vertical };
  Axis axis = Axis::Leaf;
  Rect rect;
  std::vector<double> cuts;  // y (horizontal) or x (vertical) cut positions
  std::vector<RegionNode> children;
  int region = -1;  // leaves: index into Segmentation::regions
};

struct Segmentation {
  std::vector<PageRegion> regions;
  RegionNode tree;
};

namespace detail {

struct Interval {
  double lo, hi;
  std::size_t index;
};

/// Groups items whose projections are separated by whitespace of at least
/// `min_gap`. Groups come out in ascending coordinate order; `cuts` receives
/// the midpoint of each separating gap.
inline std::vector<std::vector<std::size_t>> split_on_gaps(std::vector<Interval> iv, double min_gap,
                                                           std::vector<double>* cuts) {
  std::vector<std::vector<std::size_t>> groups;
  if (iv.empty()) return groups;
  std::stable_sort(iv.begin(), iv.end(),
                   [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double reach = iv.front().hi;
  groups.push_back({iv.front().index});
  for (std::size_t k = 1; k < iv.size(); ++k) {
    if (iv[k].lo - reach >= min_gap) {
      if (cuts) cuts->push_back(0.5 * (reach + iv[k].lo));
      groups.emplace_back();
    }
    groups.back().push_back(iv[k].index);
    reach = std::max(reach, iv[k].hi);
  }
  return groups;
}

class XyCutter {
 public:
  XyCutter(std::span<const Block> blocks, const OrderConfig& cfg) : blocks_(blocks), cfg_(cfg) {}

  Segmentation run(double page_w, double page_h) {
    Segmentation seg;
    std::vector<std::size_t> all(blocks_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    seg.tree.rect = Rect{0.0, 0.0, page_w, page_h};
    if (!all.empty()) cut(all, {}, seg.tree, seg.regions);
    return seg;
  }

 private:
  std::vector<Interval> project(const std::vector<std::size_t>& ids, bool on_y) const {
    std::vector<Interval> iv;
    for (std::size_t i : ids) {
      const Rect& r = blocks_[i].rect;
      iv.push_back(on_y ? Interval{r.y0, r.y1, i} : Interval{r.x0, r.x1, i});
    }
    return iv;
  }

  Rect bounds(const std::vector<std::size_t>& ids) const {
    Rect r = blocks_[ids.front()].rect;
    for (std::size_t i : ids) r = hull(r, blocks_[i].rect);
    return r;
  }

  void emit_region(const std::vector<std::size_t>& ids, std::vector<int> path, RegionNode& leaf,
                   std::vector<PageRegion>& out) const {
    PageRegion region;
    region.rect = bounds(ids);
    region.path = std::move(path);
    for (std::size_t i : ids) region.member_block_ids.push_back(blocks_[i].id);
    leaf.axis = RegionNode::Axis::Leaf;
    leaf.rect = region.rect;
    leaf.region = static_cast<int>(out.size());
    out.push_back(std::move(region));
  }

  std::size_t column_count(const std::vector<std::size_t>& ids) const {
    return split_on_gaps(project(ids, false), cfg_.gap_x, nullptr).size();
  }

  // Horizontal bands first; consecutive bands without a column split form a
  // single region. A band is joined to its predecessor when together they
  // keep the multi-column structure of either one (rows of columns that line
  // up, the tail of a longer column); joined bands are split into columns and
  // recursed.
  void cut(const std::vector<std::size_t>& ids, const std::vector<int>& path, RegionNode& node,
           std::vector<PageRegion>& out) const {
    node.rect = bounds(ids);
    node.axis = RegionNode::Axis::Horizontal;
    std::vector<double> hcuts;
    auto raw = split_on_gaps(project(ids, true), cfg_.gap_y, &hcuts);

    std::vector<std::vector<std::size_t>> bands;
    for (std::size_t b = 0; b < raw.size(); ++b) {
      if (!bands.empty()) {
        std::size_t prev = column_count(bands.back()), cur = column_count(raw[b]);
        std::size_t cols = std::max(prev, cur);
        if (cols > 1 && (prev == cur || prev == 1 || cur == 1)) {
          std::vector<std::size_t> joined = bands.back();
          joined.insert(joined.end(), raw[b].begin(), raw[b].end());
          if (column_count(joined) == cols) {
            bands.back() = std::move(joined);
            continue;
          }
        }
      }
      if (b > 0) node.cuts.push_back(hcuts[b - 1]);
      bands.push_back(raw[b]);
    }

    std::vector<std::size_t> run;
    std::vector<int> run_path;
    auto flush = [&] {
      if (run.empty()) return;
      node.children.emplace_back();
      emit_region(run, run_path, node.children.back(), out);
      run.clear();
    };
    for (std::size_t b = 0; b < bands.size(); ++b) {
      std::vector<double> vcuts;
      auto cols = split_on_gaps(project(bands[b], false), cfg_.gap_x, &vcuts);
      if (cols.size() == 1) {
        if (run.empty()) {
          run_path = path;
          run_path.push_back(static_cast<int>(b));
        }
        run.insert(run.end(), bands[b].begin(), bands[b].end());
        continue;
      }
      flush();
      RegionNode vnode;
      vnode.axis = RegionNode::Axis::Vertical;
      vnode.rect = bounds(bands[b]);
      vnode.cuts = std::move(vcuts);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        std::vector<int> sub = path;
        sub.push_back(static_cast<int>(b));
        sub.push_back(static_cast<int>(c));
        vnode.children.emplace_back();
        cut(cols[c], sub, vnode.children.back(), out);
      }
      node.children.push_back(std::move(vnode));
    }
    flush();
    // a node that produced exactly one region is that region
    if (node.children.size() == 1 && node.children.front().axis == RegionNode::Axis::Leaf) {
      RegionNode leaf = std::move(node.children.front());
      node = std::move(leaf);
    }
  }

  std::span<const Block> blocks_;
  OrderConfig cfg_;
};

}  // namespace detail

/// Full segmentation including the cut tree.
inline Segmentation segment_page_tree(std::span<const Block> blocks, double page_w, double page_h,
                                      const OrderConfig& cfg = {}) {
  return detail::XyCutter(blocks, cfg).run(page_w, page_h);
}

/// Splits a page into regions of at most one column each.
inline std::vector<PageRegion> segment_page(std::span<const Block> blocks, double page_w,
                                            double page_h, const OrderConfig& cfg = {}) {
  return segment_page_tree(blocks, page_w, page_h, cfg).regions;
}

/// Depth-first cut order: bands top to bottom, columns left to right.
inline std::vector<PageRegion> order_regions(std::vector<PageRegion> regions) {
  std::stable_sort(regions.begin(), regions.end(),
                   [](const PageRegion& a, const PageRegion& b) { return a.path < b.path; });
  return regions;
}

/// Assigns order_index 0..n-1. Region members are read by (y0, x0, id).
/// Blocks outside every region (deferred images and tables) go to the region
/// they overlap most, or the nearest one, ahead of the first member that
/// starts below them.
inline std::vector<Block> assign_order(std::span<const Block> blocks,
                                       std::span<const PageRegion> ordered_regions) {
  auto key = [](const Block& b) { return std::make_tuple(b.rect.y0, b.rect.x0, b.id); };
  std::map<int, std::size_t> by_id;
  for (std::size_t i = 0; i < blocks.size(); ++i) by_id.emplace(blocks[i].id, i);

  std::vector<std::vector<std::size_t>> members(ordered_regions.size());
  std::set<std::size_t> placed;
  for (std::size_t r = 0; r < ordered_regions.size(); ++r) {
    for (int id : ordered_regions[r].member_block_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end() || placed.count(it->second)) continue;
      members[r].push_back(it->second);
      placed.insert(it->second);
    }
    std::stable_sort(members[r].begin(), members[r].end(),
                     [&](std::size_t a, std::size_t b) { return key(blocks[a]) < key(blocks[b]); });
  }

  std::vector<std::size_t> floating;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (!placed.count(i)) floating.push_back(i);
  std::stable_sort(floating.begin(), floating.end(),
                   [&](std::size_t a, std::size_t b) { return key(blocks[a]) < key(blocks[b]); });

  // inserts[r][k]: floating blocks placed before member k of region r
  std::vector<std::vector<std::vector<std::size_t>>> inserts(ordered_regions.size());
  for (std::size_t r = 0; r < ordered_regions.size(); ++r) inserts[r].resize(members[r].size() + 1);
  std::vector<std::size_t> trailing;
  for (std::size_t f : floating) {
    const Rect& fr = blocks[f].rect;
    std::optional<std::size_t> target;
    double best_overlap = 0.0, best_dist = 0.0;
    for (std::size_t r = 0; r < ordered_regions.size(); ++r) {
      double ov = overlap_area(fr, ordered_regions[r].rect);
      if (ov > best_overlap) {
        best_overlap = ov;
        target = r;
      }
    }
    if (!target) {
      for (std::size_t r = 0; r < ordered_regions.size(); ++r) {
        double d = rect_distance(fr, ordered_regions[r].rect);
        if (!target || d < best_dist) {
          best_dist = d;
          target = r;
        }
      }
    }
    if (!target) {
      trailing.push_back(f);
      continue;
    }
    std::size_t slot = members[*target].size();
    for (std::size_t k = 0; k < members[*target].size(); ++k) {
      if (blocks[members[*target][k]].rect.y0 > fr.y0) {
        slot = k;
        break;
      }
    }
    inserts[*target][slot].push_back(f);
  }

  std::vector<Block> out;
  out.reserve(blocks.size());
  auto take = [&](std::size_t i, int region) {
    Block b = blocks[i];
    b.order_index = static_cast<int>(out.size());
    b.region = region;
    out.push_back(std::move(b));
  };
  for (std::size_t r = 0; r < ordered_regions.size(); ++r) {
    for (std::size_t k = 0; k <= members[r].size(); ++k) {
      for (std::size_t f : inserts[r][k]) take(f, static_cast<int>(r));
      if (k < members[r].size()) take(members[r][k], static_cast<int>(r));
    }
  }
  for (std::size_t f : trailing) take(f, -1);
  return out;
}

}  // namespace docflow
