// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end document processing: bundle -> metadata -> per-page block
// post-processing and ordering -> content assembly -> intermediate document.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "docflow/assembly.hpp"
#include "docflow/assets.hpp"
#include "docflow/emit.hpp"
#include "docflow/geometry.hpp"
#include "docflow/ingest.hpp"
#include "docflow/layout_post.hpp"
#include "docflow/model.hpp"
#include "docflow/reading_order.hpp"

namespace docflow {

struct EngineConfig {
  ClassifierConfig classify{};
  LayoutConfig layout{};
  OrderConfig order{};
  AssemblyConfig assembly{};
  std::optional<ParseType> force_mode;
  std::optional<LangType> force_lang;
  bool merge_across_pages = true;
  // A text span whose area lies at least this much inside formula holes is
  // formula glyph residue and is dropped.
  double hole_overlap_drop = 0.5;
  double default_line_height = 12.0;
  std::string version_name{kVersion};
};

struct PageTrace {
  int page_index = 0;
  ResolutionReport report;
  Segmentation segmentation;
  std::vector<Block> discarded;
  std::vector<std::string> diagnostics;
};

struct PipelineResult {
  DocMeta meta;
  IntermediateDoc doc;
  std::vector<PageTrace> pages;
};

namespace detail {

inline std::optional<std::size_t> best_overlap(const Rect& r, const std::vector<Block>& blocks,
                                               bool (*eligible)(const Block&)) {
  std::optional<std::size_t> best;
  double best_area = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!eligible(blocks[i])) continue;
    double a = overlap_area(r, blocks[i].rect);
    // zero-area spans count when their center lies inside
    if (a == 0.0 && area(r) == 0.0 && blocks[i].rect.contains(Rect{r.cx(), r.cy(), r.cx(), r.cy()}))
      a = 1e-12;
    if (a > best_area) {
      best_area = a;
      best = i;
    }
  }
  return best;
}

inline bool text_like_block(const Block& b) { return is_text_like(b.category); }

inline std::vector<Span> spans_of(const Block& b, bool formulas) {
  std::vector<Span> out;
  for (const auto& l : b.lines)
    for (const auto& s : l.spans)
      if ((s.kind == SpanKind::InlineFormula) == formulas) out.push_back(s);
  return out;
}

inline void set_raw_spans(Block& b, std::vector<Span> spans) {
  b.lines.clear();
  for (auto& s : spans) b.lines.push_back(Line{s.rect, {std::move(s)}});
}

inline void assemble(Block& b, const AssemblyConfig& cfg) {
  auto texts = spans_of(b, false), formulas = spans_of(b, true);
  b.lines = assemble_lines(texts, formulas, cfg);
  b.text = render_lines(b.lines);
}

}  // namespace detail

/// Category-labelled blocks of one page with their text spans attached.
/// Block ids continue from `next_id`.
inline std::vector<Block> build_page_blocks(const PageDigest& page, ParseType mode,
                                            const EngineConfig& cfg, int& next_id,
                                            std::vector<std::string>& diag) {
  std::vector<Block> blocks;
  std::vector<Span> formulas;
  for (const auto& d : page.detections) {
    if (area(d.rect) <= 0.0) {
      diag.push_back("dropped zero-area detection '" + d.label + "'");
      continue;
    }
    if (d.label == "inline_equation") {
      if (d.content.empty()) {
        diag.push_back("dropped inline formula without recognized content");
        continue;
      }
      formulas.push_back(Span{d.rect, SpanKind::InlineFormula, d.content, d.score});
      continue;
    }
    Block b;
    b.id = next_id++;
    b.page_index = page.page_index;
    b.category = *parse_block_category(d.label);
    b.rect = d.rect;
    b.score = d.score;
    if (b.category == BlockCategory::InterlineEquation) {
      if (d.content.empty()) {
        diag.push_back("dropped displayed formula " + std::to_string(b.id) +
                       " without recognized content");
        continue;
      }
      b.text = d.content;
      b.lines.push_back(Line{d.rect, {Span{d.rect, SpanKind::DisplayedFormula, d.content, d.score}}});
    }
    if (b.category == BlockCategory::Table)
      b.table = TableMarkup{d.html.value_or(""), d.latex.value_or(d.content)};
    blocks.push_back(std::move(b));
  }

  // overlapping inline formulas: the higher-scored one wins
  std::stable_sort(formulas.begin(), formulas.end(),
                   [](const Span& a, const Span& b) { return a.score > b.score; });
  std::vector<Span> accepted;
  for (auto& f : formulas) {
    bool clash = std::any_of(accepted.begin(), accepted.end(),
                             [&](const Span& a) { return intersect(a.rect, f.rect).has_value(); });
    if (clash)
      diag.push_back("dropped inline formula overlapping a higher-scored one");
    else
      accepted.push_back(std::move(f));
  }

  const std::vector<NativeSpan>* source = &page.native_spans;
  static const std::vector<NativeSpan> kNone;
  if (mode == ParseType::Ocr) {
    if (page.ocr_spans) {
      source = &*page.ocr_spans;
    } else {
      source = &kNone;
      diag.push_back("page parsed as ocr but carries no ocr_spans");
    }
  }

  std::vector<std::vector<Span>> texts(blocks.size()), fspans(blocks.size());
  std::size_t unplaced = 0;
  for (const auto& ns : *source) {
    if (unicode::normalize_space(ns.text).empty()) continue;
    auto owner = detail::best_overlap(ns.rect, blocks, detail::text_like_block);
    if (!owner) {
      ++unplaced;
      continue;
    }
    texts[*owner].push_back(Span{ns.rect, SpanKind::TextLineFragment, ns.text, 1.0});
  }
  for (auto& f : accepted) {
    auto owner = detail::best_overlap(f.rect, blocks, detail::text_like_block);
    if (owner) fspans[*owner].push_back(std::move(f));
  }
  if (unplaced) diag.push_back(std::to_string(unplaced) + " text span(s) outside every text block");

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!is_text_like(blocks[i].category)) continue;
    std::vector<Span> kept;
    if (!fspans[i].empty()) {
      MaskedRegion mask = mask_formulas(blocks[i], fspans[i]);
      for (auto& s : texts[i]) {
        double in_holes = 0.0;
        for (const auto& h : mask.holes) in_holes += overlap_area(s.rect, h);
        if (area(s.rect) > 0.0 && in_holes >= cfg.hole_overlap_drop * area(s.rect)) continue;
        kept.push_back(std::move(s));
      }
    } else {
      kept = std::move(texts[i]);
    }
    kept.insert(kept.end(), fspans[i].begin(), fspans[i].end());
    detail::set_raw_spans(blocks[i], std::move(kept));
  }
  return blocks;
}

/// Post-processes, orders and assembles one page. Returns blocks in reading
/// order (before cross-page paragraph merging).
inline std::vector<Block> process_page(const PageDigest& page, const DocMeta& meta,
                                       const std::string& source_id, const EngineConfig& cfg,
                                       int& next_id, PageTrace& trace) {
  trace.page_index = page.page_index;
  auto blocks = build_page_blocks(page, meta.parse_type, cfg, next_id, trace.diagnostics);

  auto split = filter_discard(blocks);
  for (auto& d : split.dropped) {
    detail::assemble(d, cfg.assembly);
    trace.report.removed.push_back({d.id, RemovalReason::DiscardCategory, std::nullopt});
    trace.discarded.push_back(std::move(d));
  }

  auto contained = remove_contained(split.kept, cfg.layout);
  trace.report.append(contained.report);
  // equation labels swallowed by their equation become its tag
  for (const auto& r : contained.report.removed) {
    if (r.reason != RemovalReason::ContainedInFormula || !r.container_id) continue;
    auto label = std::find_if(split.kept.begin(), split.kept.end(),
                              [&](const Block& b) { return b.id == r.id; });
    auto host = std::find_if(contained.blocks.begin(), contained.blocks.end(),
                             [&](const Block& b) { return b.id == *r.container_id; });
    if (label == split.kept.end() || host == contained.blocks.end() ||
        label->category != BlockCategory::EquationLabel || !host->equation_tag.empty())
      continue;
    Block copy = *label;
    detail::assemble(copy, cfg.assembly);
    host->equation_tag = copy.text;
  }

  auto resolved = resolve_overlaps(contained.blocks, cfg.layout);
  trace.report.append(resolved.report);
  std::vector<Block> kept = std::move(resolved.blocks);

  // Spans follow the final rects: each goes to the text block it overlaps most.
  // Absorbed blocks hand their spans to whichever survivor overlaps them.
  std::vector<std::vector<Span>> pool(kept.size());
  for (const auto& src : contained.blocks) {
    if (!is_text_like(src.category)) continue;
    for (const auto& line : src.lines) {
      for (const auto& s : line.spans) {
        auto owner = detail::best_overlap(s.rect, kept, detail::text_like_block);
        if (!owner) {
          double best = 0.0;
          for (std::size_t j = 0; j < kept.size(); ++j) {
            if (!is_text_like(kept[j].category)) continue;
            double d = rect_distance(s.rect, kept[j].rect) +
                       (kept[j].id == src.id ? 0.0 : 1e-9);  // prefer the original owner
            if (!owner || d < best) {
              best = d;
              owner = j;
            }
          }
        }
        if (owner) pool[*owner].push_back(s);
      }
    }
  }
  std::vector<Block> assembled;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    Block& b = kept[i];
    if (is_text_like(b.category)) {
      detail::set_raw_spans(b, std::move(pool[i]));
      detail::assemble(b, cfg.assembly);
      if (b.text.empty()) {
        trace.diagnostics.push_back("dropped " + std::string(to_string(b.category)) + " block " +
                                    std::to_string(b.id) + " with no text");
        continue;
      }
    }
    assembled.push_back(std::move(b));
  }

  std::vector<Block> active;
  for (const auto& b : assembled)
    if (!trace.report.is_deferred(b.id)) active.push_back(b);
  trace.segmentation = segment_page_tree(active, page.width, page.height, cfg.order);
  auto regions = order_regions(trace.segmentation.regions);
  auto ordered = assign_order(assembled, regions);

  if (meta.language == LangType::Unknown) {
    std::size_t text_blocks = 0, tall = 0;
    for (const auto& b : ordered) {
      if (!is_text_like(b.category)) continue;
      ++text_blocks;
      if (b.rect.height() > 3.0 * b.rect.width()) ++tall;
    }
    if (text_blocks >= 2 && 2 * tall > text_blocks)
      trace.diagnostics.push_back(
          "text blocks look vertically typeset; vertical reading order is not supported");
  }

  for (auto& b : ordered) {
    if (!is_visual(b.category)) continue;
    std::string name = asset_name(source_id, page.page_index, *b.order_index);
    if (page.page_raster_ref) b.asset = name;
    SpanKind kind = b.category == BlockCategory::Image ? SpanKind::ImageRegion : SpanKind::TableRegion;
    b.lines = {Line{b.rect, {Span{b.rect, kind, name, b.score}}}};
  }

  double line_h = median_line_height(ordered);
  if (line_h <= 0.0) line_h = cfg.default_line_height;
  auto attached = attach_satellites(std::move(ordered), 2.0 * line_h);
  for (int id : attached.orphans)
    trace.diagnostics.push_back("orphan satellite block " + std::to_string(id));
  for (const auto& b : attached.blocks)
    if (b.table && !(b.table->html.empty() && b.table->latex.empty()) &&
        !((b.table->html.empty() || table_markup_balanced(b.table->html, TableFormat::Html)) &&
          (b.table->latex.empty() || table_markup_balanced(b.table->latex, TableFormat::Latex))))
      trace.diagnostics.push_back("table block " + std::to_string(b.id) +
                                  " has unbalanced markup");
  return std::move(attached.blocks);
}

inline PipelineResult run_pipeline(const DocumentBundle& bundle, const EngineConfig& cfg = {}) {
  PipelineResult result;
  result.meta = extract_meta(bundle, cfg.classify);
  if (cfg.force_mode) result.meta.parse_type = *cfg.force_mode;
  if (cfg.force_lang) result.meta.language = *cfg.force_lang;

  int next_id = 0;
  std::vector<Block> all;
  for (const auto& page : bundle.pages) {
    PageTrace trace;
    auto blocks = process_page(page, result.meta, bundle.source_id, cfg, next_id, trace);
    all.insert(all.end(), std::make_move_iterator(blocks.begin()),
               std::make_move_iterator(blocks.end()));
    result.pages.push_back(std::move(trace));
  }
  all = merge_paragraphs(std::move(all), cfg.merge_across_pages);

  std::vector<std::vector<Block>> pages(bundle.pages.size());
  for (auto& b : all) pages[b.page_index].push_back(std::move(b));
  result.doc = build_intermediate(result.meta, pages, cfg.version_name);
  return result;
}

inline nlohmann::ordered_json region_tree_json(const RegionNode& n) {
  nlohmann::ordered_json j;
  static constexpr const char* kAxis[] = {"leaf", "horizontal", "vertical"};
  j["axis"] = kAxis[static_cast<int>(n.axis)];
  j["bbox"] = {n.rect.x0, n.rect.y0, n.rect.x1, n.rect.y1};
  if (n.axis == RegionNode::Axis::Leaf) {
    j["region"] = n.region;
  } else {
    j["cuts"] = n.cuts;
    j["children"] = nlohmann::ordered_json::array();
    for (const auto& c : n.children) j["children"].push_back(region_tree_json(c));
  }
  return j;
}

inline nlohmann::ordered_json report_json(const ResolutionReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["removed"] = ordered_json::array();
  for (const auto& x : r.removed) {
    ordered_json e{{"id", x.id}, {"reason", std::string(to_string(x.reason))}};
    if (x.container_id) e["container_id"] = *x.container_id;
    j["removed"].push_back(std::move(e));
  }
  j["shrunk"] = ordered_json::array();
  for (const auto& s : r.shrunk)
    j["shrunk"].push_back({{"id", s.id},
                           {"old", {s.old_rect.x0, s.old_rect.y0, s.old_rect.x1, s.old_rect.y1}},
                           {"new", {s.new_rect.x0, s.new_rect.y0, s.new_rect.x1, s.new_rect.y1}}});
  j["deferred"] = r.deferred;
  return j;
}

/// Region trees, resolution reports and diagnostics for every page.
inline std::string debug_dump(const PipelineResult& r) {
  using nlohmann::ordered_json;
  ordered_json root;
  root["pages"] = ordered_json::array();
  for (const auto& p : r.pages) {
    ordered_json jp;
    jp["page_idx"] = p.page_index;
    jp["region_tree"] = region_tree_json(p.segmentation.tree);
    jp["regions"] = ordered_json::array();
    for (const auto& reg : p.segmentation.regions)
      jp["regions"].push_back({{"bbox", {reg.rect.x0, reg.rect.y0, reg.rect.x1, reg.rect.y1}},
                               {"members", reg.member_block_ids},
                               {"path", reg.path}});
    jp["resolution"] = report_json(p.report);
    jp["diagnostics"] = p.diagnostics;
    root["pages"].push_back(std::move(jp));
  }
  return root.dump(2) + "\n";
}

/// Intermediate document plus document metadata and discarded blocks.
inline std::string intermediate_dump(const PipelineResult& r) {
  using nlohmann::ordered_json;
  ordered_json root = intermediate_to_json(r.doc);
  ordered_json meta;
  meta["page_count"] = r.meta.page_count;
  meta["page_dims"] = ordered_json::array();
  for (const auto& d : r.meta.page_dims) meta["page_dims"].push_back({d.width, d.height});
  meta["language"] = std::string(to_string(r.meta.language));
  meta["parse_type"] = std::string(to_string(r.meta.parse_type));
  meta["garbled"] = r.meta.garbled;
  root["doc_meta"] = std::move(meta);
  ordered_json discarded = ordered_json::array();
  for (const auto& p : r.pages)
    for (const auto& b : p.discarded) discarded.push_back(detail::block_to_json(b));
  root["discarded_blocks"] = std::move(discarded);
  return root.dump(2) + "\n";
}

}  // namespace docflow
