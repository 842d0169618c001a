// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Intermediate document construction and the output renderers derived from
// it: canonical structured JSON and Markdown.

#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "docflow/assembly.hpp"
#include "docflow/model.hpp"

namespace docflow {

enum class OutputFormat { Markdown, Structured, Both };
enum class TableFormat { Html, Latex };

struct EmitConfig {
  OutputFormat output_format = OutputFormat::Markdown;
  bool dump_intermediate = false;
  std::string asset_dir;
  // Prefix placed before asset file names in Markdown image links.
  std::string asset_link_prefix;
  TableFormat table_format = TableFormat::Html;
  bool debug = false;
};

/// Per-page blocks in reading order, discard categories removed.
inline IntermediateDoc build_intermediate(const DocMeta& meta,
                                          std::span<const std::vector<Block>> pages,
                                          std::string version) {
  IntermediateDoc doc;
  doc.parse_type = meta.parse_type;
  doc.version_name = std::move(version);
  for (std::size_t p = 0; p < pages.size(); ++p) {
    PageInfo info;
    info.page_idx = static_cast<int>(p);
    if (p < meta.page_dims.size()) info.page_size = meta.page_dims[p];
    for (const auto& b : pages[p])
      if (!is_discard(b.category)) info.para_blocks.push_back(b);
    std::stable_sort(info.para_blocks.begin(), info.para_blocks.end(),
                     [](const Block& a, const Block& b) {
                       return a.order_index.value_or(0) < b.order_index.value_or(0);
                     });
    doc.pdf_info.push_back(std::move(info));
  }
  return doc;
}

class StructuredError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson rect_to_json(const Rect& r) { return ojson::array({r.x0, r.y0, r.x1, r.y1}); }

inline Rect rect_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 4) throw StructuredError("bbox must hold 4 numbers");
  return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline ojson block_to_json(const Block& b) {
  ojson j = ojson::object();
  j["type"] = std::string(to_string(b.category));
  j["id"] = b.id;
  if (b.order_index) j["index"] = *b.order_index;
  j["bbox"] = rect_to_json(b.rect);
  j["score"] = b.score;
  j["region"] = b.region;
  j["text"] = b.text;
  ojson lines = ojson::array();
  for (const auto& l : b.lines) {
    ojson jl = ojson::object();
    jl["bbox"] = rect_to_json(l.rect);
    jl["spans"] = ojson::array();
    for (const auto& s : l.spans) {
      ojson js = ojson::object();
      js["bbox"] = rect_to_json(s.rect);
      js["type"] = std::string(to_string(s.kind));
      js["content"] = s.content;
      js["score"] = s.score;
      jl["spans"].push_back(std::move(js));
    }
    lines.push_back(std::move(jl));
  }
  j["lines"] = std::move(lines);
  if (b.table) j["table"] = ojson{{"html", b.table->html}, {"latex", b.table->latex}};
  if (!b.asset.empty()) j["asset"] = b.asset;
  if (b.host_id) j["host_id"] = *b.host_id;
  if (!b.equation_tag.empty()) j["equation_tag"] = b.equation_tag;
  if (!b.merged_ids.empty()) j["merged_ids"] = b.merged_ids;
  return j;
}

inline Block block_from_json(const ojson& j, int page_index) {
  Block b;
  b.page_index = page_index;
  auto cat = parse_block_category(j.at("type").get<std::string>());
  if (!cat) throw StructuredError("unknown block type");
  b.category = *cat;
  b.id = j.at("id").get<int>();
  if (j.contains("index")) b.order_index = j["index"].get<int>();
  b.rect = rect_from_json(j.at("bbox"));
  b.score = j.at("score").get<double>();
  b.region = j.at("region").get<int>();
  b.text = j.at("text").get<std::string>();
  for (const auto& jl : j.at("lines")) {
    Line l;
    l.rect = rect_from_json(jl.at("bbox"));
    for (const auto& js : jl.at("spans")) {
      auto kind = parse_span_kind(js.at("type").get<std::string>());
      if (!kind) throw StructuredError("unknown span type");
      l.spans.push_back(Span{rect_from_json(js.at("bbox")), *kind,
                             js.at("content").get<std::string>(), js.at("score").get<double>()});
    }
    b.lines.push_back(std::move(l));
  }
  if (j.contains("table"))
    b.table = TableMarkup{j["table"].at("html").get<std::string>(),
                          j["table"].at("latex").get<std::string>()};
  if (j.contains("asset")) b.asset = j["asset"].get<std::string>();
  if (j.contains("host_id")) b.host_id = j["host_id"].get<int>();
  if (j.contains("equation_tag")) b.equation_tag = j["equation_tag"].get<std::string>();
  if (j.contains("merged_ids")) b.merged_ids = j["merged_ids"].get<std::vector<int>>();
  return b;
}

}  // namespace detail

inline nlohmann::ordered_json intermediate_to_json(const IntermediateDoc& doc) {
  using detail::ojson;
  ojson root = ojson::object();
  ojson pages = ojson::array();
  for (const auto& p : doc.pdf_info) {
    ojson jp = ojson::object();
    jp["page_idx"] = p.page_idx;
    jp["page_size"] = ojson::array({p.page_size.width, p.page_size.height});
    jp["para_blocks"] = ojson::array();
    for (const auto& b : p.para_blocks) jp["para_blocks"].push_back(detail::block_to_json(b));
    pages.push_back(std::move(jp));
  }
  root["pdf_info"] = std::move(pages);
  root["_parse_type"] = std::string(to_string(doc.parse_type));
  root["_version_name"] = doc.version_name;
  return root;
}

/// Canonical serialization: fixed key order, two-space indent, trailing newline.
inline std::string to_structured(const IntermediateDoc& doc) {
  return intermediate_to_json(doc).dump(2) + "\n";
}

inline IntermediateDoc parse_structured(std::string_view text) {
  using detail::ojson;
  ojson root;
  try {
    root = ojson::parse(text);
    IntermediateDoc doc;
    auto pt = parse_parse_type(root.at("_parse_type").get<std::string>());
    if (!pt) throw StructuredError("_parse_type must be \"txt\" or \"ocr\"");
    doc.parse_type = *pt;
    doc.version_name = root.at("_version_name").get<std::string>();
    for (const auto& jp : root.at("pdf_info")) {
      PageInfo p;
      p.page_idx = jp.at("page_idx").get<int>();
      p.page_size = {jp.at("page_size").at(0).get<double>(), jp.at("page_size").at(1).get<double>()};
      for (const auto& jb : jp.at("para_blocks"))
        p.para_blocks.push_back(detail::block_from_json(jb, p.page_idx));
      doc.pdf_info.push_back(std::move(p));
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw StructuredError(std::string("structured output: ") + e.what());
  }
}

/// Shallow well-formedness: balanced tags for HTML, balanced braces and
/// \begin/\end pairs for LaTeX.
inline bool table_markup_balanced(std::string_view markup, TableFormat format) {
  if (format == TableFormat::Latex) {
    int depth = 0, envs = 0;
    for (std::size_t i = 0; i < markup.size(); ++i) {
      char c = markup[i];
      if (c == '\\' && i + 1 < markup.size() && (markup[i + 1] == '{' || markup[i + 1] == '}')) {
        ++i;
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}' && --depth < 0) return false;
      if (markup.substr(i, 7) == "\\begin{") ++envs;
      if (markup.substr(i, 5) == "\\end{" && --envs < 0) return false;
    }
    return depth == 0 && envs == 0;
  }
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = markup.find('<', i)) != std::string_view::npos) {
    std::size_t close = markup.find('>', i);
    if (close == std::string_view::npos) return false;
    std::string_view tag = markup.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.empty() || tag.front() == '!' || tag.front() == '?' || tag.back() == '/') continue;
    bool closing = tag.front() == '/';
    if (closing) tag.remove_prefix(1);
    std::string name;
    for (char c : tag) {
      if (c == ' ' || c == '\t' || c == '\n') break;
      name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    static const std::vector<std::string> kVoid = {"br", "hr", "img", "col", "meta", "input"};
    if (std::find(kVoid.begin(), kVoid.end(), name) != kVoid.end()) continue;
    if (!closing) {
      stack.push_back(name);
    } else {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

namespace detail {

inline const std::string* table_markup(const Block& b, TableFormat f) {
  if (!b.table) return nullptr;
  const std::string& want = f == TableFormat::Html ? b.table->html : b.table->latex;
  const std::string& other = f == TableFormat::Html ? b.table->latex : b.table->html;
  if (!want.empty()) return &want;
  if (!other.empty()) return &other;
  return nullptr;
}

}  // namespace detail

/// Satellites whose host is present, grouped by host id in reading order.
inline std::map<int, std::vector<const Block*>> satellites_by_host(const IntermediateDoc& doc) {
  std::map<int, const Block*> hosts;
  for (const auto& p : doc.pdf_info)
    for (const auto& b : p.para_blocks) hosts.emplace(b.id, &b);
  std::map<int, std::vector<const Block*>> out;
  for (const auto& p : doc.pdf_info)
    for (const auto& b : p.para_blocks)
      if (is_satellite(b.category) && b.host_id && hosts.count(*b.host_id))
        out[*b.host_id].push_back(&b);
  return out;
}

/// Markdown blocks in emission order: each host is followed by its captions
/// and footnotes; equation labels fold into their equation's tag.
inline std::vector<std::string> markdown_pieces(const IntermediateDoc& doc, const EmitConfig& cfg) {
  auto sats = satellites_by_host(doc);
  std::vector<std::string> out;
  auto paragraph = [&](const std::string& text) {
    if (!text.empty()) out.push_back(text + "\n\n");
  };
  for (const auto& page : doc.pdf_info) {
    for (const auto& b : page.para_blocks) {
      if (is_satellite(b.category) && b.host_id && sats.count(*b.host_id)) continue;
      auto it = sats.find(b.id);
      switch (b.category) {
        case BlockCategory::Title:
          if (!b.text.empty()) out.push_back("# " + b.text + "\n\n");
          break;
        case BlockCategory::InterlineEquation: {
          std::string tag = b.equation_tag;
          if (tag.empty() && it != sats.end())
            for (const Block* s : it->second)
              if (s->category == BlockCategory::EquationLabel && tag.empty()) tag = s->text;
          std::string body = b.text;
          if (!tag.empty()) body += " \\tag{" + equation_tag_text(tag) + "}";
          out.push_back("$$\n" + body + "\n$$\n\n");
          break;
        }
        case BlockCategory::Image:
          out.push_back(b.asset.empty() ? std::string("[image]\n\n")
                                        : "![](" + cfg.asset_link_prefix + b.asset + ")\n\n");
          break;
        case BlockCategory::Table: {
          const std::string* markup = detail::table_markup(b, cfg.table_format);
          out.push_back(markup ? *markup + "\n\n" : std::string("[table]\n\n"));
          break;
        }
        default:
          paragraph(b.text);
          break;
      }
      if (it != sats.end())
        for (const Block* s : it->second)
          if (s->category != BlockCategory::EquationLabel) paragraph(s->text);
    }
  }
  return out;
}

inline std::string to_markdown(const IntermediateDoc& doc, const EmitConfig& cfg = {}) {
  std::string md;
  for (const auto& piece : markdown_pieces(doc, cfg)) md += piece;
  return md;
}

}  // namespace docflow
