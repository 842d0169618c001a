// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Document bundle loading and the document-level preprocessing classifiers
// (parseability, garbled text, language). A bundle carries everything the
// upstream text-extraction backend and detection models produced for a
// document; the engine never opens the source file itself.

#pragma once

#include <algorithm>
#include <istream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "docflow/geometry.hpp"
#include "docflow/model.hpp"
#include "docflow/unicode.hpp"

namespace docflow {

class IngestError : public std::runtime_error {
 public:
  enum class Kind { MalformedInput, SchemaViolation, UnprocessableDocument };

  IngestError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct NativeSpan {
  Rect rect;
  std::string text;
  friend bool operator==(const NativeSpan&, const NativeSpan&) = default;
};

/// Upstream model output: a layout category, a formula kind, or "ignore".
/// `content` carries recognition output (formula LaTeX); tables carry
/// `html` and/or `latex`.
struct Detection {
  Rect rect;
  std::string label;
  double score = 1.0;
  std::string content;
  std::optional<std::string> html;
  std::optional<std::string> latex;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct PageDigest {
  int page_index = 0;
  double width = 0.0;
  double height = 0.0;
  std::vector<NativeSpan> native_spans;
  std::vector<Rect> image_regions;
  std::vector<Detection> detections;
  // OCR output for the page's text regions, used when the document parses as ocr.
  std::optional<std::vector<NativeSpan>> ocr_spans;
  std::optional<std::string> page_raster_ref;
  friend bool operator==(const PageDigest&, const PageDigest&) = default;
};

struct DocumentBundle {
  std::string source_id;
  std::vector<PageDigest> pages;
  bool declared_encrypted = false;
  std::optional<LangType> declared_language_hint;
  friend bool operator==(const DocumentBundle&, const DocumentBundle&) = default;
};

struct ClassifierConfig {
  double min_chars_per_page = 5.0;      // below: scanned
  double image_cover_ratio = 0.8;       // page counts as image-covered at or above
  double image_page_fraction = 0.5;     // scanned when this share of pages is covered
  double garbled_ratio = 0.05;          // garbled strictly above
  double cjk_ratio = 0.3;               // zh at or above
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& where, const std::string& msg) {
  throw IngestError(IngestError::Kind::SchemaViolation, where + ": " + msg);
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing required key '") + key + "'");
  return *it;
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(where, "non-finite number");
  return d;
}

inline std::string string(const json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where, "expected a string");
  return v.get<std::string>();
}

inline Rect rect(const json& v, const std::string& where, double w, double h) {
  if (!v.is_array() || v.size() != 4) schema_error(where, "bbox must be an array of 4 numbers");
  Rect r{number(v[0], where), number(v[1], where), number(v[2], where), number(v[3], where)};
  if (r.x0 > r.x1 || r.y0 > r.y1) schema_error(where, "bbox has x0 > x1 or y0 > y1");
  return r.clamped(w, h);
}

inline std::optional<std::string> optional_string(const json& obj, const char* key,
                                                  const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return string(*it, where + "." + key);
}

inline PageDigest page(const json& p, const std::string& where) {
  if (!p.is_object()) schema_error(where, "page must be an object");
  PageDigest out;
  const json& idx = require(p, "page_index", where);
  if (!idx.is_number_integer()) schema_error(where + ".page_index", "expected an integer");
  out.page_index = idx.get<int>();
  out.width = number(require(p, "width", where), where + ".width");
  out.height = number(require(p, "height", where), where + ".height");
  if (out.width <= 0.0 || out.height <= 0.0) schema_error(where, "page dimensions must be positive");
  const double w = out.width, h = out.height;

  const json& spans = require(p, "native_spans", where);
  if (!spans.is_array()) schema_error(where + ".native_spans", "expected an array");
  auto read_spans = [&](const json& arr, const std::string& at) {
    std::vector<NativeSpan> v;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string loc = at + "[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) schema_error(loc, "expected an object");
      v.push_back({rect(require(arr[i], "bbox", loc), loc + ".bbox", w, h),
                   string(require(arr[i], "text", loc), loc + ".text")});
    }
    return v;
  };
  out.native_spans = read_spans(spans, where + ".native_spans");

  if (auto it = p.find("ocr_spans"); it != p.end() && !it->is_null()) {
    if (!it->is_array()) schema_error(where + ".ocr_spans", "expected an array");
    out.ocr_spans = read_spans(*it, where + ".ocr_spans");
  }

  const json& images = require(p, "image_regions", where);
  if (!images.is_array()) schema_error(where + ".image_regions", "expected an array");
  for (std::size_t i = 0; i < images.size(); ++i)
    out.image_regions.push_back(
        rect(images[i], where + ".image_regions[" + std::to_string(i) + "]", w, h));

  const json& dets = require(p, "detections", where);
  if (!dets.is_array()) schema_error(where + ".detections", "expected an array");
  for (std::size_t i = 0; i < dets.size(); ++i) {
    std::string loc = where + ".detections[" + std::to_string(i) + "]";
    const json& d = dets[i];
    if (!d.is_object()) schema_error(loc, "expected an object");
    Detection det;
    det.label = string(require(d, "label", loc), loc + ".label");
    if (det.label == "ignore") continue;
    if (!parse_block_category(det.label) && det.label != "inline_equation")
      schema_error(loc + ".label", "unknown label '" + det.label + "'");
    det.rect = rect(require(d, "bbox", loc), loc + ".bbox", w, h);
    det.score = number(require(d, "score", loc), loc + ".score");
    if (det.score < 0.0 || det.score > 1.0) schema_error(loc + ".score", "score outside [0,1]");
    det.content = optional_string(d, "content", loc).value_or("");
    det.html = optional_string(d, "html", loc);
    det.latex = optional_string(d, "latex", loc);
    out.detections.push_back(std::move(det));
  }
  out.page_raster_ref = optional_string(p, "page_raster_ref", where);
  return out;
}

inline json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

}  // namespace detail

/// Parses and validates a bundle. Rects are clamped to page bounds and
/// detections labelled "ignore" are dropped.
inline DocumentBundle load_bundle(std::string_view text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError(IngestError::Kind::MalformedInput, std::string("bundle: ") + e.what());
  }
  if (!root.is_object()) detail::schema_error("bundle", "top level must be an object");

  DocumentBundle b;
  b.source_id = detail::string(detail::require(root, "source_id", "bundle"), "bundle.source_id");
  if (b.source_id.empty()) detail::schema_error("bundle.source_id", "must not be empty");
  const json& enc = detail::require(root, "declared_encrypted", "bundle");
  if (!enc.is_boolean()) detail::schema_error("bundle.declared_encrypted", "expected a boolean");
  b.declared_encrypted = enc.get<bool>();
  if (b.declared_encrypted)
    throw IngestError(IngestError::Kind::UnprocessableDocument,
                      "bundle '" + b.source_id + "' is declared encrypted");
  if (auto hint = detail::optional_string(root, "declared_language_hint", "bundle")) {
    b.declared_language_hint = parse_lang(*hint);
    if (!b.declared_language_hint)
      detail::schema_error("bundle.declared_language_hint", "expected \"zh\" or \"en\"");
  }
  const json& pages = detail::require(root, "pages", "bundle");
  if (!pages.is_array()) detail::schema_error("bundle.pages", "expected an array");
  if (pages.empty()) detail::schema_error("bundle.pages", "must not be empty");
  for (std::size_t i = 0; i < pages.size(); ++i) {
    std::string where = "bundle.pages[" + std::to_string(i) + "]";
    b.pages.push_back(detail::page(pages[i], where));
    if (b.pages.back().page_index != static_cast<int>(i))
      detail::schema_error(where + ".page_index", "page indices must be contiguous from 0");
  }
  return b;
}

inline DocumentBundle load_bundle(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_bundle(std::string_view(text));
}

inline std::string serialize_bundle(const DocumentBundle& b) {
  using detail::json;
  using detail::rect_json;
  json root = json::object();
  root["source_id"] = b.source_id;
  root["declared_encrypted"] = b.declared_encrypted;
  if (b.declared_language_hint)
    root["declared_language_hint"] = std::string(to_string(*b.declared_language_hint));
  json pages = json::array();
  for (const auto& p : b.pages) {
    json jp = json::object();
    jp["page_index"] = p.page_index;
    jp["width"] = p.width;
    jp["height"] = p.height;
    auto spans = [&](const std::vector<NativeSpan>& v) {
      json arr = json::array();
      for (const auto& s : v) arr.push_back({{"bbox", rect_json(s.rect)}, {"text", s.text}});
      return arr;
    };
    jp["native_spans"] = spans(p.native_spans);
    if (p.ocr_spans) jp["ocr_spans"] = spans(*p.ocr_spans);
    jp["image_regions"] = json::array();
    for (const auto& r : p.image_regions) jp["image_regions"].push_back(rect_json(r));
    jp["detections"] = json::array();
    for (const auto& d : p.detections) {
      json jd = {{"bbox", rect_json(d.rect)}, {"label", d.label}, {"score", d.score}};
      if (!d.content.empty()) jd["content"] = d.content;
      if (d.html) jd["html"] = *d.html;
      if (d.latex) jd["latex"] = *d.latex;
      jp["detections"].push_back(std::move(jd));
    }
    if (p.page_raster_ref) jp["page_raster_ref"] = *p.page_raster_ref;
    pages.push_back(std::move(jp));
  }
  root["pages"] = std::move(pages);
  return root.dump(2);
}

namespace detail {

inline std::size_t visible_chars(std::string_view s) {
  std::size_t n = 0;
  for (char32_t c : unicode::decode(s))
    if (!unicode::is_whitespace(c)) ++n;
  return n;
}

/// Area of the union of rects, by coordinate compression.
inline double union_area(const std::vector<Rect>& rects) {
  std::vector<double> xs, ys;
  for (const auto& r : rects) {
    if (area(r) <= 0.0) continue;
    xs.insert(xs.end(), {r.x0, r.x1});
    ys.insert(ys.end(), {r.y0, r.y1});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      Rect cell{xs[i], ys[j], xs[i + 1], ys[j + 1]};
      for (const auto& r : rects) {
        if (r.contains(cell)) {
          total += area(cell);
          break;
        }
      }
    }
  }
  return total;
}

}  // namespace detail

/// Share of the page covered by embedded raster regions.
inline double image_coverage(const PageDigest& p) {
  return detail::union_area(p.image_regions) / (p.width * p.height);
}

/// Ocr when native text is nearly absent or most pages are covered by images.
inline ParseType classify_parseability(const DocumentBundle& b, const ClassifierConfig& cfg = {}) {
  if (b.pages.empty()) return ParseType::Ocr;
  std::size_t chars = 0, covered = 0;
  for (const auto& p : b.pages) {
    for (const auto& s : p.native_spans) chars += detail::visible_chars(s.text);
    if (image_coverage(p) >= cfg.image_cover_ratio) ++covered;
  }
  double n = static_cast<double>(b.pages.size());
  bool few_chars = static_cast<double>(chars) / n < cfg.min_chars_per_page;
  bool image_heavy = static_cast<double>(covered) / n >= cfg.image_page_fraction;
  return few_chars || image_heavy ? ParseType::Ocr : ParseType::Txt;
}

/// Fraction of native-text codepoints that are U+FFFD, non-whitespace
/// controls or private-use codepoints. 0 when there is no text.
inline double garbled_fraction(const DocumentBundle& b) {
  std::size_t total = 0, bad = 0;
  for (const auto& p : b.pages) {
    for (const auto& s : p.native_spans) {
      for (char32_t c : unicode::decode(s.text)) {
        ++total;
        if (c == unicode::kReplacement || unicode::is_private_use(c) ||
            (unicode::is_control(c) && !unicode::is_whitespace(c)))
          ++bad;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(total);
}

inline bool detect_garbled(const DocumentBundle& b, const ClassifierConfig& cfg = {}) {
  return garbled_fraction(b) > cfg.garbled_ratio;
}

inline LangType detect_language(const DocumentBundle& b, const ClassifierConfig& cfg = {}) {
  if (b.declared_language_hint) return *b.declared_language_hint;
  std::size_t cjk = 0, alpha = 0;
  for (const auto& p : b.pages) {
    for (const auto& s : p.native_spans) {
      for (char32_t c : unicode::decode(s.text)) {
        if (unicode::is_cjk_ideograph(c))
          ++cjk;
        else if (unicode::is_alphabetic(c))
          ++alpha;
      }
    }
  }
  if (cjk + alpha == 0) return LangType::Unknown;
  double ratio = static_cast<double>(cjk) / static_cast<double>(cjk + alpha);
  if (ratio >= cfg.cjk_ratio) return LangType::Zh;
  return alpha > 0 ? LangType::En : LangType::Unknown;
}

inline DocMeta extract_meta(const DocumentBundle& b, const ClassifierConfig& cfg = {}) {
  DocMeta m;
  m.page_count = static_cast<int>(b.pages.size());
  for (const auto& p : b.pages) m.page_dims.push_back({p.width, p.height});
  m.language = detect_language(b, cfg);
  m.garbled = detect_garbled(b, cfg);
  m.parse_type = m.garbled ? ParseType::Ocr : classify_parseability(b, cfg);
  return m;
}

}  // namespace docflow
