// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Layout detection metrics: per page/category greedy matching at an IoU
// threshold, 101-point interpolated AP, and mAP / AP50 / AR50 summaries.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "docflow/geometry.hpp"
#include "docflow/model.hpp"

namespace docflow {

struct GtInstance {
  std::string page_id;
  std::string label;
  Rect rect;
};

struct PredInstance {
  std::string page_id;
  std::string label;
  Rect rect;
  double score = 0.0;
};

class EvalError : public std::invalid_argument {
 public:
  enum class Kind { InvalidThreshold, InvalidInstance };
  EvalError(Kind k, const std::string& what) : std::invalid_argument(what), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline bool known_label(std::string_view label) {
  return parse_block_category(label).has_value() || parse_span_kind(label).has_value();
}

struct MatchPair {
  std::size_t pred;               // index into the prediction list
  std::optional<std::size_t> gt;  // index into the GT list; none = false positive
  double iou = 0.0;
};

namespace detail {

inline void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0))
    throw EvalError(EvalError::Kind::InvalidThreshold,
                    "iou threshold must lie in (0, 1], got " + std::to_string(t));
}

/// Prediction indices by descending score, input order on ties.
inline std::vector<std::size_t> score_order(std::span<const PredInstance> preds) {
  std::vector<std::size_t> idx(preds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
  return idx;
}

}  // namespace detail

/// Greedy matching within each (page, label) group. Predictions claim, in
/// descending score order, the unmatched GT of highest IoU >= threshold;
/// equal IoU goes to the lower GT index. Result is in score order.
inline std::vector<MatchPair> match_instances(std::span<const GtInstance> gt,
                                              std::span<const PredInstance> preds,
                                              double iou_threshold) {
  detail::check_threshold(iou_threshold);
  std::vector<bool> taken(gt.size(), false);
  std::vector<MatchPair> out;
  for (std::size_t p : detail::score_order(preds)) {
    MatchPair m{p, std::nullopt, 0.0};
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g] || gt[g].page_id != preds[p].page_id || gt[g].label != preds[p].label) continue;
      double v = iou_or_zero(gt[g].rect, preds[p].rect);
      if (v < iou_threshold) continue;
      if (!m.gt || v > m.iou) {
        m.gt = g;
        m.iou = v;
      }
    }
    if (m.gt) taken[*m.gt] = true;
    out.push_back(m);
  }
  return out;
}

struct ScoredMatch {
  double score = 0.0;
  bool tp = false;
};

/// 101-point interpolated AP. Returns 0 when total_gt is 0.
inline double average_precision(std::vector<ScoredMatch> matches, std::size_t total_gt) {
  if (total_gt == 0 || matches.empty()) return 0.0;
  std::stable_sort(matches.begin(), matches.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) { return a.score > b.score; });
  std::vector<double> recall, precision;
  std::size_t tp = 0, fp = 0;
  for (const auto& m : matches) {
    (m.tp ? tp : fp)++;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  for (std::size_t i = precision.size() - 1; i > 0; --i)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    double r = k / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

struct EvalConfig {
  std::vector<double> thresholds{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
  std::size_t max_dets = 100;  // per page and category
};

struct CategoryEval {
  std::string label;
  std::size_t gt_count = 0;
  std::vector<double> ap;  // one per threshold
  double ap_mean = 0.0;
  double ap50 = 0.0;
  double recall50 = 0.0;
  std::size_t tp50 = 0, fp50 = 0, fn50 = 0;
};

struct EvalReport {
  std::vector<double> thresholds;
  std::vector<CategoryEval> categories;  // sorted by label
  double map = 0.0;
  double ap50 = 0.0;
  double ar50 = 0.0;
  std::vector<std::string> diagnostics;
};

/// Per-category AP over all thresholds. Categories without GT get AP 0 and
/// are left out of the means.
inline EvalReport evaluate(std::span<const GtInstance> gt, std::span<const PredInstance> preds,
                           const EvalConfig& cfg = {}) {
  for (double t : cfg.thresholds) detail::check_threshold(t);
  for (const auto& g : gt)
    if (!g.rect.valid())
      throw EvalError(EvalError::Kind::InvalidInstance, "invalid gt rect on page " + g.page_id);
  for (const auto& p : preds)
    if (!p.rect.valid() || !(p.score >= 0.0 && p.score <= 1.0))
      throw EvalError(EvalError::Kind::InvalidInstance, "invalid prediction on page " + p.page_id);

  EvalReport rep;
  rep.thresholds = cfg.thresholds;
  std::map<std::string, std::vector<GtInstance>> gt_by;
  std::map<std::string, std::vector<PredInstance>> pred_by;
  for (const auto& g : gt) gt_by[g.label].push_back(g);
  for (const auto& p : preds) pred_by[p.label].push_back(p);

  std::map<std::string, bool> labels;
  for (const auto& [l, v] : gt_by) labels[l] = true;
  for (const auto& [l, v] : pred_by) labels.try_emplace(l, false);

  double map_sum = 0.0, ap50_sum = 0.0, ar50_sum = 0.0;
  std::size_t counted = 0;
  for (const auto& [label, has_gt] : labels) {
    CategoryEval c;
    c.label = label;
    const auto& g = gt_by[label];
    c.gt_count = g.size();

    // keep the top max_dets predictions of each page
    std::vector<PredInstance> kept;
    {
      std::map<std::string, std::vector<PredInstance>> per_page;
      for (const auto& p : pred_by[label]) per_page[p.page_id].push_back(p);
      for (auto& [page, v] : per_page) {
        auto order = detail::score_order(v);
        if (order.size() > cfg.max_dets) {
          rep.diagnostics.push_back(label + ": page " + page + " has " + std::to_string(v.size()) +
                                    " predictions, keeping " + std::to_string(cfg.max_dets));
          order.resize(cfg.max_dets);
        }
        for (std::size_t i : order) kept.push_back(v[i]);
      }
    }

    for (double t : cfg.thresholds) {
      auto m = match_instances(g, kept, t);
      std::vector<ScoredMatch> sm;
      std::size_t tp = 0;
      for (const auto& x : m) {
        sm.push_back({kept[x.pred].score, x.gt.has_value()});
        tp += x.gt.has_value();
      }
      c.ap.push_back(average_precision(sm, g.size()));
      if (std::abs(t - 0.5) < 1e-12) {
        c.ap50 = c.ap.back();
        c.tp50 = tp;
        c.fp50 = m.size() - tp;
        c.fn50 = g.size() - tp;
        c.recall50 = g.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(g.size());
      }
    }
    c.ap_mean = c.ap.empty() ? 0.0
                             : std::accumulate(c.ap.begin(), c.ap.end(), 0.0) /
                                   static_cast<double>(c.ap.size());
    if (has_gt) {
      map_sum += c.ap_mean;
      ap50_sum += c.ap50;
      ar50_sum += c.recall50;
      ++counted;
    } else {
      rep.diagnostics.push_back(label + ": category absent from ground truth, AP defined as 0");
    }
    rep.categories.push_back(std::move(c));
  }
  if (counted) {
    rep.map = map_sum / static_cast<double>(counted);
    rep.ap50 = ap50_sum / static_cast<double>(counted);
    rep.ar50 = ar50_sum / static_cast<double>(counted);
  } else {
    rep.diagnostics.push_back("ground truth is empty, all metrics are 0");
  }
  return rep;
}

inline std::string report_table(const EvalReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-20s %6s %8s %8s %8s %6s %6s %6s\n", "category", "gt", "mAP",
                "AP50", "AR50", "TP", "FP", "FN");
  out += buf;
  for (const auto& c : r.categories) {
    std::snprintf(buf, sizeof buf, "%-20s %6zu %8.4f %8.4f %8.4f %6zu %6zu %6zu\n", c.label.c_str(),
                  c.gt_count, c.ap_mean, c.ap50, c.recall50, c.tp50, c.fp50, c.fn50);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-20s %6s %8.4f %8.4f %8.4f\n", "all", "", r.map, r.ap50, r.ar50);
  out += buf;
  return out;
}

inline nlohmann::ordered_json report_json(const EvalReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["mAP"] = r.map;
  j["AP50"] = r.ap50;
  j["AR50"] = r.ar50;
  j["thresholds"] = r.thresholds;
  j["categories"] = ordered_json::array();
  for (const auto& c : r.categories)
    j["categories"].push_back({{"label", c.label},
                               {"gt", c.gt_count},
                               {"ap", c.ap},
                               {"mAP", c.ap_mean},
                               {"AP50", c.ap50},
                               {"AR50", c.recall50},
                               {"tp", c.tp50},
                               {"fp", c.fp50},
                               {"fn", c.fn50}});
  j["diagnostics"] = r.diagnostics;
  return j;
}

namespace detail {

inline std::string page_id_of(const nlohmann::json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw EvalError(EvalError::Kind::InvalidInstance, where + ": page_id must be a string or integer");
}

template <class T>
std::vector<T> load_instances(std::string_view text, bool with_score) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw EvalError(EvalError::Kind::InvalidInstance, e.what());
  }
  if (!root.is_array())
    throw EvalError(EvalError::Kind::InvalidInstance, "expected an array of instances");
  std::vector<T> out;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& d = root[i];
    std::string at = "[" + std::to_string(i) + "]";
    try {
      T x;
      x.page_id = page_id_of(d.at("page_id"), at);
      x.label = d.at("label").get<std::string>();
      if (!known_label(x.label))
        throw EvalError(EvalError::Kind::InvalidInstance, at + ": unknown label '" + x.label + "'");
      const auto& b = d.at("bbox");
      if (!b.is_array() || b.size() != 4)
        throw EvalError(EvalError::Kind::InvalidInstance, at + ": bbox must have 4 numbers");
      x.rect = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      if (!x.rect.valid())
        throw EvalError(EvalError::Kind::InvalidInstance, at + ": inverted bbox");
      if constexpr (std::is_same_v<T, PredInstance>) {
        if (with_score) x.score = d.at("score").get<double>();
      }
      out.push_back(std::move(x));
    } catch (const nlohmann::json::exception& e) {
      throw EvalError(EvalError::Kind::InvalidInstance, at + ": " + e.what());
    }
  }
  return out;
}

}  // namespace detail

/// `[{"page_id": 0, "label": "text", "bbox": [x0,y0,x1,y1]}, ...]`
inline std::vector<GtInstance> load_gt(std::string_view text) {
  return detail::load_instances<GtInstance>(text, false);
}

/// As load_gt plus a "score" per entry.
inline std::vector<PredInstance> load_preds(std::string_view text) {
  return detail::load_instances<PredInstance>(text, true);
}

}  // namespace docflow
