// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "docflow/model.hpp"

namespace docflow {

class GeometryError : public std::domain_error {
 public:
  enum class Kind { UndefinedIou, DegenerateInner };

  GeometryError(Kind kind, const std::string& what)
      : std::domain_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline double area(const Rect& r) { return r.width() * r.height(); }

/// Overlap rectangle. Edge-touching boxes are disjoint.
inline std::optional<Rect> intersect(const Rect& a, const Rect& b) {
  Rect r{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1),
         std::min(a.y1, b.y1)};
  if (r.x0 >= r.x1 || r.y0 >= r.y1) return std::nullopt;
  return r;
}

inline double overlap_area(const Rect& a, const Rect& b) {
  auto r = intersect(a, b);
  return r ? area(*r) : 0.0;
}

inline double iou(const Rect& a, const Rect& b) {
  double aa = area(a), ab = area(b);
  if (aa <= 0.0 && ab <= 0.0)
    throw GeometryError(GeometryError::Kind::UndefinedIou, "iou: both boxes have zero area");
  double inter = overlap_area(a, b);
  return inter / (aa + ab - inter);
}

/// Same as iou() but maps the undefined case to 0.
inline double iou_or_zero(const Rect& a, const Rect& b) {
  double aa = area(a), ab = area(b);
  if (aa <= 0.0 && ab <= 0.0) return 0.0;
  double inter = overlap_area(a, b);
  return inter / (aa + ab - inter);
}

/// Fraction of `inner` covered by `outer`.
inline double containment_ratio(const Rect& inner, const Rect& outer) {
  double ai = area(inner);
  if (ai <= 0.0)
    throw GeometryError(GeometryError::Kind::DegenerateInner,
                        "containment_ratio: inner box has zero area");
  return overlap_area(inner, outer) / ai;
}

/// Gap between two rects (0 when they touch or overlap).
inline double rect_distance(const Rect& a, const Rect& b) {
  double dx = std::max({0.0, a.x0 - b.x1, b.x0 - a.x1});
  double dy = std::max({0.0, a.y0 - b.y1, b.y0 - a.y1});
  return std::hypot(dx, dy);
}

enum class ShrinkStatus { Ok, NotPartiallyOverlapping, Unresolvable };

struct ShrinkResult {
  ShrinkStatus status = ShrinkStatus::Ok;
  Rect a;
  Rect b;
};

struct ShrinkOptions {
  double containment_threshold = 0.8;
  // A shrunken box must keep strictly more than this fraction of its area.
  double survival_floor = 0.5;
};

/// Cuts two partially overlapping boxes apart along the axis with the smaller
/// intrusion depth, splitting the overlap band at its midpoint. The box whose
/// center lies lower on that axis keeps the low side (ties: `a` keeps it).
inline ShrinkResult shrink_to_avoid(const Rect& a, const Rect& b, const ShrinkOptions& opt = {}) {
  auto inter = intersect(a, b);
  if (!inter || area(a) <= 0.0 || area(b) <= 0.0) return {ShrinkStatus::NotPartiallyOverlapping, a, b};

  bool cut_y = inter->height() < inter->width();
  Rect na = a, nb = b;
  if (cut_y) {
    double mid = 0.5 * (inter->y0 + inter->y1);
    bool a_low = a.cy() <= b.cy();
    Rect& lo = a_low ? na : nb;
    Rect& hi = a_low ? nb : na;
    lo.y1 = std::min(lo.y1, mid);
    hi.y0 = std::max(hi.y0, mid);
  } else {
    double mid = 0.5 * (inter->x0 + inter->x1);
    bool a_low = a.cx() <= b.cx();
    Rect& lo = a_low ? na : nb;
    Rect& hi = a_low ? nb : na;
    lo.x1 = std::min(lo.x1, mid);
    hi.x0 = std::max(hi.x0, mid);
  }

  // A box contained in the other on the cut axis cannot be split disjointly
  // by a midpoint cut; the checks below reject it as unresolvable.
  if (intersect(na, nb) || area(na) <= opt.survival_floor * area(a) ||
      area(nb) <= opt.survival_floor * area(b))
    return {ShrinkStatus::Unresolvable, a, b};

  if (containment_ratio(a, b) >= opt.containment_threshold ||
      containment_ratio(b, a) >= opt.containment_threshold)
    return {ShrinkStatus::NotPartiallyOverlapping, a, b};

  return {ShrinkStatus::Ok, na, nb};
}

}  // namespace docflow
