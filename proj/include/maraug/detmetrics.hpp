#pragma once

// Detection scoring: IoU, greedy confidence-ordered matching, PR curves,
// all-point AP, mAP over IoU thresholds and scalar precision/recall/F1,
// aggregated per class and per class group.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maraug/datasetio.hpp"
#include "maraug/error.hpp"

namespace maraug {

/// Corner-form axis-aligned rectangle.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double area() const noexcept { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
};

inline Rect to_rect(const BoundingBox& b) noexcept {
  return {b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2};
}

inline double iou(const Rect& a, const Rect& b) noexcept {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::min(1.0, inter / uni) : 0.0;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  return iou(to_rect(a), to_rect(b));
}

// ---------------------------------------------------------------------------
// Matching

struct DetectionMatch {
  std::string image_id;
  int class_id = 0;
  double confidence = 0.0;
  bool true_positive = false;
  std::optional<std::size_t> gt_index;  // into the image's ground-truth list
};

struct MatchResult {
  std::vector<DetectionMatch> detections;
  std::map<int, std::size_t> gt_counts;

  std::size_t gt_count(int class_id) const {
    const auto it = gt_counts.find(class_id);
    return it == gt_counts.end() ? 0 : it->second;
  }

  void append(const MatchResult& other) {
    detections.insert(detections.end(), other.detections.begin(), other.detections.end());
    for (const auto& [cls, n] : other.gt_counts) gt_counts[cls] += n;
  }

  std::vector<DetectionMatch> for_class(int class_id) const {
    std::vector<DetectionMatch> out;
    for (const auto& d : detections) {
      if (d.class_id == class_id) out.push_back(d);
    }
    return out;
  }

  /// Classes that appear in either detections or ground truth.
  std::vector<int> classes() const {
    std::vector<int> ids;
    for (const auto& [cls, n] : gt_counts) ids.push_back(cls);
    for (const auto& d : detections) ids.push_back(d.class_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }
};

/// Greedy matching within one image. Detections are visited by descending
/// confidence (ties broken by class id, then box fields); each takes the
/// highest-IoU still-unmatched ground truth of its own class whose IoU
/// reaches `iou_thresh`, otherwise it is a false positive.
inline MatchResult match_detections(std::string_view image_id, std::span<const Detection> dets,
                                    std::span<const Annotation> gts, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "IoU threshold must lie in (0,1)");
  }
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = dets[a];
    const auto& db = dets[b];
    if (da.confidence != db.confidence) return da.confidence > db.confidence;
    if (da.class_id != db.class_id) return da.class_id < db.class_id;
    if (da.box != db.box) return da.box < db.box;
    return a < b;
  });

  MatchResult out;
  for (const auto& g : gts) ++out.gt_counts[g.class_id];
  std::vector<bool> taken(gts.size(), false);
  out.detections.reserve(dets.size());
  for (std::size_t i : order) {
    const auto& d = dets[i];
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != d.class_id) continue;
      const double v = iou(d.box, gts[g].box);
      if (v >= iou_thresh && v > best_iou) {
        best_iou = v;
        best = g;
      }
    }
    if (best) taken[*best] = true;
    out.detections.push_back({std::string(image_id), d.class_id, d.confidence, best.has_value(), best});
  }
  return out;
}

/// One image's detector output and ground truth.
struct ImageEval {
  std::string image_id;
  std::vector<Detection> detections;
  std::vector<Annotation> ground_truth;
};

/// Match every image and concatenate in image-id order, which fixes the
/// tie order for equal confidences across images.
inline MatchResult match_dataset(std::span<const ImageEval> images, double iou_thresh) {
  std::vector<const ImageEval*> sorted;
  for (const auto& im : images) sorted.push_back(&im);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return a->image_id < b->image_id; });
  MatchResult all;
  for (const auto* im : sorted) {
    all.append(match_detections(im->image_id, im->detections, im->ground_truth, iou_thresh));
  }
  return all;
}

// ---------------------------------------------------------------------------
// Curves and AP

struct PrPoint {
  double confidence;
  double recall;
  double precision;
};

namespace detail {

inline std::vector<DetectionMatch> by_confidence(std::span<const DetectionMatch> dets) {
  std::vector<DetectionMatch> sorted(dets.begin(), dets.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
  return sorted;
}

}  // namespace detail

/// Cumulative (recall, precision) after each detection of one class, in
/// descending confidence order.
inline std::vector<PrPoint> pr_curve(std::span<const DetectionMatch> dets, std::size_t gt_count) {
  std::vector<PrPoint> curve;
  curve.reserve(dets.size());
  std::size_t tp = 0;
  std::size_t n = 0;
  for (const auto& d : detail::by_confidence(dets)) {
    ++n;
    if (d.true_positive) ++tp;
    const double recall = gt_count > 0 ? static_cast<double>(tp) / static_cast<double>(gt_count) : 0.0;
    curve.push_back({d.confidence, recall, static_cast<double>(tp) / static_cast<double>(n)});
  }
  return curve;
}

/// All-point interpolated AP for one class: recall increments weighted by
/// the right-to-left running maximum of precision. Zero without ground truth.
inline double average_precision(std::span<const DetectionMatch> dets, std::size_t gt_count) {
  if (gt_count == 0) return 0.0;
  const auto curve = pr_curve(dets, gt_count);
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].recall > prev_recall) {
      ap += (curve[i].recall - prev_recall) * envelope[i];
      prev_recall = curve[i].recall;
    }
  }
  return ap;
}

inline double average_precision(const MatchResult& matches, int class_id) {
  return average_precision(matches.for_class(class_id), matches.gt_count(class_id));
}

/// AP per class, restricted to classes with ground truth.
inline std::map<int, double> per_class_ap(const MatchResult& matches) {
  std::map<int, double> out;
  for (const auto& [cls, n] : matches.gt_counts) {
    if (n > 0) out[cls] = average_precision(matches, cls);
  }
  return out;
}

inline double mean_ap(std::span<const ImageEval> images, double iou_thresh) {
  const auto aps = per_class_ap(match_dataset(images, iou_thresh));
  if (aps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [cls, ap] : aps) sum += ap;
  return sum / static_cast<double>(aps.size());
}

/// 0.50, 0.55, ..., 0.95.
inline constexpr std::array<double, 10> kIouThresholds50To95 = [] {
  std::array<double, 10> t{};
  for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = (50.0 + 5.0 * i) / 100.0;
  return t;
}();

inline double map_range(std::span<const ImageEval> images,
                        std::span<const double> thresholds = kIouThresholds50To95) {
  if (thresholds.size() != 10) {
    throw Error(ErrorCode::InvalidArgument, "mAP range needs exactly 10 IoU thresholds");
  }
  double sum = 0.0;
  for (double t : thresholds) sum += mean_ap(images, t);
  return sum / static_cast<double>(thresholds.size());
}

// ---------------------------------------------------------------------------
// Scalar precision / recall / F1

struct PrfStrategy {
  enum class Kind { MaxF1, FixedThreshold };
  Kind kind = Kind::MaxF1;
  double threshold = 0.0;

  static PrfStrategy max_f1() { return {Kind::MaxF1, 0.0}; }
  static PrfStrategy fixed(double tau) { return {Kind::FixedThreshold, tau}; }
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double threshold = 0.0;  // confidence cut actually used
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

namespace detail {

inline Prf make_prf(std::size_t tp, std::size_t fp, std::size_t gt, double threshold) {
  Prf r;
  r.tp = tp;
  r.fp = fp;
  r.fn = gt - tp;
  r.threshold = threshold;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = gt > 0 ? static_cast<double>(tp) / static_cast<double>(gt) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace detail

/// Precision/recall/F1 for one class. Max-F1 sweeps every distinct
/// confidence as a cut (detections with confidence >= cut count) and keeps
/// the best F1, preferring the lower cut on ties.
inline Prf scalar_prf(std::span<const DetectionMatch> dets, std::size_t gt_count,
                      const PrfStrategy& strategy = PrfStrategy::max_f1()) {
  const auto sorted = detail::by_confidence(dets);
  if (strategy.kind == PrfStrategy::Kind::FixedThreshold) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (const auto& d : sorted) {
      if (d.confidence < strategy.threshold) break;
      (d.true_positive ? tp : fp)++;
    }
    return detail::make_prf(tp, fp, gt_count, strategy.threshold);
  }

  if (sorted.empty()) return detail::make_prf(0, 0, gt_count, 1.0);
  // F1 = 2TP / (TP + FP + GT); compare as exact integer fractions.
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t best_tp = 0;
  std::size_t best_fp = 0;
  double best_cut = sorted.front().confidence;
  bool have_best = false;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].true_positive ? tp : fp)++;
    if (i + 1 < sorted.size() && sorted[i + 1].confidence == sorted[i].confidence) continue;
    const auto num = static_cast<unsigned __int128>(2 * tp);
    const auto den = static_cast<unsigned __int128>(tp + fp + gt_count);
    const auto best_num = static_cast<unsigned __int128>(2 * best_tp);
    const auto best_den = static_cast<unsigned __int128>(best_tp + best_fp + gt_count);
    if (!have_best || num * best_den >= best_num * den) {
      best_tp = tp;
      best_fp = fp;
      best_cut = sorted[i].confidence;
      have_best = true;
    }
  }
  return detail::make_prf(best_tp, best_fp, gt_count, best_cut);
}

inline Prf scalar_prf(const MatchResult& matches, int class_id,
                      const PrfStrategy& strategy = PrfStrategy::max_f1()) {
  return scalar_prf(matches.for_class(class_id), matches.gt_count(class_id), strategy);
}

// ---------------------------------------------------------------------------
// Per-class and grouped metrics

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap50 = 0.0;
  double ap50_95 = 0.0;
  std::size_t support = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Metrics for every class with ground truth in `images`. Scalars and AP50
/// use IoU 0.5; AP50-95 averages AP over the ten thresholds.
inline std::map<int, ClassMetrics> evaluate_classes(std::span<const ImageEval> images,
                                                    const PrfStrategy& strategy = PrfStrategy::max_f1()) {
  const MatchResult at50 = match_dataset(images, 0.5);
  std::map<int, ClassMetrics> out;
  for (const auto& [cls, n] : at50.gt_counts) {
    if (n == 0) continue;
    const auto prf = scalar_prf(at50, cls, strategy);
    ClassMetrics& m = out[cls];
    m.precision = prf.precision;
    m.recall = prf.recall;
    m.f1 = prf.f1;
    m.support = n;
  }
  for (double t : kIouThresholds50To95) {
    const MatchResult matches = t == 0.5 ? at50 : match_dataset(images, t);
    for (auto& [cls, m] : out) {
      const double ap = average_precision(matches, cls);
      if (t == 0.5) m.ap50 = ap;
      m.ap50_95 += ap / static_cast<double>(kIouThresholds50To95.size());
    }
  }
  return out;
}

enum class ReportGroup { All, Humans, Inanimate };

inline constexpr std::array<ReportGroup, 3> kReportGroups{ReportGroup::All, ReportGroup::Humans,
                                                          ReportGroup::Inanimate};

constexpr std::string_view to_string(ReportGroup g) {
  switch (g) {
    case ReportGroup::All: return "All";
    case ReportGroup::Humans: return "Humans";
    case ReportGroup::Inanimate: return "Inanimate objects";
  }
  return "All";
}

inline std::optional<ReportGroup> parse_report_group(std::string_view s) {
  for (ReportGroup g : kReportGroups) {
    if (to_string(g) == s) return g;
  }
  return std::nullopt;
}

using GroupedMetrics = std::map<ReportGroup, ClassMetrics>;

namespace detail {

inline ClassMetrics macro_mean(const std::vector<const ClassMetrics*>& members) {
  ClassMetrics m;
  if (members.empty()) return m;
  for (const auto* c : members) {
    m.precision += c->precision;
    m.recall += c->recall;
    m.f1 += c->f1;
    m.ap50 += c->ap50;
    m.ap50_95 += c->ap50_95;
    m.support += c->support;
  }
  const auto n = static_cast<double>(members.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  m.ap50 /= n;
  m.ap50_95 /= n;
  return m;
}

}  // namespace detail

/// Unweighted mean of member classes for Humans, Inanimate objects and All.
/// A group with no classes in the taxonomy yields an all-zero row with zero
/// support; a group whose taxonomy classes were all absent is an error.
inline GroupedMetrics grouped_metrics(const std::map<int, ClassMetrics>& per_class,
                                      const ClassTaxonomy& taxonomy) {
  if (per_class.empty()) throw Error(ErrorCode::EmptyGroup, "no evaluated classes for group 'All'");
  GroupedMetrics out;
  std::vector<const ClassMetrics*> all;
  for (const auto& [cls, m] : per_class) {
    if (!taxonomy.contains(cls)) {
      throw Error(ErrorCode::InvalidArgument, "class id " + std::to_string(cls) + " not in taxonomy");
    }
    all.push_back(&m);
  }
  out[ReportGroup::All] = detail::macro_mean(all);
  for (auto [group, cls_group] : {std::pair{ReportGroup::Humans, ClassGroup::Human},
                                  std::pair{ReportGroup::Inanimate, ClassGroup::Inanimate}}) {
    const auto ids = taxonomy.members(cls_group);
    std::vector<const ClassMetrics*> members;
    for (int id : ids) {
      if (const auto it = per_class.find(id); it != per_class.end()) members.push_back(&it->second);
    }
    if (!ids.empty() && members.empty()) {
      throw Error(ErrorCode::EmptyGroup,
                  "no evaluated class in group '" + std::string(to_string(group)) + "'");
    }
    out[group] = detail::macro_mean(members);
  }
  return out;
}

}  // namespace maraug
