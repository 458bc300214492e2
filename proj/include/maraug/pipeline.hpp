#pragma once

// Dataset-level evaluation: ground truth from a manifest, predictions from
// a directory of per-image files, scored into a RunReport.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "maraug/datasetio.hpp"
#include "maraug/detmetrics.hpp"
#include "maraug/error.hpp"
#include "maraug/random.hpp"
#include "maraug/reporting.hpp"

namespace maraug {

struct EvalOptions {
  bool test_split_only = true;
  PrfStrategy strategy = PrfStrategy::max_f1();
  std::string label = "run";
};

struct EvalOutcome {
  RunReport report;
  std::vector<std::string> diagnostics;  // e.g. images without a prediction file
};

/// Location-independent fingerprint of a manifest: taxonomy plus every
/// record's id, group, condition and split.
inline std::string manifest_digest(const DatasetManifest& manifest) {
  nlohmann::json j = {{"taxonomy", taxonomy_to_json(manifest.taxonomy)}};
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : manifest.records) {
    recs.push_back({r.image_id, r.group_id, to_string(r.condition), to_string(r.split)});
  }
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return digest;
}

/// Predictions for image `id` are read from `<preds_dir>/<id>.txt`. A missing
/// file means the detector found nothing there; an unreadable or malformed
/// one is an error.
inline EvalOutcome evaluate_predictions(const DatasetManifest& manifest, const fs::path& preds_dir,
                                        const EvalOptions& opts = {}) {
  if (!fs::is_directory(preds_dir)) {
    throw Error(ErrorCode::Io, "predictions directory not found", preds_dir.string());
  }
  EvalOutcome out;
  std::vector<ImageEval> images;
  std::size_t gt_total = 0;
  std::size_t det_total = 0;
  for (const auto& r : manifest.records) {
    if (opts.test_split_only && r.split != Split::Test) continue;
    ImageEval im;
    im.image_id = r.image_id;
    const auto label_path = manifest.resolve(r.label_path);
    try {
      im.ground_truth = parse_label_file(read_text_file(label_path));
    } catch (const Error& e) {
      throw Error(e.code(), e.message(), label_path.string(), e.line());
    }
    for (const auto& a : im.ground_truth) {
      if (!manifest.taxonomy.contains(a.class_id)) {
        throw Error(ErrorCode::OutOfRange, "class id " + std::to_string(a.class_id) + " not in taxonomy",
                    label_path.string());
      }
    }
    const auto pred_path = preds_dir / (r.image_id + ".txt");
    if (fs::exists(pred_path)) {
      try {
        im.detections = parse_prediction_file(read_text_file(pred_path));
      } catch (const Error& e) {
        throw Error(e.code(), e.message(), pred_path.string(), e.line());
      }
    } else {
      out.diagnostics.push_back("no predictions for '" + r.image_id + "' (" + pred_path.generic_string() +
                                "), scored as zero detections");
    }
    gt_total += im.ground_truth.size();
    det_total += im.detections.size();
    images.push_back(std::move(im));
  }
  if (images.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                opts.test_split_only ? "manifest has no test-split images" : "manifest has no images");
  }

  RunReport& rep = out.report;
  rep.label = opts.label;
  rep.per_class = evaluate_classes(images, opts.strategy);
  for (const auto& [cls, m] : rep.per_class) rep.class_names[cls] = manifest.taxonomy.at(cls).name;
  rep.rows = grouped_metrics(rep.per_class, manifest.taxonomy);
  rep.metadata.counts = {{"images", images.size()},
                         {"ground_truth", gt_total},
                         {"detections", det_total},
                         {"missing_prediction_files", out.diagnostics.size()}};
  rep.metadata.config_digest = manifest_digest(manifest);
  return out;
}

}  // namespace maraug
