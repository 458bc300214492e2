// maraug: weather augmentation, grouped splitting, validation, detection
// evaluation and run comparison for aerial maritime datasets.
//
// Exit codes: 0 success, 1 operational failure, 2 validation findings.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "maraug/maraug.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitFindings = 2;

struct GlobalOptions {
  std::uint64_t seed = 42;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  int verbosity = 0;
};

void emit(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text;
  } else {
    maraug::write_text_file(out_file, text);
  }
}

maraug::TableFormat table_format(const std::string& name) {
  const auto f = maraug::parse_table_format(name);
  if (!f) throw maraug::Error(maraug::ErrorCode::InvalidArgument, "unknown format '" + name + "' (md|csv)");
  return *f;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string manifest;
  std::string params;
  std::string out;
};

int cmd_augment(const AugmentArgs& a, const GlobalOptions& g) {
  const auto params = maraug::load_params(a.params);
  const auto manifest = maraug::load_manifest(a.manifest);
  const auto plan = maraug::plan_augmentation(manifest, g.seed);
  const fs::path out_dir = a.out;
  auto extended = maraug::run_augmentation(manifest, plan, params, out_dir, g.workers);
  extended.notes.push_back("augmented with seed " + std::to_string(g.seed));
  maraug::save_manifest(extended, out_dir / "manifest.json");
  maraug::write_text_file(out_dir / "plan.json", maraug::plan_to_json(plan).dump(2) + "\n");
  maraug::write_text_file(out_dir / "params.json", maraug::params_to_json(params).dump(2) + "\n");
  std::cerr << "augment: " << manifest.records.size() << " sources -> " << extended.records.size()
            << " records in " << (out_dir / "manifest.json").string() << "\n";
  return kExitOk;
}

struct SplitArgs {
  std::string manifest;
  std::string out;
  std::vector<double> ratios{0.70, 0.15, 0.15};
};

int cmd_split(const SplitArgs& a, const GlobalOptions& g) {
  const auto manifest = maraug::load_manifest(a.manifest);
  const maraug::SplitRatios ratios{a.ratios.at(0), a.ratios.at(1), a.ratios.at(2)};
  const auto split = maraug::grouped_split(manifest, ratios, g.seed);
  const fs::path out = a.out.empty() ? fs::path(a.manifest) : fs::path(a.out);
  maraug::save_manifest(split, out);
  std::size_t counts[4] = {};
  for (const auto& r : split.records) ++counts[static_cast<int>(r.split)];
  std::cerr << "split: train=" << counts[1] << " val=" << counts[2] << " test=" << counts[3]
            << " images -> " << out.string() << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& manifest_path, const GlobalOptions&) {
  const auto manifest = maraug::load_manifest(manifest_path);
  const auto violations = maraug::validate_manifest(manifest);
  for (const auto& v : violations) std::cout << v.describe() << "\n";
  if (violations.empty()) {
    std::cout << "ok: " << manifest.records.size() << " records, no violations\n";
    return kExitOk;
  }
  std::cout << violations.size() << " violation(s)\n";
  return kExitFindings;
}

struct EvalArgs {
  std::string manifest;
  std::string preds;
  std::string out = "report.json";
  std::string label;
  bool all_splits = false;
  double conf_threshold = -1.0;
  std::vector<std::string> notes;
};

int cmd_eval(const EvalArgs& a, const GlobalOptions& g) {
  const auto manifest = maraug::load_manifest(a.manifest);
  maraug::EvalOptions opts;
  opts.test_split_only = !a.all_splits;
  opts.label = a.label.empty() ? fs::path(a.preds).filename().string() : a.label;
  if (opts.label.empty()) opts.label = "run";
  if (a.conf_threshold >= 0.0) opts.strategy = maraug::PrfStrategy::fixed(a.conf_threshold);
  auto outcome = maraug::evaluate_predictions(manifest, a.preds, opts);
  outcome.report.metadata.seed = g.seed;
  outcome.report.metadata.notes = a.notes;
  if (!outcome.diagnostics.empty()) {
    std::cerr << "eval: " << outcome.diagnostics.size() << " image(s) without prediction files\n";
    if (g.verbosity > 0) {
      for (const auto& d : outcome.diagnostics) std::cerr << "  " << d << "\n";
    }
  }
  maraug::save_report(outcome.report, a.out);
  std::cout << maraug::render_table({outcome.report}, maraug::TableFormat::Markdown);
  return kExitOk;
}

struct CompareArgs {
  std::string baseline;
  std::string treatment;
  std::string format = "md";
  std::string out;
};

int cmd_compare(const CompareArgs& a, const GlobalOptions&) {
  const auto cmp = maraug::compare_runs(maraug::load_report(a.baseline), maraug::load_report(a.treatment));
  emit(maraug::render_comparison(cmp, table_format(a.format)), a.out);
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string format = "md";
  std::string out;
};

int cmd_report(const ReportArgs& a, const GlobalOptions&) {
  std::vector<maraug::RunReport> reports;
  for (const auto& r : a.runs) reports.push_back(maraug::load_report(r));
  emit(maraug::render_table(reports, table_format(a.format)), a.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weather augmentation, leak-free splitting and detection evaluation for aerial SAR datasets",
               "maraug"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Global seed (default 42)")->envname("MARAUG_SEED");
  app.add_option("--workers", g.workers, "Worker threads for per-image work")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbosity, "More diagnostics");

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Double a DayClear dataset with one synthetic weather variant per image");
  augment->add_option("--manifest", aug.manifest, "Source manifest")->required();
  augment->add_option("--params", aug.params, "AugmentParams JSON")->required();
  augment->add_option("--out", aug.out, "Output directory")->required();

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "Assign train/val/test by source group");
  split->add_option("--manifest", sp.manifest, "Manifest to split")->required();
  split->add_option("--out", sp.out, "Output manifest (default: overwrite input)");
  split->add_option("--ratios", sp.ratios, "Train, val and test fractions")->expected(3);

  std::string validate_manifest;
  auto* validate = app.add_subcommand("validate", "Check files, labels, class ids and split leakage");
  validate->add_option("--manifest", validate_manifest, "Manifest to check")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score per-image prediction files against ground truth");
  eval->add_option("--manifest", ev.manifest, "Ground-truth manifest")->required();
  eval->add_option("--preds", ev.preds, "Directory of <image_id>.txt prediction files")->required();
  eval->add_option("--out", ev.out, "RunReport JSON output");
  eval->add_option("--label", ev.label, "Run label (default: predictions directory name)");
  eval->add_flag("--all-splits", ev.all_splits, "Evaluate every image, not only the test split");
  eval->add_option("--conf-threshold", ev.conf_threshold,
                   "Fixed confidence cut for P/R/F1 (default: max-F1 sweep)")
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--note", ev.notes, "Free-form run note (repeatable)");

  CompareArgs cp;
  auto* compare = app.add_subcommand("compare", "Per-group deltas between a baseline and a treatment run");
  compare->add_option("--baseline", cp.baseline, "Baseline RunReport JSON")->required();
  compare->add_option("--treatment", cp.treatment, "Treatment RunReport JSON")->required();
  compare->add_option("--format", cp.format, "md or csv");
  compare->add_option("--out", cp.out, "Write to file instead of stdout");

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Render RunReports as a metric table");
  report->add_option("--runs", rp.runs, "RunReport JSON files")->required()->expected(1, -1);
  report->add_option("--format", rp.format, "md or csv");
  report->add_option("--out", rp.out, "Write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFailure;
  }

  try {
    if (*augment) return cmd_augment(aug, g);
    if (*split) return cmd_split(sp, g);
    if (*validate) return cmd_validate(validate_manifest, g);
    if (*eval) return cmd_eval(ev, g);
    if (*compare) return cmd_compare(cp, g);
    if (*report) return cmd_report(rp, g);
  } catch (const std::exception& e) {
    std::cerr << "maraug: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
