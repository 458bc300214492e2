// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "maraug/maraug.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace maraug;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

struct Criterion {
  int number;
  std::string name;
  double budget_s;
  std::function<Outcome()> body;
};

// --- 1 ----------------------------------------------------------------------

Outcome pixel_formulas() {
  Outcome o;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> factor(0.0, 3.0);
  std::uniform_int_distribution<int> byte(0, 255);
  auto rand_byte = [&] { return static_cast<std::uint8_t>(byte(rng)); };
  std::size_t cases = 0;
  for (int trial = 0; trial < 10'000 && o.pass; ++trial) {
    const std::size_t w = 1 + rng() % 4, h = 1 + rng() % 4;
    std::vector<std::uint8_t> px(w * h * 3);
    for (auto& v : px) v = rand_byte();
    const ImageBuffer img(w, h, px);
    const RgbColor layer{rand_byte(), rand_byte(), rand_byte()};
    const std::uint8_t lc[3] = {layer.r, layer.g, layer.b};
    const double alpha = unit(rng), f = factor(rng);
    const ChannelGains gains{factor(rng), factor(rng), factor(rng)};
    AlphaTexture tex(w, h, rand_byte());
    for (auto& a : tex.alpha) a = unit(rng) < 0.25 ? 0.0 : unit(rng);

    const auto b = blend_with_layer(img, layer, alpha);
    const auto br = adjust_brightness(img, f);
    const auto c = adjust_contrast(img, f);
    const auto g = apply_channel_gains(img, gains);
    const auto ov = overlay_texture(img, tex);
    for (std::size_t i = 0; i < px.size(); ++i) {
      const auto ch = i % 3;
      o.require(b.data()[i] == oracle::blend(px[i], lc[ch], alpha), "blend mismatch");
      o.require(br.data()[i] == oracle::brightness(px[i], f), "brightness mismatch");
      o.require(c.data()[i] == oracle::contrast(px[i], f), "contrast mismatch");
      o.require(g.data()[i] == oracle::gain(px[i], gains[ch]), "gain mismatch");
      o.require(ov.data()[i] == oracle::overlay(px[i], tex.value, tex.alpha[i / 3]), "overlay mismatch");
    }
    o.require(blend_with_layer(img, layer, 0.0) == img, "alpha=0 not a no-op");
    o.require(adjust_brightness(img, 1.0) == img, "brightness 1 not a no-op");
    o.require(adjust_contrast(img, 1.0) == img, "contrast 1 not a no-op");
    o.require(apply_channel_gains(img, {1.0, 1.0, 1.0}) == img, "unit gains not a no-op");
    o.require(overlay_texture(img, AlphaTexture(w, h, tex.value)) == img, "zero texture not a no-op");
    cases += px.size();
  }
  if (o.pass) o.detail = std::to_string(cases) + " channel values x 5 primitives exact";
  return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome distribution() {
  Outcome o;
  DatasetManifest m;
  m.taxonomy = testutil::maritime_taxonomy();
  m.records.reserve(13'282);
  for (std::size_t i = 0; i < 13'282; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%05zu", i);
    m.records.push_back({id, std::string(id) + ".png", std::string(id) + ".txt", id, WeatherCondition::DayClear,
                         Split::Unassigned});
  }
  const auto plan = plan_augmentation(m, 42);
  const std::size_t total = m.records.size() + plan.entries.size();
  std::map<WeatherCondition, std::size_t> counts;
  counts[WeatherCondition::DayClear] = m.records.size();
  for (const auto& e : plan.entries) ++counts[e.condition];
  o.require(total == 26'564, "total " + std::to_string(total));
  o.require(2 * counts[WeatherCondition::DayClear] == total, "day-clear is not exactly half");
  std::size_t lo = SIZE_MAX, hi = 0;
  for (auto c : kSyntheticConditions) {
    lo = std::min(lo, counts[c]);
    hi = std::max(hi, counts[c]);
  }
  o.require(hi - lo <= 1, "synthetic counts spread " + std::to_string(hi - lo));
  o.detail = "total " + std::to_string(total) + ", day-clear " + std::to_string(counts[WeatherCondition::DayClear]) +
             ", synthetic " + std::to_string(lo) + ".." + std::to_string(hi);
  return o;
}

// --- 3 ----------------------------------------------------------------------

Outcome leakage() {
  Outcome o;
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<std::size_t> n_groups(1, 2000);
  std::uniform_int_distribution<std::size_t> size(1, 4);
  const double ratios[3] = {0.70, 0.15, 0.15};
  std::size_t total_records = 0;
  for (int trial = 0; trial < 500 && o.pass; ++trial) {
    const std::size_t G = n_groups(rng);
    DatasetManifest m;
    m.taxonomy = testutil::maritime_taxonomy();
    for (std::size_t g = 0; g < G; ++g) {
      const auto gid = "g" + std::to_string(g);
      for (std::size_t k = size(rng); k > 0; --k) {
        const auto id = gid + "_" + std::to_string(k);
        m.records.push_back({id, {}, {}, gid, WeatherCondition::DayClear, Split::Unassigned});
      }
    }
    total_records += m.records.size();
    const auto split = grouped_split(m, {}, rng());
    std::map<std::string, Split> of_group;
    std::size_t n[4] = {};
    for (const auto& r : split.records) {
      const auto [it, fresh] = of_group.emplace(r.group_id, r.split);
      o.require(r.split != Split::Unassigned, "unassigned record");
      o.require(it->second == r.split, "group " + r.group_id + " spans splits");
      if (fresh) ++n[static_cast<int>(r.split)];
    }
    for (int k = 0; k < 3; ++k) {
      o.require(std::abs(static_cast<double>(n[k + 1]) - ratios[k] * static_cast<double>(G)) < 1.0,
                "largest-remainder bound violated for G=" + std::to_string(G));
    }
    o.require(n[1] + n[2] + n[3] == G, "groups lost");
  }
  DatasetManifest hundred;
  hundred.taxonomy = testutil::maritime_taxonomy();
  for (int i = 0; i < 100; ++i) {
    const auto id = "h" + std::to_string(i);
    hundred.records.push_back({id, {}, {}, id, WeatherCondition::DayClear, Split::Unassigned});
  }
  std::size_t n[4] = {};
  for (const auto& r : grouped_split(hundred, {}, 42).records) ++n[static_cast<int>(r.split)];
  o.require(n[1] == 70 && n[2] == 15 && n[3] == 15, "100 groups not 70/15/15");
  if (o.pass) {
    o.detail = "500 manifests, " + std::to_string(total_records) + " records; 100 groups -> " +
               std::to_string(n[1]) + "/" + std::to_string(n[2]) + "/" + std::to_string(n[3]);
  }
  return o;
}

// --- 4 ----------------------------------------------------------------------

// Corners are drawn on the 1/1000 lattice so the 1000x1000 raster is exact
// up to floating-point noise.
Outcome iou_oracle() {
  Outcome o;
  std::mt19937_64 rng(4004);
  std::uniform_int_distribution<int> milli(0, 1000);
  double worst = 0.0;
  std::size_t overlapping = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto corners = [&] {
      int a = milli(rng), b = milli(rng);
      while (a == b) b = milli(rng);
      return std::pair{std::min(a, b) / 1e3, std::max(a, b) / 1e3};
    };
    const auto [ax0, ax1] = corners();
    const auto [ay0, ay1] = corners();
    const auto [bx0, bx1] = corners();
    const auto [by0, by1] = corners();
    const BoundingBox a{(ax0 + ax1) / 2, (ay0 + ay1) / 2, ax1 - ax0, ay1 - ay0};
    const BoundingBox b{(bx0 + bx1) / 2, (by0 + by1) / 2, bx1 - bx0, by1 - by0};
    const double v = iou(a, b);
    const double ref = oracle::raster_iou(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1, 1000);
    worst = std::max(worst, std::abs(v - ref));
    overlapping += ref > 0.0;
    o.require(v == iou(b, a), "iou not symmetric");
    o.require(std::abs(iou(a, a) - 1.0) < 1e-12, "iou(a,a) != 1");
  }
  o.require(worst <= 1e-3, "max deviation " + std::to_string(worst));
  const double canonical = iou(Rect{0, 0, 2, 2}, Rect{1, 1, 3, 3});
  o.require(std::abs(canonical - 1.0 / 7.0) <= 1e-9, "canonical case " + std::to_string(canonical));
  char buf[128];
  std::snprintf(buf, sizeof buf, "1000 pairs (%zu overlapping), max |iou - raster| = %.2e; 1/7 case err %.1e",
                overlapping, worst, std::abs(canonical - 1.0 / 7.0));
  if (o.pass) o.detail = buf;
  return o;
}

// --- 5 ----------------------------------------------------------------------

Outcome ap_oracle() {
  Outcome o;
  auto check = [&](const std::vector<DetectionMatch>& dets, std::size_t g) {
    auto ordered = dets;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& x, const auto& y) { return x.confidence > y.confidence; });
    std::vector<bool> flags;
    for (const auto& d : ordered) flags.push_back(d.true_positive);
    const double got = average_precision(dets, g);
    const double want = oracle::staircase_ap(flags, g);
    o.require(std::abs(got - want) <= 1e-9, "AP " + std::to_string(got) + " vs oracle " + std::to_string(want));
    return got;
  };

  const std::vector<DetectionMatch> worked{{"i", 0, 0.9, true, 0}, {"i", 0, 0.8, false, {}}, {"i", 0, 0.7, true, 1}};
  const double w = check(worked, 2);
  o.require(std::abs(w - 5.0 / 6.0) <= 1e-9, "worked case " + std::to_string(w));

  // Half the instances go through real matching on random boxes; the rest
  // use random TP flags with tied confidences.
  std::mt19937_64 rng(5005);
  std::uniform_real_distribution<double> pos(0.2, 0.8);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (int trial = 0; trial < 10'000 && o.pass; ++trial) {
    const std::size_t g = 1 + rng() % 5;
    const std::size_t n = rng() % 11;
    if (trial % 2 == 0) {
      std::vector<Annotation> gts;
      for (std::size_t k = 0; k < g; ++k) gts.push_back({0, {pos(rng), pos(rng), 0.2, 0.2}});
      std::vector<Detection> dets;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& near = gts[rng() % g].box;
        dets.push_back({0, {near.cx + jitter(rng), near.cy + jitter(rng), 0.2, 0.2}, (1 + rng() % 10) / 10.0});
      }
      const auto m = match_detections("img", dets, gts, 0.5);
      check(m.detections, m.gt_count(0));
    } else {
      std::vector<DetectionMatch> dets;
      std::size_t tp = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const bool hit = tp < g && rng() % 2 == 0;
        tp += hit;
        dets.push_back({"img", 0, (1 + rng() % 6) / 6.0, hit, {}});
      }
      check(dets, g);
    }
  }
  if (o.pass) o.detail = "10000 random instances + worked case (AP = " + std::to_string(w) + ")";
  return o;
}

// --- 6 ----------------------------------------------------------------------

struct CliRun {
  int code;
  std::string err;
};

CliRun run_cli(const testutil::TempDir& tmp, const std::string& args) {
  const auto err = tmp / "stderr.txt";
  const std::string cmd =
      "'" + std::string(MARAUG_CLI_PATH) + "' " + args + " > /dev/null 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text_file(err)};
}

Outcome end_to_end_eval() {
  Outcome o;
  testutil::TempDir tmp("maraug-acc6");
  const auto file = testutil::write_dataset(tmp.path() / "ds", 40, 16, 16);
  auto m = load_manifest(file);
  for (auto& r : m.records) {
    std::vector<Detection> dets;
    double conf = 0.9;
    for (const auto& a : parse_label_file(read_text_file(m.resolve(r.label_path)))) {
      dets.push_back({a.class_id, a.box, conf});
      conf -= 0.1;
    }
    write_text_file(tmp / "perfect" / (r.image_id + ".txt"), write_prediction_file(dets));
  }
  save_manifest(grouped_split(m, {}, 42), tmp / "split.json");
  fs::create_directories(tmp / "empty");
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  const auto perfect = run_cli(tmp, "eval --manifest " + q(tmp / "split.json") + " --preds " +
                                        q(tmp / "perfect") + " --out " + q(tmp / "perfect.json"));
  o.require(perfect.code == 0, "perfect eval exit " + std::to_string(perfect.code) + ": " + perfect.err);
  const auto empty = run_cli(tmp, "eval --manifest " + q(tmp / "split.json") + " --preds " + q(tmp / "empty") +
                                      " --out " + q(tmp / "empty.json"));
  o.require(empty.code == 0, "empty eval exit " + std::to_string(empty.code) + ": " + empty.err);
  if (!o.pass) return o;

  const auto pr = load_report(tmp / "perfect.json");
  const auto er = load_report(tmp / "empty.json");
  for (const auto& row : table_rows({pr})) {
    for (double v : row.values) o.require(detail::fixed2(v) == "1.00", "perfect " + row.group + " not 1.00");
  }
  for (const auto& row : table_rows({er})) {
    o.require(detail::fixed2(row.values[1]) == "0.00", "empty " + row.group + " recall not 0.00");
  }
  if (o.pass) {
    o.detail = "perfect: P=R=F1=mAP50=mAP50-95=1.00 on " + std::to_string(pr.metadata.counts.at("images")) +
               " test images; empty: recall 0.00";
  }
  return o;
}

// --- 7 ----------------------------------------------------------------------

Outcome reporting_arithmetic() {
  Outcome o;
  RunReport v5;
  v5.label = "YOLOv5l augmented";
  v5.rows = {{ReportGroup::All, {0.95, 0.90, 0.92, 0.94, 0.60, 0}},
             {ReportGroup::Humans, {0.96, 0.91, 0.94, 0.96, 0.63, 0}},
             {ReportGroup::Inanimate, {0.94, 0.89, 0.91, 0.92, 0.57, 0}}};
  const auto csv = render_table({v5}, TableFormat::Csv);
  std::string humans;
  for (const auto& row : parse_table_csv(csv)) {
    if (row.group != "Humans") continue;
    for (double v : row.values) humans += (humans.empty() ? "" : ", ") + detail::fixed2(v);
  }
  o.require(humans == "0.96, 0.91, 0.94, 0.96, 0.63", "Humans row '" + humans + "'");

  auto recall_run = [](std::string label, double human_recall) {
    RunReport r;
    r.label = std::move(label);
    const ClassMetrics base{0.9, 0.9, 0.9, 0.9, 0.6, 0};
    ClassMetrics h = base;
    h.recall = human_recall;
    r.rows = {{ReportGroup::All, base}, {ReportGroup::Humans, h}, {ReportGroup::Inanimate, base}};
    return r;
  };
  const auto cmp = compare_runs(recall_run("YOLOv10l", 0.87), recall_run("YOLOv10l augmented", 0.91));
  const auto& cell = cmp.at(ReportGroup::Humans, Metric::Recall);
  const auto delta = detail::signed_fixed(cell.delta, 2);
  const auto pct = detail::signed_fixed(cell.improvement_pct.value_or(0.0), 1);
  o.require(delta == "+0.04", "delta " + delta);
  o.require(render_comparison(cmp, TableFormat::Markdown).find("| +0.04 |") != std::string::npos,
            "rendered comparison lacks +0.04");
  o.detail = "Humans row \"" + humans + "\"; recall 0.87 -> 0.91: " + delta + " (" + pct + "%)";
  return o;
}

// --- 8 ----------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  testutil::TempDir tmp("maraug-acc8");
  const auto m = load_manifest(testutil::write_dataset(tmp.path() / "ds", 100, 96, 72));
  const AugmentParams params;
  const auto plan = plan_augmentation(m, 42);
  std::set<std::uint64_t> digests;
  for (unsigned workers : {1u, 4u, 16u}) {
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = tmp / ("out_w" + std::to_string(workers) + "_" + std::to_string(rep));
      const auto extended = run_augmentation(m, plan, params, out, workers);
      save_manifest(extended, out / "manifest.json");
      digests.insert(testutil::tree_digest(out));
    }
  }
  o.require(digests.size() == 1, std::to_string(digests.size()) + " distinct output trees");

  const auto a = generate_rain_texture(96, 72, image_seed(42, "img0000"), params);
  const auto b = generate_rain_texture(96, 72, image_seed(43, "img0000"), params);
  o.require(a.alpha != b.alpha, "rain texture unchanged by seed");
  run_augmentation(m, plan_augmentation(m, 43), params, tmp / "out_seed43", 4);
  std::size_t rain_changed = 0, rain_total = 0;
  const auto base = tmp / "out_w1_0/images";
  for (const auto& e : plan_augmentation(m, 43).entries) {
    if (e.condition != WeatherCondition::DayRain && e.condition != WeatherCondition::NightRain) continue;
    const auto name = variant_id(e.source_image_id, e.condition) + ".png";
    if (!fs::exists(base / name)) continue;  // condition differs under seed 42
    ++rain_total;
    rain_changed += read_text_file(base / name) != read_text_file(tmp / "out_seed43/images" / name);
  }
  o.require(rain_total == 0 || rain_changed == rain_total, "a rain variant is identical across seeds");
  o.require(testutil::tree_digest(tmp / "out_seed43") != *digests.begin(), "seed change left tree unchanged");
  if (o.pass) {
    o.detail = "6 runs (workers 1/4/16, twice each) byte-identical; seed 43 changes rain texture and " +
               std::to_string(rain_changed) + "/" + std::to_string(rain_total) + " shared rain variants";
  }
  return o;
}

// --- 9 ----------------------------------------------------------------------

double throughput_seconds = 0.0;

Outcome throughput() {
  Outcome o;
  testutil::TempDir tmp("maraug-acc9");
  const auto m = load_manifest(testutil::write_dataset(tmp.path() / "ds", 1000, 640, 640));
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  const auto extended = run_augmentation(m, plan_augmentation(m, 42), AugmentParams{}, tmp / "out", workers);
  throughput_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(extended.records.size() == 2000, "expected 2000 records");
  char buf[128];
  std::snprintf(buf, sizeof buf, "1000 x 640x640 augmented in %.1f s with %u worker(s) (fixture setup excluded)",
                throughput_seconds, workers);
  o.detail = buf;
  o.require(throughput_seconds < 60.0, buf);
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "pixel formulas match scalar reference", 5.0, pixel_formulas},
      {2, "augmentation distribution", 1.0, distribution},
      {3, "grouped split never leaks", 10.0, leakage},
      {4, "IoU agrees with raster oracle", 30.0, iou_oracle},
      {5, "AP agrees with staircase oracle", 30.0, ap_oracle},
      {6, "end-to-end eval via CLI", 10.0, end_to_end_eval},
      {7, "reporting arithmetic", 1.0, reporting_arithmetic},
      {8, "augmentation determinism", 60.0, determinism},
      {9, "augmentation throughput", 0.0, throughput},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s && o.pass) {
      o.pass = false;
      o.detail = "over time budget; " + o.detail;
    }
    failures += !o.pass;
    std::printf("%s  [%d] %s (%.2f s%s) %s\n", o.pass ? "PASS" : "FAIL", c.number, c.name.c_str(), secs,
                c.budget_s > 0.0 ? (", budget " + std::to_string(static_cast<int>(c.budget_s)) + " s").c_str()
                                 : "",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
