#pragma once

// YOLO label files, dataset manifests, dataset merging and the grouped
// train/val/test split.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "maraug/error.hpp"
#include "maraug/random.hpp"
#include "maraug/weather_condition.hpp"

namespace maraug {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Geometry and labels

/// Normalized center/size box, YOLO convention.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const noexcept {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    return unit(cx) && unit(cy) && unit(w) && unit(h) && w > 0.0 && h > 0.0;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
  friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;
};

struct Annotation {
  int class_id = 0;
  BoundingBox box;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Detection {
  int class_id = 0;
  BoundingBox box;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// A problem found while reading a label or prediction file.
struct LabelIssue {
  ErrorCode code;  // MalformedLine or OutOfRange
  std::size_t line;
  std::string message;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline std::optional<double> to_double(std::string_view tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline std::optional<long long> to_integer(std::string_view tok) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

// Shared line scanner for "class cx cy w h [confidence]".
template <typename Row, typename Build>
std::vector<Row> scan_rows(std::string_view text, std::size_t fields,
                           std::vector<LabelIssue>& issues, Build&& build) {
  std::vector<Row> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;

    const auto toks = split_ws(line);
    if (toks.size() != fields) {
      issues.push_back({ErrorCode::MalformedLine, line_no,
                        "expected " + std::to_string(fields) + " fields, got " +
                            std::to_string(toks.size())});
      continue;
    }
    const auto cls = to_integer(toks[0]);
    std::array<double, 5> nums{};
    bool numeric = cls.has_value();
    for (std::size_t i = 1; i < fields && numeric; ++i) {
      const auto v = to_double(toks[i]);
      numeric = v.has_value();
      if (numeric) nums[i - 1] = *v;
    }
    if (!numeric) {
      issues.push_back({ErrorCode::MalformedLine, line_no,
                        "non-numeric field in '" + std::string(line) + "'"});
      continue;
    }
    if (*cls < 0 || *cls > 1'000'000) {
      issues.push_back({ErrorCode::OutOfRange, line_no,
                        "class id " + std::to_string(*cls) + " out of range"});
      continue;
    }
    const BoundingBox box{nums[0], nums[1], nums[2], nums[3]};
    if (!box.valid()) {
      issues.push_back({ErrorCode::OutOfRange, line_no,
                        "box outside [0,1] or degenerate in '" +
                            std::string(line) + "'"});
      continue;
    }
    if (auto row = build(static_cast<int>(*cls), box, nums[4], line_no, issues)) {
      rows.push_back(*row);
    }
  }
  return rows;
}

[[noreturn]] inline void throw_issue(const LabelIssue& issue) {
  throw Error(issue.code, issue.message, {}, issue.line);
}

}  // namespace detail

/// Lenient label scan: returns every well-formed annotation and records one
/// issue per bad line instead of stopping at the first.
inline std::vector<Annotation> scan_label_text(std::string_view text,
                                               std::vector<LabelIssue>& issues) {
  return detail::scan_rows<Annotation>(
      text, 5, issues,
      [](int cls, const BoundingBox& box, double, std::size_t,
         std::vector<LabelIssue>&) -> std::optional<Annotation> {
        return Annotation{cls, box};
      });
}

inline std::vector<Detection> scan_prediction_text(
    std::string_view text, std::vector<LabelIssue>& issues) {
  return detail::scan_rows<Detection>(
      text, 6, issues,
      [](int cls, const BoundingBox& box, double conf, std::size_t line,
         std::vector<LabelIssue>& out) -> std::optional<Detection> {
        if (!(conf >= 0.0 && conf <= 1.0)) {
          out.push_back({ErrorCode::OutOfRange, line,
                         "confidence " + std::to_string(conf) +
                             " outside [0,1]"});
          return std::nullopt;
        }
        return Detection{cls, box, conf};
      });
}

/// Strict parse of a YOLO label file; throws on the first bad line.
inline std::vector<Annotation> parse_label_file(std::string_view text) {
  std::vector<LabelIssue> issues;
  auto rows = scan_label_text(text, issues);
  if (!issues.empty()) detail::throw_issue(issues.front());
  return rows;
}

/// Strict parse of a prediction file ("class cx cy w h confidence").
inline std::vector<Detection> parse_prediction_file(std::string_view text) {
  std::vector<LabelIssue> issues;
  auto rows = scan_prediction_text(text, issues);
  if (!issues.empty()) detail::throw_issue(issues.front());
  return rows;
}

inline std::string write_label_file(const std::vector<Annotation>& annotations) {
  std::string out;
  char buf[128];
  for (const auto& a : annotations) {
    const int n = std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n",
                                a.class_id, a.box.cx, a.box.cy, a.box.w, a.box.h);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

inline std::string write_prediction_file(const std::vector<Detection>& dets) {
  std::string out;
  char buf[160];
  for (const auto& d : dets) {
    const int n = std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f %.6f\n",
                                d.class_id, d.box.cx, d.box.cy, d.box.w,
                                d.box.h, d.confidence);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open file for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failed", path.string());
  return std::move(ss).str();
}

inline void write_text_file(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::WriteFailure, "cannot open file for writing", path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::WriteFailure, "write failed", path.string());
}

// ---------------------------------------------------------------------------
// Taxonomy

enum class ClassGroup { Human, Inanimate };

constexpr std::string_view to_string(ClassGroup g) {
  return g == ClassGroup::Human ? "human" : "inanimate";
}

struct ClassEntry {
  std::string name;
  ClassGroup group = ClassGroup::Inanimate;

  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

/// Class ids are positions in `entries`, so they are dense from 0.
class ClassTaxonomy {
 public:
  ClassTaxonomy() = default;
  explicit ClassTaxonomy(std::vector<ClassEntry> entries)
      : entries_(std::move(entries)) {
    validate();
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(int class_id) const noexcept {
    return class_id >= 0 && static_cast<std::size_t>(class_id) < entries_.size();
  }
  const ClassEntry& at(int class_id) const {
    if (!contains(class_id)) {
      throw Error(ErrorCode::OutOfRange,
                  "unknown class id " + std::to_string(class_id));
    }
    return entries_[static_cast<std::size_t>(class_id)];
  }
  const std::vector<ClassEntry>& entries() const noexcept { return entries_; }

  std::vector<int> members(ClassGroup g) const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].group == g) ids.push_back(static_cast<int>(i));
    }
    return ids;
  }

  friend bool operator==(const ClassTaxonomy&, const ClassTaxonomy&) = default;

 private:
  void validate() const {
    std::set<std::string> names;
    for (const auto& e : entries_) {
      if (e.name.empty()) throw Error(ErrorCode::InvalidArgument, "class with empty name");
      if (!names.insert(e.name).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate class name '" + e.name + "'");
      }
    }
    if (members(ClassGroup::Human).empty()) {
      throw Error(ErrorCode::InvalidArgument, "taxonomy needs at least one human class");
    }
  }

  std::vector<ClassEntry> entries_;
};

// ---------------------------------------------------------------------------
// Manifest

enum class Split { Unassigned, Train, Val, Test };

constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "unassigned";
}

inline std::optional<Split> parse_split(std::string_view s) {
  for (Split v : {Split::Unassigned, Split::Train, Split::Val, Split::Test}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

struct ManifestRecord {
  std::string image_id;
  fs::path image_path;
  fs::path label_path;
  std::string group_id;
  WeatherCondition condition = WeatherCondition::DayClear;
  Split split = Split::Unassigned;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

/// Records plus taxonomy. Relative record paths resolve against `base_dir`
/// (the directory of the manifest file it was loaded from).
struct DatasetManifest {
  std::vector<ManifestRecord> records;
  ClassTaxonomy taxonomy;
  std::vector<std::string> notes;
  fs::path base_dir;

  fs::path resolve(const fs::path& p) const {
    if (p.is_absolute() || base_dir.empty()) return p;
    return base_dir / p;
  }

  /// Copy with every record path made absolute and base_dir cleared.
  DatasetManifest absolutized() const {
    DatasetManifest out = *this;
    for (auto& r : out.records) {
      r.image_path = fs::absolute(resolve(r.image_path)).lexically_normal();
      r.label_path = fs::absolute(resolve(r.label_path)).lexically_normal();
    }
    out.base_dir.clear();
    return out;
  }

  const ManifestRecord* find(std::string_view image_id) const {
    for (const auto& r : records) {
      if (r.image_id == image_id) return &r;
    }
    return nullptr;
  }
};

inline nlohmann::json taxonomy_to_json(const ClassTaxonomy& tax) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < tax.size(); ++i) {
    const auto& e = tax.entries()[i];
    arr.push_back({{"id", i}, {"name", e.name}, {"group", to_string(e.group)}});
  }
  return arr;
}

inline ClassTaxonomy taxonomy_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "taxonomy must be an array");
  std::vector<ClassEntry> entries(j.size());
  std::vector<bool> seen(j.size(), false);
  for (const auto& item : j) {
    const auto id = item.at("id").get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= j.size() || seen[static_cast<std::size_t>(id)]) {
      throw Error(ErrorCode::InvalidArgument,
                  "taxonomy ids must be dense and unique from 0, bad id " + std::to_string(id));
    }
    const auto group = item.at("group").get<std::string>();
    ClassGroup g;
    if (group == "human") {
      g = ClassGroup::Human;
    } else if (group == "inanimate") {
      g = ClassGroup::Inanimate;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown class group '" + group + "'");
    }
    seen[static_cast<std::size_t>(id)] = true;
    entries[static_cast<std::size_t>(id)] = {item.at("name").get<std::string>(), g};
  }
  return ClassTaxonomy(std::move(entries));
}

namespace detail {

inline std::string portable(const fs::path& p) { return p.generic_string(); }

inline fs::path relative_to(const fs::path& target, const fs::path& dir) {
  const auto abs_target = fs::absolute(target).lexically_normal();
  const auto abs_dir = fs::absolute(dir).lexically_normal();
  auto rel = abs_target.lexically_relative(abs_dir);
  return rel.empty() ? abs_target : rel;
}

}  // namespace detail

/// Serialize with paths relative to `relative_dir` (when given) so the
/// document stays portable.
inline nlohmann::json manifest_to_json(const DatasetManifest& m,
                                       const std::optional<fs::path>& relative_dir = {}) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : m.records) {
    fs::path img = m.resolve(r.image_path);
    fs::path lbl = m.resolve(r.label_path);
    if (relative_dir) {
      img = detail::relative_to(img, *relative_dir);
      lbl = detail::relative_to(lbl, *relative_dir);
    }
    recs.push_back({{"image_id", r.image_id},
                    {"image_path", detail::portable(img)},
                    {"label_path", detail::portable(lbl)},
                    {"group_id", r.group_id},
                    {"condition", to_string(r.condition)},
                    {"split", to_string(r.split)}});
  }
  return {{"taxonomy", taxonomy_to_json(m.taxonomy)},
          {"notes", m.notes},
          {"records", recs}};
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j,
                                          const fs::path& base_dir = {}) {
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    m.taxonomy = taxonomy_from_json(j.at("taxonomy"));
    if (j.contains("notes")) m.notes = j.at("notes").get<std::vector<std::string>>();
    for (const auto& item : j.at("records")) {
      ManifestRecord r;
      r.image_id = item.at("image_id").get<std::string>();
      r.image_path = item.at("image_path").get<std::string>();
      r.label_path = item.at("label_path").get<std::string>();
      r.group_id = item.value("group_id", r.image_id);
      const auto cond = item.value("condition", std::string("day-clear"));
      const auto parsed_cond = parse_condition(cond);
      if (!parsed_cond) throw Error(ErrorCode::InvalidArgument, "unknown condition '" + cond + "'");
      r.condition = *parsed_cond;
      const auto split = item.value("split", std::string("unassigned"));
      const auto parsed_split = parse_split(split);
      if (!parsed_split) throw Error(ErrorCode::InvalidArgument, "unknown split '" + split + "'");
      r.split = *parsed_split;
      m.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad manifest document: ") + e.what());
  }
  return m;
}

inline DatasetManifest load_manifest(const fs::path& file) {
  const auto text = read_text_file(file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what(), file.string());
  }
  try {
    return manifest_from_json(j, file.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), e.message(), file.string());
  }
}

inline void save_manifest(const DatasetManifest& m, const fs::path& file) {
  const auto dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  write_text_file(file, manifest_to_json(m, dir).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Merge

struct MergeOptions {
  std::string prefix_a = "a";
  std::string prefix_b = "b";
};

/// Merge two manifests under `a`'s taxonomy. Labels of `b` are rewritten
/// through `remap` (b class id -> merged class id) into `labels_dir`.
/// Image and group ids are prefixed per source to keep them unique.
inline DatasetManifest merge_datasets(const DatasetManifest& a,
                                      const DatasetManifest& b,
                                      const std::map<int, int>& remap,
                                      const fs::path& labels_dir,
                                      const MergeOptions& opts = {}) {
  for (std::size_t cls = 0; cls < b.taxonomy.size(); ++cls) {
    const auto it = remap.find(static_cast<int>(cls));
    if (it == remap.end()) {
      throw Error(ErrorCode::RemapIncomplete,
                  "class " + std::to_string(cls) + " ('" +
                      b.taxonomy.entries()[cls].name + "') has no merged target");
    }
    if (!a.taxonomy.contains(it->second)) {
      throw Error(ErrorCode::InvalidArgument,
                  "remap target " + std::to_string(it->second) +
                      " is not in the merged taxonomy");
    }
  }

  DatasetManifest out;
  out.taxonomy = a.taxonomy;
  out.notes = a.notes;
  out.notes.insert(out.notes.end(), b.notes.begin(), b.notes.end());
  out.notes.push_back("merged '" + opts.prefix_a + "' and '" + opts.prefix_b + "'");

  std::set<std::string> ids;
  auto add = [&](ManifestRecord r, const std::string& prefix) {
    r.image_id = prefix.empty() ? r.image_id : prefix + "_" + r.image_id;
    r.group_id = prefix.empty() ? r.group_id : prefix + "_" + r.group_id;
    if (!ids.insert(r.image_id).second) {
      throw Error(ErrorCode::IdCollision, "duplicate image id '" + r.image_id + "' after merge");
    }
    out.records.push_back(std::move(r));
  };

  for (const auto& r : a.absolutized().records) add(r, opts.prefix_a);

  for (const auto& r : b.absolutized().records) {
    const auto text = read_text_file(r.label_path);
    std::vector<Annotation> anns;
    try {
      anns = parse_label_file(text);
    } catch (const Error& e) {
      throw Error(e.code(), e.message(), r.label_path.string(), e.line());
    }
    for (auto& ann : anns) {
      const auto it = remap.find(ann.class_id);
      if (it == remap.end()) {
        throw Error(ErrorCode::RemapIncomplete,
                    "label uses class " + std::to_string(ann.class_id) + " with no merged target",
                    r.label_path.string());
      }
      ann.class_id = it->second;
    }
    ManifestRecord rec = r;
    const std::string new_id = opts.prefix_b.empty() ? r.image_id : opts.prefix_b + "_" + r.image_id;
    rec.label_path = fs::absolute(labels_dir / (new_id + ".txt")).lexically_normal();
    write_text_file(rec.label_path, write_label_file(anns));
    add(std::move(rec), opts.prefix_b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grouped split

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

/// Largest-remainder apportionment of `groups` seats; ties go to the
/// earlier partition (train, then val, then test).
inline std::array<std::size_t, 3> apportion(std::size_t groups, const SplitRatios& ratios) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  for (double v : r) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "split ratios must be positive");
  }
  const double sum = r[0] + r[1] + r[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split ratios must sum to 1, got " + std::to_string(sum));
  }
  std::array<std::size_t, 3> seats{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = r[i] / sum * static_cast<double>(groups);
    // Absorb representation error such as 0.15 * 100 = 15.000000000000002.
    const double fl = std::floor(quota + 1e-9);
    seats[i] = static_cast<std::size_t>(fl);
    rem[i] = std::max(0.0, quota - fl);
    assigned += seats[i];
  }
  while (assigned > groups) {  // only reachable through the epsilon above
    for (std::size_t i = 3; i-- > 0;) {
      if (seats[i] > 0 && assigned > groups) {
        --seats[i];
        --assigned;
      }
    }
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return rem[x] > rem[y] + 1e-12;
  });
  for (std::size_t k = 0; assigned < groups; ++k, ++assigned) ++seats[order[k % 3]];
  return seats;
}

/// Assign every source group, and so every image in it, to one partition.
/// Groups are sorted before the seeded shuffle, so record order never
/// affects the outcome.
inline DatasetManifest grouped_split(const DatasetManifest& manifest,
                                     const SplitRatios& ratios, std::uint64_t seed) {
  std::vector<std::string> groups;
  for (const auto& r : manifest.records) {
    if (r.group_id.empty()) {
      throw Error(ErrorCode::InvalidArgument, "record '" + r.image_id + "' has no group id");
    }
    groups.push_back(r.group_id);
  }
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  const auto seats = apportion(groups.size(), ratios);
  shuffle(std::span<std::string>(groups), derive_seed(seed, "grouped_split"));

  std::map<std::string, Split, std::less<>> assignment;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Split s = i < seats[0] ? Split::Train : i < seats[0] + seats[1] ? Split::Val : Split::Test;
    assignment.emplace(groups[i], s);
  }
  DatasetManifest out = manifest;
  for (auto& r : out.records) r.split = assignment.at(r.group_id);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  DuplicateId,
  MissingFile,
  MalformedLine,
  OutOfRange,
  UnknownClass,
  Leakage,
};

constexpr std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::MissingFile: return "MissingFile";
    case ViolationKind::MalformedLine: return "MalformedLine";
    case ViolationKind::OutOfRange: return "OutOfRange";
    case ViolationKind::UnknownClass: return "UnknownClass";
    case ViolationKind::Leakage: return "Leakage";
  }
  return "Unknown";
}

struct Violation {
  ViolationKind kind;
  std::string subject;  // file path, image id or group id
  std::size_t line = 0;
  std::string message;

  std::string describe() const {
    std::string s{to_string(kind)};
    s += " " + subject;
    if (line > 0) s += ":" + std::to_string(line);
    return s + ": " + message;
  }
};

/// Every problem found, in record order; an empty result means valid.
inline std::vector<Violation> validate_manifest(const DatasetManifest& m) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  std::map<std::string, std::set<Split>> group_splits;

  for (const auto& r : m.records) {
    if (!ids.insert(r.image_id).second) {
      out.push_back({ViolationKind::DuplicateId, r.image_id, 0, "image id appears more than once"});
    }
    const auto img = m.resolve(r.image_path);
    if (!fs::exists(img)) {
      out.push_back({ViolationKind::MissingFile, img.generic_string(), 0, "image file not found"});
    }
    const auto lbl = m.resolve(r.label_path);
    if (!fs::exists(lbl)) {
      out.push_back({ViolationKind::MissingFile, lbl.generic_string(), 0, "label file not found"});
    } else {
      std::string text;
      try {
        text = read_text_file(lbl);
      } catch (const Error& e) {
        out.push_back({ViolationKind::MissingFile, lbl.generic_string(), 0, e.message()});
      }
      std::vector<LabelIssue> issues;
      const auto anns = scan_label_text(text, issues);
      for (const auto& issue : issues) {
        out.push_back({issue.code == ErrorCode::MalformedLine ? ViolationKind::MalformedLine
                                                              : ViolationKind::OutOfRange,
                       lbl.generic_string(), issue.line, issue.message});
      }
      for (const auto& a : anns) {
        if (!m.taxonomy.contains(a.class_id)) {
          out.push_back({ViolationKind::UnknownClass, lbl.generic_string(), 0,
                         "class id " + std::to_string(a.class_id) + " not in taxonomy"});
        }
      }
    }
    if (r.split != Split::Unassigned) group_splits[r.group_id].insert(r.split);
  }

  for (const auto& [group, splits] : group_splits) {
    if (splits.size() > 1) {
      std::string names;
      for (Split s : splits) names += (names.empty() ? "" : ",") + std::string(to_string(s));
      out.push_back({ViolationKind::Leakage, group, 0, "group spans splits " + names});
    }
  }
  return out;
}

}  // namespace maraug
