#pragma once

// Weather and lighting conditions built from the pixel primitives, the
// seeded rain texture generator, and the augmentation planner/runner.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "maraug/datasetio.hpp"
#include "maraug/error.hpp"
#include "maraug/imageio.hpp"
#include "maraug/pixelops.hpp"
#include "maraug/random.hpp"
#include "maraug/weather_condition.hpp"

namespace maraug {

/// Every tunable magnitude of the condition transforms.
struct AugmentParams {
  double fog_alpha = 0.35;
  double fog_contrast = 0.90;
  double sunny_brightness = 1.25;
  ChannelGains sunny_gains{1.0, 1.0, 0.85};
  double rain_contrast = 0.95;
  double rain_density = 1.0;  // streaks per 10^4 pixels
  int rain_streak_value = 220;
  double rain_len_min = 8.0;
  double rain_len_max = 24.0;
  double rain_angle_deg = 15.0;  // mean tilt from vertical
  double rain_angle_jitter_deg = 5.0;
  double rain_alpha_min = 0.2;
  double rain_alpha_max = 0.5;
  double night_brightness = 0.45;
  double night_contrast = 0.80;
  ChannelGains night_gains{0.85, 0.90, 1.0};
  double night_cloud_alpha = 0.25;

  void validate() const {
    auto fraction = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0,1]");
      }
    };
    auto factor = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be >= 0");
      }
    };
    fraction(fog_alpha, "fog_alpha");
    fraction(night_cloud_alpha, "night_cloud_alpha");
    fraction(rain_alpha_min, "rain_alpha_range[0]");
    fraction(rain_alpha_max, "rain_alpha_range[1]");
    factor(fog_contrast, "fog_contrast");
    factor(sunny_brightness, "sunny_brightness");
    factor(rain_contrast, "rain_contrast");
    factor(rain_density, "rain_density");
    factor(rain_len_min, "rain_len_range[0]");
    factor(rain_len_max, "rain_len_range[1]");
    factor(rain_angle_jitter_deg, "rain_angle_deg[1]");
    factor(night_brightness, "night_brightness");
    factor(night_contrast, "night_contrast");
    for (double g : sunny_gains) factor(g, "sunny_gains");
    for (double g : night_gains) factor(g, "night_gains");
    if (!std::isfinite(rain_angle_deg)) {
      throw Error(ErrorCode::InvalidArgument, "rain_angle_deg must be finite");
    }
    if (rain_streak_value < 0 || rain_streak_value > 255) {
      throw Error(ErrorCode::InvalidArgument, "rain_streak_value must lie in [0,255]");
    }
    if (rain_len_min > rain_len_max) {
      throw Error(ErrorCode::InvalidArgument, "rain_len_range must be ordered min <= max");
    }
    if (rain_alpha_min > rain_alpha_max) {
      throw Error(ErrorCode::InvalidArgument, "rain_alpha_range must be ordered min <= max");
    }
  }
};

inline nlohmann::json params_to_json(const AugmentParams& p) {
  return {
      {"fog_alpha", p.fog_alpha},
      {"fog_contrast", p.fog_contrast},
      {"sunny_brightness", p.sunny_brightness},
      {"sunny_gains", p.sunny_gains},
      {"rain_contrast", p.rain_contrast},
      {"rain_density", p.rain_density},
      {"rain_streak_value", p.rain_streak_value},
      {"rain_len_range", {p.rain_len_min, p.rain_len_max}},
      {"rain_angle_deg", {p.rain_angle_deg, p.rain_angle_jitter_deg}},
      {"rain_alpha_range", {p.rain_alpha_min, p.rain_alpha_max}},
      {"night_brightness", p.night_brightness},
      {"night_contrast", p.night_contrast},
      {"night_gains", p.night_gains},
      {"night_cloud_alpha", p.night_cloud_alpha},
  };
}

/// Keys missing from `j` keep their defaults; unknown keys are rejected.
inline AugmentParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "params must be a JSON object");
  AugmentParams p;
  try {
    for (const auto& [key, v] : j.items()) {
      auto pair = [&](double& lo, double& hi) {
        const auto arr = v.get<std::vector<double>>();
        if (arr.size() != 2) throw Error(ErrorCode::InvalidArgument, key + " needs two values");
        lo = arr[0];
        hi = arr[1];
      };
      if (key == "fog_alpha") p.fog_alpha = v.get<double>();
      else if (key == "fog_contrast") p.fog_contrast = v.get<double>();
      else if (key == "sunny_brightness") p.sunny_brightness = v.get<double>();
      else if (key == "sunny_gains") p.sunny_gains = v.get<ChannelGains>();
      else if (key == "rain_contrast") p.rain_contrast = v.get<double>();
      else if (key == "rain_density") p.rain_density = v.get<double>();
      else if (key == "rain_streak_value") p.rain_streak_value = v.get<int>();
      else if (key == "rain_len_range") pair(p.rain_len_min, p.rain_len_max);
      else if (key == "rain_angle_deg") pair(p.rain_angle_deg, p.rain_angle_jitter_deg);
      else if (key == "rain_alpha_range") pair(p.rain_alpha_min, p.rain_alpha_max);
      else if (key == "night_brightness") p.night_brightness = v.get<double>();
      else if (key == "night_contrast") p.night_contrast = v.get<double>();
      else if (key == "night_gains") p.night_gains = v.get<ChannelGains>();
      else if (key == "night_cloud_alpha") p.night_cloud_alpha = v.get<double>();
      else throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad params document: ") + e.what());
  }
  p.validate();
  return p;
}

inline AugmentParams load_params(const fs::path& file) {
  const auto text = read_text_file(file);
  try {
    return params_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what(), file.string());
  } catch (const Error& e) {
    throw Error(e.code(), e.message(), file.string());
  }
}

// ---------------------------------------------------------------------------
// Rain

struct RainStreak {
  double x0 = 0.0;
  double y0 = 0.0;
  double angle_deg = 0.0;  // from vertical, positive leans right
  double length = 0.0;
  double alpha = 0.0;

  double x1() const { return x0 + length * std::sin(angle_deg * std::numbers::pi / 180.0); }
  double y1() const { return y0 + length * std::cos(angle_deg * std::numbers::pi / 180.0); }
};

inline std::size_t rain_streak_count(std::size_t width, std::size_t height,
                                     const AugmentParams& params) {
  return static_cast<std::size_t>(
      std::llround(params.rain_density * static_cast<double>(width * height) / 10000.0));
}

/// Streak geometry for a texture; each streak consumes five draws
/// (x, y, angle, length, alpha) from one splitmix64 stream.
inline std::vector<RainStreak> plan_rain_streaks(std::size_t width, std::size_t height,
                                                 std::uint64_t seed,
                                                 const AugmentParams& params) {
  SplitMix64 rng(seed);
  std::vector<RainStreak> streaks(rain_streak_count(width, height, params));
  for (auto& s : streaks) {
    s.x0 = rng.uniform(0.0, static_cast<double>(width));
    s.y0 = rng.uniform(0.0, static_cast<double>(height));
    s.angle_deg = params.rain_angle_deg + params.rain_angle_jitter_deg * (2.0 * rng.uniform01() - 1.0);
    s.length = rng.uniform(params.rain_len_min, params.rain_len_max);
    s.alpha = rng.uniform(params.rain_alpha_min, params.rain_alpha_max);
  }
  return streaks;
}

/// Pixel extent of a streak along its dominant axis.
inline double raster_length(const RainStreak& s) {
  return std::max(std::abs(s.x1() - s.x0), std::abs(s.y1() - s.y0));
}

/// Rasterize a streak 1 px thick: one pixel per unit step along the
/// dominant axis, round(raster_length) pixels in total (at least one).
/// Overlapping streaks keep the maximum alpha.
inline void rasterize_streak(AlphaTexture& tex, const RainStreak& s) {
  const double dx = s.x1() - s.x0;
  const double dy = s.y1() - s.y0;
  const bool steep = std::abs(dy) >= std::abs(dx);
  const long steps = std::max(1L, std::lround(raster_length(s)));
  const double major = steep ? dy : dx;
  const double slope = major == 0.0 ? 0.0 : (steep ? dx : dy) / std::abs(major);
  const long dir = major < 0.0 ? -1 : 1;
  const long major0 = std::lround(steep ? s.y0 : s.x0);
  const double minor0 = steep ? s.x0 : s.y0;
  const auto w = static_cast<long>(tex.width);
  const auto h = static_cast<long>(tex.height);
  for (long i = 0; i < steps; ++i) {
    const long a = major0 + dir * i;
    const long b = std::lround(minor0 + slope * static_cast<double>(i));
    const long x = steep ? b : a;
    const long y = steep ? a : b;
    if (x >= 0 && x < w && y >= 0 && y < h) {
      double& alpha = tex.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      alpha = std::max(alpha, s.alpha);
    }
  }
}

inline AlphaTexture generate_rain_texture(std::size_t width, std::size_t height,
                                          std::uint64_t seed, const AugmentParams& params) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::InvalidArgument, "rain texture dimensions must be positive");
  }
  AlphaTexture tex(width, height, static_cast<std::uint8_t>(params.rain_streak_value));
  for (const auto& s : plan_rain_streaks(width, height, seed, params)) rasterize_streak(tex, s);
  return tex;
}

// ---------------------------------------------------------------------------
// Conditions

namespace detail {

inline ImageBuffer night_clear(const ImageBuffer& img, const AugmentParams& p) {
  return apply_channel_gains(
      adjust_contrast(adjust_brightness(img, p.night_brightness), p.night_contrast),
      p.night_gains);
}

inline ImageBuffer add_rain(const ImageBuffer& img, std::uint64_t seed, const AugmentParams& p) {
  return overlay_texture(
      img, generate_rain_texture(img.width(), img.height(), derive_seed(seed, "rain"), p));
}

}  // namespace detail

inline ImageBuffer apply_condition(const ImageBuffer& img, WeatherCondition cond,
                                   std::uint64_t seed, const AugmentParams& p) {
  switch (cond) {
    case WeatherCondition::DayClear:
      return img;
    case WeatherCondition::DaySunny:
      return apply_channel_gains(adjust_brightness(img, p.sunny_brightness), p.sunny_gains);
    case WeatherCondition::DayCloudy:
      return adjust_contrast(blend_with_layer(img, kWhite, p.fog_alpha), p.fog_contrast);
    case WeatherCondition::DayRain:
      return detail::add_rain(adjust_contrast(img, p.rain_contrast), seed, p);
    case WeatherCondition::NightClear:
      return detail::night_clear(img, p);
    case WeatherCondition::NightRain:
      return detail::add_rain(detail::night_clear(img, p), seed, p);
    case WeatherCondition::NightCloudy:
      return blend_with_layer(detail::night_clear(img, p), kWhite, p.night_cloud_alpha);
  }
  return img;
}

// ---------------------------------------------------------------------------
// Planning

struct AugmentPlanEntry {
  std::string source_image_id;
  WeatherCondition condition = WeatherCondition::DayClear;
  std::uint64_t seed = 0;

  friend bool operator==(const AugmentPlanEntry&, const AugmentPlanEntry&) = default;
};

struct AugmentPlan {
  std::vector<AugmentPlanEntry> entries;

  friend bool operator==(const AugmentPlan&, const AugmentPlan&) = default;
};

inline std::uint64_t image_seed(std::uint64_t global_seed, std::string_view image_id) {
  return derive_seed(global_seed, image_id);
}

/// One synthetic variant per source image. Sources are sorted, shuffled with
/// the seed and dealt the six synthetic conditions round-robin, so every
/// condition count is within one of N/6. Entries come back sorted by id.
inline AugmentPlan plan_augmentation(const DatasetManifest& manifest, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(manifest.records.size());
  for (const auto& r : manifest.records) {
    if (r.condition != WeatherCondition::DayClear) {
      throw Error(ErrorCode::InvalidArgument,
                  "record '" + r.image_id + "' is already augmented (" +
                      std::string(to_string(r.condition)) + ")");
    }
    ids.push_back(r.image_id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::IdCollision, "manifest has duplicate image ids");
  }
  shuffle(std::span<std::string>(ids), derive_seed(seed, "plan_augmentation"));

  AugmentPlan plan;
  plan.entries.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    plan.entries.push_back({ids[i], kSyntheticConditions[i % kSyntheticConditions.size()],
                            image_seed(seed, ids[i])});
  }
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const auto& a, const auto& b) { return a.source_image_id < b.source_image_id; });
  return plan;
}

inline nlohmann::json plan_to_json(const AugmentPlan& plan) {
  auto arr = nlohmann::json::array();
  for (const auto& e : plan.entries) {
    arr.push_back({{"source_image_id", e.source_image_id},
                   {"condition", to_string(e.condition)},
                   {"seed", e.seed}});
  }
  return {{"entries", arr}};
}

inline std::string variant_id(std::string_view source_id, WeatherCondition cond) {
  return std::string(source_id) + "__" + std::string(to_string(cond));
}

// ---------------------------------------------------------------------------
// Running

/// Render every planned variant into `out_dir/images` (PNG) and copy its
/// source label verbatim into `out_dir/labels`. Returns the source records
/// followed, per source, by its variant; paths in the result are absolute.
/// Output bytes do not depend on `workers`.
inline DatasetManifest run_augmentation(const DatasetManifest& manifest, const AugmentPlan& plan,
                                        const AugmentParams& params, const fs::path& out_dir,
                                        unsigned workers = 1) {
  params.validate();
  const DatasetManifest src = manifest.absolutized();

  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < src.records.size(); ++i) index.emplace(src.records[i].image_id, i);

  struct Job {
    const ManifestRecord* source;
    const AugmentPlanEntry* entry;
    ManifestRecord variant;
  };
  std::vector<Job> jobs;
  jobs.reserve(plan.entries.size());
  const auto images_dir = fs::absolute(out_dir / "images").lexically_normal();
  const auto labels_dir = fs::absolute(out_dir / "labels").lexically_normal();
  for (const auto& e : plan.entries) {
    const auto it = index.find(e.source_image_id);
    if (it == index.end()) {
      throw Error(ErrorCode::MissingSource, "plan references unknown image '" + e.source_image_id + "'");
    }
    const ManifestRecord& s = src.records[it->second];
    ManifestRecord v;
    v.image_id = variant_id(s.image_id, e.condition);
    v.image_path = images_dir / (v.image_id + ".png");
    v.label_path = labels_dir / (v.image_id + ".txt");
    v.group_id = s.group_id;
    v.condition = e.condition;
    v.split = s.split;
    jobs.push_back({&s, &e, std::move(v)});
  }

  std::error_code ec;
  fs::create_directories(images_dir, ec);
  fs::create_directories(labels_dir, ec);
  if (ec) throw Error(ErrorCode::WriteFailure, ec.message(), out_dir.string());

  auto run_one = [&params](const Job& job) {
    if (!fs::exists(job.source->image_path)) {
      throw Error(ErrorCode::MissingSource, "source image not found", job.source->image_path.string());
    }
    if (!fs::exists(job.source->label_path)) {
      throw Error(ErrorCode::MissingSource, "source label not found", job.source->label_path.string());
    }
    const ImageBuffer img = read_image(job.source->image_path);
    write_png(job.variant.image_path, apply_condition(img, job.entry->condition, job.entry->seed, params));
    write_text_file(job.variant.label_path, read_text_file(job.source->label_path));
  };

  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size() && !failed; i = next++) {
      try {
        run_one(jobs[i]);
      } catch (...) {
        failures[i] = std::current_exception();
        failed = true;
      }
    }
  };
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(jobs.size(), 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::map<std::string, const ManifestRecord*, std::less<>> variant_of;
  for (const auto& job : jobs) variant_of.emplace(job.source->image_id, &job.variant);

  DatasetManifest out;
  out.taxonomy = src.taxonomy;
  out.notes = src.notes;
  for (const auto& r : src.records) {
    out.records.push_back(r);
    if (const auto it = variant_of.find(r.image_id); it != variant_of.end()) {
      out.records.push_back(*it->second);
    }
  }
  return out;
}

}  // namespace maraug
