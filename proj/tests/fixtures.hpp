#pragma once

// Shared helpers for tests that touch the filesystem.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "maraug/maraug.hpp"

namespace testutil {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "maraug") {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline maraug::ClassTaxonomy maritime_taxonomy() {
  using maraug::ClassGroup;
  return maraug::ClassTaxonomy({{"human", ClassGroup::Human},
                                {"boat", ClassGroup::Inanimate},
                                {"surfboard", ClassGroup::Inanimate},
                                {"sailboat", ClassGroup::Inanimate},
                                {"kayak", ClassGroup::Inanimate}});
}

/// Smooth synthetic scene with some texture, deterministic in `salt`.
inline maraug::ImageBuffer synthetic_image(std::size_t w, std::size_t h, std::uint32_t salt) {
  maraug::ImageBuffer img(w, h);
  std::mt19937 rng(salt);
  const int ox = static_cast<int>(rng() % 97);
  const int oy = static_cast<int>(rng() % 89);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto r = static_cast<std::uint8_t>((x * 255 / std::max<std::size_t>(1, w - 1) + ox) % 256);
      const auto g = static_cast<std::uint8_t>((y * 255 / std::max<std::size_t>(1, h - 1) + oy) % 256);
      const auto b = static_cast<std::uint8_t>(((x ^ y) + salt) % 256);
      img.set(x, y, {r, g, b});
    }
  }
  return img;
}

/// Writes `n` PNG images with one-box labels and a manifest describing them.
/// Returns the manifest file path.
inline fs::path write_dataset(const fs::path& root, std::size_t n, std::size_t w = 32,
                              std::size_t h = 24) {
  maraug::DatasetManifest m;
  m.taxonomy = maritime_taxonomy();
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "img%04zu", i);
    const auto img_rel = fs::path("images") / (std::string(id) + ".png");
    const auto lbl_rel = fs::path("labels") / (std::string(id) + ".txt");
    fs::create_directories(root / "images");
    maraug::write_png(root / img_rel, synthetic_image(w, h, static_cast<std::uint32_t>(i)));
    const int cls = static_cast<int>(i % 5);
    maraug::write_text_file(root / lbl_rel,
                            maraug::write_label_file({{cls, {0.5, 0.5, 0.25, 0.25}},
                                                      {0, {0.2, 0.3, 0.1, 0.1}}}));
    m.records.push_back({id, img_rel, lbl_rel, id, maraug::WeatherCondition::DayClear,
                         maraug::Split::Unassigned});
  }
  m.base_dir = root;
  const auto file = root / "manifest.json";
  maraug::save_manifest(m, file);
  return file;
}

/// Digest over every regular file under `root`: relative path and bytes.
inline std::uint64_t tree_digest(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) {
    acc += f.lexically_relative(root).generic_string();
    acc += '\0';
    acc += std::to_string(maraug::fnv1a64(maraug::read_text_file(f)));
    acc += '\n';
  }
  return maraug::fnv1a64(acc);
}

}  // namespace testutil
