#pragma once

// Shared fixtures and brute-force oracles for the test programs.

#include <sys/wait.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "renalci/fileio.hpp"

#include "renalci/raster.hpp"
#include "renalci/survival.hpp"

namespace renalci::test {

/// Random raster made of overlapping rectangles and discs of random classes
/// plus salt noise, so blobs touch, nest and cross patch borders.
inline LabelRaster random_raster(std::mt19937_64& rng, std::size_t w, std::size_t h,
                                 std::size_t n_shapes = 60, double noise = 0.002) {
  LabelRaster r(w, h);
  std::uniform_int_distribution<int> cls(1, 6);
  for (std::size_t s = 0; s < n_shapes; ++s) {
    const auto c = static_cast<ClassId>(cls(rng));
    const std::size_t cy = std::uniform_int_distribution<std::size_t>(0, h - 1)(rng);
    const std::size_t cx = std::uniform_int_distribution<std::size_t>(0, w - 1)(rng);
    const long rad = std::uniform_int_distribution<long>(1, 40)(rng);
    const bool disc = rng() % 2 == 0;
    for (long dy = -rad; dy <= rad; ++dy) {
      for (long dx = -rad; dx <= rad; ++dx) {
        const long y = static_cast<long>(cy) + dy, x = static_cast<long>(cx) + dx;
        if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) continue;
        if (disc && dy * dy + dx * dx > rad * rad) continue;
        r.set(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
      }
    }
  }
  std::bernoulli_distribution salt(noise);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (salt(rng)) r.set(y, x, static_cast<ClassId>(cls(rng)));
    }
  }
  return r;
}

struct OracleComponent {
  std::uint64_t area = 0;
  ClassHistogram histogram{};
  std::size_t first_row = 0, first_col = 0;
};

/// Breadth-first flood fill over pixels whose class is in `group`, in raster
/// scan order of each component's first pixel.
inline std::vector<OracleComponent> flood_components(const LabelRaster& r, const ClassSet& group,
                                                     bool eight) {
  const std::size_t w = r.width(), h = r.height();
  std::vector<char> seen(w * h, 0);
  std::vector<OracleComponent> out;
  for (std::size_t y0 = 0; y0 < h; ++y0) {
    for (std::size_t x0 = 0; x0 < w; ++x0) {
      if (seen[y0 * w + x0] || !group.contains(r.at(y0, x0))) continue;
      OracleComponent comp{0, {}, y0, x0};
      std::deque<std::pair<std::size_t, std::size_t>> queue{{y0, x0}};
      seen[y0 * w + x0] = 1;
      while (!queue.empty()) {
        auto [y, x] = queue.front();
        queue.pop_front();
        ++comp.area;
        ++comp.histogram[code(r.at(y, x))];
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            if (!eight && dy != 0 && dx != 0) continue;
            const long ny = static_cast<long>(y) + dy, nx = static_cast<long>(x) + dx;
            if (ny < 0 || nx < 0 || ny >= static_cast<long>(h) || nx >= static_cast<long>(w)) continue;
            const auto i = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
            if (seen[i] || !group.contains(r.at(static_cast<std::size_t>(ny), static_cast<std::size_t>(nx)))) continue;
            seen[i] = 1;
            queue.emplace_back(static_cast<std::size_t>(ny), static_cast<std::size_t>(nx));
          }
        }
      }
      out.push_back(comp);
    }
  }
  return out;
}

/// Glomerular counts by hand: majority over {GS, FC, Glomerulus}, ties to
/// the more severe class.
struct OracleGlomCounts {
  std::uint64_t total = 0, gs = 0, fc = 0, normal = 0;
};

inline OracleGlomCounts oracle_glom_counts(const LabelRaster& r, bool eight,
                                           std::uint64_t min_area = 0) {
  OracleGlomCounts c;
  for (const auto& comp : flood_components(r, ClassSet::glomerular(), eight)) {
    if (comp.area < min_area) continue;
    const auto gs = comp.histogram[code(ClassId::kGS)];
    const auto fc = comp.histogram[code(ClassId::kFC)];
    const auto gl = comp.histogram[code(ClassId::kGlomerulus)];
    ++c.total;
    if (gs >= fc && gs >= gl) {
      ++c.gs;
    } else if (fc >= gl) {
      ++c.fc;
    } else {
      ++c.normal;
    }
  }
  return c;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("renalci_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<SurvivalRecord> make_records(const std::vector<double>& times,
                                                const std::vector<bool>& events,
                                                const std::vector<std::vector<double>>& x = {}) {
  std::vector<SurvivalRecord> out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    SurvivalRecord r;
    r.subject_id = "s" + std::to_string(i);
    r.time = times[i];
    r.event = events[i];
    if (!x.empty()) r.covariates = x[i];
    out.push_back(std::move(r));
  }
  return out;
}

/// Runs the command line tool with stdout and stderr discarded and returns
/// its exit status, or -1 if it did not exit normally.
inline int run_cli(const std::string& binary, const std::string& args) {
  const std::string cmd = binary + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

/// Relative path -> contents of every regular file under `dir`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[std::filesystem::relative(e.path(), dir).generic_string()] = read_file(e.path());
    }
  }
  return out;
}

}  // namespace renalci::test
