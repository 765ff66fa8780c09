#include "renalci/instances.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

#include "renalci/error.hpp"

namespace renalci {

namespace {

/// Union-find with path halving. The root of every set is its smallest
/// element, which keeps component numbering in scan order.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  std::uint32_t add() {
    const auto id = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(id);
    return id;
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

constexpr std::array<ClassId, kNumClasses> kSeverity = {
    ClassId::kGS, ClassId::kFC,     ClassId::kTA,        ClassId::kIF,
    ClassId::kGlomerulus, ClassId::kTubule, ClassId::kBackground};

void check_group(const ClassSet& group) {
  if (group.empty()) throw ConfigError("class group must not be empty");
  if (group.contains(ClassId::kBackground)) {
    throw ConfigError("class group must not contain Background");
  }
}

void absorb(Instance& into, const Instance& part) {
  into.area += part.area;
  for (std::size_t k = 0; k < kNumClasses; ++k) into.histogram[k] += part.histogram[k];
  into.bbox.min_row = std::min(into.bbox.min_row, part.bbox.min_row);
  into.bbox.min_col = std::min(into.bbox.min_col, part.bbox.min_col);
  into.bbox.max_row = std::max(into.bbox.max_row, part.bbox.max_row);
  into.bbox.max_col = std::max(into.bbox.max_col, part.bbox.max_col);
  if (std::tie(part.first_row, part.first_col) < std::tie(into.first_row, into.first_col)) {
    into.first_row = part.first_row;
    into.first_col = part.first_col;
  }
}

}  // namespace

Connectivity connectivity_from_int(int n) {
  if (n == 4) return Connectivity::k4;
  if (n == 8) return Connectivity::k8;
  throw ConfigError(fmt::format("connectivity must be 4 or 8, got {}", n));
}

std::uint64_t InstanceSet::total_area() const {
  std::uint64_t total = 0;
  for (const auto& inst : instances) total += inst.area;
  return total;
}

ClassId majority_class(const ClassHistogram& histogram) {
  ClassId best = ClassId::kBackground;
  std::uint64_t best_count = 0;
  for (ClassId c : kSeverity) {
    if (histogram[code(c)] > best_count) {
      best = c;
      best_count = histogram[code(c)];
    }
  }
  return best;
}

InstanceSet connected_components(const LabelRaster& raster, const ClassSet& group,
                                 Connectivity connectivity) {
  check_group(group);
  const std::size_t width = raster.width();
  const std::size_t height = raster.height();
  const bool diagonal = connectivity == Connectivity::k8;

  // First pass: provisional labels with equivalences.
  std::vector<std::uint32_t> labels(raster.size(), 0);
  DisjointSets sets(1);  // label 0 is "none"
  const auto data = raster.data();
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t i = r * width + c;
      if (!group.contains_code(data[i])) continue;

      std::array<std::uint32_t, 4> nb{};
      std::size_t n = 0;
      if (c > 0 && labels[i - 1]) nb[n++] = labels[i - 1];
      if (r > 0) {
        const std::size_t up = i - width;
        if (labels[up]) nb[n++] = labels[up];
        if (diagonal) {
          if (c > 0 && labels[up - 1]) nb[n++] = labels[up - 1];
          if (c + 1 < width && labels[up + 1]) nb[n++] = labels[up + 1];
        }
      }
      if (n == 0) {
        labels[i] = sets.add();
        continue;
      }
      std::uint32_t label = nb[0];
      for (std::size_t k = 1; k < n; ++k) {
        label = std::min(label, nb[k]);
        sets.unite(nb[0], nb[k]);
      }
      labels[i] = label;
    }
  }

  // Final ids in order of each component's first pixel.
  std::vector<std::uint32_t> final_id(sets.size(), 0);
  std::uint32_t next = 0;
  for (std::uint32_t l = 1; l < sets.size(); ++l) {
    if (sets.find(l) == l) final_id[l] = ++next;
  }

  InstanceSet out;
  out.width = width;
  out.height = height;
  out.instances.resize(next);
  for (std::uint32_t k = 0; k < next; ++k) out.instances[k].id = k + 1;

  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t i = r * width + c;
      if (!labels[i]) continue;
      const std::uint32_t id = final_id[sets.find(labels[i])];
      labels[i] = id;
      Instance& inst = out.instances[id - 1];
      if (inst.area == 0) {
        inst.bbox = {r, c, r, c};
        inst.first_row = r;
        inst.first_col = c;
      } else {
        inst.bbox.min_col = std::min(inst.bbox.min_col, c);
        inst.bbox.max_col = std::max(inst.bbox.max_col, c);
        inst.bbox.max_row = r;
      }
      ++inst.area;
      ++inst.histogram[data[i]];
    }
  }
  for (auto& inst : out.instances) inst.cls = majority_class(inst.histogram);

  auto& b = out.border;
  if (width > 0 && height > 0) {
    b.top.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(width));
    b.bottom.assign(labels.end() - static_cast<std::ptrdiff_t>(width), labels.end());
    b.left.resize(height);
    b.right.resize(height);
    for (std::size_t r = 0; r < height; ++r) {
      b.left[r] = labels[r * width];
      b.right[r] = labels[r * width + width - 1];
    }
  }
  return out;
}

InstanceSet merge_cross_patch(const std::vector<PatchInstances>& patches,
                              const PatchGrid& grid, Connectivity connectivity) {
  grid.validate();
  const std::size_t ps = grid.patch_size;

  std::vector<const PatchInstances*> cell(grid.patch_count(), nullptr);
  for (const auto& p : patches) {
    if (p.row >= grid.rows || p.col >= grid.cols) {
      throw ManifestError(fmt::format("instance patch ({}, {}) lies outside the {}x{} grid",
                                      p.row, p.col, grid.rows, grid.cols));
    }
    auto& slot = cell[p.row * grid.cols + p.col];
    if (slot) throw ManifestError(fmt::format("duplicate instance patch ({}, {})", p.row, p.col));
    const auto& s = p.set;
    if (s.width != ps || s.height != ps || s.border.top.size() != ps ||
        s.border.bottom.size() != ps || s.border.left.size() != ps ||
        s.border.right.size() != ps) {
      throw ManifestError(fmt::format("instance patch ({}, {}) is not {}x{} with borders",
                                      p.row, p.col, ps, ps));
    }
    for (const auto& inst : s.instances) {
      if (inst.bbox.max_row >= grid.valid_height(p.row) ||
          inst.bbox.max_col >= grid.valid_width(p.col)) {
        throw ManifestError(fmt::format(
            "instance {} of patch ({}, {}) extends into the padding region", inst.id, p.row,
            p.col));
      }
    }
    slot = &p;
  }
  for (std::size_t i = 0; i < cell.size(); ++i) {
    if (!cell[i]) {
      throw ManifestError(
          fmt::format("missing instance patch ({}, {})", i / grid.cols, i % grid.cols));
    }
  }

  // Global index of (cell, local id) is base[cell] + id - 1.
  std::vector<std::uint32_t> base(cell.size() + 1, 0);
  for (std::size_t i = 0; i < cell.size(); ++i) {
    base[i + 1] = base[i] + static_cast<std::uint32_t>(cell[i]->set.instances.size());
  }
  DisjointSets sets(base.back());
  auto link = [&](std::size_t ca, std::uint32_t la, std::size_t cb, std::uint32_t lb) {
    if (la && lb) sets.unite(base[ca] + la - 1, base[cb] + lb - 1);
  };
  const bool diagonal = connectivity == Connectivity::k8;

  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const std::size_t here = r * grid.cols + c;
      const auto& hb = cell[here]->set.border;
      if (c + 1 < grid.cols) {
        const std::size_t east = here + 1;
        const auto& eb = cell[east]->set.border;
        for (std::size_t y = 0; y < ps; ++y) {
          link(here, hb.right[y], east, eb.left[y]);
          if (diagonal) {
            if (y > 0) link(here, hb.right[y], east, eb.left[y - 1]);
            if (y + 1 < ps) link(here, hb.right[y], east, eb.left[y + 1]);
          }
        }
      }
      if (r + 1 < grid.rows) {
        const std::size_t south = here + grid.cols;
        const auto& sb = cell[south]->set.border;
        for (std::size_t x = 0; x < ps; ++x) {
          link(here, hb.bottom[x], south, sb.top[x]);
          if (diagonal) {
            if (x > 0) link(here, hb.bottom[x], south, sb.top[x - 1]);
            if (x + 1 < ps) link(here, hb.bottom[x], south, sb.top[x + 1]);
          }
        }
        if (diagonal && c + 1 < grid.cols) {
          const std::size_t south_east = south + 1;
          link(here, hb.bottom[ps - 1], south_east, cell[south_east]->set.border.top[0]);
          const std::size_t east = here + 1;
          link(east, cell[east]->set.border.bottom[0], south, sb.top[ps - 1]);
        }
      }
    }
  }

  // Translate parts to slide coordinates and fold them into their roots.
  std::vector<Instance> merged(base.back());
  std::vector<bool> is_root(base.back(), false);
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const std::size_t dr = cell[i]->row * ps;
    const std::size_t dc = cell[i]->col * ps;
    for (const auto& local : cell[i]->set.instances) {
      Instance part = local;
      part.bbox = {local.bbox.min_row + dr, local.bbox.min_col + dc, local.bbox.max_row + dr,
                   local.bbox.max_col + dc};
      part.first_row += dr;
      part.first_col += dc;
      const std::uint32_t g = base[i] + local.id - 1;
      const std::uint32_t root = sets.find(g);
      if (!is_root[root]) {
        is_root[root] = true;
        merged[root] = part;
      } else {
        absorb(merged[root], part);
      }
    }
  }

  InstanceSet out;
  out.width = grid.slide_width;
  out.height = grid.slide_height;
  for (std::size_t g = 0; g < merged.size(); ++g) {
    if (is_root[g]) out.instances.push_back(std::move(merged[g]));
  }
  std::sort(out.instances.begin(), out.instances.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first_row, a.first_col) < std::tie(b.first_row, b.first_col);
  });
  for (std::size_t k = 0; k < out.instances.size(); ++k) {
    out.instances[k].id = static_cast<std::uint32_t>(k + 1);
    out.instances[k].cls = majority_class(out.instances[k].histogram);
  }
  return out;
}

GlomerularCounts classify_glomerular(const InstanceSet& set, std::uint64_t min_area) {
  GlomerularCounts counts;
  for (const auto& inst : set.instances) {
    if (inst.area < min_area) continue;
    const auto gs = inst.histogram[code(ClassId::kGS)];
    const auto fc = inst.histogram[code(ClassId::kFC)];
    const auto normal = inst.histogram[code(ClassId::kGlomerulus)];
    if (gs + fc + normal == 0) continue;
    ++counts.n_total;
    if (gs >= fc && gs >= normal) {
      ++counts.n_gs;
    } else if (fc >= normal) {
      ++counts.n_fc;
    } else {
      ++counts.n_normal;
    }
  }
  return counts;
}

GlomerularCounts classify_glomerular_instances(const LabelRaster& raster,
                                               std::uint64_t min_area,
                                               Connectivity connectivity) {
  return classify_glomerular(connected_components(raster, ClassSet::glomerular(), connectivity),
                             min_area);
}

void write_instances_csv(const InstanceSet& set, std::ostream& out) {
  out << "id,class,area,min_row,min_col,max_row,max_col\n";
  for (const auto& inst : set.instances) {
    out << inst.id << ',' << class_name(inst.cls) << ',' << inst.area << ','
        << inst.bbox.min_row << ',' << inst.bbox.min_col << ',' << inst.bbox.max_row << ','
        << inst.bbox.max_col << '\n';
  }
}

}  // namespace renalci
