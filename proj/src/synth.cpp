#include "renalci/synth.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "renalci/error.hpp"
#include "renalci/parallel.hpp"
#include "renalci/random.hpp"

namespace renalci {

void SynthSpec::validate() const {
  if (width == 0 || height == 0) throw ConfigError("synth: zero slide dimension");
  if (n_glomeruli == 0) throw ConfigError("synth: n_glomeruli must be positive");
  if (n_tubules == 0) throw ConfigError("synth: n_tubules must be positive");
  if (n_gs + n_fc > n_glomeruli) {
    throw ConfigError(fmt::format("synth: n_gs + n_fc = {} exceeds n_glomeruli = {}",
                                  n_gs + n_fc, n_glomeruli));
  }
  for (auto [name, v] : {std::pair{"p_if", p_if}, std::pair{"p_ta", p_ta}}) {
    if (!(v >= 0.0 && v < 1.0)) throw ConfigError(fmt::format("synth: {} = {} outside [0, 1)", name, v));
  }
  if (glom_radius_min < 4 || glom_radius_min > glom_radius_max) {
    throw ConfigError("synth: glomerulus radius range must satisfy 4 <= min <= max");
  }
  if (rect_min < 1 || rect_min > rect_max) {
    throw ConfigError("synth: rectangle size range must satisfy 1 <= min <= max");
  }
  if (max_attempts == 0) throw ConfigError("synth: max_attempts must be positive");
}

namespace {

struct Pixel {
  std::size_t row;
  std::size_t col;
  ClassId cls;
};

class Canvas {
 public:
  Canvas(std::size_t w, std::size_t h) : raster_(w, h), blocked_(w * h, 0) {}

  std::size_t width() const { return raster_.width(); }
  std::size_t height() const { return raster_.height(); }

  bool fits(const std::vector<Pixel>& shape) const {
    for (const auto& p : shape) {
      if (blocked_[p.row * width() + p.col]) return false;
    }
    return true;
  }

  /// Paints the shape and blocks its 8-neighborhood for later blobs.
  void paint(const std::vector<Pixel>& shape, ClassHistogram& tally) {
    for (const auto& p : shape) {
      raster_.set(p.row, p.col, p.cls);
      ++tally[code(p.cls)];
      const std::size_t r0 = p.row > 0 ? p.row - 1 : 0;
      const std::size_t c0 = p.col > 0 ? p.col - 1 : 0;
      const std::size_t r1 = std::min(p.row + 1, height() - 1);
      const std::size_t c1 = std::min(p.col + 1, width() - 1);
      for (std::size_t r = r0; r <= r1; ++r) {
        for (std::size_t c = c0; c <= c1; ++c) blocked_[r * width() + c] = 1;
      }
    }
  }

  LabelRaster take() { return std::move(raster_); }

 private:
  LabelRaster raster_;
  std::vector<std::uint8_t> blocked_;
};

enum class GlomKind { kNormal, kGS, kFC };

std::vector<Pixel> disc(std::size_t cy, std::size_t cx, std::size_t radius, GlomKind kind) {
  const auto r = static_cast<long>(radius);
  const double inner = 0.8 * static_cast<double>(radius);
  const double crescent_edge = -0.2 * static_cast<double>(radius);
  std::vector<Pixel> out;
  for (long dy = -r; dy <= r; ++dy) {
    for (long dx = -r; dx <= r; ++dx) {
      const long d2 = dy * dy + dx * dx;
      if (d2 > r * r) continue;
      ClassId cls = ClassId::kGlomerulus;
      if (kind == GlomKind::kGS && static_cast<double>(d2) <= inner * inner) cls = ClassId::kGS;
      if (kind == GlomKind::kFC && static_cast<double>(dx) >= crescent_edge) cls = ClassId::kFC;
      out.push_back({static_cast<std::size_t>(static_cast<long>(cy) + dy),
                     static_cast<std::size_t>(static_cast<long>(cx) + dx), cls});
    }
  }
  return out;
}

std::vector<Pixel> rect(std::size_t top, std::size_t left, std::size_t h, std::size_t w,
                        ClassId cls) {
  std::vector<Pixel> out;
  out.reserve(h * w);
  for (std::size_t r = top; r < top + h; ++r) {
    for (std::size_t c = left; c < left + w; ++c) out.push_back({r, c, cls});
  }
  return out;
}

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

template <class MakeShape>
void place(Canvas& canvas, std::size_t max_attempts, const std::string& what,
           ClassHistogram& tally, MakeShape&& make_shape) {
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    auto shape = make_shape();
    if (shape && canvas.fits(*shape)) {
      canvas.paint(*shape, tally);
      return;
    }
  }
  throw CapacityError(fmt::format("synth: could not place {} within {} attempts on a {}x{} slide",
                                  what, max_attempts, canvas.width(), canvas.height()));
}

}  // namespace

SynthSlide generate_slide(const SynthSpec& spec, std::string slide_id) {
  spec.validate();
  Rng rng = substream(spec.seed, 0);
  Canvas canvas(spec.width, spec.height);
  ClassHistogram tally{};

  DiagnosticFeatures f;
  for (std::size_t i = 0; i < spec.n_glomeruli; ++i) {
    const GlomKind kind = i < spec.n_gs                 ? GlomKind::kGS
                          : i < spec.n_gs + spec.n_fc ? GlomKind::kFC
                                                      : GlomKind::kNormal;
    ClassHistogram blob{};
    place(canvas, spec.max_attempts, fmt::format("glomerulus {}", i), blob,
          [&]() -> std::optional<std::vector<Pixel>> {
            const std::size_t radius = uniform(rng, spec.glom_radius_min, spec.glom_radius_max);
            if (2 * radius + 1 > spec.width || 2 * radius + 1 > spec.height) return std::nullopt;
            const std::size_t cy = uniform(rng, radius, spec.height - 1 - radius);
            const std::size_t cx = uniform(rng, radius, spec.width - 1 - radius);
            return disc(cy, cx, radius, kind);
          });
    const auto gs = blob[code(ClassId::kGS)];
    const auto fc = blob[code(ClassId::kFC)];
    const auto normal = blob[code(ClassId::kGlomerulus)];
    const bool ok = kind == GlomKind::kGS   ? gs >= fc && gs >= normal
                    : kind == GlomKind::kFC ? fc > gs && fc >= normal
                                            : gs == 0 && fc == 0;
    if (!ok) throw std::logic_error("synth: glomerulus majority does not match its kind");
    for (std::size_t c = 0; c < kNumClasses; ++c) tally[c] += blob[c];
  }
  f.n_glom_total = spec.n_glomeruli;
  f.n_glom_gs = spec.n_gs;
  f.n_glom_fc = spec.n_fc;

  for (std::size_t i = 0; i < spec.n_tubules; ++i) {
    const auto tubular = tally[code(ClassId::kTubule)] + tally[code(ClassId::kTA)];
    const bool atrophic =
        spec.p_ta > 0.0 && (tubular == 0 || static_cast<double>(tally[code(ClassId::kTA)]) <
                                                spec.p_ta * static_cast<double>(tubular));
    const ClassId cls = atrophic ? ClassId::kTA : ClassId::kTubule;
    place(canvas, spec.max_attempts, fmt::format("tubule {}", i), tally,
          [&]() -> std::optional<std::vector<Pixel>> {
            const std::size_t h = uniform(rng, spec.rect_min, spec.rect_max);
            const std::size_t w = uniform(rng, spec.rect_min, spec.rect_max);
            if (h > spec.height || w > spec.width) return std::nullopt;
            return rect(uniform(rng, 0, spec.height - h), uniform(rng, 0, spec.width - w), h, w,
                        cls);
          });
  }

  std::uint64_t others = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) others += tally[c];
  const double if_target = spec.p_if * static_cast<double>(others) / (1.0 - spec.p_if);
  for (std::size_t i = 0; static_cast<double>(tally[code(ClassId::kIF)]) < if_target; ++i) {
    const double remaining = if_target - static_cast<double>(tally[code(ClassId::kIF)]);
    place(canvas, spec.max_attempts, fmt::format("fibrosis region {}", i), tally,
          [&]() -> std::optional<std::vector<Pixel>> {
            const std::size_t w = uniform(rng, spec.rect_min, spec.rect_max);
            std::size_t h = uniform(rng, spec.rect_min, spec.rect_max);
            if (static_cast<double>(h * w) > remaining) {
              h = std::max<std::size_t>(
                  1, static_cast<std::size_t>(std::ceil(remaining / static_cast<double>(w))));
            }
            if (h > spec.height || w > spec.width) return std::nullopt;
            return rect(uniform(rng, 0, spec.height - h), uniform(rng, 0, spec.width - w), h, w,
                        ClassId::kIF);
          });
  }

  set_areas(f, tally);
  f.slide_ids = {std::move(slide_id)};
  SynthSlide out{canvas.take(), f, {}};
  out.truth = score_patient(out.features, ScoringRule::conventional());
  return out;
}

std::vector<MaskSource> model_masks(const LabelRaster& raster) {
  const std::size_t w = raster.width(), h = raster.height();
  auto mask_where = [&](ClassSet set) {
    BinaryMask m(w, h);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        if (set.contains(raster.at(r, c))) m.set(r, c, true);
      }
    }
    return m;
  };
  std::vector<MaskSource> out;
  out.push_back({ClassId::kGlomerulus, mask_where(ClassSet::glomerular())});
  out.push_back({ClassId::kGS, mask_where({ClassId::kGS})});
  out.push_back({ClassId::kFC, mask_where({ClassId::kFC})});
  out.push_back({ClassId::kTubule, mask_where({ClassId::kTubule, ClassId::kTA})});
  out.push_back({ClassId::kTA, mask_where({ClassId::kTA})});
  out.push_back({ClassId::kIF, mask_where({ClassId::kIF})});
  return out;
}

std::string covariate_kind_name(CovariateKind kind) {
  switch (kind) {
    case CovariateKind::kBinary: return "binary";
    case CovariateKind::kNormal: return "normal";
    case CovariateKind::kCategorical: return "categorical";
  }
  return "binary";
}

CovariateKind parse_covariate_kind(std::string_view name) {
  if (name == "binary") return CovariateKind::kBinary;
  if (name == "normal") return CovariateKind::kNormal;
  if (name == "categorical") return CovariateKind::kCategorical;
  throw ConfigError(
      fmt::format("unknown covariate kind '{}' (expected binary, normal or categorical)", name));
}

void CohortSpec::validate() const {
  if (n == 0) throw ConfigError("cohort: n must be positive");
  if (!(baseline_hazard > 0.0) || !std::isfinite(baseline_hazard)) {
    throw ConfigError("cohort: baseline_hazard must be positive");
  }
  if (!(censor_max >= 0.0) || !(admin_time >= 0.0)) {
    throw ConfigError("cohort: censoring times must be non-negative");
  }
  std::set<std::string> names;
  for (const auto& c : covariates) {
    if (c.name.empty() || !names.insert(c.name).second) {
      throw ConfigError(fmt::format("cohort: covariate name '{}' is empty or repeated", c.name));
    }
    if (!std::isfinite(c.beta)) throw ConfigError(fmt::format("cohort: '{}': beta not finite", c.name));
    switch (c.kind) {
      case CovariateKind::kBinary:
        if (!(c.p >= 0.0 && c.p <= 1.0)) {
          throw ConfigError(fmt::format("cohort: '{}': p outside [0, 1]", c.name));
        }
        break;
      case CovariateKind::kNormal:
        if (!(c.sd >= 0.0) || !std::isfinite(c.mean)) {
          throw ConfigError(fmt::format("cohort: '{}': invalid mean or sd", c.name));
        }
        break;
      case CovariateKind::kCategorical: {
        double total = 0.0;
        for (double q : c.level_probs) {
          if (!(q >= 0.0)) throw ConfigError(fmt::format("cohort: '{}': negative level probability", c.name));
          total += q;
        }
        if (c.level_probs.empty() || !(total > 0.0)) {
          throw ConfigError(fmt::format("cohort: '{}': level_probs must have positive mass", c.name));
        }
        break;
      }
    }
  }
}

Cohort generate_cohort(const CohortSpec& spec, unsigned jobs) {
  spec.validate();
  Cohort cohort;
  for (const auto& c : spec.covariates) cohort.covariate_names.push_back(c.name);
  cohort.records.resize(spec.n);
  const std::size_t width = fmt::formatted_size("{}", spec.n);

  parallel_for(spec.n, jobs, [&](std::size_t i) {
    Rng rng = substream(spec.seed, i);
    SurvivalRecord& r = cohort.records[i];
    r.subject_id = fmt::format("S{:0{}}", i + 1, width);
    double eta = 0.0;
    for (const auto& c : spec.covariates) {
      double x = 0.0;
      switch (c.kind) {
        case CovariateKind::kBinary:
          x = std::bernoulli_distribution(c.p)(rng) ? 1.0 : 0.0;
          break;
        case CovariateKind::kNormal:
          x = c.mean + c.sd * std::normal_distribution<double>(0.0, 1.0)(rng);
          break;
        case CovariateKind::kCategorical:
          x = static_cast<double>(std::discrete_distribution<int>(c.level_probs.begin(),
                                                                  c.level_probs.end())(rng));
          break;
      }
      r.covariates.push_back(x);
      eta += c.beta * x;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = 1.0 - unit(rng);  // (0, 1]
    double t = -std::log(u) / (spec.baseline_hazard * std::exp(eta));
    bool event = true;
    if (spec.censor_max > 0.0) {
      const double c = spec.censor_max * unit(rng);
      if (c < t) {
        t = c;
        event = false;
      }
    }
    if (spec.admin_time > 0.0 && spec.admin_time < t) {
      t = spec.admin_time;
      event = false;
    }
    r.time = t;
    r.event = event;
  });
  return cohort;
}

}  // namespace renalci
