// synth slide | cohort

#include <sstream>

#include <fmt/format.h>

#include "common.hpp"
#include "renalci/error.hpp"
#include "renalci/manifest.hpp"
#include "renalci/pgm.hpp"
#include "renalci/synth.hpp"

namespace renalci::cli {

namespace {

std::string mask_pgm(const BinaryMask& m) {
  std::vector<std::uint8_t> gray(m.size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = m.data()[i] ? 255 : 0;
  return encode_pgm(m.width(), m.height(), gray);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

void add_synth_commands(CLI::App& app, Globals& g, int&) {
  auto* synth = app.add_subcommand("synth", "Synthetic slides and cohorts with known truth");
  synth->require_subcommand(1);
  const CLI::Option* seed_opt = app.get_option("--seed");

  // slide
  {
    auto* cmd = synth->add_subcommand("slide", "Generate a labeled slide, its masks and truth");
    struct Opts {
      std::string spec, slide_id = "synth";
      std::size_t patch = kDefaultPatchSize;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--spec", o->spec, "SynthSpec JSON (default: built-in spec)");
    cmd->add_option("--slide-id", o->slide_id, "Slide id")->capture_default_str();
    cmd->add_option("--patch", o->patch, "Patch size of the tiled copy")->capture_default_str();
    cmd->callback([o, &g, seed_opt] {
      const fs::path dir = out_dir(g);
      Provenance prov("synth slide");
      SynthSpec spec;
      if (!o->spec.empty()) spec = synth_spec_from_json(parse_json(prov.read(o->spec), o->spec));
      if (seed_opt->count() > 0) spec.seed = g.seed;
      const SynthSlide slide = generate_slide(spec, o->slide_id);
      const auto tiled = tile(slide.raster, o->patch, g.jobs);

      Outputs out;
      const auto& r = slide.raster;
      out.add(dir / "slide.pgm", encode_pgm(r.width(), r.height(), r.data()));

      SlideManifest m{o->slide_id, Stain::kOther, tiled.grid, {}};
      for (const auto& p : tiled.patches) {
        auto name = patch_file_name(p.row, p.col);
        out.add(dir / "tiled" / name, encode_pgm(p.image.width(), p.image.height(), p.image.data()));
        m.patch_files.push_back({p.row, p.col, std::move(name)});
      }
      out.add(dir / "tiled" / "manifest.json", manifest_json(m));

      Json sources = Json::array();
      for (const auto& src : model_masks(r)) {
        const std::string name = lower(class_name(src.cls)) + ".pgm";
        out.add(dir / "masks" / name, mask_pgm(src.mask));
        sources.push_back(Json{{"class", class_name(src.cls)}, {"path", name}});
      }
      Json fusion;
      fusion["slide_id"] = o->slide_id;
      fusion["stain"] = "other";
      fusion["sources"] = std::move(sources);
      out.add(dir / "masks" / "fusion.json", fusion.dump(2) + "\n");

      prov.config()["spec"] = to_json(spec);
      prov.config()["slide_id"] = o->slide_id;
      prov.config()["patch_size"] = o->patch;
      Json result;
      result["features"] = to_json(slide.features);
      result["truth"] = to_json(slide.truth);
      out.add(dir / "truth.json", report(prov, spec.seed, std::move(result)));
      out.commit();
    });
  }

  // cohort
  {
    auto* cmd = synth->add_subcommand("cohort", "Generate a proportional-hazards cohort CSV");
    struct Opts {
      std::string spec;
      std::size_t n = 0;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--spec", o->spec, "CohortSpec JSON (default: one binary covariate, HR 2)");
    cmd->add_option("--n", o->n, "Override the number of subjects");
    cmd->callback([o, &g, seed_opt] {
      const fs::path dir = out_dir(g);
      Provenance prov("synth cohort");
      CohortSpec spec;
      if (!o->spec.empty()) {
        spec = cohort_spec_from_json(parse_json(prov.read(o->spec), o->spec));
      } else {
        spec.covariates.push_back(
            CovariateSpec{"x", CovariateKind::kBinary, 0.5, 0.0, 1.0, {}, std::log(2.0)});
        spec.censor_max = 20.0;
      }
      if (o->n > 0) spec.n = o->n;
      if (seed_opt->count() > 0) spec.seed = g.seed;
      const Cohort cohort = generate_cohort(spec, g.jobs);

      std::ostringstream csv;
      write_cohort_csv(cohort, csv);
      prov.config()["spec"] = to_json(spec);
      Json result;
      result["n"] = cohort.records.size();
      std::size_t events = 0;
      for (const auto& r : cohort.records) events += r.event ? 1 : 0;
      result["n_events"] = events;
      Outputs out;
      out.add(dir / "cohort.csv", csv.str());
      out.add(dir / "cohort.json", report(prov, spec.seed, std::move(result)));
      out.commit();
    });
  }
}

}  // namespace renalci::cli
