// tile, stitch, fuse, score

#include <algorithm>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "common.hpp"
#include "renalci/csv.hpp"
#include "renalci/error.hpp"
#include "renalci/manifest.hpp"
#include "renalci/pgm.hpp"
#include "renalci/pipeline.hpp"

namespace renalci::cli {

namespace {

Stain stain_or_throw(const std::string& name) {
  auto s = parse_stain(name);
  if (!s) throw ConfigError(fmt::format("unknown stain '{}' (silver, trichrome, other)", name));
  return *s;
}

PrecedenceOrder order_from(const std::vector<std::string>& names) {
  return names.empty() ? PrecedenceOrder{} : PrecedenceOrder::from_names(names);
}

Json order_json(const PrecedenceOrder& order) {
  Json j = Json::array();
  for (ClassId c : order.classes()) j.push_back(class_name(c));
  return j;
}

struct FusionInput {
  std::string slide_id;
  Stain stain = Stain::kOther;
  std::optional<std::vector<std::string>> precedence;
  std::vector<MaskSource> sources;
  std::size_t width = 0;
  std::size_t height = 0;
};

ClassId class_or_throw(const std::string& name) {
  auto c = parse_class(name);
  if (!c || *c == ClassId::kBackground) {
    throw ConfigError(fmt::format("'{}' is not a foreground class", name));
  }
  return *c;
}

void set_dimensions(FusionInput& in) {
  if (in.sources.empty()) throw ConfigError("fusion: no mask sources");
  in.width = in.sources.front().mask.width();
  in.height = in.sources.front().mask.height();
}

/// {"slide_id", "stain", "precedence": [...], "sources": [{"class", "path"}]}
/// with paths relative to the fusion file.
FusionInput load_fusion_spec(const fs::path& path, Provenance& prov) {
  const Json j = parse_json(prov.read(path), path.string());
  if (!j.is_object() || !j.contains("sources") || !j["sources"].is_array()) {
    throw ConfigError(fmt::format("{}: fusion spec needs a 'sources' array", path.string()));
  }
  FusionInput in;
  try {
    in.slide_id = j.value("slide_id", path.parent_path().filename().string());
    in.stain = stain_or_throw(j.value("stain", std::string("other")));
    if (j.contains("precedence")) in.precedence = j["precedence"].get<std::vector<std::string>>();
    for (const auto& s : j["sources"]) {
      fs::path p = s.at("path").get<std::string>();
      if (p.is_relative()) p = path.parent_path() / p;
      in.sources.push_back(
          {class_or_throw(s.at("class").get<std::string>()), parse_mask(prov.read(p), p.string())});
    }
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  set_dimensions(in);
  return in;
}

/// CLASS=PATH
MaskSource load_mask_arg(const std::string& arg, Provenance& prov) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) throw ConfigError(fmt::format("--mask '{}': expected CLASS=PATH", arg));
  const fs::path p = arg.substr(eq + 1);
  return {class_or_throw(arg.substr(0, eq)), parse_mask(prov.read(p), p.string())};
}

std::vector<Patch<LabelRaster>> read_patches(const SlideManifest& m, const fs::path& base,
                                             Provenance& prov) {
  std::vector<Patch<LabelRaster>> out;
  out.reserve(m.patch_files.size());
  for (const auto& pf : m.patch_files) {
    fs::path p = pf.path;
    if (p.is_relative()) p = base / p;
    out.push_back({pf.row, pf.col, parse_raster(prov.read(p), p.string())});
  }
  return out;
}

ScoringRule resolve_rule(const std::string& spec, Provenance& prov) {
  if (auto builtin = ScoringRule::builtin(spec)) return *builtin;
  std::error_code ec;
  if (!fs::is_regular_file(spec, ec)) {
    throw ConfigError(fmt::format(
        "--rule '{}' is neither a built-in rule (conventional, nuanced-example) nor a file", spec));
  }
  return rule_from_json(parse_json(prov.read(spec), spec));
}

std::string csv_header(std::string_view id_column) {
  return fmt::format("{},n_slides,p_gs,p_fc,p_if,p_ta,gs,fc,if,ta,chronicity_index,rule,status\n",
                     id_column);
}

std::string csv_row(const std::string& id, std::size_t n_slides,
                    const std::optional<ChronicityResult>& r, const std::string& status) {
  std::string row = fmt::format("{},{},", csv_field(id), n_slides);
  if (r) {
    for (Parameter p : kParameters) row += format_double(r->proportions[p]) + ",";
    for (Parameter p : kParameters) row += fmt::format("{},", r->sub_scores[p]);
    row += fmt::format("{},{},", r->total, csv_field(r->rule_name));
  } else {
    row += ",,,,,,,,,,";
  }
  return row + status + "\n";
}

struct ScoredUnit {
  std::optional<ChronicityResult> result;
  std::string status = "ok";
  std::string error;
};

ScoredUnit score_features(const DiagnosticFeatures& f, const ScoringRule& rule) {
  ScoredUnit u;
  try {
    u.result = score_patient(f, rule);
  } catch (const InsufficientTissueError& e) {
    u.status = "insufficient_tissue";
    u.error = e.what();
  }
  return u;
}

Json unit_json(const ScoredUnit& u) {
  Json j;
  j["status"] = u.status;
  if (u.result) j["result"] = to_json(*u.result);
  if (!u.error.empty()) j["error"] = u.error;
  return j;
}

}  // namespace

void add_slide_commands(CLI::App& app, Globals& g, int& exit_code) {
  // tile
  {
    auto* cmd = app.add_subcommand("tile", "Split a label raster into a patch grid");
    auto input = std::make_shared<std::string>();
    auto patch = std::make_shared<std::size_t>(kDefaultPatchSize);
    auto slide_id = std::make_shared<std::string>();
    auto stain = std::make_shared<std::string>("other");
    cmd->add_option("--input", *input, "Label raster (PGM)")->required();
    cmd->add_option("--patch", *patch, "Patch size in pixels")->capture_default_str();
    cmd->add_option("--slide-id", *slide_id, "Slide id (default: input file stem)");
    cmd->add_option("--stain", *stain, "silver, trichrome or other")->capture_default_str();
    cmd->callback([=, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("tile");
      const LabelRaster raster = parse_raster(prov.read(*input), *input);
      const auto tiled = tile(raster, *patch, g.jobs);
      SlideManifest m{slide_id->empty() ? fs::path(*input).stem().string() : *slide_id,
                      stain_or_throw(*stain), tiled.grid, {}};
      Outputs out;
      for (const auto& p : tiled.patches) {
        auto name = patch_file_name(p.row, p.col);
        out.add(dir / name, encode_pgm(p.image.width(), p.image.height(), p.image.data()));
        m.patch_files.push_back({p.row, p.col, std::move(name)});
      }
      m.validate();
      out.add(dir / "manifest.json", manifest_json(m));
      out.commit();
    });
  }

  // stitch
  {
    auto* cmd = app.add_subcommand("stitch", "Reassemble a tiled slide into one raster");
    auto manifest = std::make_shared<std::string>();
    cmd->add_option("--manifest", *manifest, "manifest.json of a tiled slide")->required();
    cmd->callback([=, &g] {
      if (g.out.empty()) throw ConfigError("--out (output PGM path) is required for stitch");
      Provenance prov("stitch");
      const SlideManifest m = parse_manifest(prov.read(*manifest), *manifest);
      auto patches = read_patches(m, fs::path(*manifest).parent_path(), prov);
      const LabelRaster raster = stitch(m.grid, patches);
      Outputs out;
      out.add(g.out, encode_pgm(raster.width(), raster.height(), raster.data()));
      out.commit();
    });
  }

  // fuse
  {
    auto* cmd = app.add_subcommand("fuse", "Fuse per-class binary masks into a label raster");
    auto spec = std::make_shared<std::string>();
    auto masks = std::make_shared<std::vector<std::string>>();
    auto precedence = std::make_shared<std::vector<std::string>>();
    cmd->add_option("--spec", *spec, "Fusion spec JSON listing class/path sources");
    cmd->add_option("--mask", *masks, "CLASS=PATH mask source (repeatable)");
    cmd->add_option("--precedence", *precedence,
                    "Class names, highest precedence first (default GS FC TA IF Glomerulus Tubule)")
        ->delimiter(',');
    cmd->callback([=, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("fuse");
      FusionInput in;
      if (!spec->empty()) in = load_fusion_spec(*spec, prov);
      for (const auto& m : *masks) in.sources.push_back(load_mask_arg(m, prov));
      set_dimensions(in);
      const auto names = !precedence->empty() ? *precedence : in.precedence.value_or(std::vector<std::string>{});
      const PrecedenceOrder order = order_from(names);

      const LabelRaster fused = fuse(in.width, in.height, in.sources, order, g.jobs);
      const FusionReport fr = validate_fusion(fused, in.sources, order);

      Json sources = Json::array();
      for (const auto& s : in.sources) sources.push_back(class_name(s.cls));
      prov.config()["spec"] = *spec;
      prov.config()["masks"] = *masks;
      prov.config()["sources"] = std::move(sources);
      prov.config()["precedence"] = order_json(order);

      Outputs out;
      out.add(dir / "fused.pgm", encode_pgm(fused.width(), fused.height(), fused.data()));
      out.add(dir / "fusion_report.json", report(prov, g.seed, to_json(fr)));
      out.commit();
    });
  }

  // score
  {
    auto* cmd = app.add_subcommand("score", "Chronicity index per slide and per patient");
    struct Opts {
      std::vector<std::string> manifests, rasters, fusions, precedence;
      std::string patient_map, rule = "conventional", stain_mode = "pool";
      std::uint64_t min_area = 0;
      int connectivity = 8;
      std::size_t patch = kDefaultPatchSize;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--manifest", o->manifests, "Tiled label slide manifest (repeatable)");
    cmd->add_option("--raster", o->rasters, "Whole-slide label raster PGM (repeatable)");
    cmd->add_option("--fusion", o->fusions, "Fusion spec of per-class masks (repeatable)");
    cmd->add_option("--patient-map", o->patient_map, "CSV with slide_id,patient_id columns");
    cmd->add_option("--rule", o->rule, "Built-in rule name or rule JSON file")->capture_default_str();
    cmd->add_option("--stain-mode", o->stain_mode, "pool or by-stain")
        ->check(CLI::IsMember({"pool", "by-stain"}))
        ->capture_default_str();
    cmd->add_option("--min-area", o->min_area, "Drop glomerular instances smaller than this")
        ->capture_default_str();
    cmd->add_option("--connectivity", o->connectivity, "4 or 8")->capture_default_str();
    cmd->add_option("--precedence", o->precedence, "Fusion precedence, highest first")
        ->delimiter(',');
    cmd->add_option("--patch", o->patch, "Patch size for rasters and fused masks")
        ->capture_default_str();
    cmd->callback([o, &g, &exit_code] {
      const fs::path dir = out_dir(g);
      if (o->manifests.empty() && o->rasters.empty() && o->fusions.empty()) {
        throw ConfigError("score: give at least one --manifest, --raster or --fusion");
      }
      Provenance prov("score");
      const ScoringRule rule = resolve_rule(o->rule, prov);
      PipelineOptions popts;
      popts.patch_size = o->patch;
      popts.features.min_area = o->min_area;
      popts.features.connectivity = connectivity_from_int(o->connectivity);
      popts.order = order_from(o->precedence);
      popts.jobs = g.jobs;

      struct Slide {
        std::string id;
        Stain stain;
        std::string source;
        std::function<DiagnosticFeatures()> features;
      };
      std::vector<Slide> slides;
      // Every input is read up front; features are computed afterwards.
      for (const auto& path : o->manifests) {
        auto m = std::make_shared<SlideManifest>(parse_manifest(prov.read(path), path));
        auto patches = std::make_shared<std::vector<Patch<LabelRaster>>>(
            read_patches(*m, fs::path(path).parent_path(), prov));
        slides.push_back({m->slide_id, m->stain, path, [m, patches, popts] {
                            return extract_features_tiled(m->grid, *patches, popts.features,
                                                          m->slide_id, popts.jobs);
                          }});
      }
      for (const auto& path : o->rasters) {
        auto raster = std::make_shared<LabelRaster>(parse_raster(prov.read(path), path));
        const std::string id = fs::path(path).stem().string();
        slides.push_back({id, Stain::kOther, path,
                          [raster, popts, id] { return features_from_raster(*raster, popts, id); }});
      }
      for (const auto& path : o->fusions) {
        auto in = std::make_shared<FusionInput>(load_fusion_spec(path, prov));
        PipelineOptions fopts = popts;
        if (o->precedence.empty() && in->precedence) fopts.order = order_from(*in->precedence);
        slides.push_back({in->slide_id, in->stain, path, [in, fopts] {
                            return features_from_masks(in->width, in->height, in->sources, fopts,
                                                       in->slide_id);
                          }});
      }
      std::set<std::string> seen;
      for (const auto& s : slides) {
        if (!seen.insert(s.id).second) throw InputError(fmt::format("duplicate slide id '{}'", s.id));
      }

      std::map<std::string, std::string> patient_of;
      if (!o->patient_map.empty()) {
        const CsvTable t = parse_csv(prov.read(o->patient_map));
        const auto sc = t.column("slide_id"), pc = t.column("patient_id");
        for (const auto& row : t.rows) patient_of[row[sc]] = row[pc];
        for (const auto& s : slides) {
          if (!patient_of.count(s.id)) {
            throw InputError(fmt::format("slide '{}' is missing from {}", s.id, o->patient_map));
          }
        }
      } else {
        for (const auto& s : slides) patient_of[s.id] = s.id;
      }

      Json slides_json = Json::array();
      std::string slides_csv = "patient_id," + csv_header("slide_id");
      std::map<std::string, std::vector<StainedFeatures>> by_patient;
      std::map<std::string, std::vector<std::string>> ids_of;
      for (const auto& s : slides) {
        const DiagnosticFeatures f = s.features();
        const ScoredUnit u = score_features(f, rule);
        Json sj;
        sj["slide_id"] = s.id;
        sj["patient_id"] = patient_of[s.id];
        sj["stain"] = stain_name(s.stain);
        sj["source"] = s.source;
        sj["features"] = to_json(f);
        sj.update(unit_json(u));
        slides_json.push_back(std::move(sj));
        slides_csv += csv_field(patient_of[s.id]) + "," + csv_row(s.id, 1, u.result, u.status);
        by_patient[patient_of[s.id]].push_back({s.stain, f});
        ids_of[patient_of[s.id]].push_back(s.id);
      }

      Json patients_json = Json::array();
      std::string patients_csv = csv_header("patient_id");
      std::size_t failed = 0;
      for (const auto& [pid, feats] : by_patient) {
        std::optional<DiagnosticFeatures> f;
        ScoredUnit u;
        try {
          if (o->stain_mode == "by-stain") {
            f = aggregate_by_stain(feats);
          } else {
            std::vector<DiagnosticFeatures> plain;
            for (const auto& sf : feats) plain.push_back(sf.features);
            f = aggregate_patient(plain);
          }
          u = score_features(*f, rule);
        } catch (const InputError& e) {
          u.status = "error";
          u.error = e.what();
        }
        if (!u.result) {
          ++failed;
          std::cerr << fmt::format("patient '{}': {}\n", pid, u.error);
        }
        Json pj;
        pj["patient_id"] = pid;
        pj["slide_ids"] = ids_of[pid];
        if (f) pj["features"] = to_json(*f);
        pj.update(unit_json(u));
        patients_json.push_back(std::move(pj));
        patients_csv += csv_row(pid, feats.size(), u.result, u.status);
      }

      prov.config()["manifests"] = o->manifests;
      prov.config()["rasters"] = o->rasters;
      prov.config()["fusions"] = o->fusions;
      prov.config()["patient_map"] = o->patient_map;
      prov.config()["rule"] = to_json(rule);
      prov.config()["stain_mode"] = o->stain_mode;
      prov.config()["min_area"] = o->min_area;
      prov.config()["connectivity"] = o->connectivity;
      prov.config()["precedence"] = order_json(popts.order);
      prov.config()["patch_size"] = o->patch;

      Json result;
      result["slides"] = std::move(slides_json);
      result["patients"] = std::move(patients_json);
      result["n_patients"] = by_patient.size();
      result["n_failed"] = failed;

      Outputs out;
      out.add(dir / "score.json", report(prov, g.seed, std::move(result)));
      out.add(dir / "patients.csv", patients_csv);
      out.add(dir / "slides.csv", slides_csv);
      out.commit();

      if (failed == by_patient.size()) {
        exit_code = kExitComputation;
      } else if (failed > 0) {
        exit_code = kExitPartial;
      }
    });
  }
}

}  // namespace renalci::cli
