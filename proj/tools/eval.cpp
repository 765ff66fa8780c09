// eval dice | spearman | kappa

#include <charconv>
#include <map>

#include <fmt/format.h>

#include "common.hpp"
#include "renalci/csv.hpp"
#include "renalci/error.hpp"
#include "renalci/pgm.hpp"

namespace renalci::cli {

namespace {

struct PairedColumns {
  std::vector<std::string> ids;
  std::vector<std::string> a;
  std::vector<std::string> b;
};

std::map<std::string, std::string> column_by_id(const CsvTable& t, const std::string& id_col,
                                                const std::string& col, const std::string& path) {
  const std::size_t ic = id_col.empty() ? 0 : t.column(id_col);
  const std::size_t vc = t.column(col);
  std::map<std::string, std::string> out;
  for (const auto& row : t.rows) {
    if (!out.emplace(row[ic], row[vc]).second) {
      throw InputError(fmt::format("{}: duplicate id '{}'", path, row[ic]));
    }
  }
  return out;
}

/// Rows of two rating files matched by id. Both files must list the same ids.
PairedColumns pair_columns(const std::string& path_a, const std::string& path_b,
                           const std::string& id_col, const std::string& col_a,
                           const std::string& col_b, Provenance& prov) {
  const CsvTable ta = parse_csv(prov.read(path_a));
  const CsvTable tb = parse_csv(prov.read(path_b));
  const auto a = column_by_id(ta, id_col, col_a, path_a);
  const auto b = column_by_id(tb, id_col, col_b, path_b);
  PairedColumns out;
  for (const auto& [id, v] : a) {
    auto it = b.find(id);
    if (it == b.end()) throw InputError(fmt::format("id '{}' is in {} but not in {}", id, path_a, path_b));
    out.ids.push_back(id);
    out.a.push_back(v);
    out.b.push_back(it->second);
  }
  for (const auto& [id, v] : b) {
    if (!a.count(id)) throw InputError(fmt::format("id '{}' is in {} but not in {}", id, path_b, path_a));
  }
  return out;
}

std::vector<double> to_doubles(const std::vector<std::string>& cells, const std::string& what) {
  std::vector<double> out;
  for (const auto& c : cells) out.push_back(parse_double(c, what));
  return out;
}

std::vector<int> to_ints(const std::vector<std::string>& cells, const std::string& what) {
  std::vector<int> out;
  for (const auto& c : cells) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
    if (ec != std::errc() || ptr != c.data() + c.size()) {
      throw InputError(fmt::format("{}: '{}' is not an integer rating", what, c));
    }
    out.push_back(v);
  }
  return out;
}

struct RatingOpts {
  std::string a, b, column, column_b, id_column;
};

void add_rating_options(CLI::App* cmd, RatingOpts& o) {
  cmd->add_option("--a", o.a, "First rater's CSV")->required();
  cmd->add_option("--b", o.b, "Second rater's CSV")->required();
  cmd->add_option("--column", o.column, "Value column")->required();
  cmd->add_option("--column-b", o.column_b, "Value column in --b (default: --column)");
  cmd->add_option("--id-column", o.id_column, "Id column (default: first column)");
}

void echo_rating_options(Provenance& prov, const RatingOpts& o) {
  prov.config()["a"] = o.a;
  prov.config()["b"] = o.b;
  prov.config()["column"] = o.column;
  prov.config()["column_b"] = o.column_b.empty() ? o.column : o.column_b;
  prov.config()["id_column"] = o.id_column;
}

}  // namespace

void add_eval_commands(CLI::App& app, Globals& g, int&) {
  auto* eval = app.add_subcommand("eval", "Segmentation and agreement metrics");
  eval->require_subcommand(1);

  // dice
  {
    auto* cmd = eval->add_subcommand("dice", "Per-class Dice with bootstrap intervals");
    struct Opts {
      std::string pred, truth;
      std::vector<std::string> classes;
      std::size_t resamples = 2000;
      double level = 0.95;
      bool exclude_both_empty = false;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--pred", o->pred, "Directory of predicted label rasters")->required();
    cmd->add_option("--truth", o->truth, "Directory of reference label rasters, same names")
        ->required();
    cmd->add_option("--classes", o->classes, "Classes to evaluate (default: all six)")
        ->delimiter(',');
    cmd->add_option("--resamples", o->resamples, "Bootstrap resamples")->capture_default_str();
    cmd->add_option("--level", o->level, "Confidence level")->capture_default_str();
    cmd->add_flag("--exclude-both-empty", o->exclude_both_empty,
                  "Skip images where neither raster has the class");
    cmd->callback([o, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("eval dice");
      const auto pred_files = list_files(o->pred, ".pgm");
      const auto truth_files = list_files(o->truth, ".pgm");
      if (pred_files.empty()) throw InputError(fmt::format("no .pgm files in '{}'", o->pred));
      std::vector<std::string> names;
      for (const auto& p : pred_files) names.push_back(p.filename().string());
      std::vector<std::string> truth_names;
      for (const auto& p : truth_files) truth_names.push_back(p.filename().string());
      if (names != truth_names) {
        throw InputError(fmt::format("'{}' and '{}' do not hold the same file names", o->pred,
                                     o->truth));
      }
      std::vector<LabelRaster> preds, truths;
      for (std::size_t i = 0; i < names.size(); ++i) {
        preds.push_back(parse_raster(prov.read(pred_files[i]), pred_files[i].string()));
        truths.push_back(parse_raster(prov.read(truth_files[i]), truth_files[i].string()));
      }
      std::vector<ClassId> classes;
      if (o->classes.empty()) {
        classes.assign(kForegroundClasses.begin(), kForegroundClasses.end());
      } else {
        for (const auto& n : o->classes) {
          auto c = parse_class(n);
          if (!c) throw ConfigError(fmt::format("unknown class '{}'", n));
          classes.push_back(*c);
        }
      }
      BootstrapOptions bo;
      bo.level = o->level;
      bo.n_resamples = o->resamples;
      bo.seed = g.seed;
      bo.jobs = g.jobs;
      const DiceReport r = evaluate_dice(preds, truths, classes, bo, o->exclude_both_empty);

      Json class_names = Json::array();
      for (ClassId c : classes) class_names.push_back(class_name(c));
      prov.config()["pred"] = o->pred;
      prov.config()["truth"] = o->truth;
      prov.config()["classes"] = std::move(class_names);
      prov.config()["resamples"] = o->resamples;
      prov.config()["level"] = o->level;
      prov.config()["exclude_both_empty"] = o->exclude_both_empty;

      Json result = to_json(r);
      result["images"] = names;
      Outputs out;
      out.add(dir / "dice.json", report(prov, g.seed, std::move(result)));
      out.commit();
    });
  }

  // spearman
  {
    auto* cmd = eval->add_subcommand("spearman", "Rank correlation between two raters");
    auto o = std::make_shared<RatingOpts>();
    add_rating_options(cmd, *o);
    cmd->callback([o, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("eval spearman");
      const auto paired = pair_columns(o->a, o->b, o->id_column, o->column,
                                       o->column_b.empty() ? o->column : o->column_b, prov);
      const SpearmanResult r =
          spearman(to_doubles(paired.a, o->a), to_doubles(paired.b, o->b));
      echo_rating_options(prov, *o);
      Json result = to_json(r);
      result["n"] = paired.ids.size();
      Outputs out;
      out.add(dir / "spearman.json", report(prov, g.seed, std::move(result)));
      out.commit();
    });
  }

  // kappa
  {
    auto* cmd = eval->add_subcommand("kappa", "Cohen's kappa between two raters");
    auto o = std::make_shared<RatingOpts>();
    auto weighting = std::make_shared<std::string>("none");
    add_rating_options(cmd, *o);
    cmd->add_option("--weighting", *weighting, "none, linear or quadratic")
        ->check(CLI::IsMember({"none", "linear", "quadratic"}))
        ->capture_default_str();
    cmd->callback([o, weighting, &g] {
      const fs::path dir = out_dir(g);
      Provenance prov("eval kappa");
      const auto paired = pair_columns(o->a, o->b, o->id_column, o->column,
                                       o->column_b.empty() ? o->column : o->column_b, prov);
      const KappaWeighting w = *weighting == "linear"      ? KappaWeighting::kLinear
                               : *weighting == "quadratic" ? KappaWeighting::kQuadratic
                                                           : KappaWeighting::kNone;
      const double k = cohens_kappa(to_ints(paired.a, o->a), to_ints(paired.b, o->b), w);
      echo_rating_options(prov, *o);
      prov.config()["weighting"] = *weighting;
      Json result;
      result["kappa"] = k;
      result["weighting"] = *weighting;
      result["n"] = paired.ids.size();
      Outputs out;
      out.add(dir / "kappa.json", report(prov, g.seed, std::move(result)));
      out.commit();
    });
  }
}

}  // namespace renalci::cli
