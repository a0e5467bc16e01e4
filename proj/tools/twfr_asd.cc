// twfr_asd: command-line front end for the TWFR-GMM pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "twfr/config.h"
#include "twfr/error.h"
#include "twfr/pipeline.h"
#include "twfr/report.h"
#include "twfr/synthetic.h"

namespace fs = std::filesystem;
using namespace twfr;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> r;
  std::optional<double> p;
};

PipelineConfig load_config(const Common& c) {
  PipelineConfig cfg = c.config_path.empty() ? PipelineConfig{} : PipelineConfig::load(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.p) {
    if (!(*c.p > 0.0 && *c.p <= 1.0)) throw ConfigError("--p must lie in (0, 1]");
    cfg.p = *c.p;
  }
  return cfg;
}

MachineConfig machine_config(const PipelineConfig& cfg, const Common& c, const std::string& machine) {
  MachineConfig m = cfg.machine(machine);
  if (c.r) {
    m.r = *c.r;
    m.validate();
  }
  return m;
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TWFR-GMM anomalous sound detection"};
  app.require_subcommand(1);
  Common common;

  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Run seed (overrides the config)");
  };

  // fit
  std::string dataset_root, out, bundle_dir, scores_path, json_path, validation_root, split_name = "test";
  std::vector<std::string> machines;
  std::string grid_text = "0:0.01:1";
  int section = 0;

  CLI::App* fit = app.add_subcommand("fit", "Train per-section models into a bundle directory");
  fit->add_option("--dataset-root", dataset_root, "Root holding <machine>/train")->required();
  fit->add_option("--machine", machines, "Machine type(s)")->required()->delimiter(',');
  add_config(fit);
  fit->add_option("--r", common.r, "Pooling decay r for every machine")->check(CLI::Range(0.0, 1.0));
  fit->add_option("--out", out, "Bundle directory")->required();

  CLI::App* score = app.add_subcommand("score", "Score clips with a trained bundle");
  score->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  score->add_option("--dataset-root", dataset_root, "Root holding <machine>/<split>")->required();
  score->add_option("--machine", machines, "Machine type(s); default: all in the bundle")->delimiter(',');
  score->add_option("--split", split_name, "train or test")->check(CLI::IsMember({"train", "test"}));
  score->add_option("--out", out, "Score CSV")->required();

  CLI::App* eval = app.add_subcommand("eval", "AUC/pAUC report from a score CSV");
  eval->add_option("--scores", scores_path, "Score CSV from `score`")->required()->check(CLI::ExistingFile);
  add_config(eval);
  eval->add_option("--p", common.p, "pAUC false-positive range (default 0.1)");
  eval->add_option("--out", out, "Report CSV")->required();
  eval->add_option("--json", json_path, "Report JSON (default: --out with .json)");

  CLI::App* search = app.add_subcommand("search-r", "Grid-search r against a labelled validation split");
  search->add_option("--dataset-root", dataset_root, "Root holding <machine>/train")->required();
  search->add_option("--validation-root", validation_root,
                     "Root whose <machine>/test clips are labelled (default: --dataset-root)");
  search->add_option("--machine", machines, "Machine type")->required()->expected(1);
  add_config(search);
  search->add_option("--grid", grid_text, "start:step:stop or comma list");
  search->add_option("--out", out, "Table CSV")->required();

  CLI::App* exp = app.add_subcommand("export-dist", "Mahalanobis distance matrix for one section");
  exp->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  exp->add_option("--dataset-root", dataset_root, "Root holding <machine>/<split>")->required();
  exp->add_option("--machine", machines, "Machine type")->required()->expected(1);
  exp->add_option("--section", section, "Section number");
  exp->add_option("--split", split_name, "train or test")->check(CLI::IsMember({"train", "test"}));
  exp->add_option("--out", out, "Output directory")->required();

  SyntheticLayout layout;
  SyntheticMachine sound;
  std::uint64_t synth_seed = 0;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--out", out, "Dataset root")->required();
  synth->add_option("--machine", layout.machine, "Machine name");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--sections", layout.sections);
  synth->add_option("--train-source", layout.train_source);
  synth->add_option("--train-target", layout.train_target);
  synth->add_option("--test-normal", layout.test_normal, "Normal test clips per domain");
  synth->add_option("--test-anomaly", layout.test_anomaly, "Anomalous test clips per domain");
  synth->add_option("--duration", sound.duration_s, "Clip length in seconds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      const PipelineConfig cfg = load_config(common);
      Bundle bundle;
      bundle.seed = cfg.seed;
      for (const std::string& machine : machines) {
        const MachineConfig mc = machine_config(cfg, common, machine);
        std::vector<std::string> warnings;
        const auto features = extract_split_features(dataset_root, machine, Split::kTrain, mc, warnings);
        report_warnings(warnings);
        auto sections = train_machine(features, mc, cfg.seed);
        for (const auto& [s, model] : sections) {
          std::printf("%s section %02d: %zu source, %zu target, %zu synthetic, K=%d, r=%.2f\n",
                      machine.c_str(), s, model.stats.n_source, model.stats.n_target,
                      model.stats.n_synthetic, model.model.n_components(), mc.r);
        }
        bundle.machines[machine] = BundleMachine{mc, std::move(sections)};
      }
      save_bundle(out, bundle);
    } else if (score->parsed()) {
      const Bundle bundle = load_bundle(bundle_dir);
      if (machines.empty()) {
        for (const auto& [name, _] : bundle.machines) machines.push_back(name);
      }
      std::vector<ScoredClip> all;
      for (const std::string& machine : machines) {
        const auto it = bundle.machines.find(machine);
        if (it == bundle.machines.end()) throw ConfigError("bundle has no model for machine " + machine);
        std::vector<std::string> warnings;
        const auto features =
            extract_split_features(dataset_root, machine, parse_split(split_name), it->second.config, warnings);
        report_warnings(warnings);
        const auto scores = score_machine(it->second.sections, features, it->second.config);
        all.insert(all.end(), scores.begin(), scores.end());
      }
      std::ofstream f = open_out(out);
      write_scores_csv(f, all);
      std::printf("scored %zu clips\n", all.size());
    } else if (eval->parsed()) {
      const PipelineConfig cfg = load_config(common);
      std::ifstream in(scores_path);
      const auto scores = read_scores_csv(in);
      const EvalReport report = evaluate(group_scores(scores), cfg.p);
      std::ofstream f = open_out(out);
      write_report_csv(f, report);
      const fs::path jpath = json_path.empty() ? fs::path(out).replace_extension(".json") : fs::path(json_path);
      open_out(jpath) << report_to_json(report).dump(2) << '\n';
      for (const MachineAverage& m : report.machines) {
        std::printf("%-10s AUC %6.2f%%  pAUC %6.2f%%\n", m.machine.c_str(), 100 * m.mean.auc, 100 * m.mean.pauc);
      }
      std::printf("%-10s AUC %6.2f%%  pAUC %6.2f%%  (p=%.2f)\n", "average", 100 * report.over_machine_types.auc,
                  100 * report.over_machine_types.pauc, report.p);
    } else if (search->parsed()) {
      const PipelineConfig cfg = load_config(common);
      const std::string& machine = machines.front();
      const MachineConfig mc = machine_config(cfg, common, machine);
      const std::vector<double> grid = parse_r_grid(grid_text);
      std::vector<std::string> warnings;
      const auto train = prepare_split(dataset_root, machine, Split::kTrain, mc.spectrogram, warnings);
      const auto val = prepare_split(validation_root.empty() ? dataset_root : validation_root, machine,
                                     Split::kTest, mc.spectrogram, warnings);
      report_warnings(warnings);
      const GridSearchResult result = grid_search_r(train, val, grid, mc, cfg.seed);
      std::ofstream f = open_out(out);
      f << "r,mean_auc";
      for (const auto& [s, _] : result.table.front().section_auc) {
        char col[32];
        std::snprintf(col, sizeof(col), ",section_%02d", s);
        f << col;
      }
      f << '\n';
      for (const GridPoint& p : result.table) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4g,%.17g", p.r, p.mean_auc);
        f << buf;
        for (const auto& [s, a] : p.section_auc) {
          std::snprintf(buf, sizeof(buf), ",%.17g", a);
          f << buf;
        }
        f << '\n';
      }
      std::printf("best_r=%.4g\n", result.best_r);
    } else if (exp->parsed()) {
      const Bundle bundle = load_bundle(bundle_dir);
      const std::string& machine = machines.front();
      const auto it = bundle.machines.find(machine);
      if (it == bundle.machines.end()) throw ConfigError("bundle has no model for machine " + machine);
      const auto sec = it->second.sections.find(section);
      if (sec == it->second.sections.end()) {
        throw ConfigError("bundle has no model for section " + std::to_string(section));
      }
      std::vector<std::string> warnings;
      auto features =
          extract_split_features(dataset_root, machine, parse_split(split_name), it->second.config, warnings);
      report_warnings(warnings);
      std::erase_if(features, [&](const LabeledFeature& f) { return f.meta.section != section; });
      const DistanceExport e = build_distance_export(sec->second.model, features);
      write_distance_export(out, e);
      std::printf("wrote %ldx%ld distance matrix\n", static_cast<long>(e.matrix.rows()),
                  static_cast<long>(e.matrix.cols()));
    } else if (synth->parsed()) {
      write_synthetic_dataset(out, layout, sound, synth_seed);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
