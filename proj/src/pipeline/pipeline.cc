#include "twfr/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "twfr/error.h"
#include "twfr/gmm_io.h"
#include "twfr/random.h"
#include "twfr/smote.h"

namespace twfr {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_section(int section) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", section);
  return buf;
}

// Log-Mel front end that keeps one filterbank per sample rate seen.
class MelFrontEnd {
 public:
  explicit MelFrontEnd(const SpectrogramConfig& cfg) : cfg_(cfg) {}

  LogMelSpectrogram operator()(const AudioClip& clip) {
    auto it = banks_.find(clip.sample_rate);
    if (it == banks_.end()) {
      cfg_.validate(clip.sample_rate);
      it = banks_
               .emplace(clip.sample_rate,
                        mel_filterbank(clip.sample_rate, cfg_.window_size, cfg_.n_mels, cfg_.f_min,
                                       cfg_.f_max))
               .first;
    }
    return log_mel(clip, cfg_, it->second);
  }

 private:
  SpectrogramConfig cfg_;
  std::map<int, Eigen::MatrixXd> banks_;
};

// Pooling vectors keyed by frame count, for splits with unequal clip lengths.
class Pooler {
 public:
  explicit Pooler(double r) : r_(r) {}

  TwfrVector operator()(const Eigen::MatrixXd& sorted) {
    const int n = static_cast<int>(sorted.cols());
    auto it = cache_.find(n);
    if (it == cache_.end()) it = cache_.emplace(n, PoolingVector(r_, n)).first;
    return pool_sorted(sorted, it->second);
  }

 private:
  double r_;
  std::map<int, PoolingVector> cache_;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + std::string(what) + " '" + s + "'");
  }
}

}  // namespace

PreparedClip prepare_clip(const AudioClip& clip, const ClipMetadata& meta,
                          const SpectrogramConfig& cfg) {
  return PreparedClip{meta, row_descending_sort(log_mel(clip, cfg).values)};
}

std::vector<PreparedClip> prepare_clips(std::span<const LabeledClip> clips,
                                        const SpectrogramConfig& cfg) {
  MelFrontEnd front(cfg);
  std::vector<PreparedClip> out;
  out.reserve(clips.size());
  for (const LabeledClip& c : clips) out.push_back({c.meta, row_descending_sort(front(c.clip).values)});
  return out;
}

std::vector<LabeledFeature> pool_prepared(std::span<const PreparedClip> clips, double r) {
  Pooler pool(r);
  std::vector<LabeledFeature> out;
  out.reserve(clips.size());
  for (const PreparedClip& c : clips) out.push_back({c.meta, pool(c.sorted)});
  return out;
}

TwfrVector extract_twfr(const AudioClip& clip, const MachineConfig& cfg) {
  return gwrp(log_mel(clip, cfg.spectrogram), cfg.r);
}

std::uint64_t section_seed(std::uint64_t seed, std::string_view machine, int section) {
  return derive_seed(seed, machine, section);
}

SectionModel train_section_features(std::span<const LabeledFeature> features,
                                    const MachineConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (features.empty()) throw ConfigError("no training clips for section");
  const int section = features.front().meta.section;
  std::vector<Eigen::VectorXd> source;
  std::vector<Eigen::VectorXd> target;
  for (const LabeledFeature& f : features) {
    if (f.meta.section != section) {
      throw ConfigError("train_section received clips from sections " + fmt_section(section) +
                        " and " + fmt_section(f.meta.section));
    }
    (f.meta.domain == Domain::kSource ? source : target).push_back(f.feature);
  }

  SectionStats stats{source.size(), target.size(), 0, seed};

  std::vector<Eigen::VectorXd> training;
  training.reserve(features.size());
  for (const LabeledFeature& f : features) training.push_back(f.feature);

  // SMOTE needs two vectors to interpolate; a lone target clip is used as is.
  if (cfg.smote && target.size() >= 2) {
    SmoteOptions opts = *cfg.smote;
    if (opts.target_count == 0) opts.target_count = std::max(source.size(), target.size());
    opts.seed = derive_seed(seed, "smote", section);
    const std::vector<Eigen::VectorXd> balanced = smote_oversample(target, opts);
    training.insert(training.end(), balanced.begin() + static_cast<std::ptrdiff_t>(target.size()),
                    balanced.end());
    stats.n_synthetic = balanced.size() - target.size();
  }

  const FitOptions fit{cfg.k, cfg.em.reg_covar, cfg.em.tol, cfg.em.max_iter, cfg.em.n_init,
                       derive_seed(seed, "gmm", section)};
  return SectionModel{fit_gmm(training, fit), stats};
}

GmmModel train_section(std::span<const LabeledClip> clips, const MachineConfig& cfg,
                       std::uint64_t seed) {
  MelFrontEnd front(cfg.spectrogram);
  std::vector<LabeledFeature> features;
  features.reserve(clips.size());
  for (const LabeledClip& c : clips) features.push_back({c.meta, gwrp(front(c.clip), cfg.r)});
  return train_section_features(features, cfg, seed).model;
}

std::map<int, SectionModel> train_machine(std::span<const LabeledFeature> features,
                                          const MachineConfig& cfg, std::uint64_t seed) {
  std::map<int, std::vector<LabeledFeature>> by_section;
  for (const LabeledFeature& f : features) by_section[f.meta.section].push_back(f);
  std::map<int, SectionModel> out;
  for (const auto& [section, group] : by_section) {
    const std::uint64_t s = section_seed(seed, group.front().meta.machine_type, section);
    out.emplace(section, train_section_features(group, cfg, s));
  }
  return out;
}

std::vector<ScoredClip> score_features(const GmmModel& model,
                                       std::span<const LabeledFeature> features,
                                       const MachineConfig& cfg) {
  if (model.dim() != cfg.spectrogram.n_mels) {
    throw ConfigError("model dimension " + std::to_string(model.dim()) + " does not match n_mels " +
                      std::to_string(cfg.spectrogram.n_mels));
  }
  const ScoreOptions opts{cfg.include_component_weight};
  std::vector<ScoredClip> out;
  out.reserve(features.size());
  for (const LabeledFeature& f : features) out.push_back({f.meta, anomaly_score(model, f.feature, opts)});
  return out;
}

std::vector<ScoredClip> score_clips(const GmmModel& model, std::span<const LabeledClip> clips,
                                    const MachineConfig& cfg) {
  MelFrontEnd front(cfg.spectrogram);
  std::vector<LabeledFeature> features;
  features.reserve(clips.size());
  for (const LabeledClip& c : clips) features.push_back({c.meta, gwrp(front(c.clip), cfg.r)});
  return score_features(model, features, cfg);
}

std::vector<ScoredClip> score_machine(const std::map<int, SectionModel>& models,
                                      std::span<const LabeledFeature> features,
                                      const MachineConfig& cfg) {
  std::vector<ScoredClip> out;
  out.reserve(features.size());
  for (const LabeledFeature& f : features) {
    const auto it = models.find(f.meta.section);
    if (it == models.end()) {
      throw ConfigError("no trained model for " + f.meta.machine_type + " section " +
                        fmt_section(f.meta.section));
    }
    auto scored = score_features(it->second.model, std::span(&f, 1), cfg);
    out.push_back(std::move(scored.front()));
  }
  return out;
}

void write_scores_csv(std::ostream& out, std::span<const ScoredClip> scores) {
  out << "machine,section,domain,split,label,clip_id,score\n";
  for (const ScoredClip& s : scores) {
    out << s.meta.machine_type << ',' << fmt_section(s.meta.section) << ','
        << to_string(s.meta.domain) << ',' << to_string(s.meta.split) << ','
        << to_string(s.meta.label) << ',' << s.meta.clip_id << ',' << fmt_double(s.score.value)
        << '\n';
  }
}

std::vector<ScoredClip> read_scores_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "machine,section,domain,split,label,clip_id,score") {
    throw ParseError("score file must start with machine,section,domain,split,label,clip_id,score");
  }
  std::vector<ScoredClip> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw ParseError("score file line " + std::to_string(line_no) + ": expected 7 fields");
    ScoredClip s;
    s.meta.machine_type = f[0];
    s.meta.section = static_cast<int>(parse_double(f[1], "section"));
    s.meta.domain = parse_domain(f[2]);
    s.meta.split = parse_split(f[3]);
    s.meta.label = parse_label(f[4]);
    s.meta.clip_id = f[5];
    s.score.value = parse_double(f[6], "score");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<EvalGroup> group_scores(std::span<const ScoredClip> scores) {
  std::map<std::tuple<std::string, int, std::string>, EvalGroup> groups;
  for (const ScoredClip& s : scores) {
    if (s.meta.label == Label::kUnknown) continue;
    const std::string domain(to_string(s.meta.domain));
    auto& g = groups[{s.meta.machine_type, s.meta.section, domain}];
    g.machine = s.meta.machine_type;
    g.section = s.meta.section;
    g.domain = domain;
    g.items.push_back({s.score.value, s.meta.label == Label::kAnomaly ? 1 : 0});
  }
  std::vector<EvalGroup> out;
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<double> default_r_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

std::vector<double> parse_r_grid(std::string_view text) {
  const std::string s(text);
  std::vector<double> grid;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ParseError("grid range must be start:step:stop, got '" + s + "'");
    const double start = parse_double(parts[0], "grid start");
    const double step = parse_double(parts[1], "grid step");
    const double stop = parse_double(parts[2], "grid stop");
    if (!(step > 0.0) || stop < start) throw ParseError("grid range '" + s + "' is empty");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    // Snapped to 12 decimals so "0:0.01:1" yields the same doubles as i / 100.
    for (long i = 0; i <= n; ++i) {
      const double v = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
      grid.push_back(std::min(stop, v));
    }
  } else {
    for (const std::string& v : split_csv_line(s)) grid.push_back(parse_double(v, "grid value"));
  }
  if (grid.empty()) throw ParseError("empty r grid");
  for (double r : grid) {
    if (!(r >= 0.0 && r <= 1.0)) throw ParseError("grid value " + fmt_double(r) + " outside [0, 1]");
  }
  return grid;
}

GridSearchResult grid_search_r(std::span<const PreparedClip> train,
                               std::span<const PreparedClip> validation,
                               std::span<const double> grid, const MachineConfig& cfg,
                               std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("r grid is empty");
  for (double r : grid) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("grid value " + fmt_double(r) + " outside [0, 1]");
  }
  std::vector<PreparedClip> labeled;
  for (const PreparedClip& c : validation) {
    if (c.meta.label != Label::kUnknown) labeled.push_back(c);
  }
  bool has_normal = false, has_anomaly = false;
  for (const PreparedClip& c : labeled) (c.meta.label == Label::kAnomaly ? has_anomaly : has_normal) = true;
  if (!has_normal || !has_anomaly) {
    throw ConfigError("validation set must contain both normal and anomalous clips");
  }

  GridSearchResult result;
  double best_auc = -1.0;
  for (double r : grid) {
    MachineConfig rc = cfg;
    rc.r = r;
    const auto train_features = pool_prepared(train, r);
    const auto models = train_machine(train_features, rc, seed);
    const auto val_features = pool_prepared(labeled, r);
    const auto scores = score_machine(models, val_features, rc);

    std::map<int, std::vector<LabeledScore>> by_section;
    for (const ScoredClip& s : scores) {
      by_section[s.meta.section].push_back({s.score.value, s.meta.label == Label::kAnomaly ? 1 : 0});
    }
    GridPoint point{r, 0.0, {}};
    for (const auto& [section, items] : by_section) {
      point.section_auc[section] = auc(items);
      point.mean_auc += point.section_auc[section];
    }
    point.mean_auc /= static_cast<double>(by_section.size());
    // Ties go to the larger r, i.e. toward mean pooling.
    if (point.mean_auc > best_auc || (point.mean_auc == best_auc && r > result.best_r)) {
      best_auc = point.mean_auc;
      result.best_r = r;
    }
    result.table.push_back(std::move(point));
  }
  return result;
}

GridSearchResult grid_search_r(std::span<const LabeledClip> train,
                               std::span<const LabeledClip> validation,
                               std::span<const double> grid, const MachineConfig& cfg,
                               std::uint64_t seed) {
  const auto prepared_train = prepare_clips(train, cfg.spectrogram);
  const auto prepared_val = prepare_clips(validation, cfg.spectrogram);
  return grid_search_r(std::span<const PreparedClip>(prepared_train),
                       std::span<const PreparedClip>(prepared_val), grid, cfg, seed);
}

DistanceExport build_distance_export(const GmmModel& model,
                                     std::span<const LabeledFeature> features) {
  DistanceExport out;
  std::vector<Eigen::VectorXd> points;
  points.reserve(features.size() + static_cast<std::size_t>(model.n_components()));
  for (const LabeledFeature& f : features) {
    points.push_back(f.feature);
    out.rows.push_back({"sample", f.meta, -1});
  }
  for (int k = 0; k < model.n_components(); ++k) {
    points.push_back(model.means()[k]);
    ClipMetadata meta;
    if (!features.empty()) {
      meta.machine_type = features.front().meta.machine_type;
      meta.section = features.front().meta.section;
    }
    meta.label = Label::kUnknown;
    out.rows.push_back({"cluster_center", meta, k});
  }
  out.matrix = distance_matrix(model, points);
  return out;
}

void write_distance_export(const std::filesystem::path& dir, const DistanceExport& exp) {
  std::filesystem::create_directories(dir);
  std::ofstream m(dir / "distance_matrix.csv");
  if (!m) throw IoError("cannot write " + (dir / "distance_matrix.csv").string());
  for (Eigen::Index i = 0; i < exp.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < exp.matrix.cols(); ++j) {
      if (j) m << ',';
      m << fmt_double(exp.matrix(i, j));
    }
    m << '\n';
  }
  std::ofstream rows(dir / "rows.csv");
  if (!rows) throw IoError("cannot write " + (dir / "rows.csv").string());
  rows << "index,kind,machine,section,domain,split,label,clip_id,component\n";
  for (std::size_t i = 0; i < exp.rows.size(); ++i) {
    const auto& r = exp.rows[i];
    const bool sample = r.kind == "sample";
    rows << i << ',' << r.kind << ',' << r.meta.machine_type << ',' << fmt_section(r.meta.section)
         << ',' << (sample ? to_string(r.meta.domain) : "") << ','
         << (sample ? to_string(r.meta.split) : "") << ',' << (sample ? to_string(r.meta.label) : "")
         << ',' << r.meta.clip_id << ',' << (sample ? "" : std::to_string(r.component)) << '\n';
  }
}

void save_bundle(const std::filesystem::path& dir, const Bundle& bundle) {
  std::filesystem::create_directories(dir);
  nlohmann::json machines = nlohmann::json::object();
  for (const auto& [name, machine] : bundle.machines) {
    std::filesystem::create_directories(dir / name);
    nlohmann::json sections = nlohmann::json::object();
    const nlohmann::json cfg = to_json(machine.config);
    for (const auto& [section, sm] : machine.sections) {
      const std::string file = name + "/section_" + fmt_section(section) + ".gmm";
      save_gmm(dir / file, sm.model,
               {{"machine", name}, {"section", section}, {"machine_config", cfg}});
      sections[fmt_section(section)] = {{"file", file},
                                        {"n_source", sm.stats.n_source},
                                        {"n_target", sm.stats.n_target},
                                        {"n_synthetic", sm.stats.n_synthetic},
                                        {"seed", sm.stats.seed}};
    }
    machines[name] = {{"config", cfg}, {"sections", sections}};
  }
  const nlohmann::json manifest = {{"artifact", "twfr-asd"},
                                   {"artifact_version", kArtifactVersion},
                                   {"bundle_version", 1},
                                   {"seed", bundle.seed},
                                   {"machines", machines}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Bundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("missing bundle manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
    if (manifest.at("bundle_version").get<int>() != 1) throw IoError("unsupported bundle_version");
    Bundle bundle;
    bundle.seed = manifest.at("seed").get<std::uint64_t>();
    for (const auto& [name, m] : manifest.at("machines").items()) {
      BundleMachine machine;
      apply_machine_block(machine.config, m.at("config"), "manifest." + name);
      for (const auto& [key, s] : m.at("sections").items()) {
        SectionStats stats{s.at("n_source").get<std::size_t>(), s.at("n_target").get<std::size_t>(),
                           s.at("n_synthetic").get<std::size_t>(), s.at("seed").get<std::uint64_t>()};
        GmmFile file = load_gmm(dir / s.at("file").get<std::string>());
        machine.sections.emplace(std::stoi(key), SectionModel{std::move(file.model), stats});
      }
      bundle.machines.emplace(name, std::move(machine));
    }
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed bundle manifest in " + dir.string() + ": " + e.what());
  }
}

std::vector<PreparedClip> prepare_split(const std::filesystem::path& root,
                                        std::string_view machine, Split split,
                                        const SpectrogramConfig& cfg,
                                        std::vector<std::string>& warnings) {
  SplitListing listing = list_split(root, machine, split);
  warnings.insert(warnings.end(), listing.warnings.begin(), listing.warnings.end());
  MelFrontEnd front(cfg);
  std::vector<PreparedClip> out;
  out.reserve(listing.entries.size());
  for (ClipEntry& e : listing.entries) {
    AudioClip clip;
    try {
      clip = load_wav(e.path);
    } catch (const IoError& err) {
      warnings.emplace_back(err.what());
      continue;
    }
    out.push_back({std::move(e.meta), row_descending_sort(front(clip).values)});
  }
  if (out.empty()) throw IoError("no readable clips under " + (root / std::string(machine)).string());
  return out;
}

std::vector<LabeledFeature> extract_split_features(const std::filesystem::path& root,
                                                   std::string_view machine, Split split,
                                                   const MachineConfig& cfg,
                                                   std::vector<std::string>& warnings) {
  // Pool clip by clip so the whole split's spectrograms are never resident.
  SplitListing listing = list_split(root, machine, split);
  warnings.insert(warnings.end(), listing.warnings.begin(), listing.warnings.end());
  MelFrontEnd front(cfg.spectrogram);
  Pooler pool(cfg.r);
  std::vector<LabeledFeature> out;
  out.reserve(listing.entries.size());
  for (ClipEntry& e : listing.entries) {
    AudioClip clip;
    try {
      clip = load_wav(e.path);
    } catch (const IoError& err) {
      warnings.emplace_back(err.what());
      continue;
    }
    out.push_back({std::move(e.meta), pool(row_descending_sort(front(clip).values))});
  }
  if (out.empty()) throw IoError("no readable clips under " + (root / std::string(machine)).string());
  return out;
}

}  // namespace twfr
