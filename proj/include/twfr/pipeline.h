#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "twfr/config.h"
#include "twfr/dataset.h"
#include "twfr/gmm.h"
#include "twfr/pooling.h"
#include "twfr/report.h"

namespace twfr {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct LabeledFeature {
  ClipMetadata meta;
  TwfrVector feature;
};

// Log-Mel spectrogram with every band sorted over time. Pooling it with any r
// gives the clip's TWFR, so r searches sort once.
struct PreparedClip {
  ClipMetadata meta;
  Eigen::MatrixXd sorted;
};

PreparedClip prepare_clip(const AudioClip& clip, const ClipMetadata& meta,
                          const SpectrogramConfig& cfg);
std::vector<PreparedClip> prepare_clips(std::span<const LabeledClip> clips,
                                        const SpectrogramConfig& cfg);
std::vector<LabeledFeature> pool_prepared(std::span<const PreparedClip> clips, double r);

TwfrVector extract_twfr(const AudioClip& clip, const MachineConfig& cfg);

// Per-section seed derived from the run seed, machine name and section.
std::uint64_t section_seed(std::uint64_t seed, std::string_view machine, int section);

struct SectionStats {
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  std::size_t n_synthetic = 0;
  std::uint64_t seed = 0;
};

struct SectionModel {
  GmmModel model;
  SectionStats stats;
};

// Fits one section's GMM. Target-domain vectors are oversampled first when
// cfg.smote is engaged.
SectionModel train_section_features(std::span<const LabeledFeature> features,
                                    const MachineConfig& cfg, std::uint64_t seed);
GmmModel train_section(std::span<const LabeledClip> clips, const MachineConfig& cfg,
                       std::uint64_t seed);

// Groups by section and trains each with section_seed(seed, machine, s).
std::map<int, SectionModel> train_machine(std::span<const LabeledFeature> features,
                                          const MachineConfig& cfg, std::uint64_t seed);

struct ScoredClip {
  ClipMetadata meta;
  AnomalyScore score;
};

std::vector<ScoredClip> score_features(const GmmModel& model,
                                       std::span<const LabeledFeature> features,
                                       const MachineConfig& cfg);
std::vector<ScoredClip> score_clips(const GmmModel& model, std::span<const LabeledClip> clips,
                                    const MachineConfig& cfg);

// Scores every feature with the model of its section. Throws ConfigError if
// a section has no model.
std::vector<ScoredClip> score_machine(const std::map<int, SectionModel>& models,
                                      std::span<const LabeledFeature> features,
                                      const MachineConfig& cfg);

// `machine,section,domain,split,label,clip_id,score`, scores printed with
// round-trip precision.
void write_scores_csv(std::ostream& out, std::span<const ScoredClip> scores);
std::vector<ScoredClip> read_scores_csv(std::istream& in);
// One group per (machine, section, domain); unlabelled clips are dropped.
std::vector<EvalGroup> group_scores(std::span<const ScoredClip> scores);

// {0.00, 0.01, ..., 1.00}
std::vector<double> default_r_grid();
// "a:step:b" or a comma-separated list.
std::vector<double> parse_r_grid(std::string_view text);

struct GridPoint {
  double r = 0.0;
  double mean_auc = 0.0;
  std::map<int, double> section_auc;
};

struct GridSearchResult {
  double best_r = 0.0;
  std::vector<GridPoint> table;  // in grid order
};

// For every r: train per-section models on train, score validation, average
// the per-section AUCs. The best r maximises the mean; ties go to the larger r.
GridSearchResult grid_search_r(std::span<const PreparedClip> train,
                               std::span<const PreparedClip> validation,
                               std::span<const double> grid, const MachineConfig& cfg,
                               std::uint64_t seed);
GridSearchResult grid_search_r(std::span<const LabeledClip> train,
                               std::span<const LabeledClip> validation,
                               std::span<const double> grid, const MachineConfig& cfg,
                               std::uint64_t seed);

// Pairwise Mahalanobis metric over the given features plus the model's mean
// vectors, which are appended as `cluster_center` rows.
struct DistanceExport {
  Eigen::MatrixXd matrix;
  struct Row {
    std::string kind;  // "sample" or "cluster_center"
    ClipMetadata meta;
    int component = -1;
  };
  std::vector<Row> rows;
};

DistanceExport build_distance_export(const GmmModel& model,
                                     std::span<const LabeledFeature> features);
// Writes <dir>/distance_matrix.csv (no header) and <dir>/rows.csv.
void write_distance_export(const std::filesystem::path& dir, const DistanceExport& exp);

// Model bundle: <dir>/manifest.json plus <dir>/<machine>/section_NN.gmm.
struct BundleMachine {
  MachineConfig config;
  std::map<int, SectionModel> sections;
};

struct Bundle {
  std::uint64_t seed = 0;
  std::map<std::string, BundleMachine> machines;
};

void save_bundle(const std::filesystem::path& dir, const Bundle& bundle);
Bundle load_bundle(const std::filesystem::path& dir);

// Reads every readable clip of a split and pools it with cfg. Skipped files
// are appended to warnings.
std::vector<LabeledFeature> extract_split_features(const std::filesystem::path& root,
                                                   std::string_view machine, Split split,
                                                   const MachineConfig& cfg,
                                                   std::vector<std::string>& warnings);
std::vector<PreparedClip> prepare_split(const std::filesystem::path& root,
                                        std::string_view machine, Split split,
                                        const SpectrogramConfig& cfg,
                                        std::vector<std::string>& warnings);

}  // namespace twfr
