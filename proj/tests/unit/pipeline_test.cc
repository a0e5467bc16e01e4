#include "twfr/pipeline.h"

#include <gtest/gtest.h>

#include <sstream>

#include "test_util.h"
#include "twfr/error.h"
#include "twfr/synthetic.h"

namespace twfr {
namespace {

MachineConfig small_config() {
  MachineConfig cfg;
  cfg.spectrogram.n_mels = 16;
  return cfg;
}

SyntheticMachine short_machine() {
  SyntheticMachine m;
  m.duration_s = 1.0;
  return m;
}

ClipMetadata meta(int section, Domain d, Split s, Label l, const std::string& id) {
  return ClipMetadata{"synth", section, d, s, l, id};
}

std::vector<LabeledClip> normal_clips(int n, int section, Domain d, std::uint64_t seed, Split split = Split::kTrain) {
  Rng rng(seed);
  std::vector<LabeledClip> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({synth_normal_clip(short_machine(), rng),
                   meta(section, d, split, Label::kNormal, std::to_string(1000 + i))});
  }
  return out;
}

std::vector<LabeledFeature> features_of(std::span<const LabeledClip> clips, const MachineConfig& cfg) {
  std::vector<LabeledFeature> out;
  for (const LabeledClip& c : clips) out.push_back({c.meta, extract_twfr(c.clip, cfg)});
  return out;
}

void expect_same_model(const GmmModel& a, const GmmModel& b) {
  ASSERT_EQ(a.n_components(), b.n_components());
  EXPECT_EQ(a.weights(), b.weights());
  for (int k = 0; k < a.n_components(); ++k) {
    EXPECT_EQ(a.means()[k], b.means()[k]);
    EXPECT_EQ(a.covariances()[k], b.covariances()[k]);
  }
}

TEST(TrainSection, IdenticalClipsLeaveOnlyTheRegulariser) {
  const MachineConfig cfg = small_config();
  const auto one = normal_clips(1, 0, Domain::kSource, 1);
  const std::vector<LabeledClip> same(100, one.front());
  const GmmModel m = train_section(same, cfg, 7);
  EXPECT_NEAR(m.covariances()[0].trace(), 16 * cfg.em.reg_covar, 1e-15);
  EXPECT_EQ(m.means()[0], extract_twfr(one.front().clip, cfg));
}

TEST(TrainSection, SmoteWithCurrentCountMatchesNoSmote) {
  MachineConfig cfg = small_config();
  auto clips = normal_clips(4, 0, Domain::kSource, 2);
  const auto target = normal_clips(6, 0, Domain::kTarget, 3);
  clips.insert(clips.end(), target.begin(), target.end());
  const auto feats = features_of(clips, cfg);
  cfg.k = 2;
  const SectionModel plain = train_section_features(feats, cfg, 11);
  cfg.smote = SmoteOptions{};
  cfg.smote->target_count = 6;
  const SectionModel noop = train_section_features(feats, cfg, 11);
  EXPECT_EQ(noop.stats.n_synthetic, 0u);
  expect_same_model(plain.model, noop.model);

  cfg.smote->target_count = 20;
  const SectionModel grown = train_section_features(feats, cfg, 11);
  EXPECT_EQ(grown.stats.n_source, 4u);
  EXPECT_EQ(grown.stats.n_target, 6u);
  EXPECT_EQ(grown.stats.n_synthetic, 14u);
}

TEST(TrainSection, DefaultSmoteTargetIsTheLargerDomain) {
  MachineConfig cfg = small_config();
  cfg.smote = SmoteOptions{};
  auto clips = normal_clips(9, 0, Domain::kSource, 4);
  const auto target = normal_clips(3, 0, Domain::kTarget, 5);
  clips.insert(clips.end(), target.begin(), target.end());
  const SectionModel m = train_section_features(features_of(clips, cfg), cfg, 0);
  EXPECT_EQ(m.stats.n_synthetic, 6u);
}

TEST(TrainSection, RejectsMixedSectionsAndEmptyInput) {
  const MachineConfig cfg = small_config();
  auto clips = normal_clips(2, 0, Domain::kSource, 6);
  clips[1].meta.section = 1;
  EXPECT_THROW(train_section(clips, cfg, 0), ConfigError);
  EXPECT_THROW(train_section(std::span<const LabeledClip>{}, cfg, 0), ConfigError);
}

TEST(TrainMachine, SectionsAreIndependent) {
  const MachineConfig cfg = small_config();
  const auto a = normal_clips(8, 0, Domain::kSource, 20);
  SyntheticMachine loud = short_machine();
  loud.resonance_hz = 2500.0;
  Rng rng(21);
  std::vector<LabeledClip> b;
  for (int i = 0; i < 8; ++i) b.push_back({synth_normal_clip(loud, rng), meta(1, Domain::kSource, Split::kTrain, Label::kNormal, std::to_string(i))});

  std::vector<LabeledClip> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const auto models = train_machine(features_of(both, cfg), cfg, 5);
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models.at(0).stats.n_source, 8u);

  // Swap which clips belong to which section.
  std::vector<LabeledClip> swapped;
  for (auto c : a) {
    c.meta.section = 1;
    swapped.push_back(c);
  }
  for (auto c : b) {
    c.meta.section = 0;
    swapped.push_back(c);
  }
  const auto models2 = train_machine(features_of(swapped, cfg), cfg, 5);
  expect_same_model(models.at(0).model, models2.at(1).model);
  expect_same_model(models.at(1).model, models2.at(0).model);
}

TEST(TrainMachine, FixedSeedIsBitIdentical) {
  MachineConfig cfg = small_config();
  cfg.k = 2;
  cfg.smote = SmoteOptions{};
  auto clips = normal_clips(10, 0, Domain::kSource, 30);
  const auto t = normal_clips(3, 0, Domain::kTarget, 31);
  clips.insert(clips.end(), t.begin(), t.end());
  const auto f = features_of(clips, cfg);
  const auto a = train_machine(f, cfg, 99);
  const auto b = train_machine(f, cfg, 99);
  expect_same_model(a.at(0).model, b.at(0).model);
  EXPECT_NE(section_seed(99, "synth", 0), section_seed(99, "synth", 1));
  EXPECT_NE(section_seed(99, "synth", 0), section_seed(99, "fan", 0));
}

TEST(ScoreClips, Examples) {
  const MachineConfig cfg = small_config();
  const auto train = normal_clips(1, 0, Domain::kSource, 40);
  const GmmModel m = train_section(train, cfg, 0);

  std::vector<LabeledClip> test{train.front(), train.front()};
  Rng rng(41);
  for (int i = 0; i < 5; ++i) {
    LabeledClip c = train.front();
    for (double& s : c.clip.samples) s += 0.01 * rng.normal();
    test.push_back(c);
  }
  const auto scores = score_clips(m, test, cfg);
  ASSERT_EQ(scores.size(), test.size());
  EXPECT_EQ(scores[0].score.value, scores[1].score.value);
  for (std::size_t i = 2; i < scores.size(); ++i) EXPECT_GT(scores[i].score.value, scores[0].score.value);
  EXPECT_TRUE(score_clips(m, std::span<const LabeledClip>{}, cfg).empty());

  MachineConfig wrong = cfg;
  wrong.spectrogram.n_mels = 8;
  EXPECT_THROW(score_clips(m, test, wrong), ConfigError);
}

TEST(ScoreMachine, MissingSectionIsAnError) {
  const MachineConfig cfg = small_config();
  const auto train = features_of(normal_clips(3, 0, Domain::kSource, 50), cfg);
  const auto models = train_machine(train, cfg, 0);
  auto probe = train;
  probe[0].meta.section = 4;
  EXPECT_THROW(score_machine(models, probe, cfg), ConfigError);
}

TEST(Pooling, ExtremeRMatchesExplicitMaxAndMean) {
  const MachineConfig cfg = small_config();
  const auto clips = normal_clips(3, 0, Domain::kSource, 60);
  const auto prepared = prepare_clips(clips, cfg.spectrogram);
  const auto at0 = pool_prepared(prepared, 0.0);
  const auto at1 = pool_prepared(prepared, 1.0);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const Eigen::MatrixXd x = log_mel(clips[i].clip, cfg.spectrogram).values;
    const Eigen::VectorXd mx = x.rowwise().maxCoeff();
    const Eigen::VectorXd mean = x.rowwise().mean();
    EXPECT_EQ(at0[i].feature, mx);
    EXPECT_LE((at1[i].feature - mean).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + mean.cwiseAbs().maxCoeff()));
    EXPECT_EQ(at0[i].meta, clips[i].meta);
  }
}

std::vector<LabeledClip> validation_set(std::uint64_t seed, double burst_level) {
  SyntheticMachine m = short_machine();
  m.burst_level = burst_level;
  Rng rng(seed);
  std::vector<LabeledClip> out;
  for (int i = 0; i < 6; ++i) {
    out.push_back({synth_normal_clip(m, rng), meta(0, Domain::kSource, Split::kTest, Label::kNormal, "n" + std::to_string(i))});
    out.push_back({synth_anomalous_clip(m, rng), meta(0, Domain::kSource, Split::kTest, Label::kAnomaly, "a" + std::to_string(i))});
  }
  return out;
}

TEST(GridSearch, SingletonAndTieToLargerR) {
  const MachineConfig cfg = small_config();
  const auto train = normal_clips(12, 0, Domain::kSource, 70);
  // Overwhelming anomalies give AUC 1 at every r.
  const auto val = validation_set(71, 50.0);
  const std::vector<double> single{0.45};
  EXPECT_EQ(grid_search_r(train, val, single, cfg, 0).best_r, 0.45);

  const std::vector<double> grid{0.2, 0.8, 0.5};
  const GridSearchResult r = grid_search_r(train, val, grid, cfg, 0);
  ASSERT_EQ(r.table.size(), 3u);
  for (const GridPoint& p : r.table) ASSERT_EQ(p.mean_auc, 1.0);
  EXPECT_EQ(r.best_r, 0.8);
  EXPECT_EQ(r.table[1].r, 0.8);

  EXPECT_THROW(grid_search_r(train, val, std::span<const double>{}, cfg, 0), ConfigError);
  const std::vector<double> bad{1.5};
  EXPECT_THROW(grid_search_r(train, val, bad, cfg, 0), ConfigError);
  EXPECT_THROW(grid_search_r(train, train, single, cfg, 0), ConfigError);
}

TEST(RGrid, DefaultAndParsed) {
  const auto g = default_r_grid();
  ASSERT_EQ(g.size(), 101u);
  for (int i = 0; i <= 100; ++i) EXPECT_EQ(g[i], i / 100.0);
  EXPECT_EQ(parse_r_grid("0:0.25:1"), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(parse_r_grid("0.45,0.9"), (std::vector<double>{0.45, 0.9}));
  EXPECT_EQ(parse_r_grid("0:0.01:1"), g);
  EXPECT_THROW(parse_r_grid(""), ParseError);
  EXPECT_THROW(parse_r_grid("0:0:1"), ParseError);
  EXPECT_THROW(parse_r_grid("0.5,abc"), ParseError);
  EXPECT_THROW(parse_r_grid("2"), ParseError);
}

TEST(DistanceExport, Shapes) {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  const GmmModel id(Eigen::VectorXd::Ones(1), {mu}, {Eigen::MatrixXd::Identity(2, 2)});
  Eigen::VectorXd f(2);
  f << 3, 4;
  const std::vector<LabeledFeature> one{{meta(2, Domain::kTarget, Split::kTest, Label::kNormal, "x"), f}};
  const DistanceExport e = build_distance_export(id, one);
  ASSERT_EQ(e.matrix.rows(), 2);
  EXPECT_EQ(e.matrix(0, 0), 0.0);
  EXPECT_EQ(e.matrix(1, 1), 0.0);
  EXPECT_NEAR(e.matrix(0, 1), 5.0, 1e-15);  // Euclidean for identity covariance
  EXPECT_EQ(e.rows[0].kind, "sample");
  EXPECT_EQ(e.rows[1].kind, "cluster_center");
  EXPECT_EQ(e.rows[1].component, 0);
}

TEST(DistanceExport, MatchesBruteForce) {
  MachineConfig cfg = small_config();
  cfg.k = 3;
  const auto clips = normal_clips(15, 0, Domain::kSource, 80);
  const auto feats = features_of(clips, cfg);
  const GmmModel m = train_section_features(feats, cfg, 1).model;
  const DistanceExport e = build_distance_export(m, feats);
  ASSERT_EQ(e.matrix.rows(), 18);
  std::vector<Eigen::VectorXd> pts;
  for (const auto& f : feats) pts.push_back(f.feature);
  for (const auto& mu : m.means()) pts.push_back(mu);
  for (int i = 0; i < 18; ++i) {
    for (int j = 0; j < 18; ++j) EXPECT_EQ(e.matrix(i, j), mahalanobis_metric(m, pts[i], pts[j]));
  }
  const auto dir = test::scratch_dir("distance_export");
  write_distance_export(dir, e);
  EXPECT_TRUE(std::filesystem::exists(dir / "distance_matrix.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "rows.csv"));
}

TEST(ScoresCsv, RoundTrip) {
  std::vector<ScoredClip> scores{
      {meta(0, Domain::kSource, Split::kTest, Label::kNormal, "0001"), {0.1 + 0.2}},
      {meta(12, Domain::kTarget, Split::kTest, Label::kAnomaly, "0002"), {-1e300}},
      {meta(3, Domain::kSource, Split::kTest, Label::kUnknown, "x9"), {1.0 / 3.0}}};
  std::stringstream ss;
  write_scores_csv(ss, scores);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "machine,section,domain,split,label,clip_id,score");
  const auto back = read_scores_csv(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].meta, scores[i].meta);
    EXPECT_EQ(back[i].score.value, scores[i].score.value);
  }
  const auto groups = group_scores(back);
  EXPECT_EQ(groups.size(), 2u);

  std::stringstream bad("machine,section\n");
  EXPECT_THROW(read_scores_csv(bad), ParseError);
}

TEST(Bundle, RoundTripPreservesScores) {
  MachineConfig cfg = small_config();
  cfg.k = 2;
  cfg.r = 0.7;
  const auto clips = normal_clips(10, 0, Domain::kSource, 90);
  const auto feats = features_of(clips, cfg);
  Bundle b;
  b.seed = 5;
  b.machines["synth"] = BundleMachine{cfg, train_machine(feats, cfg, 5)};
  const auto dir = test::scratch_dir("bundle");
  save_bundle(dir, b);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "synth" / "section_00.gmm"));
  const Bundle back = load_bundle(dir);
  EXPECT_EQ(back.seed, 5u);
  const BundleMachine& m = back.machines.at("synth");
  EXPECT_EQ(to_json(m.config), to_json(cfg));
  EXPECT_EQ(m.sections.at(0).stats.n_source, 10u);
  expect_same_model(m.sections.at(0).model, b.machines["synth"].sections.at(0).model);
  EXPECT_THROW(load_bundle(dir / "nope"), IoError);
}

TEST(SplitFeatures, ReadsSyntheticDataset) {
  const auto root = test::scratch_dir("split_features");
  SyntheticLayout layout;
  layout.sections = 2;
  layout.train_source = 3;
  layout.train_target = 1;
  layout.test_normal = 2;
  layout.test_anomaly = 1;
  write_synthetic_dataset(root, layout, short_machine(), 3);
  std::vector<std::string> warnings;
  const MachineConfig cfg = small_config();
  const auto train = extract_split_features(root, "synth", Split::kTrain, cfg, warnings);
  EXPECT_EQ(train.size(), 8u);
  const auto test = prepare_split(root, "synth", Split::kTest, cfg.spectrogram, warnings);
  EXPECT_EQ(test.size(), 12u);
  EXPECT_TRUE(warnings.empty());
  EXPECT_EQ(train.front().feature.size(), 16);
}

}  // namespace
}  // namespace twfr
