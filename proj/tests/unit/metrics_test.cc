#include "twfr/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "twfr/error.h"

namespace twfr {
namespace {

std::vector<LabeledScore> make(const std::vector<double>& s, const std::vector<int>& l) {
  std::vector<LabeledScore> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s[i], l[i]});
  return out;
}

double brute_auc(const std::vector<LabeledScore>& items) {
  double num = 0.0;
  double pairs = 0.0;
  for (const auto& a : items) {
    if (a.label != 1) continue;
    for (const auto& b : items) {
      if (b.label != 0) continue;
      pairs += 1.0;
      if (a.score > b.score) num += 1.0;
      else if (a.score == b.score) num += 0.5;
    }
  }
  return num / pairs;
}

std::vector<LabeledScore> random_set(std::mt19937& gen) {
  std::uniform_int_distribution<int> n_dist(2, 200);
  std::uniform_int_distribution<int> coarse(0, 20);  // forces ties
  std::bernoulli_distribution coin(0.4);
  const int n = n_dist(gen);
  std::vector<LabeledScore> out;
  for (int i = 0; i < n; ++i) out.push_back({coarse(gen) * 0.25, coin(gen) ? 1 : 0});
  out[0].label = 0;
  out[1].label = 1;
  return out;
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc(make({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1})), 1.0);
  EXPECT_EQ(auc(make({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1})), 0.0);
  EXPECT_EQ(auc(make({1, 2, 3, 4}, {0, 1, 0, 1})), 0.75);
  EXPECT_EQ(auc(make({1, 1}, {0, 1})), 0.5);
}

TEST(Auc, Errors) {
  EXPECT_THROW(auc(make({1, 2}, {1, 1})), ConfigError);
  EXPECT_THROW(auc(make({1, 2}, {0, 0})), ConfigError);
  EXPECT_THROW(auc(make({}, {})), ConfigError);
  EXPECT_THROW(auc(make({1, NAN}, {0, 1})), ConfigError);
  EXPECT_THROW(auc(make({1, 2}, {0, 2})), ConfigError);
}

TEST(Pauc, Examples) {
  const auto perfect = make({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1});
  for (double p : {0.01, 0.1, 0.5, 1.0}) EXPECT_EQ(pauc(perfect, p), 1.0);
  EXPECT_DOUBLE_EQ(pauc(make({4, 3, 2, 1}, {1, 0, 1, 0}), 0.5), 0.5);
  EXPECT_EQ(pauc(make({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}), 0.3), 0.0);
}

TEST(Pauc, Errors) {
  const auto ok = make({1, 2}, {0, 1});
  EXPECT_THROW(pauc(ok, 0.0), ConfigError);
  EXPECT_THROW(pauc(ok, 1.5), ConfigError);
  EXPECT_THROW(pauc(ok, NAN), ConfigError);
  EXPECT_THROW(pauc(make({1, 2}, {1, 1}), 0.1), ConfigError);
}

TEST(Pauc, InterpolatesInsideATiedStep) {
  // One tied group holding 1 positive and 1 negative: the ROC is a diagonal
  // from (0,0) to (1,1); the area up to FPR 0.5 is 0.125.
  EXPECT_DOUBLE_EQ(pauc(make({1, 1}, {0, 1}), 0.5), 0.25);
}

TEST(Auc, MatchesBruteForceAndPaucAtOne) {
  std::mt19937 gen(31);
  for (int t = 0; t < 200; ++t) {
    const auto items = random_set(gen);
    const double a = auc(items);
    EXPECT_EQ(a, brute_auc(items));
    EXPECT_EQ(pauc(items, 1.0), a);
  }
}

TEST(Auc, RankInvarianceAndComplement) {
  std::mt19937 gen(32);
  for (int t = 0; t < 100; ++t) {
    auto items = random_set(gen);
    const double a = auc(items);
    const double pa = pauc(items, 0.1);
    auto warped = items;
    auto negated = items;
    for (auto& s : warped) s.score = std::exp(3.0 * s.score) - 7.0;
    for (auto& s : negated) s.score = -s.score;
    EXPECT_NEAR(auc(warped), a, 1e-12);
    EXPECT_NEAR(pauc(warped, 0.1), pa, 1e-12);
    EXPECT_NEAR(auc(negated), 1.0 - a, 1e-12);
  }
}

TEST(Pauc, MatchesExplicitRocIntegration) {
  std::mt19937 gen(33);
  for (int t = 0; t < 100; ++t) {
    const auto items = random_set(gen);
    // ROC points from a threshold sweep over distinct scores.
    std::vector<double> thr;
    for (const auto& s : items) thr.push_back(s.score);
    std::sort(thr.begin(), thr.end(), std::greater<>());
    thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
    double np = 0, nn = 0;
    for (const auto& s : items) (s.label ? np : nn) += 1;
    std::vector<std::pair<double, double>> roc{{0.0, 0.0}};
    for (double th : thr) {
      double tp = 0, fp = 0;
      for (const auto& s : items) {
        if (s.score >= th) (s.label ? tp : fp) += 1;
      }
      roc.emplace_back(fp / nn, tp / np);
    }
    for (double p : {0.05, 0.1, 0.37, 1.0}) {
      double area = 0.0;
      for (std::size_t i = 1; i < roc.size(); ++i) {
        const auto [x0, y0] = roc[i - 1];
        const auto [x1, y1] = roc[i];
        if (x0 >= p) break;
        const double xe = std::min(x1, p);
        const double ye = x1 == x0 ? y1 : y0 + (y1 - y0) * (xe - x0) / (x1 - x0);
        area += (xe - x0) * (y0 + ye) / 2.0;
      }
      EXPECT_NEAR(pauc(items, p), area / p, 1e-12);
    }
  }
}

}  // namespace
}  // namespace twfr
