#include "twfr/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "twfr/error.h"

namespace twfr {
namespace {

// Scores sorted and collapsed into runs of equal score.
struct TieGroup {
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

struct Sweep {
  std::vector<TieGroup> groups;  // ordered by score, highest first
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
};

Sweep sweep(std::span<const LabeledScore> items) {
  std::vector<LabeledScore> sorted(items.begin(), items.end());
  for (const LabeledScore& s : sorted) {
    if (!std::isfinite(s.score)) throw ConfigError("non-finite anomaly score");
    if (s.label != 0 && s.label != 1) throw ConfigError("labels must be 0 or 1");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) { return a.score > b.score; });
  Sweep out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i].score != sorted[i - 1].score) out.groups.emplace_back();
    if (sorted[i].label == 1) {
      ++out.groups.back().pos;
      ++out.n_pos;
    } else {
      ++out.groups.back().neg;
      ++out.n_neg;
    }
  }
  if (out.n_pos == 0 || out.n_neg == 0) {
    throw ConfigError("AUC needs both normal and anomalous samples (got " +
                      std::to_string(out.n_pos) + " anomalous, " + std::to_string(out.n_neg) +
                      " normal)");
  }
  return out;
}

}  // namespace

double auc(std::span<const LabeledScore> items) {
  const Sweep s = sweep(items);
  // Twice the Mann-Whitney U: each correctly ordered pair counts 2, each tie 1.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = s.n_neg;
  for (const TieGroup& g : s.groups) {
    neg_below -= g.neg;
    twice_u += 2 * g.pos * neg_below + g.pos * g.neg;
  }
  return (static_cast<double>(twice_u) * 0.5) /
         (static_cast<double>(s.n_pos) * static_cast<double>(s.n_neg));
}

double pauc(std::span<const LabeledScore> items, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("pAUC range p must lie in (0, 1]");
  const Sweep s = sweep(items);
  const double cut = p * static_cast<double>(s.n_neg);  // FPR = p in false-positive counts

  // Whole trapezoids are accumulated exactly in doubled count units; only the
  // segment crossing the cut is interpolated in floating point.
  std::uint64_t twice_area = 0;
  double partial = 0.0;
  std::uint64_t fp = 0;
  std::uint64_t tp = 0;
  for (const TieGroup& g : s.groups) {
    if (static_cast<double>(fp + g.neg) <= cut) {
      twice_area += g.neg * (2 * tp + g.pos);
      fp += g.neg;
      tp += g.pos;
      continue;
    }
    const double width = cut - static_cast<double>(fp);
    const double tp_at_cut =
        static_cast<double>(tp) + static_cast<double>(g.pos) * width / static_cast<double>(g.neg);
    partial = width * (static_cast<double>(tp) + tp_at_cut) * 0.5;
    break;
  }
  const double area = static_cast<double>(twice_area) * 0.5 + partial;
  // n_neg * p is the cut itself, so perfect separation divides x by x.
  return area / (static_cast<double>(s.n_pos) * cut);
}

}  // namespace twfr
