#pragma once

#include <span>

namespace twfr {

struct LabeledScore {
  double score = 0.0;  // higher = more anomalous
  int label = 0;       // 1 = anomalous, 0 = normal
};

// Normalised Mann-Whitney statistic; tied positive/negative pairs count 1/2.
// Throws ConfigError unless both classes are present and all scores finite.
double auc(std::span<const LabeledScore> items);

// Area under the ROC curve for FPR in [0, p], divided by p. The ROC is swept
// over descending thresholds (tied scores form one diagonal step) and the
// final segment is interpolated linearly at FPR = p.
double pauc(std::span<const LabeledScore> items, double p);

}  // namespace twfr
