#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "twfr/metrics.h"

namespace twfr {

// Scores of one (machine, section, domain) cell.
struct EvalGroup {
  std::string machine;
  int section = 0;
  std::string domain;
  std::vector<LabeledScore> items;
};

struct EvalRow {
  std::string machine;
  int section = 0;
  std::string domain;
  double auc = 0.0;
  double pauc = 0.0;
  std::size_t n_normal = 0;
  std::size_t n_anomaly = 0;
};

struct MeanMetrics {
  double auc = 0.0;
  double pauc = 0.0;
};

struct MachineAverage {
  std::string machine;
  MeanMetrics mean;
  std::size_t n_rows = 0;
};

struct EvalReport {
  double p = 0.1;
  std::vector<EvalRow> rows;              // sorted by machine, section, domain
  std::vector<MachineAverage> machines;   // per machine type, same order
  MeanMetrics over_rows;                  // mean over every row
  MeanMetrics over_machine_types;         // mean of the per-machine means
};

EvalRow evaluate_group(const EvalGroup& group, double p);

// Sorts rows and fills in both averages. Throws ConfigError on an empty list.
EvalReport aggregate(std::vector<EvalRow> rows, double p);

// evaluate_group on every group, then aggregate. Throws ConfigError for an
// empty group.
EvalReport evaluate(const std::vector<EvalGroup>& groups, double p);

// `machine,section,domain,auc,pauc,n_normal,n_anomaly`, a blank line, then
// `scope,machine,auc,pauc` averages.
void write_report_csv(std::ostream& out, const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace twfr
