#include "twfr/report.h"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <tuple>

#include "twfr/error.h"

namespace twfr {
namespace {

std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_section(int section) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", section);
  return buf;
}

}  // namespace

EvalRow evaluate_group(const EvalGroup& group, double p) {
  if (group.items.empty()) {
    throw ConfigError("empty evaluation group " + group.machine + "/" + fmt_section(group.section) +
                      "/" + group.domain);
  }
  EvalRow row{group.machine, group.section, group.domain};
  for (const LabeledScore& s : group.items) (s.label == 1 ? row.n_anomaly : row.n_normal)++;
  row.auc = auc(group.items);
  row.pauc = pauc(group.items, p);
  return row;
}

EvalReport aggregate(std::vector<EvalRow> rows, double p) {
  if (rows.empty()) throw ConfigError("nothing to aggregate");
  std::stable_sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
    return std::tie(a.machine, a.section, a.domain) < std::tie(b.machine, b.section, b.domain);
  });

  EvalReport report;
  report.p = p;
  for (const EvalRow& row : rows) {
    if (report.machines.empty() || report.machines.back().machine != row.machine) {
      report.machines.push_back(MachineAverage{row.machine, {}, 0});
    }
    MachineAverage& m = report.machines.back();
    m.mean.auc += row.auc;
    m.mean.pauc += row.pauc;
    ++m.n_rows;
    report.over_rows.auc += row.auc;
    report.over_rows.pauc += row.pauc;
  }
  report.over_rows.auc /= static_cast<double>(rows.size());
  report.over_rows.pauc /= static_cast<double>(rows.size());
  for (MachineAverage& m : report.machines) {
    m.mean.auc /= static_cast<double>(m.n_rows);
    m.mean.pauc /= static_cast<double>(m.n_rows);
    report.over_machine_types.auc += m.mean.auc;
    report.over_machine_types.pauc += m.mean.pauc;
  }
  report.over_machine_types.auc /= static_cast<double>(report.machines.size());
  report.over_machine_types.pauc /= static_cast<double>(report.machines.size());
  report.rows = std::move(rows);
  return report;
}

EvalReport evaluate(const std::vector<EvalGroup>& groups, double p) {
  std::vector<EvalRow> rows;
  rows.reserve(groups.size());
  for (const EvalGroup& g : groups) rows.push_back(evaluate_group(g, p));
  return aggregate(std::move(rows), p);
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "machine,section,domain,auc,pauc,n_normal,n_anomaly\n";
  for (const EvalRow& r : report.rows) {
    out << r.machine << ',' << fmt_section(r.section) << ',' << r.domain << ','
        << fmt_metric(r.auc) << ',' << fmt_metric(r.pauc) << ',' << r.n_normal << ','
        << r.n_anomaly << '\n';
  }
  out << '\n' << "scope,machine,auc,pauc\n";
  for (const MachineAverage& m : report.machines) {
    out << "machine," << m.machine << ',' << fmt_metric(m.mean.auc) << ','
        << fmt_metric(m.mean.pauc) << '\n';
  }
  out << "machine_types,*," << fmt_metric(report.over_machine_types.auc) << ','
      << fmt_metric(report.over_machine_types.pauc) << '\n';
  out << "rows,*," << fmt_metric(report.over_rows.auc) << ','
      << fmt_metric(report.over_rows.pauc) << '\n';
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const EvalRow& r : report.rows) {
    rows.push_back({{"machine", r.machine},
                    {"section", fmt_section(r.section)},
                    {"domain", r.domain},
                    {"auc", r.auc},
                    {"pauc", r.pauc},
                    {"n_normal", r.n_normal},
                    {"n_anomaly", r.n_anomaly}});
  }
  nlohmann::json machines = nlohmann::json::array();
  for (const MachineAverage& m : report.machines) {
    machines.push_back(
        {{"machine", m.machine}, {"auc", m.mean.auc}, {"pauc", m.mean.pauc}, {"n_rows", m.n_rows}});
  }
  return {{"p", report.p},
          {"rows", rows},
          {"averages",
           {{"per_machine", machines},
            {"over_machine_types",
             {{"auc", report.over_machine_types.auc}, {"pauc", report.over_machine_types.pauc}}},
            {"over_rows", {{"auc", report.over_rows.auc}, {"pauc", report.over_rows.pauc}}}}}};
}

}  // namespace twfr
