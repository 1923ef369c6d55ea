#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqbench/hpo/study.hpp"

namespace seqbench::eval {

/// Report rows in display order. RF appears only when loaded from a fixture.
const std::vector<std::string>& report_models();

struct Selection {
  std::size_t trial_index = 0;  // position in the ledger
  double valid_auroc = 0.0;
  double test_auroc = 0.0;
};

/// Highest validation AUROC among successful trials, ties to the earliest.
/// Throws ValidationError if no trial succeeded.
Selection select_best(const std::vector<hpo::Trial>& trials);

struct ReportRow {
  std::string model;
  std::optional<double> hf;     // AUROC in [0,1]
  std::optional<double> readm;
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;
};

/// Groups trials by (arch, task), selects each group's best trial and fills
/// the matching cell. Rows follow report_models(); unknown names throw.
BenchmarkReport make_report(const std::vector<hpo::Trial>& trials);
/// Orders and validates hand-assembled rows.
BenchmarkReport make_report(std::vector<ReportRow> rows);

/// AUROC as a percentage with one decimal, rounded half up: 0.8485 -> "84.9".
std::string format_percent(double auroc);

void write_report_csv(std::ostream& out, const BenchmarkReport& report);
std::string report_csv(const BenchmarkReport& report);
void save_report_csv(const std::filesystem::path& path, const BenchmarkReport& report);

/// Reads a `model,hf_auroc,readm_auroc` table whose cells are percentages.
BenchmarkReport read_report_csv(std::istream& in);
BenchmarkReport load_report_csv(const std::filesystem::path& path);

}  // namespace seqbench::eval
