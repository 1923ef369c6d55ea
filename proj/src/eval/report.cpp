#include "seqbench/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "seqbench/error.hpp"

namespace seqbench::eval {

const std::vector<std::string>& report_models() {
  static const std::vector<std::string> names = {"GRU",    "LSTM",    "D-GRU",   "D-LSTM", "QRNN",
                                                 "RETAIN", "LR",      "Bi-GRU",  "Bi-LSTM", "Bi-RNN",
                                                 "D-RNN",  "Vanilla-RNN", "RF",  "T-LSTM"};
  return names;
}

namespace {

std::size_t model_rank(const std::string& name) {
  const auto& names = report_models();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError("unknown report model '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Selection select_best(const std::vector<hpo::Trial>& trials) {
  const auto best = hpo::best_trial(trials);
  if (!best) throw ValidationError("no successful trial to select from");
  return {*best, trials[*best].valid_auroc, trials[*best].test_auroc};
}

BenchmarkReport make_report(std::vector<ReportRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return model_rank(a.model) < model_rank(b.model); });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].model == rows[i - 1].model) throw ValidationError("duplicate report row '" + rows[i].model + "'");
  }
  for (const auto& r : rows) {
    for (const auto& v : {r.hf, r.readm}) {
      if (v && !(*v >= 0.0 && *v <= 1.0)) throw ValidationError("AUROC out of range for " + r.model);
    }
  }
  return {std::move(rows)};
}

BenchmarkReport make_report(const std::vector<hpo::Trial>& trials) {
  std::map<std::pair<std::string, std::string>, std::vector<hpo::Trial>> groups;
  for (const auto& t : trials) groups[{t.arch, t.task}].push_back(t);
  std::map<std::string, ReportRow> rows;
  for (const auto& [key, group] : groups) {
    const auto& [arch, task] = key;
    model_rank(arch);
    ReportRow& row = rows[arch];
    row.model = arch;
    const double score = select_best(group).test_auroc;
    if (task == "hf") {
      row.hf = score;
    } else if (task == "readm") {
      row.readm = score;
    } else {
      throw ValidationError("unknown task '" + task + "'");
    }
  }
  std::vector<ReportRow> out;
  for (auto& [name, row] : rows) out.push_back(std::move(row));
  return make_report(std::move(out));
}

std::string format_percent(double auroc) {
  const double tenths = std::floor(auroc * 1000.0 + 0.5 + 1e-9);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", tenths / 10.0);
  return buf;
}

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
  out << "model,hf_auroc,readm_auroc\n";
  for (const auto& r : report.rows) {
    out << r.model << ',' << (r.hf ? format_percent(*r.hf) : "") << ',' << (r.readm ? format_percent(*r.readm) : "")
        << '\n';
  }
}

std::string report_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  write_report_csv(out, report);
  return out.str();
}

void save_report_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_report_csv(out, report);
  if (!out) throw IoError("failed writing " + path.string());
}

BenchmarkReport read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "model,hf_auroc,readm_auroc") {
    throw IoError("line 1: expected header model,hf_auroc,readm_auroc");
  }
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw IoError("line " + std::to_string(line_no) + ": expected 3 cells");
    ReportRow row{cells[0], std::nullopt, std::nullopt};
    auto cell = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v / 100.0;
      } catch (const std::exception&) {
        throw IoError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
    };
    row.hf = cell(cells[1]);
    row.readm = cell(cells[2]);
    rows.push_back(std::move(row));
  }
  return make_report(std::move(rows));
}

BenchmarkReport load_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_report_csv(in);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace seqbench::eval
