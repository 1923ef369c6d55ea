#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "seqbench/cli/config.hpp"
#include "seqbench/error.hpp"

namespace fs = std::filesystem;
using namespace seqbench;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SEQBENCH_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / (name + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const char* kStudyConfig =
    "# small and fast\n"
    "max_epochs = 3\n"
    "batch_size = 64\n"
    "space.embed_dim = 4:8\n"
    "space.hidden_size = 4:8\n";

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run("frobnicate").code == 2);
  CHECK(run("gen --bogus 1 --out x").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("gen --task cancer --out x").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("missing input exits 1 naming the path") {
  const Run r = run("split --in /nonexistent/cohort.jsonl --out-prefix /tmp/x");
  CHECK(r.code == 1);
  CHECK(r.output.find("/nonexistent/cohort.jsonl") != std::string::npos);
}

TEST_CASE("gen split train report pipeline") {
  TempDir dir("seqbench-pipeline");
  REQUIRE(run("gen --task hf --patients 500 --vocab 120 --seed 9 --out " + (dir / "cohort.jsonl")).code == 0);
  REQUIRE(run("split --in " + (dir / "cohort.jsonl") + " --ratios 7:1:2 --seed 9 --out-prefix " + (dir / "d")).code == 0);
  for (const char* part : {"train", "valid", "test"}) CHECK(fs::exists(dir / ("d." + std::string(part) + ".jsonl")));
  write_file(dir / "gru.cfg", "arch = GRU\nembed_dim = 8\nhidden_size = 8\nmax_epochs = 3\noptimizer = Adam\nlr = 0.01\n");
  const Run train = run("train --config " + (dir / "gru.cfg") + " --train " + (dir / "d.train.jsonl") + " --valid " +
                        (dir / "d.valid.jsonl") + " --out " + (dir / "gru.ckpt"));
  CHECK(train.code == 0);
  CHECK(fs::exists(dir / "gru.ckpt"));
  CHECK(slurp(dir / "gru.ckpt.history.csv").rfind("epoch,train_loss,valid_auroc\n", 0) == 0);
  CHECK(run("report --table " + std::string(SEQBENCH_FIXTURES) + "/table1.csv --out " + (dir / "report.csv")).code == 0);
  CHECK(slurp(dir / "report.csv").find("GRU,84.8,75.5\n") != std::string::npos);
}

TEST_CASE("bench fills exactly the requested rows") {
  TempDir dir("seqbench-bench");
  REQUIRE(run("gen --patients 300 --vocab 80 --prevalence 0.4 --out " + (dir / "c.jsonl")).code == 0);
  REQUIRE(run("split --in " + (dir / "c.jsonl") + " --out-prefix " + (dir / "d")).code == 0);
  write_file(dir / "study.cfg", kStudyConfig);
  const Run r = run("bench --archs GRU,LR --budget 4 --data-prefix " + (dir / "d") + " --config " + (dir / "study.cfg") +
                    " --out " + (dir / "report.csv"));
  REQUIRE(r.code == 0);
  std::istringstream report(slurp(dir / "report.csv"));
  std::string line;
  std::vector<std::string> rows;
  std::getline(report, line);
  CHECK(line == "model,hf_auroc,readm_auroc");
  while (std::getline(report, line)) rows.push_back(line);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].rfind("GRU,", 0) == 0);
  CHECK(rows[1].rfind("LR,", 0) == 0);
  CHECK(rows[0].back() == ',');

  std::istringstream ledger(slurp(dir / "report.csv.ledger.jsonl"));
  std::size_t n = 0;
  while (std::getline(ledger, line)) ++n;
  CHECK(n == 8);
}

TEST_CASE("pipeline reruns are byte-identical") {
  TempDir dir("seqbench-determinism");
  write_file(dir / "study.cfg", kStudyConfig);
  auto pipeline = [&](const std::string& tag) {
    const std::string p = dir / tag;
    REQUIRE(run("gen --task readm --patients 200 --vocab 60 --seed 11 --out " + p + ".cohort.jsonl").code == 0);
    REQUIRE(run("split --in " + p + ".cohort.jsonl --seed 11 --out-prefix " + p).code == 0);
    REQUIRE(run("hpo --arch GRU --task readm --budget 3 --workers 2 --seed 11 --data-prefix " + p + " --config " +
                (dir / "study.cfg") + " --out " + p + ".ledger.jsonl")
                .code == 0);
    REQUIRE(run("report --ledgers " + p + ".ledger.jsonl --out " + p + ".report.csv").code == 0);
  };
  pipeline("a");
  pipeline("b");
  for (const char* suffix : {".cohort.jsonl", ".train.jsonl", ".ledger.jsonl", ".report.csv"}) {
    CAPTURE(suffix);
    CHECK(slurp(dir / ("a" + std::string(suffix))) == slurp(dir / ("b" + std::string(suffix))));
  }
  CHECK(slurp(dir / "a.report.csv").rfind("model,hf_auroc,readm_auroc\nGRU,,", 0) == 0);
}

TEST_CASE("label turns encounters into a cohort") {
  TempDir dir("seqbench-label");
  write_file(dir / "enc.jsonl",
             "{\"patient_id\":\"a\",\"admit_day\":0,\"discharge_day\":2,\"kind\":\"inpatient\",\"codes\":[\"I50\"]}\n"
             "{\"patient_id\":\"a\",\"admit_day\":10,\"discharge_day\":12,\"kind\":\"inpatient\",\"codes\":[\"I10\"]}\n"
             "{\"patient_id\":\"b\",\"admit_day\":0,\"discharge_day\":1,\"kind\":\"inpatient\",\"codes\":[\"E11\"]}\n"
             "{\"patient_id\":\"b\",\"admit_day\":50,\"discharge_day\":51,\"kind\":\"inpatient\",\"codes\":[\"E11\"]}\n");
  REQUIRE(run("label --in " + (dir / "enc.jsonl") + " --out " + (dir / "cohort.jsonl")).code == 0);
  const std::string text = slurp(dir / "cohort.jsonl");
  CHECK(text.find("\"id\":\"a\"") != std::string::npos);
  CHECK(text.find("\"id\":\"b\"") == std::string::npos);
}

TEST_CASE("config files") {
  std::istringstream in("# comment\narch = LSTM\n\nlr=0.05\nmax_epochs = 7\n");
  const auto s = cli::train_settings(cli::KeyValueConfig::parse(in));
  CHECK(s.spec.arch == models::Architecture::LSTM);
  CHECK(s.optimizer.lr == 0.05);
  CHECK(s.optimizer.family == optim::Family::Adam);
  CHECK(s.train.max_epochs == 7);

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(cli::train_settings(cli::KeyValueConfig::parse(unknown)), ValidationError);
  std::istringstream dup("lr = 1\nlr = 2\n");
  CHECK_THROWS_AS(cli::KeyValueConfig::parse(dup), ValidationError);
  std::istringstream bad("lr = fast\n");
  CHECK_THROWS_AS(cli::train_settings(cli::KeyValueConfig::parse(bad)), ValidationError);

  std::istringstream study("space.hidden_size = 8:64\nmax_epochs = 2\n");
  const auto st = cli::study_settings(cli::KeyValueConfig::parse(study));
  CHECK(st.space.dimensions()[1].upper == 64);
  CHECK(st.train.max_epochs == 2);
}
