#include "seqbench/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "seqbench/error.hpp"

namespace seqbench::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty key");
    if (!cfg.values_.emplace(key, value).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return parse(in);
  } catch (const Error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used == v->size()) return d;
  } catch (const std::exception&) {
  }
  throw ValidationError("config key '" + key + "': not a number: '" + *v + "'");
}

std::optional<std::size_t> KeyValueConfig::get_size(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(*v, &used);
    if (used == v->size() && (*v)[0] != '-') return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw ValidationError("config key '" + key + "': not a nonnegative integer: '" + *v + "'");
}

TrainSettings train_settings(const KeyValueConfig& config) {
  static const std::set<std::string> known = {
      "arch",    "embed_dim", "hidden_size", "num_layers", "qrnn_filter_width", "optimizer",  "lr",
      "weight_decay", "eps",  "beta1",       "beta2",      "rho",               "momentum",   "max_epochs",
      "batch_size", "patience", "min_improvement", "clip_norm", "seed"};
  for (const auto& [key, value] : config.values()) {
    if (!known.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }

  TrainSettings s;
  if (auto v = config.get("arch")) {
    s.spec.arch = models::parse_architecture(*v);
    s.arch_set = true;
  }
  if (auto v = config.get_size("embed_dim")) s.spec.embed_dim = *v;
  if (auto v = config.get_size("hidden_size")) s.spec.hidden_size = *v;
  if (auto v = config.get_size("num_layers")) s.spec.num_layers = *v;
  if (auto v = config.get_size("qrnn_filter_width")) s.spec.qrnn_filter_width = *v;

  const optim::Family family = optim::parse_family(config.get("optimizer").value_or("Adam"));
  s.optimizer = optim::OptimizerConfig::defaults(family);
  if (auto v = config.get_double("lr")) s.optimizer.lr = *v;
  if (auto v = config.get_double("weight_decay")) s.optimizer.weight_decay = *v;
  if (auto v = config.get_double("eps")) s.optimizer.eps = *v;
  if (auto v = config.get_double("beta1")) s.optimizer.beta1 = *v;
  if (auto v = config.get_double("beta2")) s.optimizer.beta2 = *v;
  if (auto v = config.get_double("rho")) s.optimizer.rho = *v;
  if (auto v = config.get_double("momentum")) s.optimizer.momentum = *v;
  optim::validate(s.optimizer);

  if (auto v = config.get_size("max_epochs")) s.train.max_epochs = *v;
  if (auto v = config.get_size("batch_size")) s.train.batch_size = *v;
  if (auto v = config.get_size("patience")) s.train.patience = *v;
  if (auto v = config.get_double("min_improvement")) s.train.min_improvement = *v;
  if (auto v = config.get_double("clip_norm")) s.train.clip_norm = *v;
  if (auto v = config.get_size("seed")) s.train.seed = *v;
  optim::validate(s.train);
  return s;
}

StudySettings study_settings(const KeyValueConfig& config) {
  static const std::set<std::string> known = {"max_epochs", "batch_size", "patience", "min_improvement", "clip_norm"};
  StudySettings s;
  std::vector<hpo::Dimension> dims = s.space.dimensions();
  for (const auto& [key, value] : config.values()) {
    if (known.count(key)) continue;
    if (key.rfind("space.", 0) != 0) throw ValidationError("unknown config key '" + key + "'");
    const std::string name = key.substr(6);
    auto dim = std::find_if(dims.begin(), dims.end(), [&](const hpo::Dimension& d) { return d.name == name; });
    if (dim == dims.end()) throw ValidationError("unknown search dimension '" + name + "'");
    const auto colon = value.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(value);
      std::size_t used_lo = 0, used_hi = 0;
      const std::string lo = value.substr(0, colon), hi = value.substr(colon + 1);
      dim->lower = std::stod(lo, &used_lo);
      dim->upper = std::stod(hi, &used_hi);
      if (used_lo != lo.size() || used_hi != hi.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected lo:hi, got '" + value + "'");
    }
  }
  s.space = hpo::SearchSpace(std::move(dims));
  if (auto v = config.get_size("max_epochs")) s.train.max_epochs = *v;
  if (auto v = config.get_size("batch_size")) s.train.batch_size = *v;
  if (auto v = config.get_size("patience")) s.train.patience = *v;
  if (auto v = config.get_double("min_improvement")) s.train.min_improvement = *v;
  if (auto v = config.get_double("clip_norm")) s.train.clip_norm = *v;
  optim::validate(s.train);
  return s;
}

}  // namespace seqbench::cli
