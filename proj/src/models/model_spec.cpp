#include "seqbench/models/model_spec.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>

#include "seqbench/error.hpp"
#include "seqbench/numerics/rng.hpp"

namespace seqbench::models {

namespace {

constexpr std::array kAll = {Architecture::GRU,   Architecture::LSTM,   Architecture::DGRU,   Architecture::DLSTM,
                             Architecture::QRNN,  Architecture::RETAIN, Architecture::LR,     Architecture::BiGRU,
                             Architecture::BiLSTM, Architecture::BiRNN, Architecture::DRNN,   Architecture::RNN,
                             Architecture::TLSTM};

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::span<const Architecture> all_architectures() { return kAll; }

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::GRU: return "GRU";
    case Architecture::LSTM: return "LSTM";
    case Architecture::DGRU: return "D-GRU";
    case Architecture::DLSTM: return "D-LSTM";
    case Architecture::QRNN: return "QRNN";
    case Architecture::RETAIN: return "RETAIN";
    case Architecture::LR: return "LR";
    case Architecture::BiGRU: return "Bi-GRU";
    case Architecture::BiLSTM: return "Bi-LSTM";
    case Architecture::BiRNN: return "Bi-RNN";
    case Architecture::DRNN: return "D-RNN";
    case Architecture::RNN: return "Vanilla-RNN";
    case Architecture::TLSTM: return "T-LSTM";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  const std::string key = fold(name);
  for (Architecture a : kAll) {
    if (fold(architecture_name(a)) == key) return a;
  }
  if (key == "rnn") return Architecture::RNN;
  throw ValidationError("unknown architecture '" + std::string(name) + "'");
}

std::optional<CellKind> cell_of(Architecture arch) {
  switch (arch) {
    case Architecture::GRU:
    case Architecture::BiGRU:
    case Architecture::DGRU: return CellKind::GRU;
    case Architecture::LSTM:
    case Architecture::BiLSTM:
    case Architecture::DLSTM: return CellKind::LSTM;
    case Architecture::RNN:
    case Architecture::BiRNN:
    case Architecture::DRNN: return CellKind::RNN;
    default: return std::nullopt;
  }
}

std::optional<Connection> connection_of(Architecture arch) {
  switch (arch) {
    case Architecture::GRU:
    case Architecture::LSTM:
    case Architecture::RNN: return Connection::Standard;
    case Architecture::BiGRU:
    case Architecture::BiLSTM:
    case Architecture::BiRNN: return Connection::Bidirectional;
    case Architecture::DGRU:
    case Architecture::DLSTM:
    case Architecture::DRNN: return Connection::Dilated;
    default: return std::nullopt;
  }
}

std::size_t ModelSpec::layers() const {
  if (num_layers) return num_layers;
  return connection_of(arch) == Connection::Dilated ? 3 : 1;
}

void validate(const ModelSpec& spec) {
  if (spec.vocab_size < 2) throw ValidationError("model spec: vocab_size must be at least 2");
  if (spec.arch == Architecture::LR) return;
  if (spec.embed_dim == 0 || spec.hidden_size == 0) {
    throw ValidationError("model spec: embed_dim and hidden_size must be positive");
  }
  if (spec.layers() == 0) throw ValidationError("model spec: num_layers must be positive");
  if (spec.arch == Architecture::QRNN && spec.qrnn_filter_width == 0) {
    throw ValidationError("model spec: qrnn_filter_width must be positive");
  }
}

namespace {

void add_cell(std::vector<ParameterDecl>& out, const std::string& prefix, CellKind kind, std::size_t in,
              std::size_t h) {
  const std::size_t gates = kind == CellKind::RNN ? 1 : kind == CellKind::GRU ? 3 : 4;
  out.push_back({prefix + "W", {in, gates * h}, false, in, h});
  if (kind == CellKind::GRU) {
    out.push_back({prefix + "U_zr", {h, 2 * h}, false, h, h});
    out.push_back({prefix + "U_h", {h, h}, false, h, h});
  } else {
    out.push_back({prefix + "U", {h, gates * h}, false, h, h});
  }
  out.push_back({prefix + "b", {gates * h}, true, 0, 0});
}

void add_head(std::vector<ParameterDecl>& out, std::size_t in) {
  out.push_back({"head.w", {in, 1}, false, in, 1});
  out.push_back({"head.b", {1}, true, 0, 0});
}

}  // namespace

std::vector<ParameterDecl> parameter_layout(const ModelSpec& spec) {
  validate(spec);
  std::vector<ParameterDecl> out;
  const std::size_t v = spec.vocab_size, d = spec.embed_dim, h = spec.hidden_size;
  if (spec.arch == Architecture::LR) {
    out.push_back({"lr.w", {v, 1}, false, v, 1});
    out.push_back({"lr.b", {1}, true, 0, 0});
    return out;
  }
  out.push_back({"embedding", {v, d}, false, v, d});
  if (auto cell = cell_of(spec.arch)) {
    switch (*connection_of(spec.arch)) {
      case Connection::Standard:
        add_cell(out, "cell.", *cell, d, h);
        add_head(out, h);
        break;
      case Connection::Bidirectional:
        add_cell(out, "fwd.", *cell, d, h);
        add_cell(out, "bwd.", *cell, d, h);
        add_head(out, 2 * h);
        break;
      case Connection::Dilated:
        for (std::size_t l = 1; l <= spec.layers(); ++l) {
          add_cell(out, "layer" + std::to_string(l) + ".", *cell, l == 1 ? d : h, h);
        }
        add_head(out, h);
        break;
    }
    return out;
  }
  switch (spec.arch) {
    case Architecture::QRNN:
      for (std::size_t k = 0; k < spec.qrnn_filter_width; ++k) {
        out.push_back({"qrnn.W" + std::to_string(k), {d, 3 * h}, false, d, h});
      }
      out.push_back({"qrnn.b", {3 * h}, true, 0, 0});
      add_head(out, h);
      break;
    case Architecture::TLSTM:
      add_cell(out, "tlstm.", CellKind::LSTM, d, h);
      out.push_back({"tlstm.W_d", {h, h}, false, h, h});
      out.push_back({"tlstm.b_d", {h}, true, 0, 0});
      add_head(out, h);
      break;
    case Architecture::RETAIN:
      add_cell(out, "alpha_rnn.", CellKind::GRU, d, h);
      add_cell(out, "beta_rnn.", CellKind::GRU, d, h);
      out.push_back({"alpha.w", {h, 1}, false, h, 1});
      out.push_back({"alpha.b", {1}, true, 0, 0});
      out.push_back({"beta.W", {h, d}, false, h, d});
      out.push_back({"beta.b", {d}, true, 0, 0});
      add_head(out, d);
      break;
    default: break;
  }
  return out;
}

ParameterSet init_parameters(const ModelSpec& spec, std::uint64_t seed) {
  const Rng root(seed);
  ParameterSet params;
  const auto layout = parameter_layout(spec);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& decl = layout[i];
    Tensor t(decl.shape);
    if (!decl.bias) {
      Rng rng = root.derive("init", i);
      const double a = std::sqrt(6.0 / static_cast<double>(decl.fan_in + decl.fan_out));
      for (double& x : t.data()) x = rng.uniform(-a, a);
    }
    params.emplace(decl.name, std::move(t));
  }
  return params;
}

std::size_t parameter_count(const ParameterSet& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

std::uint64_t parameter_checksum(const ParameterSet& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [name, t] : params) {
    mix(name.data(), name.size());
    mix(t.data().data(), t.numel() * sizeof(double));
  }
  return h;
}

}  // namespace seqbench::models
