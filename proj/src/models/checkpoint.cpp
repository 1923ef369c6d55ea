#include "seqbench/models/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "seqbench/error.hpp"

namespace seqbench::models {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  json tensors = json::array();
  for (const auto& [name, t] : ck.params) tensors.push_back({{"name", name}, {"shape", t.shape()}});
  const json header = {{"spec",
                        {{"arch", architecture_name(ck.spec.arch)},
                         {"vocab_size", ck.spec.vocab_size},
                         {"embed_dim", ck.spec.embed_dim},
                         {"hidden_size", ck.spec.hidden_size},
                         {"num_layers", ck.spec.num_layers},
                         {"qrnn_filter_width", ck.spec.qrnn_filter_width}}},
                       {"tensors", std::move(tensors)}};
  out << kCheckpointSchema << '\n' << header.dump() << '\n';
  for (const auto& [name, t] : ck.params) {
    out.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("checkpoint: empty input");
  if (line != kCheckpointSchema) throw IoError("checkpoint: unknown schema '" + line + "'");
  if (!std::getline(in, line)) throw IoError("checkpoint: missing header");
  Checkpoint ck;
  try {
    const json header = json::parse(line);
    const json& s = header.at("spec");
    ck.spec.arch = parse_architecture(s.at("arch").get<std::string>());
    ck.spec.vocab_size = s.at("vocab_size").get<std::size_t>();
    ck.spec.embed_dim = s.at("embed_dim").get<std::size_t>();
    ck.spec.hidden_size = s.at("hidden_size").get<std::size_t>();
    ck.spec.num_layers = s.at("num_layers").get<std::size_t>();
    ck.spec.qrnn_filter_width = s.at("qrnn_filter_width").get<std::size_t>();
    for (const json& t : header.at("tensors")) {
      Tensor tensor(t.at("shape").get<Shape>());
      in.read(reinterpret_cast<char*>(tensor.data().data()),
              static_cast<std::streamsize>(tensor.numel() * sizeof(double)));
      if (!in) throw IoError("checkpoint: truncated data for tensor '" + t.at("name").get<std::string>() + "'");
      ck.params.emplace(t.at("name").get<std::string>(), std::move(tensor));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: bad header: ") + e.what());
  }
  for (const auto& decl : parameter_layout(ck.spec)) {
    auto it = ck.params.find(decl.name);
    if (it == ck.params.end() || it->second.shape() != decl.shape) {
      throw IoError("checkpoint: tensor '" + decl.name + "' missing or mis-shaped for the stored spec");
    }
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_checkpoint(out, checkpoint);
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace seqbench::models
