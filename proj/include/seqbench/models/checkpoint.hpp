#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "seqbench/models/model_spec.hpp"

namespace seqbench::models {

inline constexpr std::string_view kCheckpointSchema = "seqbench-model/1";

struct Checkpoint {
  ModelSpec spec;
  ParameterSet params;
};

/// Layout: a "seqbench-model/1" line, one JSON line describing the spec and
/// the tensor index (name + shape, in storage order), then the raw
/// little-endian 64-bit data of every tensor back to back.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace seqbench::models
