#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "seqbench/models/model_spec.hpp"

namespace seqbench::optim {

using models::ParameterSet;

enum class Family { Adam, Adamax, Adagrad, Adadelta, RMSprop, ASGD, SGD };

/// The seven families in sweep order.
std::array<Family, 7> all_families();
std::string_view family_name(Family family);
Family parse_family(std::string_view name);

struct OptimizerConfig {
  Family family = Family::Adam;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double eps = 1e-8;  // numerical tolerance
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rho = 0.9;
  double momentum = 0.0;

  /// Family defaults: SGD/ASGD/Adagrad/RMSprop 1e-2, Adadelta 1.0, Adam 1e-3, Adamax 2e-3.
  static OptimizerConfig defaults(Family family);
};

void validate(const OptimizerConfig& cfg);

/// Per-tensor running statistics. Only the slots a family needs are filled.
struct OptimizerState {
  struct Slots {
    std::vector<double> first;    // momentum / m / squared-gradient accumulator
    std::vector<double> second;   // v / Adadelta delta accumulator / Adamax infinity norm
    std::vector<double> average;  // ASGD parameter average
  };
  std::int64_t step = 0;
  std::map<std::string, Slots> slots;
};

/// One update: g <- g + weight_decay * w, then the family's rule. Throws
/// DimensionError on shape mismatch and NumericError (naming the tensor) on a
/// non-finite gradient.
void optimizer_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state,
                    const OptimizerConfig& cfg);

/// Parameters to evaluate and return: the running average for ASGD (once at
/// least one step was taken), the current parameters otherwise.
ParameterSet evaluation_parameters(const ParameterSet& params, const OptimizerState& state,
                                   const OptimizerConfig& cfg);

}  // namespace seqbench::optim
