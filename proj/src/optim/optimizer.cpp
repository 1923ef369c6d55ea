#include "seqbench/optim/optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "seqbench/error.hpp"

namespace seqbench::optim {

std::array<Family, 7> all_families() {
  return {Family::Adam, Family::Adamax, Family::Adagrad, Family::Adadelta, Family::RMSprop, Family::ASGD, Family::SGD};
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::Adam: return "Adam";
    case Family::Adamax: return "Adamax";
    case Family::Adagrad: return "Adagrad";
    case Family::Adadelta: return "Adadelta";
    case Family::RMSprop: return "RMSprop";
    case Family::ASGD: return "ASGD";
    case Family::SGD: return "SGD";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Family f : all_families()) {
    std::string candidate;
    for (char c : family_name(f)) candidate.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (candidate == key) return f;
  }
  throw ValidationError("unknown optimizer '" + std::string(name) + "'");
}

OptimizerConfig OptimizerConfig::defaults(Family family) {
  OptimizerConfig cfg;
  cfg.family = family;
  switch (family) {
    case Family::Adam: cfg.lr = 1e-3; break;
    case Family::Adamax: cfg.lr = 2e-3; break;
    case Family::Adadelta: cfg.lr = 1.0; break;
    default: cfg.lr = 1e-2; break;
  }
  return cfg;
}

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw ValidationError("optimizer: lr must be positive");
  if (!(cfg.eps > 0.0)) throw ValidationError("optimizer: eps must be positive");
  if (!(cfg.weight_decay >= 0.0)) throw ValidationError("optimizer: weight_decay must be nonnegative");
  if (!(cfg.momentum >= 0.0)) throw ValidationError("optimizer: momentum must be nonnegative");
}

void optimizer_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state,
                    const OptimizerConfig& cfg) {
  validate(cfg);
  for (const auto& [name, w] : params) {
    auto it = grads.find(name);
    if (it == grads.end() || it->second.shape() != w.shape()) {
      throw DimensionError("optimizer: gradient for '" + name + "' missing or mis-shaped");
    }
    if (!it->second.all_finite()) throw NumericError("optimizer: non-finite gradient in '" + name + "'");
  }

  ++state.step;
  const auto t = static_cast<double>(state.step);
  for (auto& [name, param] : params) {
    auto w = param.data();
    const auto g_raw = grads.at(name).data();
    auto& slot = state.slots[name];
    const std::size_t n = w.size();
    auto ensure = [n](std::vector<double>& v) {
      if (v.size() != n) v.assign(n, 0.0);
    };

    for (std::size_t i = 0; i < n; ++i) {
      const double g = g_raw[i] + cfg.weight_decay * w[i];
      switch (cfg.family) {
        case Family::SGD:
        case Family::ASGD:
          if (cfg.momentum > 0.0) {
            ensure(slot.first);
            slot.first[i] = cfg.momentum * slot.first[i] + g;
            w[i] -= cfg.lr * slot.first[i];
          } else {
            w[i] -= cfg.lr * g;
          }
          break;
        case Family::Adagrad:
          ensure(slot.first);
          slot.first[i] += g * g;
          w[i] -= cfg.lr * g / (std::sqrt(slot.first[i]) + cfg.eps);
          break;
        case Family::Adadelta: {
          ensure(slot.first);
          ensure(slot.second);
          slot.first[i] = cfg.rho * slot.first[i] + (1.0 - cfg.rho) * g * g;
          const double delta = std::sqrt(slot.second[i] + cfg.eps) / std::sqrt(slot.first[i] + cfg.eps) * g;
          slot.second[i] = cfg.rho * slot.second[i] + (1.0 - cfg.rho) * delta * delta;
          w[i] -= cfg.lr * delta;
          break;
        }
        case Family::RMSprop:
          ensure(slot.first);
          slot.first[i] = cfg.rho * slot.first[i] + (1.0 - cfg.rho) * g * g;
          w[i] -= cfg.lr * g / (std::sqrt(slot.first[i]) + cfg.eps);
          break;
        case Family::Adam: {
          ensure(slot.first);
          ensure(slot.second);
          slot.first[i] = cfg.beta1 * slot.first[i] + (1.0 - cfg.beta1) * g;
          slot.second[i] = cfg.beta2 * slot.second[i] + (1.0 - cfg.beta2) * g * g;
          const double m_hat = slot.first[i] / (1.0 - std::pow(cfg.beta1, t));
          const double v_hat = slot.second[i] / (1.0 - std::pow(cfg.beta2, t));
          w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
          break;
        }
        case Family::Adamax: {
          ensure(slot.first);
          ensure(slot.second);
          slot.first[i] = cfg.beta1 * slot.first[i] + (1.0 - cfg.beta1) * g;
          slot.second[i] = std::max(cfg.beta2 * slot.second[i], std::abs(g) + cfg.eps);
          w[i] -= cfg.lr / (1.0 - std::pow(cfg.beta1, t)) * slot.first[i] / slot.second[i];
          break;
        }
      }
    }

    if (cfg.family == Family::ASGD) {
      if (slot.average.size() != n) {
        slot.average.assign(w.begin(), w.end());
      } else {
        for (std::size_t i = 0; i < n; ++i) slot.average[i] += (w[i] - slot.average[i]) / t;
      }
    }
  }
}

ParameterSet evaluation_parameters(const ParameterSet& params, const OptimizerState& state,
                                   const OptimizerConfig& cfg) {
  if (cfg.family != Family::ASGD || state.step == 0) return params;
  ParameterSet avg = params;
  for (auto& [name, t] : avg) {
    auto it = state.slots.find(name);
    if (it == state.slots.end() || it->second.average.size() != t.numel()) continue;
    std::copy(it->second.average.begin(), it->second.average.end(), t.data().begin());
  }
  return avg;
}

}  // namespace seqbench::optim
