#pragma once

#include <map>
#include <span>
#include <string>

#include "seqbench/models/model_spec.hpp"
#include "seqbench/numerics/graph.hpp"

namespace seqbench::models {

/// Parameters bound onto a graph, looked up by name.
class BoundParameters {
 public:
  BoundParameters() = default;
  /// Trainable leaves when `trainable`, constants otherwise.
  BoundParameters(ad::Graph& graph, const ParameterSet& params, bool trainable);

  ad::Var operator[](const std::string& name) const;
  const std::map<std::string, ad::Var>& vars() const { return vars_; }

 private:
  std::map<std::string, ad::Var> vars_;
};

/// One recurrent cell's weights. Gate blocks are packed column-wise:
/// GRU W = [z | r | h~], LSTM W/U = [i | f | o | g].
struct CellParams {
  CellKind kind = CellKind::GRU;
  std::size_t hidden = 0;
  ad::Var W;
  ad::Var U;    // RNN/LSTM recurrent weights; GRU's [z | r] block
  ad::Var U_h;  // GRU candidate recurrent weights
  ad::Var b;
};

CellParams bind_cell(const BoundParameters& params, const std::string& prefix, CellKind kind);

struct CellState {
  ad::Var h;
  ad::Var c;  // LSTM/T-LSTM only
};

CellState zero_state(ad::Graph& graph, std::size_t batch, const CellParams& cell);

/// h' = tanh(x W + h U + b)
ad::Var rnn_step(ad::Var h, ad::Var x, const CellParams& p);
/// z = s(x Wz + h Uz + bz), r = s(x Wr + h Ur + br), h~ = tanh(x Wh + (r*h) Uh + bh),
/// h' = (1 - z) * h + z * h~
ad::Var gru_step(ad::Var h, ad::Var x, const CellParams& p);
/// c' = f*c + i*g, h' = o*tanh(c')
CellState lstm_step(ad::Var h, ad::Var c, ad::Var x, const CellParams& p);
CellState cell_step(const CellState& state, ad::Var x, const CellParams& p);

/// Elapsed-time discount 1 / log(e + dt); dt in days, capped at 3650.
/// Throws ValidationError for negative dt.
double time_decay(double delta_days);
inline constexpr double kMaxDeltaDays = 3650.0;

/// T-LSTM step: the short-term part C_S = tanh(c W_d + b_d) of the memory is
/// discounted by g(dt) before a regular LSTM step, i.e. c* = c + (g - 1) * C_S.
/// `delta_days` has one entry per batch row.
CellState tlstm_step(ad::Var h, ad::Var c, ad::Var x, std::span<const double> delta_days, const CellParams& p,
                     ad::Var W_d, ad::Var b_d);

/// fo-pooling: c' = f*c + (1 - f)*z
ad::Var fo_pool(ad::Var c, ad::Var z, ad::Var f);

/// Logit of the classification head, hidden * w + b.
ad::Var classify_head(ad::Var hidden, ad::Var w, ad::Var b);

}  // namespace seqbench::models
