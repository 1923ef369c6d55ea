#include "seqbench/models/cells.hpp"

#include <cmath>
#include <numbers>

#include "seqbench/error.hpp"

namespace seqbench::models {

BoundParameters::BoundParameters(ad::Graph& graph, const ParameterSet& params, bool trainable) {
  for (const auto& [name, tensor] : params) {
    vars_.emplace(name, trainable ? graph.parameter(tensor) : graph.constant(tensor));
  }
}

ad::Var BoundParameters::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ValidationError("missing parameter '" + name + "'");
  return it->second;
}

CellParams bind_cell(const BoundParameters& params, const std::string& prefix, CellKind kind) {
  CellParams p;
  p.kind = kind;
  p.W = params[prefix + "W"];
  p.b = params[prefix + "b"];
  if (kind == CellKind::GRU) {
    p.U = params[prefix + "U_zr"];
    p.U_h = params[prefix + "U_h"];
  } else {
    p.U = params[prefix + "U"];
  }
  p.hidden = kind == CellKind::GRU ? p.U_h.cols() : p.U.rows();
  return p;
}

CellState zero_state(ad::Graph& graph, std::size_t batch, const CellParams& cell) {
  CellState s;
  s.h = graph.constant(Tensor({batch, cell.hidden}));
  if (cell.kind == CellKind::LSTM) s.c = graph.constant(Tensor({batch, cell.hidden}));
  return s;
}

ad::Var rnn_step(ad::Var h, ad::Var x, const CellParams& p) {
  return ad::tanh(ad::add(ad::affine(x, p.W, p.b), ad::matmul(h, p.U)));
}

ad::Var gru_step(ad::Var h, ad::Var x, const CellParams& p) {
  const std::size_t n = p.hidden;
  const ad::Var xw = ad::affine(x, p.W, p.b);
  const ad::Var zr = ad::sigmoid(ad::add(ad::slice_cols(xw, 0, 2 * n), ad::matmul(h, p.U)));
  const ad::Var z = ad::slice_cols(zr, 0, n);
  const ad::Var r = ad::slice_cols(zr, n, n);
  const ad::Var candidate = ad::tanh(ad::add(ad::slice_cols(xw, 2 * n, n), ad::matmul(ad::mul(r, h), p.U_h)));
  return ad::add(ad::mul(ad::one_minus(z), h), ad::mul(z, candidate));
}

CellState lstm_step(ad::Var h, ad::Var c, ad::Var x, const CellParams& p) {
  const std::size_t n = p.hidden;
  const ad::Var gates = ad::add(ad::affine(x, p.W, p.b), ad::matmul(h, p.U));
  const ad::Var ifo = ad::sigmoid(ad::slice_cols(gates, 0, 3 * n));
  const ad::Var i = ad::slice_cols(ifo, 0, n);
  const ad::Var f = ad::slice_cols(ifo, n, n);
  const ad::Var o = ad::slice_cols(ifo, 2 * n, n);
  const ad::Var g = ad::tanh(ad::slice_cols(gates, 3 * n, n));
  CellState next;
  next.c = ad::add(ad::mul(f, c), ad::mul(i, g));
  next.h = ad::mul(o, ad::tanh(next.c));
  return next;
}

CellState cell_step(const CellState& state, ad::Var x, const CellParams& p) {
  switch (p.kind) {
    case CellKind::RNN: return {rnn_step(state.h, x, p), {}};
    case CellKind::GRU: return {gru_step(state.h, x, p), {}};
    case CellKind::LSTM: return lstm_step(state.h, state.c, x, p);
  }
  return state;
}

double time_decay(double delta_days) {
  if (!(delta_days >= 0.0)) throw ValidationError("time_decay: elapsed days must be nonnegative");
  return 1.0 / std::log(std::numbers::e + std::min(delta_days, kMaxDeltaDays));
}

CellState tlstm_step(ad::Var h, ad::Var c, ad::Var x, std::span<const double> delta_days, const CellParams& p,
                     ad::Var W_d, ad::Var b_d) {
  ad::Graph& g = *h.graph();
  if (delta_days.size() != c.rows()) throw DimensionError("tlstm_step: one elapsed time per batch row expected");
  Tensor discount({delta_days.size(), 1});
  for (std::size_t r = 0; r < delta_days.size(); ++r) discount[r] = time_decay(delta_days[r]) - 1.0;
  const ad::Var short_term = ad::tanh(ad::affine(c, W_d, b_d));
  const ad::Var adjusted = ad::add(c, ad::scale_rows(short_term, g.constant(std::move(discount))));
  return lstm_step(h, adjusted, x, p);
}

ad::Var fo_pool(ad::Var c, ad::Var z, ad::Var f) {
  return ad::add(ad::mul(f, c), ad::mul(ad::one_minus(f), z));
}

ad::Var classify_head(ad::Var hidden, ad::Var w, ad::Var b) { return ad::affine(hidden, w, b); }

}  // namespace seqbench::models
