#include "seqbench/models/runners.hpp"

#include <algorithm>

#include "seqbench/error.hpp"

namespace seqbench::models {

namespace {

void require_real_visits(const ehr::PaddedBatch& batch, const Sequence& inputs) {
  if (inputs.size() != batch.steps) throw DimensionError("sequence length differs from batch steps");
  for (std::size_t len : batch.lengths) {
    if (len == 0) throw ValidationError("sequence has no real visits");
  }
}

// Keeps `previous` on padded rows; returns `next` untouched when every row is real.
ad::Var carry(const std::vector<std::uint8_t>& mask, ad::Var next, ad::Var previous) {
  if (std::all_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) return next;
  return ad::select_rows(mask, next, previous);
}

CellState carry(const std::vector<std::uint8_t>& mask, const CellState& next, const CellState& previous) {
  CellState out;
  out.h = carry(mask, next.h, previous.h);
  if (next.c.valid()) out.c = carry(mask, next.c, previous.c);
  return out;
}

}  // namespace

Sequence embed_visits(ad::Var embedding, const ehr::PaddedBatch& batch) {
  Sequence out;
  out.reserve(batch.steps);
  for (std::size_t t = 0; t < batch.steps; ++t) {
    if (batch.max_codes == 0) {
      out.push_back(embedding.graph()->constant(Tensor({batch.batch, embedding.cols()})));
      continue;
    }
    out.push_back(ad::embed_mean(embedding, batch.step_codes(t), batch.step_code_mask(t), batch.batch, batch.max_codes));
  }
  return out;
}

ad::Var run_standard(const Sequence& inputs, const ehr::PaddedBatch& batch, const CellParams& cell) {
  require_real_visits(batch, inputs);
  ad::Graph& g = *inputs.front().graph();
  CellState state = zero_state(g, batch.batch, cell);
  for (std::size_t t = 0; t < batch.steps; ++t) {
    state = carry(batch.step_mask(t), cell_step(state, inputs[t], cell), state);
  }
  return state.h;
}

ad::Var run_bidirectional(const Sequence& inputs, const Sequence& reversed_inputs, const ehr::PaddedBatch& batch,
                          const CellParams& forward, const CellParams& backward) {
  const std::vector<ad::Var> halves = {run_standard(inputs, batch, forward),
                                       run_standard(reversed_inputs, batch, backward)};
  return ad::concat_cols(halves);
}

ad::Var run_dilated(const Sequence& inputs, const ehr::PaddedBatch& batch, std::span<const CellParams> layers) {
  require_real_visits(batch, inputs);
  if (layers.empty()) throw ValidationError("run_dilated needs at least one layer");
  ad::Graph& g = *inputs.front().graph();
  Sequence current = inputs;
  std::vector<CellState> states;
  std::size_t dilation = 1;
  for (const CellParams& cell : layers) {
    const CellState zero = zero_state(g, batch.batch, cell);
    states.assign(batch.steps, CellState{});
    for (std::size_t t = 0; t < batch.steps; ++t) {
      const CellState& prev = t >= dilation ? states[t - dilation] : zero;
      states[t] = cell_step(prev, current[t], cell);
    }
    for (std::size_t t = 0; t < batch.steps; ++t) current[t] = states[t].h;
    dilation *= 2;
  }
  ad::Var out = current.front();
  for (std::size_t t = 1; t < batch.steps; ++t) out = carry(batch.step_mask(t), current[t], out);
  return out;
}

ad::Var qrnn_forward(const Sequence& inputs, const ehr::PaddedBatch& batch, const QrnnParams& params) {
  require_real_visits(batch, inputs);
  if (params.taps.empty()) throw ValidationError("qrnn needs a positive filter width");
  ad::Graph& g = *inputs.front().graph();
  const std::size_t n = params.hidden;
  ad::Var c = g.constant(Tensor({batch.batch, n}));
  ad::Var h = c;
  for (std::size_t t = 0; t < batch.steps; ++t) {
    ad::Var pre = ad::affine(inputs[t], params.taps[0], params.b);
    for (std::size_t j = 1; j < params.taps.size() && j <= t; ++j) {
      pre = ad::add(pre, ad::matmul(inputs[t - j], params.taps[j]));
    }
    const ad::Var z = ad::tanh(ad::slice_cols(pre, 0, n));
    const ad::Var fo = ad::sigmoid(ad::slice_cols(pre, n, 2 * n));
    const ad::Var f = ad::slice_cols(fo, 0, n);
    const ad::Var o = ad::slice_cols(fo, n, n);
    const ad::Var c_next = fo_pool(c, z, f);
    const auto mask = batch.step_mask(t);
    h = carry(mask, ad::mul(o, c_next), h);
    c = carry(mask, c_next, c);
  }
  return h;
}

ad::Var tlstm_forward(const Sequence& inputs, const ehr::PaddedBatch& batch, const CellParams& cell, ad::Var W_d,
                      ad::Var b_d) {
  require_real_visits(batch, inputs);
  ad::Graph& g = *inputs.front().graph();
  CellState state = zero_state(g, batch.batch, cell);
  std::vector<double> dt(batch.batch);
  for (std::size_t t = 0; t < batch.steps; ++t) {
    for (std::size_t b = 0; b < batch.batch; ++b) dt[b] = batch.delta_days[b * batch.steps + t];
    state = carry(batch.step_mask(t), tlstm_step(state.h, state.c, inputs[t], dt, cell, W_d, b_d), state);
  }
  return state.h;
}

RetainOutput retain_forward(const Sequence& reversed_inputs, const ehr::PaddedBatch& reversed_batch,
                            const RetainParams& p) {
  require_real_visits(reversed_batch, reversed_inputs);
  ad::Graph& g = *reversed_inputs.front().graph();
  const std::size_t steps = reversed_batch.steps;

  CellState a_state = zero_state(g, reversed_batch.batch, p.alpha_rnn);
  CellState b_state = zero_state(g, reversed_batch.batch, p.beta_rnn);
  std::vector<ad::Var> energies;
  RetainOutput out;
  for (std::size_t t = 0; t < steps; ++t) {
    a_state = cell_step(a_state, reversed_inputs[t], p.alpha_rnn);
    b_state = cell_step(b_state, reversed_inputs[t], p.beta_rnn);
    energies.push_back(ad::affine(a_state.h, p.alpha_w, p.alpha_b));
    out.beta.push_back(ad::tanh(ad::affine(b_state.h, p.beta_W, p.beta_b)));
  }
  out.alpha = ad::masked_softmax_rows(ad::concat_cols(energies), reversed_batch.visit_mask);

  ad::Var context;
  for (std::size_t t = 0; t < steps; ++t) {
    const ad::Var term = ad::scale_rows(ad::mul(out.beta[t], reversed_inputs[t]), ad::slice_cols(out.alpha, t, 1));
    context = t == 0 ? term : ad::add(context, term);
  }
  out.logit = classify_head(context, p.head_w, p.head_b);
  return out;
}

}  // namespace seqbench::models
