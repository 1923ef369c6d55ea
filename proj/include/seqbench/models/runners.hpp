#pragma once

#include <span>
#include <vector>

#include "seqbench/ehr/batch.hpp"
#include "seqbench/models/cells.hpp"

namespace seqbench::models {

/// One [batch x features] node per time step.
using Sequence = std::vector<ad::Var>;

/// Mean of each visit's code embeddings; padded or empty visits give zeros.
Sequence embed_visits(ad::Var embedding, const ehr::PaddedBatch& batch);

/// Left-to-right recurrence from a zero state; returns the hidden state at
/// each row's last real visit. Throws for rows without visits.
ad::Var run_standard(const Sequence& inputs, const ehr::PaddedBatch& batch, const CellParams& cell);

/// [forward final state | backward final state], the backward pass running
/// over each row's real visits in reverse. `reversed_inputs` must be the
/// embedding of ehr::reverse_real(batch).
ad::Var run_bidirectional(const Sequence& inputs, const Sequence& reversed_inputs, const ehr::PaddedBatch& batch,
                          const CellParams& forward, const CellParams& backward);

/// Stacked layers where layer l (1-based) connects step t to t - 2^(l-1);
/// earlier-than-start positions read the zero state. Returns the top layer's
/// state at each row's last real visit.
ad::Var run_dilated(const Sequence& inputs, const ehr::PaddedBatch& batch, std::span<const CellParams> layers);

struct QrnnParams {
  std::vector<ad::Var> taps;  // taps[j] multiplies x_{t-j}; each [d x 3H] packed [z | f | o]
  ad::Var b;
  std::size_t hidden = 0;
};

/// Causal width-k convolution gates z = tanh, f = s, o = s; fo-pooling
/// c_t = f*c_{t-1} + (1-f)*z_t, h_t = o*c_t. Returns h at the last real visit.
ad::Var qrnn_forward(const Sequence& inputs, const ehr::PaddedBatch& batch, const QrnnParams& params);

/// T-LSTM over the sequence, feeding each step its delta_days.
ad::Var tlstm_forward(const Sequence& inputs, const ehr::PaddedBatch& batch, const CellParams& cell, ad::Var W_d,
                      ad::Var b_d);

struct RetainParams {
  CellParams alpha_rnn;
  CellParams beta_rnn;
  ad::Var alpha_w, alpha_b;  // [H x 1], [1]
  ad::Var beta_W, beta_b;    // [H x d], [d]
  ad::Var head_w, head_b;    // [d x 1], [1]
};

struct RetainOutput {
  ad::Var logit;              // [B x 1]
  ad::Var alpha;              // [B x T] in reversed-visit order, zero on padding
  std::vector<ad::Var> beta;  // per reversed step, [B x d]
};

/// Both attention RNNs read the visits most-recent first. `reversed_inputs`
/// and `reversed_batch` come from ehr::reverse_real.
RetainOutput retain_forward(const Sequence& reversed_inputs, const ehr::PaddedBatch& reversed_batch,
                            const RetainParams& params);

}  // namespace seqbench::models
