#pragma once

#include <span>
#include <vector>

#include "seqbench/ehr/batch.hpp"
#include "seqbench/models/cells.hpp"
#include "seqbench/models/model_spec.hpp"
#include "seqbench/models/runners.hpp"

namespace seqbench::models {

/// Logits [B x 1] of any architecture for a padded batch.
ad::Var forward_logits(ad::Graph& graph, const ModelSpec& spec, const BoundParameters& params,
                       const ehr::PaddedBatch& batch);

/// Multi-hot presence bag [B x V] over every code of each row's history.
Tensor multi_hot(const ehr::PaddedBatch& batch, std::size_t vocab_size);

/// p = s(x w + b) over the multi-hot bag.
ad::Var lr_logits(ad::Graph& graph, const ehr::PaddedBatch& batch, ad::Var w, ad::Var b);

/// Mean BCE of the batch. When `grads` is non-null it receives one gradient
/// tensor per parameter (same names and shapes).
double loss_and_gradients(const ModelSpec& spec, const ParameterSet& params, const ehr::PaddedBatch& batch,
                          ParameterSet* grads);

std::vector<double> predict_proba(const ModelSpec& spec, const ParameterSet& params, const ehr::PaddedBatch& batch);
std::vector<double> predict_proba(const ModelSpec& spec, const ParameterSet& params,
                                  std::span<const ehr::PatientRecord> records, std::size_t batch_size = 256);

/// RETAIN attention in original visit order, real visits only.
struct RetainExplanation {
  std::vector<double> probability;
  std::vector<std::vector<double>> alpha;               // [row][visit]
  std::vector<std::vector<std::vector<double>>> beta;   // [row][visit][embed]
};

RetainExplanation explain_retain(const ModelSpec& spec, const ParameterSet& params, const ehr::PaddedBatch& batch);

/// Arithmetic mean of the two probabilities.
double ensemble_probs(double p_gru, double p_lr);

}  // namespace seqbench::models
