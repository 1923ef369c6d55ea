#include "seqbench/models/models.hpp"

#include "seqbench/error.hpp"
#include "seqbench/numerics/ops.hpp"

namespace seqbench::models {

namespace {

RetainParams bind_retain(const BoundParameters& p) {
  return RetainParams{bind_cell(p, "alpha_rnn.", CellKind::GRU),
                      bind_cell(p, "beta_rnn.", CellKind::GRU),
                      p["alpha.w"],
                      p["alpha.b"],
                      p["beta.W"],
                      p["beta.b"],
                      p["head.w"],
                      p["head.b"]};
}

}  // namespace

Tensor multi_hot(const ehr::PaddedBatch& batch, std::size_t vocab_size) {
  Tensor x({batch.batch, vocab_size});
  for (std::size_t b = 0; b < batch.batch; ++b) {
    for (std::size_t t = 0; t < batch.steps; ++t) {
      for (std::size_t c = 0; c < batch.max_codes; ++c) {
        const std::size_t at = (b * batch.steps + t) * batch.max_codes + c;
        if (!batch.code_mask[at]) continue;
        const std::int32_t id = batch.codes[at];
        if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
          throw ValidationError("code id " + std::to_string(id) + " outside vocabulary");
        }
        x.at(b, static_cast<std::size_t>(id)) = 1.0;
      }
    }
  }
  return x;
}

ad::Var lr_logits(ad::Graph& graph, const ehr::PaddedBatch& batch, ad::Var w, ad::Var b) {
  return ad::affine(graph.constant(multi_hot(batch, w.rows())), w, b);
}

ad::Var forward_logits(ad::Graph& graph, const ModelSpec& spec, const BoundParameters& params,
                       const ehr::PaddedBatch& batch) {
  validate(spec);
  if (spec.arch == Architecture::LR) return lr_logits(graph, batch, params["lr.w"], params["lr.b"]);

  const ad::Var embedding = params["embedding"];
  if (auto cell = cell_of(spec.arch)) {
    const Sequence inputs = embed_visits(embedding, batch);
    ad::Var hidden;
    switch (*connection_of(spec.arch)) {
      case Connection::Standard:
        hidden = run_standard(inputs, batch, bind_cell(params, "cell.", *cell));
        break;
      case Connection::Bidirectional: {
        const Sequence reversed = embed_visits(embedding, ehr::reverse_real(batch));
        hidden = run_bidirectional(inputs, reversed, batch, bind_cell(params, "fwd.", *cell),
                                   bind_cell(params, "bwd.", *cell));
        break;
      }
      case Connection::Dilated: {
        std::vector<CellParams> layers;
        for (std::size_t l = 1; l <= spec.layers(); ++l) {
          layers.push_back(bind_cell(params, "layer" + std::to_string(l) + ".", *cell));
        }
        hidden = run_dilated(inputs, batch, layers);
        break;
      }
    }
    return classify_head(hidden, params["head.w"], params["head.b"]);
  }

  switch (spec.arch) {
    case Architecture::QRNN: {
      QrnnParams q;
      for (std::size_t k = 0; k < spec.qrnn_filter_width; ++k) q.taps.push_back(params["qrnn.W" + std::to_string(k)]);
      q.b = params["qrnn.b"];
      q.hidden = spec.hidden_size;
      const ad::Var hidden = qrnn_forward(embed_visits(embedding, batch), batch, q);
      return classify_head(hidden, params["head.w"], params["head.b"]);
    }
    case Architecture::TLSTM: {
      const ad::Var hidden = tlstm_forward(embed_visits(embedding, batch), batch,
                                           bind_cell(params, "tlstm.", CellKind::LSTM), params["tlstm.W_d"],
                                           params["tlstm.b_d"]);
      return classify_head(hidden, params["head.w"], params["head.b"]);
    }
    case Architecture::RETAIN: {
      const ehr::PaddedBatch reversed = ehr::reverse_real(batch);
      return retain_forward(embed_visits(embedding, reversed), reversed, bind_retain(params)).logit;
    }
    default: break;
  }
  throw ValidationError("unsupported architecture");
}

double loss_and_gradients(const ModelSpec& spec, const ParameterSet& params, const ehr::PaddedBatch& batch,
                          ParameterSet* grads) {
  ad::Graph graph;
  const BoundParameters bound(graph, params, grads != nullptr);
  const ad::Var loss = ad::bce_with_logits(forward_logits(graph, spec, bound, batch), batch.labels);
  const double value = loss.value()[0];
  if (grads) {
    graph.backward(loss);
    grads->clear();
    for (const auto& [name, var] : bound.vars()) {
      grads->emplace(name, Tensor(params.at(name).shape(), graph.gradient(var)));
    }
  }
  return value;
}

std::vector<double> predict_proba(const ModelSpec& spec, const ParameterSet& params, const ehr::PaddedBatch& batch) {
  ad::Graph graph;
  const BoundParameters bound(graph, params, false);
  const ad::Var logits = forward_logits(graph, spec, bound, batch);
  std::vector<double> out(batch.batch);
  for (std::size_t b = 0; b < batch.batch; ++b) out[b] = sigmoid(logits.value()[b]);
  return out;
}

std::vector<double> predict_proba(const ModelSpec& spec, const ParameterSet& params,
                                  std::span<const ehr::PatientRecord> records, std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& batch : ehr::batch_visits(records, batch_size)) {
    const auto p = predict_proba(spec, params, batch);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

RetainExplanation explain_retain(const ModelSpec& spec, const ParameterSet& params, const ehr::PaddedBatch& batch) {
  if (spec.arch != Architecture::RETAIN) throw ValidationError("explain_retain needs a RETAIN model");
  ad::Graph graph;
  const BoundParameters bound(graph, params, false);
  const ehr::PaddedBatch reversed = ehr::reverse_real(batch);
  const RetainOutput out =
      retain_forward(embed_visits(bound["embedding"], reversed), reversed, bind_retain(bound));

  RetainExplanation ex;
  const Tensor& alpha = out.alpha.value();
  for (std::size_t b = 0; b < batch.batch; ++b) {
    const std::size_t len = batch.lengths[b];
    ex.probability.push_back(sigmoid(out.logit.value()[b]));
    std::vector<double> a(len);
    std::vector<std::vector<double>> beta(len);
    for (std::size_t t = 0; t < len; ++t) {
      // reversed step t is original visit len-1-t
      a[len - 1 - t] = alpha.at(b, t);
      const Tensor& bt = out.beta[t].value();
      beta[len - 1 - t].assign(bt.data().begin() + static_cast<long>(b * bt.cols()),
                               bt.data().begin() + static_cast<long>((b + 1) * bt.cols()));
    }
    ex.alpha.push_back(std::move(a));
    ex.beta.push_back(std::move(beta));
  }
  return ex;
}

double ensemble_probs(double p_gru, double p_lr) {
  if (!(p_gru >= 0.0 && p_gru <= 1.0 && p_lr >= 0.0 && p_lr <= 1.0)) {
    throw ValidationError("ensemble_probs: probabilities must lie in [0,1]");
  }
  return 0.5 * (p_gru + p_lr);
}

}  // namespace seqbench::models
