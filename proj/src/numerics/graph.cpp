#include "seqbench/numerics/graph.hpp"

#include <algorithm>
#include <cmath>

#include "seqbench/error.hpp"

namespace seqbench::ad {

const Tensor& Var::value() const { return graph_->value(*this); }

Var Graph::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Graph::parameter(Tensor value) { return record(std::move(value), true, nullptr); }

Var Graph::record(Tensor value, bool requires_grad, std::function<void(Graph&, std::size_t)> backward) {
  check_finite(value, "graph node");
  value.drop_grad();
  nodes_.push_back(Node{std::move(value), requires_grad, requires_grad ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

std::vector<double> Graph::gradient(Var v) const {
  const Tensor& t = nodes_[v.id()].value;
  if (!t.has_grad()) return std::vector<double>(t.numel(), 0.0);
  return t.grad();
}

void Graph::backward(Var target) {
  if (target.graph() != this) throw Error("backward: variable belongs to another graph");
  if (value(target).numel() != 1) throw DimensionError("backward: target must be a single element");
  for (auto& n : nodes_) n.value.zero_grad();
  nodes_[target.id()].value.grad()[0] = 1.0;
  for (std::size_t i = target.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && n.value.has_grad()) n.backward(*this, i);
  }
}

namespace {

Graph& graph_of(Var a, Var b) {
  if (a.graph() != b.graph() || a.graph() == nullptr) throw Error("operands belong to different graphs");
  return *a.graph();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const bool rg = g.needs_grad(a.id()) || g.needs_grad(b.id());
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(seqbench::matmul(a.value(), b.value()), rg, [ia, ib](Graph& gr, std::size_t self) {
    std::span<double> da, db;
    if (gr.needs_grad(ia)) da = gr.grad_of(ia);
    if (gr.needs_grad(ib)) db = gr.grad_of(ib);
    seqbench::matmul_backward(gr.value_of(ia), gr.value_of(ib), gr.grad_of(self), da, db);
  });
}

Var add_row(Var x, Var bias) {
  Graph& g = graph_of(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.numel() != xv.cols()) {
    throw DimensionError("add_row: bias " + shape_to_string(bv.shape()) + " vs " + shape_to_string(xv.shape()));
  }
  Tensor out = xv;
  const std::size_t n = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t j = 0; j < n; ++j) out.at(r, j) += bv[j];
  }
  const std::size_t ix = x.id(), ib = bias.id();
  const bool rg = g.needs_grad(ix) || g.needs_grad(ib);
  return g.record(std::move(out), rg, [ix, ib, n](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    if (gr.needs_grad(ix)) {
      auto dx = gr.grad_of(ix);
      for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i];
    }
    if (gr.needs_grad(ib)) {
      auto db = gr.grad_of(ib);
      for (std::size_t i = 0; i < d.size(); ++i) db[i % n] += d[i];
    }
  });
}

Var affine(Var x, Var w, Var b) { return add_row(matmul(x, w), b); }

namespace {

template <typename Fwd, typename Bwd>
Var binary(Var a, Var b, const char* name, Fwd fwd, Bwd bwd) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), name);
  const auto av = a.value().data();
  const auto bv = b.value().data();
  Tensor out(a.value().shape());
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = fwd(av[i], bv[i]);
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = g.needs_grad(ia) || g.needs_grad(ib);
  return g.record(std::move(out), rg, [ia, ib, bwd](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    const auto x = gr.value_of(ia).data();
    const auto y = gr.value_of(ib).data();
    std::span<double> dx, dy;
    if (gr.needs_grad(ia)) dx = gr.grad_of(ia);
    if (gr.needs_grad(ib)) dy = gr.grad_of(ib);
    bwd(x, y, d, dx, dy);
  });
}

Var unary_activation(Var a, Activation kind) {
  Graph& g = *a.graph();
  const std::size_t ia = a.id();
  return g.record(seqbench::activate(a.value(), kind), g.needs_grad(ia), [ia, kind](Graph& gr, std::size_t self) {
    seqbench::activate_backward(gr.value_of(self), kind, gr.grad_of(self), gr.grad_of(ia));
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](auto, auto, auto d, std::span<double> dx, std::span<double> dy) {
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += d[i];
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += d[i];
      });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](auto, auto, auto d, std::span<double> dx, std::span<double> dy) {
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += d[i];
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] -= d[i];
      });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](std::span<const double> x, std::span<const double> y, std::span<const double> d, std::span<double> dx,
         std::span<double> dy) {
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += d[i] * y[i];
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += d[i] * x[i];
      });
}

Var one_minus(Var a) {
  Graph& g = *a.graph();
  Tensor out(a.value().shape());
  const auto in = a.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = 1.0 - in[i];
  const std::size_t ia = a.id();
  return g.record(std::move(out), g.needs_grad(ia), [ia](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    auto dx = gr.grad_of(ia);
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] -= d[i];
  });
}

Var sigmoid(Var a) { return unary_activation(a, Activation::Sigmoid); }

Var tanh(Var a) { return unary_activation(a, Activation::Tanh); }

Var scale_rows(Var a, Var s) {
  Graph& g = graph_of(a, s);
  const Tensor& av = a.value();
  const Tensor& sv = s.value();
  if (sv.numel() != av.rows()) {
    throw DimensionError("scale_rows: scale " + shape_to_string(sv.shape()) + " vs " + shape_to_string(av.shape()));
  }
  const std::size_t n = av.cols();
  Tensor out(av.shape());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t j = 0; j < n; ++j) out.at(r, j) = av.at(r, j) * sv[r];
  }
  const std::size_t ia = a.id(), is = s.id();
  const bool rg = g.needs_grad(ia) || g.needs_grad(is);
  return g.record(std::move(out), rg, [ia, is, n](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    const Tensor& x = gr.value_of(ia);
    const Tensor& sc = gr.value_of(is);
    const std::size_t m = x.rows();
    if (gr.needs_grad(ia)) {
      auto dx = gr.grad_of(ia);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < n; ++j) dx[r * n + j] += d[r * n + j] * sc[r];
      }
    }
    if (gr.needs_grad(is)) {
      auto ds = gr.grad_of(is);
      for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += d[r * n + j] * x[r * n + j];
        ds[r] += acc;
      }
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  Graph& g = *parts.front().graph();
  const std::size_t m = parts.front().rows();
  std::size_t total = 0;
  bool rg = false;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    if (p.graph() != &g) throw Error("concat_cols: operands belong to different graphs");
    if (p.rows() != m) throw DimensionError("concat_cols: row count mismatch");
    total += p.cols();
    rg = rg || g.needs_grad(p.id());
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  Tensor out({m, total});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    const std::size_t w = v.cols();
    for (std::size_t r = 0; r < m; ++r) {
      std::copy_n(v.data().data() + r * w, w, out.data().data() + r * total + offset);
    }
    offset += w;
  }
  return g.record(std::move(out), rg, [ids, widths, m, total](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::size_t w = widths[k];
      if (gr.needs_grad(ids[k])) {
        auto dp = gr.grad_of(ids[k]);
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t j = 0; j < w; ++j) dp[r * w + j] += d[r * total + off + j];
        }
      }
      off += w;
    }
  });
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
  Graph& g = *a.graph();
  const Tensor& v = a.value();
  const std::size_t n = v.cols(), m = v.rows();
  if (count == 0 || start + count > n) throw DimensionError("slice_cols: range out of bounds");
  Tensor out({m, count});
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(v.data().data() + r * n + start, count, out.data().data() + r * count);
  }
  const std::size_t ia = a.id();
  return g.record(std::move(out), g.needs_grad(ia), [ia, start, count, n, m](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    auto dx = gr.grad_of(ia);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < count; ++j) dx[r * n + start + j] += d[r * count + j];
    }
  });
}

Var select_rows(std::span<const std::uint8_t> mask, Var when_true, Var when_false) {
  Graph& g = graph_of(when_true, when_false);
  require_same_shape(when_true.value(), when_false.value(), "select_rows");
  const std::size_t m = when_true.rows(), n = when_true.cols();
  if (mask.size() != m) throw DimensionError("select_rows: mask length differs from row count");
  Tensor out(when_true.value().shape());
  for (std::size_t r = 0; r < m; ++r) {
    const Tensor& src = mask[r] ? when_true.value() : when_false.value();
    std::copy_n(src.data().data() + r * n, n, out.data().data() + r * n);
  }
  std::vector<std::uint8_t> keep(mask.begin(), mask.end());
  const std::size_t it = when_true.id(), iff = when_false.id();
  const bool rg = g.needs_grad(it) || g.needs_grad(iff);
  return g.record(std::move(out), rg, [keep = std::move(keep), it, iff, n](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    const bool gt = gr.needs_grad(it), gf = gr.needs_grad(iff);
    for (std::size_t r = 0; r < keep.size(); ++r) {
      if (keep[r] ? !gt : !gf) continue;
      auto dst = gr.grad_of(keep[r] ? it : iff);
      for (std::size_t j = 0; j < n; ++j) dst[r * n + j] += d[r * n + j];
    }
  });
}

Var masked_softmax_rows(Var x, std::span<const std::uint8_t> mask) {
  Graph& g = *x.graph();
  const Tensor& v = x.value();
  const std::size_t m = v.rows(), n = v.cols();
  if (mask.size() != m * n) throw DimensionError("masked_softmax_rows: mask size mismatch");
  Tensor out(v.shape());
  for (std::size_t r = 0; r < m; ++r) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[r * n + j]) mx = std::max(mx, v.at(r, j));
    }
    if (mx == -INFINITY) throw ValidationError("masked_softmax_rows: row has no unmasked entries");
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[r * n + j]) total += (out.at(r, j) = std::exp(v.at(r, j) - mx));
    }
    for (std::size_t j = 0; j < n; ++j) out.at(r, j) /= total;
  }
  const std::size_t ix = x.id();
  return g.record(std::move(out), g.needs_grad(ix), [ix, m, n](Graph& gr, std::size_t self) {
    auto d = gr.grad_of(self);
    const Tensor& y = gr.value_of(self);
    auto dx = gr.grad_of(ix);
    for (std::size_t r = 0; r < m; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += d[r * n + j] * y[r * n + j];
      for (std::size_t j = 0; j < n; ++j) dx[r * n + j] += y[r * n + j] * (d[r * n + j] - dot);
    }
  });
}

Var embed_mean(Var table, std::span<const std::int32_t> ids, std::span<const std::uint8_t> mask, std::size_t rows,
               std::size_t width) {
  Graph& g = *table.graph();
  const Tensor& e = table.value();
  const std::size_t vocab = e.rows(), dim = e.cols();
  if (ids.size() != rows * width || mask.size() != rows * width) {
    throw DimensionError("embed_mean: ids/mask size mismatch");
  }
  Tensor out({rows, dim});
  std::vector<double> inv_count(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t count = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (!mask[r * width + c]) continue;
      const std::int32_t id = ids[r * width + c];
      if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
        throw ValidationError("embed_mean: code id " + std::to_string(id) + " outside vocabulary of size " +
                              std::to_string(vocab));
      }
      const double* src = e.data().data() + static_cast<std::size_t>(id) * dim;
      for (std::size_t j = 0; j < dim; ++j) out.at(r, j) += src[j];
      ++count;
    }
    if (count) {
      inv_count[r] = 1.0 / static_cast<double>(count);
      for (std::size_t j = 0; j < dim; ++j) out.at(r, j) /= static_cast<double>(count);
    }
  }
  const std::size_t it = table.id();
  std::vector<std::int32_t> id_copy(ids.begin(), ids.end());
  std::vector<std::uint8_t> mask_copy(mask.begin(), mask.end());
  return g.record(std::move(out), g.needs_grad(it),
                  [it, id_copy = std::move(id_copy), mask_copy = std::move(mask_copy),
                   inv_count = std::move(inv_count), rows, width, dim](Graph& gr, std::size_t self) {
                    auto d = gr.grad_of(self);
                    auto de = gr.grad_of(it);
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t c = 0; c < width; ++c) {
                        if (!mask_copy[r * width + c]) continue;
                        double* dst = de.data() + static_cast<std::size_t>(id_copy[r * width + c]) * dim;
                        for (std::size_t j = 0; j < dim; ++j) dst[j] += d[r * dim + j] * inv_count[r];
                      }
                    }
                  });
}

Var bce_with_logits(Var logits, std::span<const double> labels) {
  Graph& g = *logits.graph();
  const double loss = seqbench::bce_with_logits(logits.value().data(), labels);
  std::vector<double> y(labels.begin(), labels.end());
  const std::size_t il = logits.id();
  return g.record(Tensor({1, 1}, {loss}), g.needs_grad(il), [il, y = std::move(y)](Graph& gr, std::size_t self) {
    seqbench::bce_with_logits_backward(gr.value_of(il).data(), y, gr.grad_of(self)[0], gr.grad_of(il));
  });
}

Var sum(Var a) {
  Graph& g = *a.graph();
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const std::size_t ia = a.id();
  return g.record(Tensor({1, 1}, {total}), g.needs_grad(ia), [ia](Graph& gr, std::size_t self) {
    const double d = gr.grad_of(self)[0];
    for (double& x : gr.grad_of(ia)) x += d;
  });
}

}  // namespace seqbench::ad
