// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "nn.hpp"

namespace edgeflow {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ShapeError(msg);
}

}  // namespace

Var Tape::push(Tensor value, std::string label,
               std::function<void(Tape&, const Tensor&)> back) {
  Node n;
  n.value = std::move(value);
  n.label = std::move(label);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || v.idx >= static_cast<int>(nodes_.size()))
    throw ContractError("invalid tape handle");
  return nodes_[static_cast<std::size_t>(v.idx)];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.idx >= static_cast<int>(nodes_.size()))
    throw ContractError("invalid tape handle");
  return nodes_[static_cast<std::size_t>(v.idx)];
}

Tensor& Tape::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
  return n.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
  Tensor& buf = grad_buffer(v);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty())
    throw ContractError("gradient not populated; call backward() first");
  return n.grad;
}

Var Tape::input(Tensor value, std::string label) {
  return push(std::move(value), std::move(label), nullptr);
}

Var Tape::param(Parameter& p) {
  Var v = push(p.value, p.name, nullptr);
  node(v).bound = &p;
  return v;
}

Var Tape::add(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "add: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  return push(std::move(out), "add", [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "sub: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
  return push(std::move(out), "sub", [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    Tensor neg = g;
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
    t.accumulate(b, neg);
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "mul: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  return push(std::move(out), "mul", [a, b](Tape& t, const Tensor& g) {
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor ga = g;
    Tensor gb = g;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] = g[i] * vb[i];
      gb[i] = g[i] * va[i];
    }
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

Var Tape::affine(Var a, double scale, double shift) {
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * out[i] + shift;
  return push(std::move(out), "affine", [a, scale](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= scale;
    t.accumulate(a, ga);
  });
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.rank() == 2 && tb.rank() == 2, "matmul: rank-2 tensors required");
  require(ta.cols() == tb.rows(), "matmul: inner dimensions differ");
  const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ta.at(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * tb.at(p, j);
    }
  return push(std::move(out), "matmul", [a, b, m, k, n](Tape& t, const Tensor& g) {
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor ga({m, k});
    Tensor gb({k, n});
    // dA = g * B^T
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double gij = g.at(i, j);
        if (gij == 0.0) continue;
        for (std::size_t p = 0; p < k; ++p) ga.at(i, p) += gij * vb.at(p, j);
      }
    // dB = A^T * g
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = va.at(i, p);
        if (aip == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) gb.at(p, j) += aip * g.at(i, j);
      }
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

Var Tape::add_row(Var m, Var row) {
  const Tensor& tm = value(m);
  const Tensor& tr = value(row);
  require(tm.rank() == 2, "add_row: matrix required");
  require(tr.size() == tm.cols(), "add_row: row width mismatch");
  Tensor out = tm;
  for (std::size_t i = 0; i < tm.rows(); ++i)
    for (std::size_t j = 0; j < tm.cols(); ++j) out.at(i, j) += tr[j];
  return push(std::move(out), "add_row", [m, row](Tape& t, const Tensor& g) {
    t.accumulate(m, g);
    Tensor gr(t.value(row).shape());
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) gr[j] += g.at(i, j);
    t.accumulate(row, gr);
  });
}

Var Tape::relu(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = x > 0.0 ? x : 0.0;
  return push(std::move(out), "relu", [a](Tape& t, const Tensor& g) {
    const Tensor& va = t.value(a);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (va[i] <= 0.0) ga[i] = 0.0;
    t.accumulate(a, ga);
  });
}

Var Tape::tanh_(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = std::tanh(x);
  Var v = push(std::move(out), "tanh", nullptr);
  node(v).back = [a, v](Tape& t, const Tensor& g) {
    const Tensor& y = t.value(v);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 1.0 - y[i] * y[i];
    t.accumulate(a, ga);
  };
  return v;
}

Var Tape::sigmoid(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = 1.0 / (1.0 + std::exp(-x));
  Var v = push(std::move(out), "sigmoid", nullptr);
  node(v).back = [a, v](Tape& t, const Tensor& g) {
    const Tensor& y = t.value(v);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= y[i] * (1.0 - y[i]);
    t.accumulate(a, ga);
  };
  return v;
}

Var Tape::square(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = x * x;
  return push(std::move(out), "square", [a](Tape& t, const Tensor& g) {
    const Tensor& va = t.value(a);
    Tensor ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 2.0 * va[i];
    t.accumulate(a, ga);
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.rank() == 2 && tb.rank() == 2, "concat_cols: matrices required");
  require(ta.rows() == tb.rows(), "concat_cols: row count mismatch");
  const std::size_t m = ta.rows(), ca = ta.cols(), cb = tb.cols();
  Tensor out({m, ca + cb});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = ta.at(i, j);
    for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = tb.at(i, j);
  }
  return push(std::move(out), "concat_cols",
              [a, b, m, ca, cb](Tape& t, const Tensor& g) {
                Tensor ga({m, ca});
                Tensor gb({m, cb});
                for (std::size_t i = 0; i < m; ++i) {
                  for (std::size_t j = 0; j < ca; ++j) ga.at(i, j) = g.at(i, j);
                  for (std::size_t j = 0; j < cb; ++j) gb.at(i, j) = g.at(i, ca + j);
                }
                t.accumulate(a, ga);
                t.accumulate(b, gb);
              });
}

Var Tape::slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& ta = value(a);
  require(ta.rank() == 2, "slice_cols: matrix required");
  require(begin < end && end <= ta.cols(), "slice_cols: bad column range");
  const std::size_t m = ta.rows(), w = end - begin;
  Tensor out({m, w});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out.at(i, j) = ta.at(i, begin + j);
  const std::size_t cols = ta.cols();
  return push(std::move(out), "slice_cols",
              [a, begin, m, w, cols](Tape& t, const Tensor& g) {
                Tensor ga({m, cols});
                for (std::size_t i = 0; i < m; ++i)
                  for (std::size_t j = 0; j < w; ++j) ga.at(i, begin + j) = g.at(i, j);
                t.accumulate(a, ga);
              });
}

Var Tape::mean_all(Var a) {
  const Tensor& ta = value(a);
  double s = 0.0;
  for (double v : ta.data()) s += v;
  const double inv = 1.0 / static_cast<double>(ta.size());
  Tensor out = Tensor::scalar(s * inv);
  return push(std::move(out), "mean_all", [a, inv](Tape& t, const Tensor& g) {
    Tensor ga(t.value(a).shape());
    const double gv = g[0] * inv;
    ga.fill(gv);
    t.accumulate(a, ga);
  });
}

Var Tape::sum_all(Var a) {
  const Tensor& ta = value(a);
  double s = 0.0;
  for (double v : ta.data()) s += v;
  return push(Tensor::scalar(s), "sum_all", [a](Tape& t, const Tensor& g) {
    Tensor ga(t.value(a).shape());
    ga.fill(g[0]);
    t.accumulate(a, ga);
  });
}

Var Tape::mean_rows(Var a) {
  const Tensor& ta = value(a);
  require(ta.rank() == 2, "mean_rows: matrix required");
  const std::size_t m = ta.rows(), n = ta.cols();
  const double inv = 1.0 / static_cast<double>(n);
  Tensor out({m, 1});
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += ta.at(i, j);
    out.at(i, 0) = s * inv;
  }
  return push(std::move(out), "mean_rows", [a, m, n, inv](Tape& t, const Tensor& g) {
    Tensor ga({m, n});
    for (std::size_t i = 0; i < m; ++i) {
      const double gv = g.at(i, 0) * inv;
      for (std::size_t j = 0; j < n; ++j) ga.at(i, j) = gv;
    }
    t.accumulate(a, ga);
  });
}

Var Tape::repeat_row(Var row, std::size_t m) {
  const Tensor& tr = value(row);
  require(tr.rank() == 1 || (tr.rank() == 2 && tr.rows() == 1),
          "repeat_row: single row required");
  const std::size_t n = tr.size();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = tr[j];
  return push(std::move(out), "repeat_row", [row, m, n](Tape& t, const Tensor& g) {
    Tensor gr(t.value(row).shape());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gr[j] += g.at(i, j);
    t.accumulate(row, gr);
  });
}

Var Tape::gather_rows(Var table, std::vector<std::size_t> rows) {
  const Tensor& tt = value(table);
  require(tt.rank() == 2, "gather_rows: matrix required");
  for (std::size_t r : rows)
    if (r >= tt.rows()) throw IndexError("gather_rows: row index out of range");
  const std::size_t k = rows.size(), d = tt.cols();
  Tensor out({k, d});
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = tt.at(rows[i], j);
  return push(std::move(out), "gather_rows",
              [table, rows = std::move(rows), d](Tape& t, const Tensor& g) {
                Tensor gt(t.value(table).shape());
                for (std::size_t i = 0; i < rows.size(); ++i)
                  for (std::size_t j = 0; j < d; ++j) gt.at(rows[i], j) += g.at(i, j);
                t.accumulate(table, gt);
              });
}

Var Tape::take_per_row(Var m, std::vector<std::size_t> cols) {
  const Tensor& tm = value(m);
  require(tm.rank() == 2, "take_per_row: matrix required");
  require(cols.size() == tm.rows(), "take_per_row: one index per row required");
  for (std::size_t c : cols)
    if (c >= tm.cols()) throw IndexError("take_per_row: column index out of range");
  const std::size_t k = cols.size();
  Tensor out({k, 1});
  for (std::size_t i = 0; i < k; ++i) out.at(i, 0) = tm.at(i, cols[i]);
  return push(std::move(out), "take_per_row",
              [m, cols = std::move(cols)](Tape& t, const Tensor& g) {
                Tensor gm(t.value(m).shape());
                for (std::size_t i = 0; i < cols.size(); ++i)
                  gm.at(i, cols[i]) += g.at(i, 0);
                t.accumulate(m, gm);
              });
}

Var Tape::mse(Var a, Var b) {
  return mean_all(square(sub(a, b)));
}

Var Tape::masked_log_softmax(Var logits, const std::vector<std::uint8_t>& mask) {
  const Tensor& tl = value(logits);
  require(tl.rank() == 2, "masked_log_softmax: matrix required");
  if (mask.size() != tl.size())
    throw ShapeError("masked_log_softmax: mask size mismatch");
  const std::size_t m = tl.rows(), n = tl.cols();
  Tensor out({m, n});
  Tensor probs({m, n});  // softmax of masked logits, kept for the backward pass
  for (std::size_t i = 0; i < m; ++i) {
    bool any_open = false;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double z = tl.at(i, j) - (mask[i * n + j] ? big_negative() : 0.0);
      out.at(i, j) = z;
      if (!mask[i * n + j]) {
        any_open = true;
        mx = std::max(mx, z);
      }
    }
    if (!any_open)
      throw ContractError("masked_log_softmax: fully masked row (degenerate distribution)");
    double lse = 0.0;
    for (std::size_t j = 0; j < n; ++j) lse += std::exp(out.at(i, j) - mx);
    lse = std::log(lse);
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = out.at(i, j) - mx - lse;
      probs.at(i, j) = std::exp(out.at(i, j));
    }
  }
  return push(std::move(out), "masked_log_softmax",
              [logits, probs = std::move(probs), m, n](Tape& t, const Tensor& g) {
                Tensor gl({m, n});
                for (std::size_t i = 0; i < m; ++i) {
                  double gsum = 0.0;
                  for (std::size_t j = 0; j < n; ++j) gsum += g.at(i, j);
                  for (std::size_t j = 0; j < n; ++j)
                    gl.at(i, j) = g.at(i, j) - probs.at(i, j) * gsum;
                }
                t.accumulate(logits, gl);
              });
}

void Tape::backward(Var loss) {
  if (backward_done_)
    throw ContractError("backward() already ran on this tape");
  const Tensor& lv = value(loss);
  if (lv.size() != 1)
    throw ContractError("backward() requires a scalar loss");
  backward_done_ = true;
  grad_buffer(loss)[0] = 1.0;
  for (int i = loss.idx; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.empty()) continue;
    if (n.back) n.back(*this, n.grad);
    if (n.bound) {
      Tensor& pg = n.bound->grad;
      for (std::size_t j = 0; j < pg.size(); ++j) pg[j] += n.grad[j];
    }
  }
}

std::string Tape::first_non_finite_label() const {
  for (const Node& n : nodes_)
    if (!n.value.all_finite()) return n.label;
  return {};
}

}  // namespace edgeflow
