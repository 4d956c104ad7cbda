#include "dmn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace dmn {

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw std::invalid_argument("tape: invalid node handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

Tape::Node& Tape::node(Var v) {
  return const_cast<Node&>(static_cast<const Tape*>(this)->node(v));
}

Var Tape::input(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, nullptr});
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::param(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, true, false, nullptr});
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::emit(Matrix value, bool requires_grad, Pull pull) {
  nodes_.push_back(Node{std::move(value), {}, requires_grad, false,
                        requires_grad ? std::move(pull) : nullptr});
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

const Matrix& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!n.grad_ready)
    throw std::logic_error("tape: gradient requested before backward()");
  return n.grad;
}

void Tape::add_grad(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  if (g.rows() != n.value.rows() || g.cols() != n.value.cols())
    throw std::invalid_argument("tape: gradient shape " + shape_of(g) +
                                " does not match value shape " + shape_of(n.value));
  n.grad += g;
}

void Tape::backward(Var loss) {
  Node& l = node(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_of(l.value));

  for (Node& n : nodes_) {
    if (n.requires_grad) {
      n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
      n.grad_ready = true;
    }
  }
  if (!l.requires_grad) return; // constant loss: all gradients stay zero

  l.grad(0, 0) = 1.0;
  for (std::int32_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.requires_grad && n.pull) n.pull(*this, n.grad);
  }
}

void backward(Tape& tape, Var loss) { tape.backward(loss); }

namespace {

bool needs_grad(const Tape& t, Var a) { return t.requires_grad(a); }
bool needs_grad(const Tape& t, Var a, Var b) {
  return t.requires_grad(a) || t.requires_grad(b);
}

} // namespace

Var matmul(Tape& tape, Var a, Var b) {
  const Matrix& A = tape.value(a);
  const Matrix& B = tape.value(b);
  if (A.cols() != B.rows())
    throw std::invalid_argument("matmul: incompatible shapes " + shape_of(A) + " * " + shape_of(B));
  Matrix out = A * B;
  return tape.emit(std::move(out), needs_grad(tape, a, b), [a, b](Tape& t, const Matrix& g) {
    t.add_grad(a, g * t.value(b).transpose());
    t.add_grad(b, t.value(a).transpose() * g);
  });
}

Var transpose(Tape& tape, Var a) {
  Matrix out = tape.value(a).transpose();
  return tape.emit(std::move(out), needs_grad(tape, a), [a](Tape& t, const Matrix& g) {
    t.add_grad(a, g.transpose());
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Matrix& A = tape.value(a);
  const Matrix& B = tape.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("add: shape mismatch " + shape_of(A) + " vs " + shape_of(B));
  Matrix out = A + B;
  return tape.emit(std::move(out), needs_grad(tape, a, b), [a, b](Tape& t, const Matrix& g) {
    t.add_grad(a, g);
    t.add_grad(b, g);
  });
}

Var hadamard(Tape& tape, Var a, Var b) {
  const Matrix& A = tape.value(a);
  const Matrix& B = tape.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("hadamard: shape mismatch " + shape_of(A) + " vs " + shape_of(B));
  Matrix out = A.cwiseProduct(B);
  return tape.emit(std::move(out), needs_grad(tape, a, b), [a, b](Tape& t, const Matrix& g) {
    t.add_grad(a, g.cwiseProduct(t.value(b)));
    t.add_grad(b, g.cwiseProduct(t.value(a)));
  });
}

Var one_minus(Tape& tape, Var a) {
  Matrix out = (1.0 - tape.value(a).array()).matrix();
  return tape.emit(std::move(out), needs_grad(tape, a), [a](Tape& t, const Matrix& g) {
    t.add_grad(a, -g);
  });
}

Var relu(Tape& tape, Var a) {
  const Matrix& A = tape.value(a);
  Matrix out = A.cwiseMax(0.0);
  return tape.emit(std::move(out), needs_grad(tape, a), [a](Tape& t, const Matrix& g) {
    Matrix masked = (t.value(a).array() > 0.0).select(g, Matrix::Zero(g.rows(), g.cols()));
    t.add_grad(a, masked);
  });
}

Var sigmoid(Tape& tape, Var a) {
  Matrix out = (1.0 / (1.0 + (-tape.value(a).array()).exp())).matrix();
  Matrix y = out;
  return tape.emit(std::move(out), needs_grad(tape, a),
                   [a, y = std::move(y)](Tape& t, const Matrix& g) {
                     t.add_grad(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
                   });
}

Var softmax_rows(Tape& tape, Var a) {
  const Matrix& A = tape.value(a);
  if (!all_finite(A))
    throw std::invalid_argument("softmax_rows: non-finite input");
  Matrix out(A.rows(), A.cols());
  for (Index i = 0; i < A.rows(); ++i) {
    const Scalar m = A.row(i).maxCoeff();
    Eigen::ArrayXd e = (A.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  Matrix y = out;
  return tape.emit(std::move(out), needs_grad(tape, a),
                   [a, y = std::move(y)](Tape& t, const Matrix& g) {
                     // row i: y_i * (g_i - <g_i, y_i>)
                     Matrix da(y.rows(), y.cols());
                     for (Index i = 0; i < y.rows(); ++i) {
                       const Scalar dot = g.row(i).dot(y.row(i));
                       da.row(i) = (y.row(i).array() * (g.row(i).array() - dot)).matrix();
                     }
                     t.add_grad(a, da);
                   });
}

Var maxpool_over_rows(Tape& tape, Var a) {
  const Matrix& A = tape.value(a);
  if (A.rows() < 1)
    throw std::invalid_argument("maxpool_over_rows: empty sequence");
  Matrix out(1, A.cols());
  std::vector<Index> argmax(static_cast<std::size_t>(A.cols()));
  for (Index k = 0; k < A.cols(); ++k) {
    Index best = 0;
    Scalar bv = A(0, k);
    for (Index t = 1; t < A.rows(); ++t) {
      if (A(t, k) > bv) { // strict: ties keep the lowest row index
        bv = A(t, k);
        best = t;
      }
    }
    out(0, k) = bv;
    argmax[static_cast<std::size_t>(k)] = best;
  }
  return tape.emit(std::move(out), needs_grad(tape, a),
                   [a, argmax = std::move(argmax)](Tape& t, const Matrix& g) {
                     Matrix da = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
                     for (Index k = 0; k < da.cols(); ++k)
                       da(argmax[static_cast<std::size_t>(k)], k) = g(0, k);
                     t.add_grad(a, da);
                   });
}

Var dropout(Tape& tape, Var a, Scalar rate, DropoutMode mode, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout: rate must be in [0,1)");
  const Matrix& A = tape.value(a);
  if (mode == DropoutMode::eval || rate == 0.0) {
    Matrix out = A; // exact identity
    return tape.emit(std::move(out), needs_grad(tape, a), [a](Tape& t, const Matrix& g) {
      t.add_grad(a, g);
    });
  }
  std::uniform_real_distribution<Scalar> unif(0.0, 1.0);
  const Scalar keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(A.rows(), A.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      mask(i, j) = unif(rng) < rate ? 0.0 : keep_scale;
  Matrix out = A.cwiseProduct(mask);
  return tape.emit(std::move(out), needs_grad(tape, a),
                   [a, mask = std::move(mask)](Tape& t, const Matrix& g) {
                     t.add_grad(a, g.cwiseProduct(mask));
                   });
}

Var concat_cols(Tape& tape, std::span<const Var> parts) {
  if (parts.empty())
    throw std::invalid_argument("concat_cols: no parts");
  const Index rows = tape.value(parts[0]).rows();
  Index cols = 0;
  bool req = false;
  for (Var p : parts) {
    const Matrix& m = tape.value(p);
    if (m.rows() != rows)
      throw std::invalid_argument("concat_cols: row mismatch " + shape_of(m));
    cols += m.cols();
    req = req || tape.requires_grad(p);
  }
  Matrix out(rows, cols);
  Index off = 0;
  for (Var p : parts) {
    const Matrix& m = tape.value(p);
    out.middleCols(off, m.cols()) = m;
    off += m.cols();
  }
  std::vector<Var> held(parts.begin(), parts.end());
  return tape.emit(std::move(out), req, [held = std::move(held)](Tape& t, const Matrix& g) {
    Index off = 0;
    for (Var p : held) {
      const Index w = t.value(p).cols();
      t.add_grad(p, g.middleCols(off, w));
      off += w;
    }
  });
}

Var embedding_rows(Tape& tape, Var table, std::span<const int> ids) {
  const Matrix& T = tape.value(table);
  if (ids.empty())
    throw std::invalid_argument("embedding_rows: empty id sequence");
  for (int id : ids)
    if (id < 0 || id >= T.rows())
      throw std::out_of_range("embedding_rows: id " + std::to_string(id) +
                              " outside table with " + std::to_string(T.rows()) + " rows");
  Matrix out(static_cast<Index>(ids.size()), T.cols());
  for (std::size_t t = 0; t < ids.size(); ++t)
    out.row(static_cast<Index>(t)) = T.row(ids[t]);
  std::vector<int> held(ids.begin(), ids.end());
  return tape.emit(std::move(out), needs_grad(tape, table),
                   [table, held = std::move(held)](Tape& t, const Matrix& g) {
                     Matrix dT = Matrix::Zero(t.value(table).rows(), t.value(table).cols());
                     for (std::size_t i = 0; i < held.size(); ++i)
                       dT.row(held[i]) += g.row(static_cast<Index>(i));
                     t.add_grad(table, dT);
                   });
}

Vector candidate_probs(const Matrix& logits) {
  if (logits.rows() != 1 || logits.cols() < 2)
    throw std::invalid_argument("candidate_probs: need a 1xN logit row with N >= 2");
  const Index n = logits.cols();
  const Scalar m = logits.maxCoeff();
  Vector e(n);
  for (Index i = 0; i < n; ++i) e(i) = std::exp(logits(0, i) - m);
  // Sum in sorted order so the total is independent of candidate order.
  std::vector<Scalar> sorted(e.data(), e.data() + n);
  std::sort(sorted.begin(), sorted.end());
  Scalar z = 0.0;
  for (Scalar s : sorted) z += s;
  return e / z;
}

Var nll_from_logits(Tape& tape, Var logits, int gold) {
  const Matrix& L = tape.value(logits);
  if (L.rows() != 1 || L.cols() < 2)
    throw std::invalid_argument("nll_from_logits: need a 1xN logit row with N >= 2");
  if (gold < 0 || gold >= L.cols())
    throw std::out_of_range("nll_from_logits: gold index " + std::to_string(gold) +
                            " out of range for " + std::to_string(L.cols()) + " candidates");
  Vector p = candidate_probs(L);
  Matrix out(1, 1);
  out(0, 0) = -std::log(p(gold));
  return tape.emit(std::move(out), needs_grad(tape, logits),
                   [logits, gold, p = std::move(p)](Tape& t, const Matrix& g) {
                     Matrix dl = (p.transpose() * g(0, 0)).eval();
                     dl(0, gold) -= g(0, 0);
                     t.add_grad(logits, dl);
                   });
}

} // namespace dmn
