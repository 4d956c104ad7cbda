#ifndef DMN_TAPE_HPP
#define DMN_TAPE_HPP

#include "dmn/types.hpp"

#include <functional>
#include <random>
#include <span>
#include <vector>

namespace dmn {

/// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
  std::int32_t id = -1;
  bool valid() const noexcept { return id >= 0; }
};

enum class DropoutMode { train, eval };

/// Define-by-run reverse-mode tape. Every differentiable operation appends
/// one node holding the forward value plus a pull closure that routes the
/// node's gradient into its operands. The tape is rebuilt per forward pass;
/// node order is creation order, so a single reverse sweep from the loss
/// visits operands after all of their consumers.
class Tape {
public:
  using Pull = std::function<void(Tape&, const Matrix&)>;

  /// Constant leaf. No gradient is tracked through it.
  Var input(Matrix value);
  /// Learnable leaf. Receives d(loss)/d(leaf) after backward().
  Var param(Matrix value);

  /// Appends an operation result. `pull` receives the accumulated gradient
  /// of this node and must add_grad() into the operand nodes.
  Var emit(Matrix value, bool requires_grad, Pull pull);

  const Matrix& value(Var v) const { return node(v).value; }
  /// Gradient of the last backward() target with respect to node v.
  const Matrix& grad(Var v) const;
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  void add_grad(Var v, const Matrix& g);

  /// Reverse sweep from a scalar (1x1) loss node. Rejects non-scalar losses.
  /// A loss with no learnable ancestors leaves every gradient at zero.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool grad_ready = false;
    Pull pull;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
};

/// Free function form of Tape::backward.
void backward(Tape& tape, Var loss);

// Differentiable kernels. Each validates shapes, computes the forward value
// eagerly and records the matching pull closure.

Var matmul(Tape& tape, Var a, Var b);
Var transpose(Tape& tape, Var a);
Var add(Tape& tape, Var a, Var b);
Var hadamard(Tape& tape, Var a, Var b);
Var one_minus(Tape& tape, Var a);
Var relu(Tape& tape, Var a);
Var sigmoid(Tape& tape, Var a);

/// Row-wise softmax with max-subtraction. Rejects non-finite input.
Var softmax_rows(Tape& tape, Var a);

/// Column-wise max over rows, T x l -> 1 x l. Gradient flows only to the
/// first row attaining each column maximum. Rejects empty input.
Var maxpool_over_rows(Tape& tape, Var a);

/// Inverted dropout: train mode zeroes entries with probability `rate` and
/// scales survivors by 1/(1-rate); eval mode is the exact identity.
Var dropout(Tape& tape, Var a, Scalar rate, DropoutMode mode, std::mt19937_64& rng);

/// Horizontal concatenation of row blocks with equal row counts.
Var concat_cols(Tape& tape, std::span<const Var> parts);

/// Gather rows of `table` by id; gradient scatters into the table rows.
Var embedding_rows(Tape& tape, Var table, std::span<const int> ids);

/// probs over candidates from a 1xN logit row, computed with max-subtraction
/// and order-independent (sorted) summation so that permuting candidates
/// permutes the result exactly.
Vector candidate_probs(const Matrix& logits);

/// -log softmax(logits)[gold] as a scalar node.
Var nll_from_logits(Tape& tape, Var logits, int gold);

} // namespace dmn

#endif
