#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "tfn/nd_array.hpp"

namespace tfn::ad {

class Tape;

/// Handle to a node on a tape.  Cheap to copy; only valid for the tape that
/// created it.
struct Var {
  Tape* tape = nullptr;
  int32_t id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

/// Reverse-mode tape over NdArrays.
///
/// Nodes are appended in execution order, so input ids are strictly smaller
/// than the ids that consume them and a single reverse sweep propagates
/// adjoints.  A tape is single-threaded; parameters are copied in as leaves,
/// never shared between tapes.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const NdArray&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf node: gradients are accumulated, nothing flows further back.
  Var leaf(NdArray value);
  /// Alias for leaf; reads better at call sites for non-learned inputs.
  Var constant(NdArray value) { return leaf(std::move(value)); }

  Var make_node(NdArray value, BackwardFn backward);

  const NdArray& value(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }
  const NdArray& value(int32_t id) const { return nodes_[static_cast<size_t>(id)].value; }

  /// Reverse sweep from a scalar loss.  Throws if the loss is not scalar.
  void backward(Var loss);

  /// Gradient of the last backward() w.r.t. node v (zeros if none reached it).
  NdArray grad(Var v) const;

  /// Used by op backward rules to push adjoint contributions to inputs.
  void accumulate(int32_t id, const NdArray& g);

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    NdArray value;
    BackwardFn backward;  // null for leaves
  };
  // deque: value() references stay valid while new nodes are appended
  std::deque<Node> nodes_;
  std::vector<NdArray> grads_;
};

// ---------------------------------------------------------------------------
// Forward ops.  Every op records its adjoint rule; shape mismatches throw
// std::invalid_argument naming both shapes.
// ---------------------------------------------------------------------------

Var add(Var a, Var b);  // broadcasting
Var sub(Var a, Var b);  // broadcasting
Var mul(Var a, Var b);  // broadcasting (elementwise)
Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);

Var matmul(Var a, Var b);  // [m,k] x [k,n] -> [m,n]

/// Binary einsum over named axes, e.g. "abcf,bci->acfi".
///
/// Restrictions (all our uses satisfy them, and they make the adjoint a pair
/// of einsums): no letter repeats within one operand, every output letter
/// appears in an input, and every input letter appears in the output or in
/// the other operand.
Var contract(const std::string& spec, Var a, Var b);

Var permute(Var a, std::vector<int64_t> axes);
Var reshape(Var a, std::vector<int64_t> shape);

/// out extent along `axis` is indices.size(); duplicate indices allowed.
Var gather(Var a, int64_t axis, std::vector<int64_t> indices);
/// Adjoint twin of gather: out[..., indices[k], ...] += src[..., k, ...].
Var scatter_add(Var src, int64_t axis, std::vector<int64_t> indices, int64_t out_extent);

Var sum_axis(Var a, int64_t axis);
Var sum_all(Var a);  // -> scalar (rank 0)

Var sqrt(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var softmax(Var a, int64_t axis);
/// ln(0.5 e^x + 0.5); zero at zero, derivative sigmoid(x).
Var shifted_softplus(Var a);

Var concat(const std::vector<Var>& parts, int64_t axis);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }

/// Non-taped einsum evaluator (shared by forward and adjoint paths).
NdArray einsum_eval(const std::string& spec, const NdArray& a, const NdArray& b);

}  // namespace tfn::ad
