#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcvae/tensor.hpp"

namespace dcvae {

/// Trainable array with its gradient accumulator. Owned by a layer; the tape
/// only borrows it for the lifetime of one forward/backward pass.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void zero_grad() noexcept { grad.fill(0.0); }
};

class Tape;

/// Handle to one node of a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const noexcept { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run computation record. Nodes are appended in evaluation order,
/// so every node's inputs precede it and a reverse sweep is a valid
/// topological order. Single-threaded; build a fresh tape per forward pass.
class Tape {
 public:
  /// Receives the gradient flowing into the node's output and pushes
  /// contributions to its inputs via accumulate().
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  /// Leaf bound to a parameter. Repeated calls with the same parameter return
  /// the same node, so weight-shared branches fan out from one leaf.
  Var param(Parameter& p);

  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, Backward backward);

  /// Reverse sweep from a scalar loss. Leaf gradients become readable through
  /// grad(); parameter-bound leaves additionally add theirs into
  /// Parameter::grad.
  void backward(const Var& loss);

  /// Gradient of the last backward() loss w.r.t. v (zeros if v was not
  /// reached).
  Tensor grad(const Var& v) const;
  bool requires_grad(const Var& v) const;
  std::size_t size() const noexcept { return nodes_.size(); }
  const char* op_name(const Var& v) const;

  void accumulate(const Var& v, Tensor grad);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }

 private:
  struct Node {
    const char* op;
    Tensor value;
    std::vector<std::size_t> inputs;
    Backward backward;
    bool requires_grad = false;
    Parameter* param = nullptr;
    Tensor grad;
    bool has_grad = false;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// Primitive differentiable operations. All operands must live on the same
// tape. Binary elementwise ops require equal shapes, except that a rank-1
// right operand of extent w broadcasts over the rows of a [batch x w] left
// operand (bias-over-batch).

Var matmul(const Var& a, const Var& b);     // [m x k] . [k x n]
Var matmul_bt(const Var& a, const Var& b);  // [m x k] . [n x k]^T

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
/// Gradient at exactly 0 is taken as 0.
Var relu(const Var& a);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);

Var sum(const Var& a);
Var mean(const Var& a);
/// Reduce along one axis of a rank-2 tensor (axis 0 -> [cols], axis 1 -> [rows]),
/// or axis 0 of a rank-1 tensor (-> [1]).
Var sum(const Var& a, std::size_t axis);
Var mean(const Var& a, std::size_t axis);

Var concat_cols(const Var& a, const Var& b);
Var concat_rows(const Var& a, const Var& b);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);

/// Pairwise squared Euclidean distances between rows: out[i][j] = |a_i - b_j|^2.
Var sq_dist(const Var& a, const Var& b);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator-(const Var& a) { return neg(a); }

}  // namespace dcvae
