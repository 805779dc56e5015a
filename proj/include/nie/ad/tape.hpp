// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nie/common/linalg.hpp"

namespace nie::ad {

using Matrix = nie::Mat;

/// Dense f64 tensor of rank <= 2 (scalars are 1x1).
struct Tensor {
  Matrix data;
  bool requires_grad = false;

  std::vector<Index> shape() const { return {data.rows(), data.cols()}; }
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape is alive.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const;
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape& tape() const { return *tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Linear record of one forward computation. Nodes are appended in evaluation
/// order, so walking them backwards is a valid reverse topological order and
/// visits each node once. A tape is single-owner.
class Tape {
 public:
  /// Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(const Matrix& out_grad, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var leaf(Matrix value, std::string name = {});

  /// Appends an op output. The backward closure is dropped unless some input
  /// requires a gradient. Throws ErrorCode::kNumeric on non-finite values.
  Var record(std::string_view op, Matrix value, std::initializer_list<Var> inputs,
             BackwardFn backward);
  Var record(std::string_view op, Matrix value, const std::vector<Var>& inputs,
             BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded backward closure.
  void backward(Var loss);

  /// Adds g into the gradient slot of v (no-op for constants).
  void accumulate(Var v, const Matrix& g);

  /// Gradient of the last backward pass w.r.t. v; zeros if none reached it.
  Matrix grad(Var v) const;

  /// Gradients of all named leaves.
  std::map<std::string, Matrix> named_grads() const;

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    bool requires_grad = false;
    BackwardFn backward;
    std::string name;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
};

}  // namespace nie::ad
