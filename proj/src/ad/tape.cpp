// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/ad/tape.hpp"

#include <string>

#include "nie/common/error.hpp"

namespace nie::ad {

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  require(value().size() == 1, ErrorCode::kShape, "Var::scalar on a non-scalar");
  return value()(0, 0);
}

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) {
  require(value.allFinite(), ErrorCode::kNumeric, "constant with non-finite values");
  return push(Node{std::move(value), false, {}, {}});
}

Var Tape::leaf(Matrix value, std::string name) {
  require(value.allFinite(), ErrorCode::kNumeric, "leaf '" + name + "' has non-finite values");
  return push(Node{std::move(value), true, {}, std::move(name)});
}

Var Tape::record(std::string_view op, Matrix value, const std::vector<Var>& inputs,
                 BackwardFn backward) {
  if (!value.allFinite()) {
    fail(ErrorCode::kNumeric, "non-finite output from op '" + std::string(op) + "'");
  }
  bool needs = false;
  for (const Var& v : inputs) {
    require(v.tape_ == this, ErrorCode::kShape, "op input recorded on another tape");
    needs = needs || requires_grad(v.id_);
  }
  return push(Node{std::move(value), needs, needs ? std::move(backward) : BackwardFn{}, {}});
}

Var Tape::record(std::string_view op, Matrix value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  return record(op, std::move(value), std::vector<Var>(inputs), std::move(backward));
}

void Tape::accumulate(Var v, const Matrix& g) {
  const auto id = static_cast<std::size_t>(v.id_);
  if (!nodes_[id].requires_grad) return;
  Matrix& slot = grads_[id];
  if (slot.size() == 0) {
    slot = g;
  } else {
    slot += g;
  }
}

void Tape::backward(Var loss) {
  require(loss.tape_ == this, ErrorCode::kShape, "backward: loss from another tape");
  require(loss.value().size() == 1, ErrorCode::kShape, "backward: loss must be a scalar");
  grads_.assign(nodes_.size(), Matrix());
  if (!nodes_[static_cast<std::size_t>(loss.id_)].requires_grad) return;
  grads_[static_cast<std::size_t>(loss.id_)] = Matrix::Ones(1, 1);
  for (int id = loss.id_; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    const Matrix& g = grads_[static_cast<std::size_t>(id)];
    if (!node.backward || g.size() == 0) continue;
    node.backward(g, *this);
  }
}

Matrix Tape::grad(Var v) const {
  const auto id = static_cast<std::size_t>(v.id_);
  if (id < grads_.size() && grads_[id].size() != 0) return grads_[id];
  return Matrix::Zero(v.rows(), v.cols());
}

std::map<std::string, Matrix> Tape::named_grads() const {
  std::map<std::string, Matrix> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name.empty()) continue;
    const Matrix& v = nodes_[i].value;
    out[nodes_[i].name] =
        (i < grads_.size() && grads_[i].size() != 0) ? grads_[i] : Matrix::Zero(v.rows(), v.cols());
  }
  return out;
}

}  // namespace nie::ad
