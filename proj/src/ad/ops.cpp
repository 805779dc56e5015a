// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/ad/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nie/common/error.hpp"

namespace nie::ad {

namespace {

enum class Broadcast { kSame, kRow, kScalar };

Broadcast broadcast_kind(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kSame;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.size() == 1) return Broadcast::kScalar;
  fail(ErrorCode::kShape, std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()) + ")");
}

Matrix expand(const Matrix& b, Broadcast kind, Index rows, Index cols) {
  switch (kind) {
    case Broadcast::kSame: return b;
    case Broadcast::kRow: return b.replicate(rows, 1);
    case Broadcast::kScalar: return Matrix::Constant(rows, cols, b(0, 0));
  }
  return b;
}

Matrix reduce(const Matrix& g, Broadcast kind) {
  switch (kind) {
    case Broadcast::kSame: return g;
    case Broadcast::kRow: return g.colwise().sum();
    case Broadcast::kScalar: return Matrix::Constant(1, 1, g.sum());
  }
  return g;
}

Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

Var matmul(Var a, Var b) {
  require(a.cols() == b.rows(), ErrorCode::kShape,
          "matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
              std::to_string(b.rows()) + ")");
  Matrix out = a.value() * b.value();
  return a.tape().record("matmul", std::move(out), {a, b}, [a, b](const Matrix& g, Tape& t) {
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(Var a) {
  return a.tape().record("transpose", a.value().transpose(), {a},
                         [a](const Matrix& g, Tape& t) { t.accumulate(a, g.transpose()); });
}

Var add(Var a, Var b) {
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "add");
  Matrix out = a.value() + expand(b.value(), kind, a.rows(), a.cols());
  return a.tape().record("add", std::move(out), {a, b}, [a, b, kind](const Matrix& g, Tape& t) {
    t.accumulate(a, g);
    if (b.requires_grad()) t.accumulate(b, reduce(g, kind));
  });
}

Var sub(Var a, Var b) {
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "sub");
  Matrix out = a.value() - expand(b.value(), kind, a.rows(), a.cols());
  return a.tape().record("sub", std::move(out), {a, b}, [a, b, kind](const Matrix& g, Tape& t) {
    t.accumulate(a, g);
    if (b.requires_grad()) t.accumulate(b, -reduce(g, kind));
  });
}

Var mul(Var a, Var b) {
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "mul");
  Matrix out = a.value().cwiseProduct(expand(b.value(), kind, a.rows(), a.cols()));
  return a.tape().record("mul", std::move(out), {a, b}, [a, b, kind](const Matrix& g, Tape& t) {
    if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(expand(b.value(), kind, a.rows(), a.cols())));
    if (b.requires_grad()) t.accumulate(b, reduce(g.cwiseProduct(a.value()), kind));
  });
}

Var scale(Var a, double s) {
  return a.tape().record("scale", a.value() * s, {a},
                         [a, s](const Matrix& g, Tape& t) { t.accumulate(a, g * s); });
}

Var add_scalar(Var a, double s) {
  return a.tape().record("add_scalar", (a.value().array() + s).matrix(), {a},
                         [a](const Matrix& g, Tape& t) { t.accumulate(a, g); });
}

Var concat(const std::vector<Var>& parts, int axis) {
  require(!parts.empty(), ErrorCode::kShape, "concat: no inputs");
  require(axis == 0 || axis == 1, ErrorCode::kShape, "concat: axis must be 0 or 1");
  Index rows = 0, cols = 0;
  for (const Var& p : parts) {
    if (axis == 0) {
      require(p.cols() == parts.front().cols(), ErrorCode::kShape, "concat: column mismatch");
      rows += p.rows();
      cols = p.cols();
    } else {
      require(p.rows() == parts.front().rows(), ErrorCode::kShape, "concat: row mismatch");
      cols += p.cols();
      rows = p.rows();
    }
  }
  Matrix out(rows, cols);
  Index offset = 0;
  for (const Var& p : parts) {
    if (axis == 0) {
      out.middleRows(offset, p.rows()) = p.value();
      offset += p.rows();
    } else {
      out.middleCols(offset, p.cols()) = p.value();
      offset += p.cols();
    }
  }
  return parts.front().tape().record("concat", std::move(out), parts,
                                     [parts, axis](const Matrix& g, Tape& t) {
                                       Index off = 0;
                                       for (const Var& p : parts) {
                                         if (axis == 0) {
                                           t.accumulate(p, g.middleRows(off, p.rows()));
                                           off += p.rows();
                                         } else {
                                           t.accumulate(p, g.middleCols(off, p.cols()));
                                           off += p.cols();
                                         }
                                       }
                                     });
}

Var slice_rows(Var a, Index start, Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(), ErrorCode::kShape,
          "slice_rows: range out of bounds");
  return a.tape().record("slice_rows", a.value().middleRows(start, count), {a},
                         [a, start, count](const Matrix& g, Tape& t) {
                           Matrix full = Matrix::Zero(a.rows(), a.cols());
                           full.middleRows(start, count) = g;
                           t.accumulate(a, full);
                         });
}

Var gather_rows(Var a, const IndexList& rows) {
  Matrix out = take_rows(a.value(), rows);
  return a.tape().record("gather_rows", std::move(out), {a}, [a, rows](const Matrix& g, Tape& t) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) full.row(rows[i]) += g.row(static_cast<Index>(i));
    t.accumulate(a, full);
  });
}

MaxResult max_over_groups(Var a, Index group) {
  require(group >= 1 && a.rows() % group == 0, ErrorCode::kShape,
          "max_over_groups: rows must be a multiple of the group size");
  const Index n = a.rows() / group;
  const Matrix& x = a.value();
  Matrix out(n, a.cols());
  IndexMat arg(n, a.cols());
  for (Index i = 0; i < n; ++i) {
    out.row(i) = x.row(i * group);
    arg.row(i).setConstant(i * group);
    for (Index k = 1; k < group; ++k) {
      const Index r = i * group + k;
      for (Index c = 0; c < x.cols(); ++c) {
        if (x(r, c) > out(i, c)) {
          out(i, c) = x(r, c);
          arg(i, c) = r;
        }
      }
    }
  }
  Var v = a.tape().record("max_over_groups", std::move(out), {a}, [a, arg](const Matrix& g, Tape& t) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (Index i = 0; i < arg.rows(); ++i) {
      for (Index c = 0; c < arg.cols(); ++c) full(arg(i, c), c) += g(i, c);
    }
    t.accumulate(a, full);
  });
  return {v, arg};
}

MaxResult max_over_axis(Var a, int axis) {
  require(axis == 0 || axis == 1, ErrorCode::kShape, "max_over_axis: axis must be 0 or 1");
  if (axis == 0) return max_over_groups(a, a.rows());
  MaxResult r = max_over_groups(transpose(a), a.cols());
  // r.value is rows x 1 after transposing back; argmax holds column indices.
  MaxResult out{transpose(r.value), r.argmax.transpose()};
  return out;
}

Var leaky_relu(Var a, double slope) {
  Matrix out = a.value().unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return a.tape().record("leaky_relu", std::move(out), {a}, [a, slope](const Matrix& g, Tape& t) {
    Matrix d = a.value().unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var exp(Var a) {
  Matrix out = a.value().array().exp().matrix();
  Var v = a.tape().record("exp", out, {a}, [a, out](const Matrix& g, Tape& t) {
    t.accumulate(a, g.cwiseProduct(out));
  });
  return v;
}

Var log(Var a) {
  require((a.value().array() > 0.0).all(), ErrorCode::kNumeric, "log: non-positive input");
  return a.tape().record("log", a.value().array().log().matrix(), {a},
                         [a](const Matrix& g, Tape& t) {
                           t.accumulate(a, g.cwiseQuotient(a.value()));
                         });
}

Var softmax_rows(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return a.tape().record("softmax_rows", out, {a}, [a, out](const Matrix& g, Tape& t) {
    const Vec dots = g.cwiseProduct(out).rowwise().sum();
    Matrix gx = out.cwiseProduct(g - dots.replicate(1, g.cols()));
    t.accumulate(a, gx);
  });
}

Var log_softmax_rows(Var a, const Matrix& mask) {
  const Matrix& x = a.value();
  const bool masked = mask.size() != 0;
  require(!masked || (mask.rows() == x.rows() && mask.cols() == x.cols()), ErrorCode::kShape,
          "log_softmax_rows: mask shape mismatch");
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  Matrix prob = Matrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < x.cols(); ++j) {
      if (!masked || mask(i, j) != 0.0) m = std::max(m, x(i, j));
    }
    require(std::isfinite(m), ErrorCode::kNumeric, "log_softmax_rows: fully masked row");
    double s = 0.0;
    for (Index j = 0; j < x.cols(); ++j) {
      if (!masked || mask(i, j) != 0.0) s += std::exp(x(i, j) - m);
    }
    const double lse = m + std::log(s);
    for (Index j = 0; j < x.cols(); ++j) {
      if (!masked || mask(i, j) != 0.0) {
        out(i, j) = x(i, j) - lse;
        prob(i, j) = std::exp(out(i, j));
      }
    }
  }
  return a.tape().record("log_softmax_rows", std::move(out), {a},
                         [a, prob, mask, masked](const Matrix& g, Tape& t) {
                           Matrix gm = masked ? Matrix(g.cwiseProduct(mask.unaryExpr([](double v) {
                             return v != 0.0 ? 1.0 : 0.0;
                           })))
                                              : g;
                           const Vec row_sums = gm.rowwise().sum();
                           Matrix gx = gm - prob.cwiseProduct(row_sums.replicate(1, g.cols()));
                           t.accumulate(a, gx);
                         });
}

Var sum(Var a) {
  return a.tape().record("sum", scalar_matrix(a.value().sum()), {a}, [a](const Matrix& g, Tape& t) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  require(a.value().size() > 0, ErrorCode::kShape, "mean: empty input");
  const double n = static_cast<double>(a.value().size());
  return a.tape().record("mean", scalar_matrix(a.value().sum() / n), {a},
                         [a, n](const Matrix& g, Tape& t) {
                           t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0) / n));
                         });
}

Var squared_norm(Var a) {
  return a.tape().record("squared_norm", scalar_matrix(a.value().squaredNorm()), {a},
                         [a](const Matrix& g, Tape& t) { t.accumulate(a, 2.0 * g(0, 0) * a.value()); });
}

Var row_norm(Var a) {
  Matrix out = a.value().rowwise().norm();
  return a.tape().record("row_norm", out, {a}, [a, out](const Matrix& g, Tape& t) {
    Matrix gx = Matrix::Zero(a.rows(), a.cols());
    for (Index i = 0; i < a.rows(); ++i) {
      if (out(i, 0) > 0.0) gx.row(i) = (g(i, 0) / out(i, 0)) * a.value().row(i);
    }
    t.accumulate(a, gx);
  });
}

Var distance_matrix(Var a, Var b) {
  require(a.cols() == b.cols(), ErrorCode::kShape, "distance_matrix: column mismatch");
  Matrix out = pairwise_distances(a.value(), b.value());
  return a.tape().record("distance_matrix", out, {a, b}, [a, b, out](const Matrix& g, Tape& t) {
    const Matrix& x = a.value();
    const Matrix& y = b.value();
    Matrix ga = Matrix::Zero(x.rows(), x.cols());
    Matrix gb = Matrix::Zero(y.rows(), y.cols());
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < y.rows(); ++j) {
        const double d = out(i, j);
        if (d <= 0.0 || g(i, j) == 0.0) continue;
        const double w = g(i, j) / d;
        ga.row(i) += w * (x.row(i) - y.row(j));
        gb.row(j) -= w * (x.row(i) - y.row(j));
      }
    }
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

Var cholesky_solve(Var s, Var b) {
  require(s.rows() == s.cols(), ErrorCode::kShape, "cholesky_solve: matrix must be square");
  require(s.rows() == b.rows(), ErrorCode::kShape, "cholesky_solve: right-hand side row mismatch");
  const Matrix sym = 0.5 * (s.value() + s.value().transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  require(llt.info() == Eigen::Success, ErrorCode::kNumeric,
          "cholesky_solve: matrix is not symmetric positive definite");
  Matrix x = llt.solve(Eigen::MatrixXd(b.value()));
  return s.tape().record("cholesky_solve", x, {s, b}, [s, b, llt, x](const Matrix& g, Tape& t) {
    const Matrix gb = llt.solve(Eigen::MatrixXd(g));
    if (b.requires_grad()) t.accumulate(b, gb);
    if (s.requires_grad()) {
      const Matrix gs = -gb * x.transpose();
      t.accumulate(s, 0.5 * (gs + gs.transpose()));
    }
  });
}

Var identity(Tape& tape, Index n) { return tape.constant(Matrix::Identity(n, n)); }

}  // namespace nie::ad
